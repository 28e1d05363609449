//! Spectrum-based fault localization: coverage spectra, suspiciousness
//! scoring and Top-x% breakpoint selection.

use std::cmp::Ordering;

use crate::model::{StmtId, TraceBundle};

/// Coverage spectrum of one statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Spectrum {
    /// failed tests covering the statement
    pub ef: u32,
    /// passed tests covering the statement
    pub ep: u32,
    /// failed tests not covering the statement
    pub nf: u32,
    /// passed tests not covering the statement
    pub np: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCounts {
    pub total_failed: u32,
    pub total_passed: u32,
    /// one entry per statement, in bundle statement order
    pub per_statement: Vec<(StmtId, Spectrum)>,
}

impl SpectrumCounts {
    pub fn get(&self, id: StmtId) -> Option<Spectrum> {
        self.per_statement
            .iter()
            .find(|(s, _)| *s == id)
            .map(|(_, c)| *c)
    }
}

pub fn spectrum_counts(bundle: &TraceBundle) -> SpectrumCounts {
    let total_failed = bundle.failure_count() as u32;
    let total_passed = bundle.tests.len() as u32 - total_failed;
    let per_statement = bundle
        .statements
        .iter()
        .map(|st| {
            let (mut ef, mut ep) = (0, 0);
            for t in bundle.tests.iter().filter(|t| t.covers(st.id)) {
                if t.is_failed() {
                    ef += 1;
                } else {
                    ep += 1;
                }
            }
            let counts = Spectrum {
                ef,
                ep,
                nf: total_failed - ef,
                np: total_passed - ep,
            };
            (st.id, counts)
        })
        .collect();
    SpectrumCounts {
        total_failed,
        total_passed,
        per_statement,
    }
}

/// A suspiciousness formula over one statement's spectrum.
pub trait Suspiciousness {
    fn score(&self, counts: Spectrum) -> f64;
}

/// DStar: `ef^star / (ep + nf)`.
///
/// A statement no failure covers scores 0. A statement covered by every
/// failure and no passing test has a zero denominator and scores +inf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DStar {
    pub star: f64,
}

impl Default for DStar {
    fn default() -> Self {
        DStar { star: 2.0 }
    }
}

impl Suspiciousness for DStar {
    fn score(&self, c: Spectrum) -> f64 {
        dstar(c, self.star)
    }
}

pub fn dstar(c: Spectrum, star: f64) -> f64 {
    if c.ef == 0 {
        return 0.0;
    }
    let denom = f64::from(c.ep + c.nf);
    if denom == 0.0 {
        return f64::INFINITY;
    }
    f64::from(c.ef).powf(star) / denom
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedStatement {
    pub id: StmtId,
    pub line: u32,
    pub score: f64,
}

/// Statements ordered by descending score; ties by ascending line, then id.
#[derive(Debug, Clone, PartialEq)]
pub struct SuspiciousnessRanking(pub Vec<RankedStatement>);

impl SuspiciousnessRanking {
    pub fn ids(&self) -> Vec<StmtId> {
        self.0.iter().map(|r| r.id).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn rank_statements(scored: impl IntoIterator<Item = RankedStatement>) -> SuspiciousnessRanking {
    let mut v: Vec<_> = scored.into_iter().collect();
    v.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(Ordering::Equal)
            .then(a.line.cmp(&b.line))
            .then(a.id.cmp(&b.id))
    });
    SuspiciousnessRanking(v)
}

/// Scores and ranks every statement of the bundle.
pub fn rank_bundle(bundle: &TraceBundle, formula: &dyn Suspiciousness) -> SuspiciousnessRanking {
    let counts = spectrum_counts(bundle);
    let scored = bundle
        .statements
        .iter()
        .zip(&counts.per_statement)
        .map(|(st, (_, c))| RankedStatement {
            id: st.id,
            line: st.line,
            score: formula.score(*c),
        });
    rank_statements(scored)
}

/// Number of breakpoints for `n` statements at `percent`: `ceil(n * percent / 100)`,
/// at least 1 and at most `n`.
pub fn breakpoint_count(n: usize, percent: f64) -> usize {
    // snap near-integers so float error cannot push ceil() up by one
    let raw = n as f64 * percent / 100.0;
    let rounded = raw.round();
    let count = if (raw - rounded).abs() < 1e-9 {
        rounded
    } else {
        raw.ceil()
    };
    (count as usize).clamp(1, n.max(1))
}

/// The Top-`percent`% prefix of the ranking.
pub fn select_breakpoints(ranking: &SuspiciousnessRanking, percent: f64) -> Vec<StmtId> {
    let q = breakpoint_count(ranking.len(), percent);
    ranking.0.iter().take(q).map(|r| r.id).collect()
}
