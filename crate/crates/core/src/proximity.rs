//! Two-level distance between failure proxies.
//!
//! At the breakpoint level, breakpoints covered by neither failure are
//! ignored, breakpoints covered by exactly one failure count as maximally
//! distant, and breakpoints covered by both are compared at the variable
//! level. The variable level averages a per-variable distance over the union
//! of variable names seen at that breakpoint; values are compared as strings
//! with a Jaccard distance over their elements, min-max normalized within
//! the comparison.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FailureProxy, StmtId, Value, VarMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricVariant {
    #[default]
    Full,
    /// Compare only variable names at co-covered breakpoints.
    NoVariableLevel,
    /// Merge each failure's variables over all breakpoints into one hunk.
    NoBreakpointLevel,
}

impl MetricVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricVariant::Full => "full",
            MetricVariant::NoVariableLevel => "no_variable_level",
            MetricVariant::NoBreakpointLevel => "no_breakpoint_level",
        }
    }
}

impl std::str::FromStr for MetricVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(MetricVariant::Full),
            "no_variable_level" => Ok(MetricVariant::NoVariableLevel),
            "no_breakpoint_level" => Ok(MetricVariant::NoBreakpointLevel),
            other => Err(Error::Config(format!("unknown metric variant {other:?}"))),
        }
    }
}

/// Element granularity used when a value string is viewed as a set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    #[default]
    Chars,
    Bigrams,
    Tokens,
}

impl Granularity {
    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::Chars => "chars",
            Granularity::Bigrams => "bigrams",
            Granularity::Tokens => "tokens",
        }
    }

    fn elements(self, s: &str) -> BTreeSet<String> {
        match self {
            Granularity::Chars => s.chars().map(String::from).collect(),
            Granularity::Bigrams => {
                let chars: Vec<char> = s.chars().collect();
                if chars.len() < 2 {
                    chars.iter().map(|c| c.to_string()).collect()
                } else {
                    chars.windows(2).map(|w| w.iter().collect()).collect()
                }
            }
            Granularity::Tokens => s.split_whitespace().map(String::from).collect(),
        }
    }
}

impl std::str::FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chars" | "characters" => Ok(Granularity::Chars),
            "bigrams" => Ok(Granularity::Bigrams),
            "tokens" => Ok(Granularity::Tokens),
            other => Err(Error::Config(format!("unknown jaccard granularity {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Metric {
    pub variant: MetricVariant,
    pub granularity: Granularity,
}

/// Raw Jaccard distance `1 - |A ∩ B| / |A ∪ B|` between the element sets of
/// two value strings. Two empty sets are at distance 0.
pub fn jaccard_string(a: &str, b: &str, granularity: Granularity) -> f64 {
    let sa = granularity.elements(a);
    let sb = granularity.elements(b);
    let union = sa.union(&sb).count();
    if union == 0 {
        return 0.0;
    }
    let inter = sa.intersection(&sb).count();
    1.0 - inter as f64 / union as f64
}

/// Min-max normalization. Values pass through unchanged when max == min.
pub fn normalize(raw: &[f64]) -> Vec<f64> {
    let (lo, hi) = min_max(raw);
    raw.iter().map(|&j| normalize_one(j, lo, hi)).collect()
}

fn min_max(raw: &[f64]) -> (f64, f64) {
    raw.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &j| {
        (lo.min(j), hi.max(j))
    })
}

fn normalize_one(j: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        (j - lo) / (hi - lo)
    } else {
        j
    }
}

/// How one variable compares across two failures at one breakpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarComparison {
    /// Both collected, both non-null: raw Jaccard, still to be normalized.
    Jaccard(f64),
    /// Both collected, exactly one null.
    OneNull,
    /// Both collected, both null.
    BothNull,
    /// Collected by only one failure.
    OneSided,
}

pub fn compare_variable(
    a: Option<&Value>,
    b: Option<&Value>,
    granularity: Granularity,
) -> VarComparison {
    match (a, b) {
        (Some(Some(va)), Some(Some(vb))) => VarComparison::Jaccard(jaccard_string(va, vb, granularity)),
        (Some(None), Some(None)) => VarComparison::BothNull,
        (Some(_), Some(_)) => VarComparison::OneNull,
        _ => VarComparison::OneSided,
    }
}

/// Per-variable distance given the normalization range `(min, max)` of the
/// raw Jaccard values in the same comparison.
pub fn variable_pair_distance(
    a: Option<&Value>,
    b: Option<&Value>,
    granularity: Granularity,
    norm: (f64, f64),
) -> f64 {
    match compare_variable(a, b, granularity) {
        VarComparison::Jaccard(j) => normalize_one(j, norm.0, norm.1),
        VarComparison::OneNull | VarComparison::OneSided => 1.0,
        VarComparison::BothNull => 0.0,
    }
}

/// Mean per-variable distance over the union of names; 1 for an empty union.
pub fn variable_level_distance(a: &VarMap, b: &VarMap, granularity: Granularity) -> f64 {
    let names: BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    if names.is_empty() {
        return 1.0;
    }
    let cmps: Vec<VarComparison> = names
        .iter()
        .map(|z| compare_variable(a.get(*z), b.get(*z), granularity))
        .collect();
    let raws: Vec<f64> = cmps
        .iter()
        .filter_map(|c| match c {
            VarComparison::Jaccard(j) => Some(*j),
            _ => None,
        })
        .collect();
    let (lo, hi) = min_max(&raws);
    let total: f64 = cmps
        .iter()
        .map(|c| match *c {
            VarComparison::Jaccard(j) => normalize_one(j, lo, hi),
            VarComparison::OneNull | VarComparison::OneSided => 1.0,
            VarComparison::BothNull => 0.0,
        })
        .sum();
    total / names.len() as f64
}

/// Jaccard distance between the variable-name sets; 1 for an empty union.
pub fn name_level_distance(a: &VarMap, b: &VarMap) -> f64 {
    let union = a.keys().chain(b.keys()).collect::<BTreeSet<_>>().len();
    if union == 0 {
        return 1.0;
    }
    let inter = a.keys().filter(|k| b.contains_key(*k)).count();
    1.0 - inter as f64 / union as f64
}

/// Distance at one breakpoint and its weight in the pair mean.
pub fn breakpoint_distance(bp: StmtId, a: &FailureProxy, b: &FailureProxy, metric: Metric) -> (f64, u32) {
    match (a.at(bp), b.at(bp)) {
        (Some(va), Some(vb)) => {
            let d = match metric.variant {
                MetricVariant::NoVariableLevel => name_level_distance(va, vb),
                _ => variable_level_distance(va, vb, metric.granularity),
            };
            (d, 1)
        }
        (None, None) => (0.0, 0),
        _ => (1.0, 1),
    }
}

/// All of a failure's variables merged into one map. A name seen at several
/// breakpoints keeps its value from the earliest breakpoint in `breakpoints`
/// (the most suspicious one).
pub fn merge_hunk(proxy: &FailureProxy, breakpoints: &[StmtId]) -> VarMap {
    let mut hunk = BTreeMap::new();
    for bp in breakpoints {
        if let Some(vars) = proxy.at(*bp) {
            for (name, value) in vars {
                hunk.entry(name.clone()).or_insert_with(|| value.clone());
            }
        }
    }
    hunk
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDistance {
    pub value: f64,
    /// Neither failure covered any breakpoint; `value` is 0 by convention.
    pub degenerate: bool,
}

pub fn pair_distance(
    a: &FailureProxy,
    b: &FailureProxy,
    breakpoints: &[StmtId],
    metric: Metric,
) -> PairDistance {
    if metric.variant == MetricVariant::NoBreakpointLevel {
        if a.entries.is_empty() && b.entries.is_empty() {
            return PairDistance {
                value: 0.0,
                degenerate: true,
            };
        }
        let value = variable_level_distance(
            &merge_hunk(a, breakpoints),
            &merge_hunk(b, breakpoints),
            metric.granularity,
        );
        return PairDistance {
            value,
            degenerate: false,
        };
    }
    let (sum, count) = breakpoints
        .iter()
        .map(|&bp| breakpoint_distance(bp, a, b, metric))
        .fold((0.0, 0u32), |(s, c), (d, n)| (s + d, c + n));
    if count == 0 {
        PairDistance {
            value: 0.0,
            degenerate: true,
        }
    } else {
        PairDistance {
            value: sum / f64::from(count),
            degenerate: false,
        }
    }
}

pub const DEGENERATE_WARNING: &str =
    "no breakpoint covered by either failure; distance set to 0 (select more breakpoints)";

/// Symmetric p×p matrix of pairwise failure distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub names: Vec<String>,
    data: Vec<f64>,
    pub warnings: Vec<(usize, usize, String)>,
}

impl DistanceMatrix {
    /// Builds a matrix from a full row-major table. Panics if the table is
    /// not square with a zero diagonal and symmetric entries in [0,1].
    pub fn from_rows(names: Vec<String>, rows: &[Vec<f64>]) -> Self {
        let p = rows.len();
        assert_eq!(names.len(), p, "one name per row");
        let mut data = Vec::with_capacity(p * p);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), p, "row {i} has wrong length");
            for (j, &d) in row.iter().enumerate() {
                assert!((0.0..=1.0).contains(&d), "entry ({i},{j}) out of range");
                assert!(i != j || d == 0.0, "nonzero diagonal at {i}");
                assert_eq!(d, rows[j][i], "asymmetric at ({i},{j})");
                data.push(d);
            }
        }
        DistanceMatrix {
            names,
            data,
            warnings: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.len();
        &self.data[i * p..(i + 1) * p]
    }

    /// Every entry multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        DistanceMatrix {
            names: self.names.clone(),
            data: self.data.iter().map(|d| d * c).collect(),
            warnings: self.warnings.clone(),
        }
    }

    /// Text table: one row per failure, 6 decimals, warnings as `#` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.names.join("\t"));
        out.push('\n');
        for i in 0..self.len() {
            let row: Vec<String> = self.row(i).iter().map(|d| format!("{d:.6}")).collect();
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        for (i, j, why) in &self.warnings {
            let _ = writeln!(out, "# {} / {}: {}", self.names[*i], self.names[*j], why);
        }
        out
    }
}

pub fn distance_matrix(
    proxies: &[FailureProxy],
    breakpoints: &[StmtId],
    metric: Metric,
) -> Result<DistanceMatrix> {
    let p = proxies.len();
    if p < 2 {
        return Err(Error::TooFewFailures(p));
    }
    let mut data = vec![0.0; p * p];
    let mut warnings = Vec::new();
    for i in 0..p {
        for j in i + 1..p {
            let d = pair_distance(&proxies[i], &proxies[j], breakpoints, metric);
            if d.degenerate {
                warnings.push((i, j, DEGENERATE_WARNING.to_string()));
            }
            data[i * p + j] = d.value;
            data[j * p + i] = d.value;
        }
    }
    Ok(DistanceMatrix {
        names: proxies.iter().map(|x| x.test_name.clone()).collect(),
        data,
        warnings,
    })
}
