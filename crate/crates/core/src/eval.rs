//! External clustering metrics against oracle fault labels.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ground-truth fault of every failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleLabeling {
    /// failure name -> fault id
    labels: BTreeMap<String, String>,
    /// fault ids in sorted order; a fault's index is its position here
    faults: Vec<String>,
}

#[derive(Debug, Deserialize, Serialize)]
struct OracleDoc {
    faults: BTreeMap<String, Vec<String>>,
}

impl OracleLabeling {
    pub fn from_groups(groups: BTreeMap<String, Vec<String>>) -> Result<Self> {
        let mut labels = BTreeMap::new();
        for (fault, tests) in &groups {
            for t in tests {
                if let Some(prev) = labels.insert(t.clone(), fault.clone()) {
                    return Err(Error::Invalid(format!(
                        "failure {t:?} labeled with both {prev:?} and {fault:?}"
                    )));
                }
            }
        }
        let faults: Vec<String> = groups
            .into_iter()
            .filter(|(_, t)| !t.is_empty())
            .map(|(f, _)| f)
            .collect();
        if faults.is_empty() {
            return Err(Error::Invalid("oracle lists no faults".into()));
        }
        Ok(OracleLabeling { labels, faults })
    }

    pub fn parse(raw: &[u8]) -> Result<Self> {
        let doc: OracleDoc =
            serde_json::from_slice(raw).map_err(|e| Error::Malformed(e.to_string()))?;
        Self::from_groups(doc.faults)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let raw = std::fs::read(path).map_err(|e| Error::Io(path.display().to_string(), e))?;
        Self::parse(&raw)
    }

    /// Number of distinct faults.
    pub fn r(&self) -> usize {
        self.faults.len()
    }

    pub fn fault_of(&self, failure: &str) -> Option<&str> {
        self.labels.get(failure).map(String::as_str)
    }

    /// Fault index of every named failure, in order.
    pub fn fault_indices(&self, names: &[String]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| {
                let f = self.fault_of(n).ok_or_else(|| Error::Unlabeled(n.clone()))?;
                Ok(self.faults.iter().position(|x| x == f).expect("label refers to a listed fault"))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PairCounts {
    /// same generated cluster, same oracle fault
    pub ss: u64,
    /// same generated cluster, different oracle faults
    pub sd: u64,
    /// different generated clusters, same oracle fault
    pub ds: u64,
    /// different generated clusters, different oracle faults
    pub dd: u64,
}

impl PairCounts {
    pub fn total(&self) -> u64 {
        self.ss + self.sd + self.ds + self.dd
    }
}

/// Classifies every unordered pair of failures. `generated[i]` and
/// `oracle[i]` are the cluster and fault of failure `i`.
pub fn pair_counts(generated: &[usize], oracle: &[usize]) -> PairCounts {
    assert_eq!(generated.len(), oracle.len());
    let mut c = PairCounts::default();
    for i in 0..generated.len() {
        for j in i + 1..generated.len() {
            match (generated[i] == generated[j], oracle[i] == oracle[j]) {
                (true, true) => c.ss += 1,
                (true, false) => c.sd += 1,
                (false, true) => c.ds += 1,
                (false, false) => c.dd += 1,
            }
        }
    }
    c
}

/// Fowlkes-Mallows index. Returns `(value, vacuous)`; when a denominator is
/// zero the clustering is treated as vacuously perfect.
pub fn fmi(c: PairCounts) -> (f64, bool) {
    let (a, b) = (c.ss + c.sd, c.ss + c.ds);
    if a == 0 && b == 0 {
        return (1.0, true);
    }
    if a == 0 || b == 0 {
        return (0.0, false);
    }
    let ss = c.ss as f64;
    ((ss / a as f64 * ss / b as f64).sqrt(), false)
}

/// Jaccard coefficient over pair counts, with the same vacuous case as [`fmi`].
pub fn jc(c: PairCounts) -> (f64, bool) {
    let denom = c.ss + c.sd + c.ds;
    if denom == 0 {
        return (1.0, true);
    }
    (c.ss as f64 / denom as f64, false)
}

fn overlap_table(generated: &[usize], oracle: &[usize], k: usize) -> Vec<Vec<u64>> {
    let mut t = vec![vec![0u64; k]; k];
    for (&g, &o) in generated.iter().zip(oracle) {
        t[g][o] += 1;
    }
    t
}

/// One-to-one map from generated cluster to oracle fault maximizing the
/// total overlap. Among optimal maps the lexicographically smallest one
/// (cluster 0 first) is returned.
pub fn match_clusters(generated: &[usize], k: usize, oracle: &[usize], r: usize) -> Result<Vec<usize>> {
    if k != r {
        return Err(Error::CountMismatch { k, r });
    }
    if k > 20 {
        return Err(Error::Config(format!("cluster matching supports at most 20 clusters, got {k}")));
    }
    let overlap = overlap_table(generated, oracle, k);
    // best[c][mask]: max overlap from assigning clusters c.. to the faults not in mask
    let full = 1usize << k;
    let mut best = vec![vec![0u64; full]; k + 1];
    for c in (0..k).rev() {
        for mask in 0..full {
            if mask.count_ones() as usize != c {
                continue;
            }
            best[c][mask] = (0..k)
                .filter(|f| mask & (1 << f) == 0)
                .map(|f| overlap[c][f] + best[c + 1][mask | (1 << f)])
                .max()
                .unwrap_or(0);
        }
    }
    let mut mapping = Vec::with_capacity(k);
    let mut mask = 0usize;
    for c in 0..k {
        let target = best[c][mask];
        let f = (0..k)
            .find(|&f| mask & (1 << f) == 0 && overlap[c][f] + best[c + 1][mask | (1 << f)] == target)
            .expect("an optimal choice exists");
        mapping.push(f);
        mask |= 1 << f;
    }
    Ok(mapping)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassificationCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

/// Micro-averaged counts under the optimal cluster-to-fault matching.
pub fn classification_counts(
    generated: &[usize],
    k: usize,
    oracle: &[usize],
    r: usize,
) -> Result<ClassificationCounts> {
    let mapping = match_clusters(generated, k, oracle, r)?;
    let p = generated.len() as u64;
    let tp = generated
        .iter()
        .zip(oracle)
        .filter(|(&g, &o)| mapping[g] == o)
        .count() as u64;
    Ok(ClassificationCounts {
        tp,
        fp: p - tp,
        fn_: p - tp,
    })
}

pub fn pr(c: ClassificationCounts) -> f64 {
    if c.tp + c.fp == 0 {
        return 1.0;
    }
    c.tp as f64 / (c.tp + c.fp) as f64
}

pub fn rr(c: ClassificationCounts) -> f64 {
    if c.tp + c.fn_ == 0 {
        return 1.0;
    }
    c.tp as f64 / (c.tp + c.fn_) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub fmi: f64,
    pub jc: f64,
    pub pr: f64,
    pub rr: f64,
}

impl Metrics {
    pub fn as_array(&self) -> [f64; 4] {
        [self.fmi, self.jc, self.pr, self.rr]
    }
}

/// Outcome of scoring one clustering against its oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub p: usize,
    pub k: usize,
    pub r: usize,
    /// `None` unless k == r.
    pub metrics: Option<Metrics>,
    pub warnings: Vec<String>,
}

impl Evaluation {
    pub fn equal(&self) -> bool {
        self.k == self.r
    }
}

/// Scores a clustering. `assignment[i]` is the cluster of the failure named
/// `names[i]`.
pub fn evaluate(names: &[String], assignment: &[usize], k: usize, oracle: &OracleLabeling) -> Result<Evaluation> {
    let truth = oracle.fault_indices(names)?;
    // faults with no failure in this run do not count towards r
    let present: BTreeSet<usize> = truth.iter().copied().collect();
    let dense: BTreeMap<usize, usize> = present.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let truth: Vec<usize> = truth.iter().map(|f| dense[f]).collect();
    let r = present.len();
    let mut eval = Evaluation {
        p: names.len(),
        k,
        r,
        metrics: None,
        warnings: Vec::new(),
    };
    if k != r {
        return Ok(eval);
    }
    let counts = pair_counts(assignment, &truth);
    let (fmi_v, vac_f) = fmi(counts);
    let (jc_v, vac_j) = jc(counts);
    if vac_f || vac_j {
        eval.warnings
            .push("no same-cluster or same-fault pairs; FMI/JC set to 1".into());
    }
    let cls = classification_counts(assignment, k, &truth, r)?;
    eval.metrics = Some(Metrics {
        fmi: fmi_v,
        jc: jc_v,
        pr: pr(cls),
        rr: rr(cls),
    });
    Ok(eval)
}

/// Corpus-level totals over the versions whose estimated k equals r.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExperimentSummary {
    pub v_equal: usize,
    pub s_fmi: f64,
    pub s_jc: f64,
    pub s_pr: f64,
    pub s_rr: f64,
}

pub fn experiment_summary<'a>(records: impl IntoIterator<Item = &'a Evaluation>) -> ExperimentSummary {
    let mut s = ExperimentSummary::default();
    for e in records {
        if !e.equal() {
            continue;
        }
        let Some(m) = e.metrics else { continue };
        s.v_equal += 1;
        s.s_fmi += m.fmi;
        s.s_jc += m.jc;
        s.s_pr += m.pr;
        s.s_rr += m.rr;
    }
    s
}
