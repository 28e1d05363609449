//! Fixture paths and brute-force oracles shared by the integration suites.
//! The oracles are written straight from the formulas and share no code
//! with the library's implementation.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::PathBuf;

use failidx::model::{FailureProxy, StmtId, VarMap};
use failidx::proximity::DistanceMatrix;
use failidx::TraceBundle;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn corpus_dir() -> PathBuf {
    fixtures_dir().join("corpus")
}

pub fn listing1_path() -> PathBuf {
    fixtures_dir().join("listing1.trace")
}

pub fn listing1() -> TraceBundle {
    TraceBundle::from_path(&listing1_path()).expect("fixture parses")
}

pub fn corpus_bundle(name: &str) -> TraceBundle {
    TraceBundle::from_path(&corpus_dir().join(format!("{name}.trace"))).expect("corpus bundle parses")
}

pub fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

// ---- distance oracle -------------------------------------------------------

fn char_jaccard(a: &str, b: &str) -> f64 {
    let sa: HashSet<char> = a.chars().collect();
    let sb: HashSet<char> = b.chars().collect();
    let union = sa.union(&sb).count();
    if union == 0 {
        0.0
    } else {
        1.0 - sa.intersection(&sb).count() as f64 / union as f64
    }
}

fn oracle_var_distance(va: &VarMap, vb: &VarMap) -> f64 {
    let union: BTreeSet<&String> = va.keys().chain(vb.keys()).collect();
    if union.is_empty() {
        return 1.0;
    }
    let mut raw = BTreeMap::new();
    for z in &union {
        if let (Some(Some(x)), Some(Some(y))) = (va.get(*z), vb.get(*z)) {
            raw.insert(*z, char_jaccard(x, y));
        }
    }
    let lo = raw.values().cloned().fold(f64::INFINITY, f64::min);
    let hi = raw.values().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for z in &union {
        let c = u8::from(va.contains_key(*z)) + u8::from(vb.contains_key(*z));
        let dis = if c == 1 {
            1.0
        } else {
            let n = u8::from(va[*z].is_none()) + u8::from(vb[*z].is_none());
            match n {
                0 => {
                    let j = raw[z];
                    if hi - lo > 0.0 {
                        (j - lo) / (hi - lo)
                    } else {
                        j
                    }
                }
                1 => 1.0,
                _ => 0.0,
            }
        };
        sum += dis;
    }
    sum / union.len() as f64
}

/// Σ Distance_bpj / Σ BPCount_j, full metric with character sets.
pub fn oracle_pair_distance(a: &FailureProxy, b: &FailureProxy, bps: &[StmtId]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for bp in bps {
        let e = u8::from(a.entries.contains_key(bp)) + u8::from(b.entries.contains_key(bp));
        match e {
            2 => {
                num += oracle_var_distance(&a.entries[bp], &b.entries[bp]);
                den += 1.0;
            }
            1 => {
                num += 1.0;
                den += 1.0;
            }
            _ => {}
        }
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Random proxy over breakpoints `1..=n_bps` and variables drawn from
/// `a..d`. With `nonempty`, every covered breakpoint has at least one
/// variable.
pub fn random_proxy<R: Rng>(rng: &mut R, name: &str, n_bps: u32, nonempty: bool) -> FailureProxy {
    let mut entries = BTreeMap::new();
    for bp in 1..=n_bps {
        if rng.gen_bool(0.75) {
            entries.insert(StmtId(bp), random_vars(rng, nonempty));
        }
    }
    FailureProxy {
        test_name: name.into(),
        entries,
    }
}

pub fn random_vars<R: Rng>(rng: &mut R, nonempty: bool) -> VarMap {
    const NAMES: [&str; 4] = ["a", "b", "c", "d"];
    const ALPHABET: [char; 6] = ['a', 'b', '1', ' ', '?', 'x'];
    let mut m = VarMap::new();
    for name in NAMES {
        if rng.gen_bool(0.6) {
            let value = if rng.gen_bool(0.2) {
                None
            } else {
                let len = rng.gen_range(0..5);
                Some((0..len).map(|_| *ALPHABET.choose(rng).unwrap()).collect())
            };
            m.insert(name.to_string(), value);
        }
    }
    if nonempty && m.is_empty() {
        m.insert("a".into(), Some("x".into()));
    }
    m
}

// ---- k-medoids oracle ------------------------------------------------------

#[allow(clippy::needless_range_loop)]
pub fn random_matrix<R: Rng>(rng: &mut R, p: usize) -> DistanceMatrix {
    let mut rows = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in i + 1..p {
            // coarse grid so that ties actually occur
            let d = f64::from(rng.gen_range(1..=20u32)) / 20.0;
            rows[i][j] = d;
        }
    }
    for i in 0..p {
        for j in 0..i {
            rows[i][j] = rows[j][i];
        }
    }
    DistanceMatrix::from_rows((0..p).map(|i| format!("f{i}")).collect(), &rows)
}

/// Medoids own their cluster; everyone else joins the nearest medoid, ties
/// to the medoid with the smallest failure index.
pub fn oracle_nearest(d: &DistanceMatrix, medoids: &[usize]) -> Vec<usize> {
    (0..d.len())
        .map(|i| {
            if let Some(c) = medoids.iter().position(|&m| m == i) {
                return c;
            }
            let mut order: Vec<usize> = (0..medoids.len()).collect();
            order.sort_by(|&x, &y| {
                d.get(i, medoids[x])
                    .partial_cmp(&d.get(i, medoids[y]))
                    .unwrap()
                    .then(medoids[x].cmp(&medoids[y]))
            });
            order[0]
        })
        .collect()
}

pub fn oracle_cost(d: &DistanceMatrix, medoids: &[usize]) -> f64 {
    let a = oracle_nearest(d, medoids);
    (0..d.len()).map(|i| d.get(i, medoids[a[i]])).sum()
}

/// A medoid set is a fixed point when, under nearest assignment, every
/// medoid minimizes the summed distance within its own cluster.
pub fn is_fixed_point(d: &DistanceMatrix, medoids: &[usize]) -> bool {
    let a = oracle_nearest(d, medoids);
    medoids.iter().enumerate().all(|(c, &m)| {
        let members: Vec<usize> = (0..d.len()).filter(|&i| a[i] == c).collect();
        let cost = |x: usize| members.iter().map(|&j| d.get(x, j)).sum::<f64>();
        let own = cost(m);
        members.iter().all(|&x| cost(x) >= own - 1e-12)
    })
}

pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Pair counts straight from the definition: all ordered pairs i<j.
pub fn oracle_pair_total(p: usize) -> u64 {
    (p * p.saturating_sub(1) / 2) as u64
}
