//! Fault-count estimation and K-medoids clustering over a distance matrix.
//!
//! The estimator is a subtractive (mountain) scheme: every failure gets a
//! potential from the density of failures around it, the highest-potential
//! failure becomes a medoid, and every potential is then reduced in
//! proportion to its closeness to that medoid. Selection stops once the best
//! remaining potential drops below a fraction of the first medoid's.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::proximity::DistanceMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimationParams {
    /// Neighborhood radius of the initial potential.
    pub r_a: f64,
    /// Radius of the potential reduction around a chosen medoid.
    pub r_b: f64,
    /// Stop once the best remaining potential is below `epsilon` times the
    /// first medoid's potential.
    pub epsilon: f64,
    /// Upper bound on k; `None` means the number of failures.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_k: Option<usize>,
}

impl Default for EstimationParams {
    fn default() -> Self {
        EstimationParams {
            r_a: 1.0,
            r_b: 1.5,
            epsilon: 0.15,
            max_k: None,
        }
    }
}

impl EstimationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_a > 0.0 && self.r_a.is_finite()) {
            return Err(Error::Config(format!("r_a must be positive, got {}", self.r_a)));
        }
        if !(self.r_b >= self.r_a && self.r_b.is_finite()) {
            return Err(Error::Config(format!(
                "r_b must be at least r_a ({}), got {}",
                self.r_a, self.r_b
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!(
                "epsilon must lie in (0,1), got {}",
                self.epsilon
            )));
        }
        if self.max_k == Some(0) {
            return Err(Error::Config("max_k must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub k: usize,
    /// Medoids in selection order.
    pub medoids: Vec<usize>,
    /// Potential of each medoid at the time it was selected.
    pub potentials: Vec<f64>,
}

/// Index of the largest value outside `skip`; ties go to the lowest index.
fn argmax(values: &[f64], skip: &[usize]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if skip.contains(&i) {
            continue;
        }
        if best.is_none_or(|b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}

pub fn estimate_k_and_medoids(d: &DistanceMatrix, params: &EstimationParams) -> Result<Estimate> {
    let p = d.len();
    if p == 0 {
        return Err(Error::Empty);
    }
    params.validate()?;
    let cap = params.max_k.unwrap_or(p).min(p);
    let alpha = 4.0 / (params.r_a * params.r_a);
    let beta = 4.0 / (params.r_b * params.r_b);

    let mut potential: Vec<f64> = (0..p)
        .map(|i| d.row(i).iter().map(|&x| (-alpha * x * x).exp()).sum())
        .collect();

    let mut medoids = Vec::new();
    let mut picked = Vec::new();
    let mut first = None;
    while medoids.len() < cap {
        let Some(m) = argmax(&potential, &medoids) else { break };
        let pm = potential[m];
        match first {
            None => first = Some(pm),
            Some(p1) if pm < params.epsilon * p1 => break,
            Some(_) => {}
        }
        medoids.push(m);
        picked.push(pm);
        for (i, pot) in potential.iter_mut().enumerate() {
            let x = d.get(i, m);
            *pot -= pm * (-beta * x * x).exp();
        }
    }
    Ok(Estimate {
        k: medoids.len(),
        medoids,
        potentials: picked,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    pub k: usize,
    /// Medoid failure index of each cluster.
    pub medoids: Vec<usize>,
    /// Cluster index of each failure.
    pub assignment: Vec<usize>,
    pub cost: f64,
    pub iterations: usize,
}

impl ClusteringResult {
    /// Failure indices grouped by cluster, each group ascending.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}

pub const DEFAULT_ITERATION_CAP: usize = 100;

/// Nearest-medoid assignment. A medoid always belongs to its own cluster;
/// other points go to the closest medoid, ties to the medoid with the lowest
/// failure index.
pub fn assign(d: &DistanceMatrix, medoids: &[usize]) -> Vec<usize> {
    (0..d.len())
        .map(|i| {
            if let Some(c) = medoids.iter().position(|&m| m == i) {
                return c;
            }
            let mut best = 0;
            for c in 1..medoids.len() {
                let (dc, db) = (d.get(i, medoids[c]), d.get(i, medoids[best]));
                if dc < db || (dc == db && medoids[c] < medoids[best]) {
                    best = c;
                }
            }
            best
        })
        .collect()
}

pub fn total_cost(d: &DistanceMatrix, medoids: &[usize], assignment: &[usize]) -> f64 {
    assignment
        .iter()
        .enumerate()
        .map(|(i, &c)| d.get(i, medoids[c]))
        .sum()
}

/// Member minimizing the summed distance to the rest of its cluster. The
/// current medoid is kept when it is among the minimizers.
fn best_medoid(d: &DistanceMatrix, members: &[usize], current: usize) -> usize {
    let cost = |m: usize| members.iter().map(|&j| d.get(m, j)).sum::<f64>();
    let mut best = current;
    let mut best_cost = cost(current);
    for &m in members {
        let c = cost(m);
        if c < best_cost {
            best = m;
            best_cost = c;
        }
    }
    best
}

pub fn kmedoids(d: &DistanceMatrix, initial: &[usize], max_iter: usize) -> Result<ClusteringResult> {
    let p = d.len();
    if initial.is_empty() || p == 0 {
        return Err(Error::Empty);
    }
    for (n, &m) in initial.iter().enumerate() {
        if m >= p {
            return Err(Error::MedoidOutOfRange(m));
        }
        if initial[..n].contains(&m) {
            return Err(Error::DuplicateMedoid(m));
        }
    }
    let mut medoids = initial.to_vec();
    let mut assignment = assign(d, &medoids);
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut members = vec![Vec::new(); medoids.len()];
        for (i, &c) in assignment.iter().enumerate() {
            members[c].push(i);
        }
        let next: Vec<usize> = medoids
            .iter()
            .zip(&members)
            .map(|(&m, mem)| best_medoid(d, mem, m))
            .collect();
        if next == medoids {
            break;
        }
        medoids = next;
        assignment = assign(d, &medoids);
    }
    let cost = total_cost(d, &medoids, &assignment);
    Ok(ClusteringResult {
        k: medoids.len(),
        medoids,
        assignment,
        cost,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f64]]) -> DistanceMatrix {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        let names = (0..rows.len()).map(|i| format!("f{}", i + 1)).collect();
        DistanceMatrix::from_rows(names, &rows)
    }

    fn blobs(n: usize, intra: f64, inter: f64) -> DistanceMatrix {
        let rows: Vec<Vec<f64>> = (0..2 * n)
            .map(|i| {
                (0..2 * n)
                    .map(|j| match (i == j, i / n == j / n) {
                        (true, _) => 0.0,
                        (false, true) => intra,
                        (false, false) => inter,
                    })
                    .collect()
            })
            .collect();
        DistanceMatrix::from_rows((0..2 * n).map(|i| i.to_string()).collect(), &rows)
    }

    #[test]
    fn single_failure_is_one_cluster() {
        let d = matrix(&[&[0.0]]);
        let e = estimate_k_and_medoids(&d, &EstimationParams::default()).unwrap();
        assert_eq!((e.k, e.medoids.clone()), (1, vec![0]));
    }

    #[test]
    fn zero_matrix_is_one_cluster() {
        let d = matrix(&[&[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]);
        let e = estimate_k_and_medoids(&d, &EstimationParams::default()).unwrap();
        assert_eq!(e.k, 1);
        assert_eq!(e.medoids, vec![0]);
    }

    #[test]
    fn two_blobs_give_two_clusters_across_epsilon() {
        let d = blobs(4, 0.05, 0.95);
        for step in 0..=9 {
            let epsilon = 0.05 + 0.05 * step as f64;
            let params = EstimationParams {
                epsilon,
                ..Default::default()
            };
            let e = estimate_k_and_medoids(&d, &params).unwrap();
            assert_eq!(e.k, 2, "epsilon {epsilon}");
            assert_ne!(e.medoids[0] / 4, e.medoids[1] / 4);
        }
    }

    #[test]
    fn max_k_caps_the_estimate() {
        let d = blobs(2, 0.05, 0.95);
        let params = EstimationParams {
            max_k: Some(1),
            ..Default::default()
        };
        assert_eq!(estimate_k_and_medoids(&d, &params).unwrap().k, 1);
    }

    #[test]
    fn empty_matrix_is_an_error() {
        let d = DistanceMatrix::from_rows(vec![], &[]);
        assert!(matches!(
            estimate_k_and_medoids(&d, &EstimationParams::default()),
            Err(Error::Empty)
        ));
    }

    #[test]
    fn bad_params_are_rejected() {
        let bad = [
            EstimationParams { r_a: 0.0, ..Default::default() },
            EstimationParams { r_b: 0.1, ..Default::default() },
            EstimationParams { epsilon: 1.0, ..Default::default() },
            EstimationParams { max_k: Some(0), ..Default::default() },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }

    #[test]
    fn k_equals_p_gives_singletons() {
        let d = blobs(2, 0.1, 0.9);
        let r = kmedoids(&d, &[0, 1, 2, 3], DEFAULT_ITERATION_CAP).unwrap();
        assert_eq!(r.assignment, vec![0, 1, 2, 3]);
        assert_eq!(r.cost, 0.0);
    }

    #[test]
    fn kmedoids_moves_bad_seeds() {
        let d = blobs(3, 0.1, 0.9);
        // both seeds in the first blob
        let r = kmedoids(&d, &[0, 1], DEFAULT_ITERATION_CAP).unwrap();
        assert_eq!(r.medoids, vec![3, 1]);
        assert_eq!(r.clusters(), vec![vec![3, 4, 5], vec![0, 1, 2]]);
        assert!((r.cost - 0.4).abs() < 1e-12);
        assert!(r.iterations >= 2);
    }

    #[test]
    fn duplicate_seed_is_an_error() {
        let d = blobs(2, 0.1, 0.9);
        assert!(matches!(kmedoids(&d, &[1, 1], 10), Err(Error::DuplicateMedoid(1))));
        assert!(matches!(kmedoids(&d, &[9], 10), Err(Error::MedoidOutOfRange(9))));
    }

    #[test]
    fn ties_go_to_lowest_medoid_index() {
        // point 1 is equidistant from medoids 2 and 0
        let d = matrix(&[&[0.0, 0.5, 1.0], &[0.5, 0.0, 0.5], &[1.0, 0.5, 0.0]]);
        assert_eq!(assign(&d, &[2, 0]), vec![1, 1, 0]);
    }
}
