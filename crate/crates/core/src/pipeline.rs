//! End-to-end indexing of one bundle: rank statements, pick breakpoints,
//! build proxies, measure distances, estimate k and cluster.

use crate::cluster::{self, ClusteringResult, Estimate};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::model::{self, FailureProxy, StmtId, TraceBundle};
use crate::proximity::{self, DistanceMatrix};
use crate::sbfl::{self, SuspiciousnessRanking};

#[derive(Debug, Clone)]
pub struct IndexOutcome {
    pub ranking: SuspiciousnessRanking,
    pub breakpoints: Vec<StmtId>,
    pub proxies: Vec<FailureProxy>,
    pub matrix: DistanceMatrix,
    pub estimate: Estimate,
    pub clustering: ClusteringResult,
}

impl IndexOutcome {
    /// Failure names grouped by cluster.
    pub fn cluster_names(&self) -> Vec<Vec<String>> {
        self.clustering
            .clusters()
            .into_iter()
            .map(|c| c.into_iter().map(|i| self.matrix.names[i].clone()).collect())
            .collect()
    }

    pub fn medoid_names(&self) -> Vec<String> {
        self.clustering
            .medoids
            .iter()
            .map(|&i| self.matrix.names[i].clone())
            .collect()
    }

    /// The cluster document: `{k, medoids, clusters}` with test names.
    pub fn clusters_json(&self) -> serde_json::Value {
        serde_json::json!({
            "k": self.clustering.k,
            "medoids": self.medoid_names(),
            "clusters": self.cluster_names(),
        })
    }
}

pub fn rank(bundle: &TraceBundle, config: &RunConfig) -> SuspiciousnessRanking {
    sbfl::rank_bundle(bundle, &config.formula())
}

pub fn index_failures(bundle: &TraceBundle, config: &RunConfig) -> Result<IndexOutcome> {
    config.validate()?;
    let p = bundle.failure_count();
    if p < 2 {
        return Err(Error::TooFewFailures(p));
    }
    let ranking = rank(bundle, config);
    index_with_ranking(bundle, config, ranking)
}

/// Same as [`index_failures`] with a precomputed ranking, so sweeps over
/// `top_percent` score the bundle once.
pub fn index_with_ranking(
    bundle: &TraceBundle,
    config: &RunConfig,
    ranking: SuspiciousnessRanking,
) -> Result<IndexOutcome> {
    let breakpoints = sbfl::select_breakpoints(&ranking, config.top_percent);
    let proxies = model::build_proxies(bundle, &breakpoints)?;
    let matrix = proximity::distance_matrix(&proxies, &breakpoints, config.metric())?;
    let estimate = cluster::estimate_k_and_medoids(&matrix, &config.estimation)?;
    let clustering = cluster::kmedoids(&matrix, &estimate.medoids, cluster::DEFAULT_ITERATION_CAP)?;
    Ok(IndexOutcome {
        ranking,
        breakpoints,
        proxies,
        matrix,
        estimate,
        clustering,
    })
}
