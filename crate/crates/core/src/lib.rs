//! Failure indexing from run-time variable values.
//!
//! Failed tests are grouped by root cause in four steps: statements are
//! ranked by DStar suspiciousness and the top few become breakpoints
//! ([`sbfl`]); each failure is represented by the variables it held at those
//! breakpoints ([`model`]); failures are compared with a two-level
//! breakpoint/variable distance ([`proximity`]); and the distance matrix is
//! clustered after estimating the number of faults ([`cluster`]). [`eval`]
//! scores the result against oracle fault labels.

pub mod cli;
pub mod cluster;
pub mod config;
pub mod error;
pub mod eval;
pub mod model;
pub mod pipeline;
pub mod proximity;
pub mod sbfl;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use model::{FailureProxy, StmtId, TraceBundle};
pub use pipeline::{index_failures, IndexOutcome};
pub use proximity::{DistanceMatrix, Granularity, Metric, MetricVariant};
