use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("invalid bundle: {0}")]
    Invalid(String),
    #[error("unknown statement {0} referenced by {1:?}")]
    UnknownStatement(u32, String),
    #[error("test {1:?} has a snapshot at statement {0} it does not cover")]
    SnapshotOutsideCoverage(u32, String),
    #[error("test {1:?} covers breakpoint {0} but has no snapshot there (incomplete trace)")]
    MissingSnapshot(u32, String),
    #[error("test {0:?} did not fail")]
    NotAFailure(String),
    #[error("nothing to index: {0} failed test(s), need at least 2")]
    TooFewFailures(usize),
    #[error("no failures to cluster")]
    Empty,
    #[error("duplicate initial medoid {0}")]
    DuplicateMedoid(usize),
    #[error("medoid index {0} out of range")]
    MedoidOutOfRange(usize),
    #[error("failure {0:?} has no oracle label")]
    Unlabeled(String),
    #[error("estimated {k} clusters but the oracle has {r} faults")]
    CountMismatch { k: usize, r: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
