use thiserror::Error;

use crate::model::StateSymbol;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("invalid state symbol {0:?}")]
pub struct ParseStateError(pub String);

/// Violations of core-model invariants when assembling values by hand or
/// from serialized documents.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("release {release_id}: ending must be after inception")]
    EmptyWindow { release_id: String },
    #[error("trajectory {release_id}: {cause}")]
    InvalidTrajectory { release_id: String, cause: String },
    #[error("invalid timestamp {0:?}")]
    Timestamp(String),
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line_no}: {cause}")]
    MalformedLine { line_no: usize, cause: String },
    #[error("line {line_no}: missing field `{field}`")]
    MissingField { field: &'static str, line_no: usize },
    #[error("no `[maven-release-plugin] prepare release` commits found; supply a release manifest")]
    NoReleaseTagsFound,
    #[error("release manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CommitTrajectoryError {
    #[error("release {release_id} has no commits tagged with its resolved issues")]
    NoTaggedCommits { release_id: String },
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("corpus contains no sequences")]
    EmptyCorpus,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DistanceError {
    #[error("state {0} is not in the substitution cost matrix alphabet")]
    UnknownSymbol(StateSymbol),
    #[error("invalid substitution cost matrix: {0}")]
    InvalidMatrix(String),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ClusterError {
    #[error("cannot cut {n} observations into {k} clusters")]
    InvalidK { k: usize, n: usize },
}
