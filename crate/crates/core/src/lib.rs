//! Release trajectories reconstructed from issue-tracker exports and commit
//! logs, and the categorical sequence analysis run over them.
//!
//! The pipeline, module by module:
//!
//! 1. [`ingest`] parses issues, commits and release windows and selects the
//!    resolved issues of each release;
//! 2. [`trajectory`] merges issue lifecycles into atomic and then global
//!    states, producing an issues-based [`Trajectory`]; [`commits`] builds
//!    the commits-based counterpart;
//! 3. [`seqstats`] summarizes a family of trajectories (transition rates,
//!    modal trajectory, DSS frequencies);
//! 4. [`distance`] turns transition rates into substitution costs and
//!    computes Optimal Matching distances;
//! 5. [`clustering`] groups releases and reports recurrent patterns.

pub mod clustering;
pub mod commits;
pub mod distance;
pub mod error;
pub mod ingest;
pub mod model;
pub mod seqstats;
pub mod synth;
pub mod trajectory;

pub use clustering::{hierarchical_cluster, ClusterAssignment, Linkage, PatternReport};
pub use distance::{om_distance, scm_from_rates, DistanceMatrix, SubstitutionCostMatrix};
pub use error::{ClusterError, CommitTrajectoryError, DistanceError, IngestError, ModelError, StatsError};
pub use ingest::{CommitRecord, ReleaseManifest, SelectionConfig};
pub use model::{
    DssSequence, Flavor, IssueRecord, IssueType, Letter, ReleaseWindow, Segment, StateSymbol, Timestamp,
    Trajectory,
};
pub use seqstats::{ModalTrajectory, TransitionMatrix};

/// Default number of positions trajectories are normalized to.
pub const DEFAULT_POSITIONS: usize = 100;
