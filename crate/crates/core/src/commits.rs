//! Commits-based (activity-based) trajectories: each commit tagged with one
//! of the release's resolved issues is annotated by that issue's type, and
//! runs of equal annotations become segments measured in commits.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::CommitTrajectoryError;
use crate::ingest::CommitRecord;
use crate::model::{Flavor, IssueRecord, ReleaseWindow, Segment, StateSymbol, Trajectory};

/// Tagging statistics for one release.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CommitStats {
    /// Commits whose timestamp falls inside the release window.
    pub commits_in_window: usize,
    /// Commits kept in the trajectory.
    pub commits_kept: usize,
    /// Kept commits tagged with issues of more than one type.
    pub tangled_commits: usize,
    /// Selected issues referenced by at least one commit in the window.
    pub issues_tracked: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitTrajectory {
    pub trajectory: Trajectory,
    pub stats: CommitStats,
}

/// Computes tagging statistics without requiring any commit to be kept.
pub fn commit_stats(
    commits: &[CommitRecord],
    issues: &[IssueRecord],
    window: &ReleaseWindow,
) -> CommitStats {
    annotate(commits, issues, window).1
}

fn annotate(
    commits: &[CommitRecord],
    issues: &[IssueRecord],
    window: &ReleaseWindow,
) -> (Vec<StateSymbol>, CommitStats) {
    let by_id: HashMap<&str, StateSymbol> = issues
        .iter()
        .filter_map(|i| i.issue_type.state().map(|s| (i.id.as_str(), s)))
        .collect();
    let mut stats = CommitStats::default();
    let mut tracked = std::collections::HashSet::new();
    let mut annotations = Vec::new();
    for c in commits.iter().filter(|c| window.contains(c.timestamp)) {
        stats.commits_in_window += 1;
        tracked.extend(
            c.tagged_issue_ids
                .iter()
                .filter(|id| by_id.contains_key(id.as_str()))
                .map(String::as_str),
        );
        let Some(first) = c.tagged_issue_ids.first() else {
            continue;
        };
        let Some(&state) = by_id.get(first.as_str()) else {
            continue;
        };
        let tangled = c
            .tagged_issue_ids
            .iter()
            .filter_map(|id| by_id.get(id.as_str()))
            .any(|s| *s != state);
        if tangled {
            stats.tangled_commits += 1;
        }
        annotations.push(state);
    }
    stats.commits_kept = annotations.len();
    stats.issues_tracked = tracked.len();
    (annotations, stats)
}

/// Builds the commits-based trajectory of a release.
///
/// `commits` must be tagged (see [`crate::ingest::tag_commits`]) and
/// sorted by timestamp; `issues` are the release's selected issues. A
/// commit is kept when it lies inside the window and its first tagged id
/// names one of those issues; a tangled commit takes the type of its first
/// id.
pub fn build_commit_trajectory(
    commits: &[CommitRecord],
    issues: &[IssueRecord],
    window: &ReleaseWindow,
) -> Result<CommitTrajectory, CommitTrajectoryError> {
    let (annotations, stats) = annotate(commits, issues, window);
    if annotations.is_empty() {
        return Err(CommitTrajectoryError::NoTaggedCommits {
            release_id: window.release_id.clone(),
        });
    }
    let mut segments: Vec<Segment> = Vec::new();
    for (k, state) in annotations.into_iter().enumerate() {
        let k = k as i64;
        match segments.last_mut() {
            Some(last) if last.state == state => last.end = k + 1,
            _ => segments.push(Segment {
                state,
                start: k,
                end: k + 1,
            }),
        }
    }
    let trajectory = Trajectory::new(Flavor::CommitsBased, window.clone(), segments)
        .expect("runs are contiguous and maximal");
    Ok(CommitTrajectory { trajectory, stats })
}

/// Midpoint sampling over commit-index time; see
/// [`crate::trajectory::normalize`].
pub fn normalize_commit_trajectory(t: &Trajectory, positions: usize) -> Vec<StateSymbol> {
    debug_assert_eq!(t.flavor, Flavor::CommitsBased);
    crate::trajectory::normalize(t, positions)
}
