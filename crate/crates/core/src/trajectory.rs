//! Issues-based trajectories: atomic states per issue type, their merge
//! into global states, duration normalization and the DSS reduction.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::model::{
    DssSequence, Flavor, IssueRecord, ReleaseWindow, Segment, StateSymbol, Timestamp, Trajectory,
};

/// A maximal interval during which at least one issue of one type is open.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AtomicState {
    /// A single letter or `X`.
    pub state: StateSymbol,
    #[serde(with = "crate::model::rfc3339")]
    pub open_t: Timestamp,
    #[serde(with = "crate::model::rfc3339")]
    pub close_t: Timestamp,
    pub member_issue_ids: Vec<String>,
}

impl AtomicState {
    fn covers(&self, start: i64, end: i64) -> bool {
        self.open_t.timestamp() <= start && end <= self.close_t.timestamp()
    }
}

pub type AtomicStates = BTreeMap<StateSymbol, Vec<AtomicState>>;

/// Groups the issues of each type into atomic states.
///
/// Each issue contributes `[max(created, inception), min(resolved, ending)]`.
/// Intervals of the same type that overlap or touch are merged
/// transitively. Sub-tasks and unresolved issues contribute nothing; all
/// non-recurrent types are pooled under `X`. Zero-length groups are
/// dropped since they cover no time.
pub fn build_atomic_states(issues: &[IssueRecord], window: &ReleaseWindow) -> AtomicStates {
    let mut by_state: BTreeMap<StateSymbol, Vec<(Timestamp, Timestamp, &str)>> = BTreeMap::new();
    for issue in issues {
        let (Some(state), Some(resolved)) = (issue.issue_type.state(), issue.resolved) else {
            continue;
        };
        let open = issue.created.max(window.inception);
        let close = resolved.min(window.ending);
        if close < open {
            continue;
        }
        by_state.entry(state).or_default().push((open, close, &issue.id));
    }

    let mut out = AtomicStates::new();
    for (state, mut intervals) in by_state {
        intervals.sort();
        let mut merged: Vec<AtomicState> = Vec::new();
        for (open, close, id) in intervals {
            match merged.last_mut() {
                Some(cur) if open <= cur.close_t => {
                    cur.close_t = cur.close_t.max(close);
                    cur.member_issue_ids.push(id.to_string());
                }
                _ => merged.push(AtomicState {
                    state,
                    open_t: open,
                    close_t: close,
                    member_issue_ids: vec![id.to_string()],
                }),
            }
        }
        merged.retain(|a| a.close_t > a.open_t);
        if !merged.is_empty() {
            out.insert(state, merged);
        }
    }
    out
}

/// Global state over `[start, end)`: the union of the letter states that
/// cover it; `X` only when no letter state does; `Z` when nothing does.
fn global_state(atomics: &AtomicStates, start: i64, end: i64) -> StateSymbol {
    atomics
        .iter()
        .filter(|(_, list)| {
            let k = list.partition_point(|a| a.open_t.timestamp() <= start);
            k > 0 && list[k - 1].covers(start, end)
        })
        .fold(StateSymbol::Z, |acc, (state, _)| acc.union(*state))
}

/// Merges atomic states of all types into the release's trajectory over
/// `[inception, ending]`.
pub fn build_trajectory(atomics: &AtomicStates, window: &ReleaseWindow) -> Trajectory {
    let (lo, hi) = (window.inception.timestamp(), window.ending.timestamp());
    let mut bounds: Vec<i64> = vec![lo, hi];
    for a in atomics.values().flatten() {
        bounds.push(a.open_t.timestamp().clamp(lo, hi));
        bounds.push(a.close_t.timestamp().clamp(lo, hi));
    }
    bounds.sort_unstable();
    bounds.dedup();

    let mut segments: Vec<Segment> = Vec::new();
    for w in bounds.windows(2) {
        let state = global_state(atomics, w[0], w[1]);
        match segments.last_mut() {
            Some(last) if last.state == state => last.end = w[1],
            _ => segments.push(Segment {
                state,
                start: w[0],
                end: w[1],
            }),
        }
    }
    Trajectory::new(Flavor::IssuesBased, window.clone(), segments)
        .expect("segments are contiguous, maximal and span the window")
}

/// Selected issues of one release straight to its trajectory.
pub fn issues_trajectory(issues: &[IssueRecord], window: &ReleaseWindow) -> Trajectory {
    build_trajectory(&build_atomic_states(issues, window), window)
}

/// Samples the trajectory at `positions` evenly spaced midpoints:
/// position `k` takes the state active at
/// `start + (k + 0.5) / positions * duration`.
///
/// Works for either flavor since it only uses the trajectory's own span.
pub fn normalize(t: &Trajectory, positions: usize) -> Vec<StateSymbol> {
    let (s0, s1) = t.span();
    let duration = i128::from(s1 - s0);
    let scale = 2 * positions as i128;
    let segments = t.segments();
    let mut seg = 0;
    (0..positions)
        .map(|k| {
            let sample = (2 * k as i128 + 1) * duration;
            while seg + 1 < segments.len() && scale * i128::from(segments[seg].end - s0) <= sample {
                seg += 1;
            }
            segments[seg].state
        })
        .collect()
}

pub fn to_dss(t: &Trajectory) -> DssSequence {
    DssSequence {
        release_id: t.release_id.clone(),
        states: t.states().collect(),
    }
}
