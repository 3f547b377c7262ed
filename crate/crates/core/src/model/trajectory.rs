use chrono::DateTime;
use serde::{Deserialize, Serialize};

use super::{format_timestamp, parse_timestamp, ReleaseWindow, StateSymbol};
use crate::error::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// Time measured in seconds since the Unix epoch.
    #[serde(rename = "issues")]
    IssuesBased,
    /// Time measured in kept-commit indices.
    #[serde(rename = "commits")]
    CommitsBased,
}

impl Flavor {
    pub fn as_str(self) -> &'static str {
        match self {
            Flavor::IssuesBased => "issues",
            Flavor::CommitsBased => "commits",
        }
    }
}

impl std::str::FromStr for Flavor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "issues" => Ok(Flavor::IssuesBased),
            "commits" => Ok(Flavor::CommitsBased),
            other => Err(format!("unknown flavor {other:?}, expected issues or commits")),
        }
    }
}

/// One maximal run of a state, over `[start, end)`.
///
/// `start`/`end` are Unix seconds for issues-based trajectories and commit
/// indices for commits-based ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub state: StateSymbol,
    pub start: i64,
    pub end: i64,
}

impl Segment {
    pub fn len(&self) -> i64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub release_id: String,
    pub flavor: Flavor,
    pub window: ReleaseWindow,
    segments: Vec<Segment>,
}

impl Trajectory {
    /// Validates contiguity, maximal runs and (issues-based only) that the
    /// segments span the window exactly.
    pub fn new(
        flavor: Flavor,
        window: ReleaseWindow,
        segments: Vec<Segment>,
    ) -> Result<Self, ModelError> {
        let invalid = |cause: String| ModelError::InvalidTrajectory {
            release_id: window.release_id.clone(),
            cause,
        };
        if segments.is_empty() {
            return Err(invalid("no segments".into()));
        }
        for (k, s) in segments.iter().enumerate() {
            if s.is_empty() {
                return Err(invalid(format!("segment {k} is empty")));
            }
        }
        for (k, w) in segments.windows(2).enumerate() {
            if w[0].end != w[1].start {
                return Err(invalid(format!("gap or overlap after segment {k}")));
            }
            if w[0].state == w[1].state {
                return Err(invalid(format!("segments {k} and {} share a state", k + 1)));
            }
        }
        if flavor == Flavor::IssuesBased {
            let (first, last) = (segments[0].start, segments[segments.len() - 1].end);
            if first != window.inception.timestamp() || last != window.ending.timestamp() {
                return Err(invalid("segments do not span the release window".into()));
            }
        }
        Ok(Trajectory {
            release_id: window.release_id.clone(),
            flavor,
            window,
            segments,
        })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// `(start, end)` of the whole trajectory in its own time unit.
    pub fn span(&self) -> (i64, i64) {
        (self.segments[0].start, self.segments[self.segments.len() - 1].end)
    }

    pub fn duration(&self) -> i64 {
        let (start, end) = self.span();
        end - start
    }

    pub fn transition_count(&self) -> usize {
        self.segments.len() - 1
    }

    /// State active at `tick`; the final instant belongs to the last segment.
    pub fn state_at(&self, tick: i64) -> Option<StateSymbol> {
        let (start, end) = self.span();
        if tick < start || tick > end {
            return None;
        }
        let k = self.segments.partition_point(|s| s.end <= tick);
        Some(self.segments[k.min(self.segments.len() - 1)].state)
    }

    pub fn states(&self) -> impl Iterator<Item = StateSymbol> + '_ {
        self.segments.iter().map(|s| s.state)
    }

    pub fn to_doc(&self) -> TrajectoryDoc {
        let tick = |t: i64| match self.flavor {
            Flavor::IssuesBased => TickDoc::Time(format_timestamp(
                DateTime::from_timestamp(t, 0).expect("segment timestamps come from a valid window"),
            )),
            Flavor::CommitsBased => TickDoc::Index(t),
        };
        TrajectoryDoc {
            release_id: self.release_id.clone(),
            flavor: self.flavor,
            window: WindowDoc {
                inception: format_timestamp(self.window.inception),
                ending: format_timestamp(self.window.ending),
            },
            segments: self
                .segments
                .iter()
                .map(|s| SegmentDoc {
                    state: s.state,
                    start: tick(s.start),
                    end: tick(s.end),
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &TrajectoryDoc) -> Result<Self, ModelError> {
        let window = ReleaseWindow::new(
            doc.release_id.clone(),
            parse_timestamp(&doc.window.inception)?,
            parse_timestamp(&doc.window.ending)?,
        )?;
        let tick = |t: &TickDoc| -> Result<i64, ModelError> {
            match (doc.flavor, t) {
                (Flavor::IssuesBased, TickDoc::Time(s)) => Ok(parse_timestamp(s)?.timestamp()),
                (Flavor::CommitsBased, TickDoc::Index(i)) => Ok(*i),
                _ => Err(ModelError::InvalidTrajectory {
                    release_id: doc.release_id.clone(),
                    cause: "segment bound does not match the trajectory flavor".into(),
                }),
            }
        };
        let segments = doc
            .segments
            .iter()
            .map(|s| {
                Ok(Segment {
                    state: s.state,
                    start: tick(&s.start)?,
                    end: tick(&s.end)?,
                })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        Trajectory::new(doc.flavor, window, segments)
    }
}

/// Distinct-successive-state form: the trajectory's states with durations
/// dropped.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DssSequence {
    pub release_id: String,
    pub states: Vec<StateSymbol>,
}

impl DssSequence {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn transition_count(&self) -> usize {
        self.states.len().saturating_sub(1)
    }
}

/// Serialized form of a [`Trajectory`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryDoc {
    pub release_id: String,
    pub flavor: Flavor,
    pub window: WindowDoc,
    pub segments: Vec<SegmentDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowDoc {
    pub inception: String,
    pub ending: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentDoc {
    pub state: StateSymbol,
    pub start: TickDoc,
    pub end: TickDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TickDoc {
    Index(i64),
    Time(String),
}
