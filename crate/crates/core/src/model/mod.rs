//! Shared domain types: issues, release windows, trajectories and the
//! state alphabet.

mod state;
mod trajectory;

use std::fmt;

use chrono::{DateTime, SecondsFormat, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

pub use state::{parse_state, render_state, state_union, Letter, StateSymbol, ALPHABET_SIZE};
pub use trajectory::{DssSequence, Flavor, Segment, Trajectory, TrajectoryDoc};

/// UTC timestamp with second precision.
pub type Timestamp = DateTime<Utc>;

/// Drops sub-second precision.
pub fn truncate_to_seconds(t: Timestamp) -> Timestamp {
    t.with_nanosecond(0).unwrap_or(t)
}

/// Parses an RFC 3339 timestamp, converts it to UTC and truncates it to
/// whole seconds.
pub fn parse_timestamp(s: &str) -> Result<Timestamp, ModelError> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| truncate_to_seconds(t.with_timezone(&Utc)))
        .map_err(|_| ModelError::Timestamp(s.to_string()))
}

pub fn format_timestamp(t: Timestamp) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub(crate) mod rfc3339 {
    use super::{format_timestamp, parse_timestamp, Timestamp};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &Timestamp, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_timestamp(*t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Timestamp, D::Error> {
        let raw = String::deserialize(d)?;
        parse_timestamp(&raw).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum IssueType {
    Bug,
    Improvement,
    NewFeature,
    Task,
    SubTask,
    Other(String),
}

impl IssueType {
    /// Maps a tracker type name (case-insensitive) to an issue type.
    /// Unrecognized names are kept verbatim as [`IssueType::Other`].
    pub fn from_name(name: &str) -> IssueType {
        let norm: String = name
            .trim()
            .chars()
            .filter(|c| !matches!(c, ' ' | '-' | '_'))
            .flat_map(char::to_lowercase)
            .collect();
        match norm.as_str() {
            "bug" => IssueType::Bug,
            "improvement" => IssueType::Improvement,
            "newfeature" => IssueType::NewFeature,
            "task" => IssueType::Task,
            "subtask" => IssueType::SubTask,
            _ => IssueType::Other(name.trim().to_string()),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            IssueType::Bug => "Bug",
            IssueType::Improvement => "Improvement",
            IssueType::NewFeature => "New Feature",
            IssueType::Task => "Task",
            IssueType::SubTask => "Sub-task",
            IssueType::Other(name) => name,
        }
    }

    pub fn is_recurrent(&self) -> bool {
        self.letter().is_some()
    }

    pub fn letter(&self) -> Option<Letter> {
        match self {
            IssueType::Bug => Some(Letter::B),
            IssueType::Improvement => Some(Letter::I),
            IssueType::NewFeature => Some(Letter::F),
            IssueType::Task => Some(Letter::T),
            IssueType::SubTask | IssueType::Other(_) => None,
        }
    }

    /// The atomic state an issue of this type contributes: its letter for
    /// recurrent types, `X` for every other non-sub-task type, and nothing
    /// for sub-tasks.
    pub fn state(&self) -> Option<StateSymbol> {
        match self {
            IssueType::SubTask => None,
            t => Some(
                t.letter()
                    .map(|l| StateSymbol::from_letters([l]))
                    .unwrap_or(StateSymbol::X),
            ),
        }
    }
}

impl fmt::Display for IssueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IssueRecord {
    pub id: String,
    pub issue_type: IssueType,
    pub created: Timestamp,
    pub resolved: Option<Timestamp>,
    pub resolution: String,
    pub status: String,
    pub parent_id: Option<String>,
}

/// The development iteration of one release.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReleaseWindow {
    #[serde(rename = "id")]
    pub release_id: String,
    #[serde(with = "rfc3339")]
    pub inception: Timestamp,
    #[serde(with = "rfc3339")]
    pub ending: Timestamp,
}

impl ReleaseWindow {
    pub fn new(
        release_id: impl Into<String>,
        inception: Timestamp,
        ending: Timestamp,
    ) -> Result<Self, ModelError> {
        let release_id = release_id.into();
        let inception = truncate_to_seconds(inception);
        let ending = truncate_to_seconds(ending);
        if ending <= inception {
            return Err(ModelError::EmptyWindow { release_id });
        }
        Ok(ReleaseWindow {
            release_id,
            inception,
            ending,
        })
    }

    pub fn contains(&self, t: Timestamp) -> bool {
        self.inception <= t && t <= self.ending
    }

    pub fn duration_seconds(&self) -> i64 {
        (self.ending - self.inception).num_seconds()
    }

    pub fn overlaps(&self, other: &ReleaseWindow) -> bool {
        self.inception < other.ending && other.inception < self.ending
    }
}
