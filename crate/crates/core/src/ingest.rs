//! Parsers for issue exports, commit logs and release manifests, plus the
//! issue-selection and release-detection rules applied before trajectories
//! are built.
//!
//! All three input formats are offline exports:
//!
//! * issues: JSON Lines, one object per issue with `id`, `type`, `created`,
//!   `resolved`, `resolution`, `status` and `parent`;
//! * commits: JSON Lines with `hash`, `timestamp` and `message`;
//! * manifest: `{"releases": [{"id": ..., "inception": ..., "ending": ...}]}`.
//!
//! Timestamps are RFC 3339 and are normalized to UTC whole seconds.

use std::collections::{BTreeSet, HashSet};
use std::io::BufRead;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::IngestError;
use crate::model::{format_timestamp, parse_timestamp, IssueRecord, IssueType, ReleaseWindow, Timestamp};

const RELEASE_MARKER: &str = "[maven-release-plugin] prepare release";
const NEXT_ITERATION_MARKER: &str = "[maven-release-plugin] prepare for next development iteration";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub hash: String,
    #[serde(with = "crate::model::rfc3339")]
    pub timestamp: Timestamp,
    pub message: String,
    /// Tracker keys mentioned in `message`, filled in by [`tag_commits`].
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tagged_issue_ids: Vec<String>,
}

/// Resolution values that qualify an issue as actually resolved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub accept: BTreeSet<String>,
    pub reject: BTreeSet<String>,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        SelectionConfig {
            accept: set(&["fixed", "implemented", "done", "resolved", "complete"]),
            reject: set(&[
                "invalid",
                "not a problem",
                "won't fix",
                "wontfix",
                "duplicate",
                "cannot reproduce",
                "incomplete",
                "not complete",
            ]),
        }
    }
}

impl SelectionConfig {
    pub fn with_sets<A, R>(accept: A, reject: R) -> Self
    where
        A: IntoIterator,
        A::Item: AsRef<str>,
        R: IntoIterator,
        R::Item: AsRef<str>,
    {
        SelectionConfig {
            accept: accept.into_iter().map(|s| s.as_ref().trim().to_lowercase()).collect(),
            reject: reject.into_iter().map(|s| s.as_ref().trim().to_lowercase()).collect(),
        }
    }

    pub fn accepts(&self, resolution: &str) -> bool {
        let r = resolution.trim().to_lowercase();
        self.accept.contains(&r) && !self.reject.contains(&r)
    }
}

/// Release windows, sorted by inception, with unique ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReleaseManifest {
    pub releases: Vec<ReleaseWindow>,
    /// Non-fatal observations, such as overlapping windows.
    pub warnings: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ManifestDoc {
    releases: Vec<ReleaseWindow>,
}

impl ReleaseManifest {
    pub fn new(mut releases: Vec<ReleaseWindow>) -> Result<Self, IngestError> {
        releases.sort_by(|a, b| {
            (a.inception, a.ending, &a.release_id).cmp(&(b.inception, b.ending, &b.release_id))
        });
        let mut seen = HashSet::new();
        for r in &releases {
            if r.ending <= r.inception {
                return Err(IngestError::Manifest(format!(
                    "release {}: ending must be after inception",
                    r.release_id
                )));
            }
            if !seen.insert(r.release_id.as_str()) {
                return Err(IngestError::Manifest(format!(
                    "duplicate release id {}",
                    r.release_id
                )));
            }
        }
        let mut warnings = Vec::new();
        for (i, a) in releases.iter().enumerate() {
            for b in &releases[i + 1..] {
                if b.inception >= a.ending {
                    break;
                }
                if a.overlaps(b) {
                    warnings.push(format!(
                        "release windows {} and {} overlap",
                        a.release_id, b.release_id
                    ));
                }
            }
        }
        Ok(ReleaseManifest { releases, warnings })
    }

    pub fn from_json(text: &str) -> Result<Self, IngestError> {
        let doc: ManifestDoc =
            serde_json::from_str(text).map_err(|e| IngestError::Manifest(e.to_string()))?;
        ReleaseManifest::new(doc.releases)
    }

    pub fn to_json(&self) -> String {
        let doc = ManifestDoc {
            releases: self.releases.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("manifest serializes")
    }

    pub fn get(&self, release_id: &str) -> Option<&ReleaseWindow> {
        self.releases.iter().find(|r| r.release_id == release_id)
    }
}

/// Iterates non-blank lines with 1-based line numbers, parsing each as a
/// JSON object.
fn json_objects<R: BufRead>(
    reader: R,
) -> impl Iterator<Item = Result<(usize, Map<String, Value>), IngestError>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let line_no = i + 1;
            match line {
                Err(e) => Some(Err(IngestError::Io(e))),
                Ok(l) if l.trim().is_empty() => None,
                Ok(l) => Some(match serde_json::from_str::<Value>(&l) {
                    Ok(Value::Object(map)) => Ok((line_no, map)),
                    Ok(_) => Err(IngestError::MalformedLine {
                        line_no,
                        cause: "expected a JSON object".into(),
                    }),
                    Err(e) => Err(IngestError::MalformedLine {
                        line_no,
                        cause: e.to_string(),
                    }),
                }),
            }
        })
}

struct Fields<'a> {
    map: &'a Map<String, Value>,
    line_no: usize,
}

impl Fields<'_> {
    fn optional(&self, field: &'static str) -> Result<Option<&str>, IngestError> {
        match self.map.get(field) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(other) => Err(IngestError::MalformedLine {
                line_no: self.line_no,
                cause: format!("field `{field}` must be a string, found {other}"),
            }),
        }
    }

    fn required(&self, field: &'static str) -> Result<&str, IngestError> {
        self.optional(field)?.ok_or(IngestError::MissingField {
            field,
            line_no: self.line_no,
        })
    }

    fn timestamp(&self, field: &'static str, raw: &str) -> Result<Timestamp, IngestError> {
        parse_timestamp(raw).map_err(|_| IngestError::MalformedLine {
            line_no: self.line_no,
            cause: format!("field `{field}`: invalid RFC 3339 timestamp {raw:?}"),
        })
    }
}

/// Parses the issue export. Stops at the first offending line.
pub fn parse_issues<R: BufRead>(reader: R) -> Result<Vec<IssueRecord>, IngestError> {
    json_objects(reader)
        .map(|item| {
            let (line_no, map) = item?;
            let f = Fields { map: &map, line_no };
            let id = f.required("id")?.to_string();
            let issue_type = IssueType::from_name(f.required("type")?);
            let created = f.timestamp("created", f.required("created")?)?;
            let resolved = match f.optional("resolved")? {
                Some(raw) => Some(f.timestamp("resolved", raw)?),
                None => None,
            };
            let status = f.required("status")?.to_string();
            let resolution = f.optional("resolution")?.unwrap_or_default().to_string();
            let parent_id = f.optional("parent")?.map(str::to_string);
            if resolved.is_some_and(|r| r < created) {
                return Err(IngestError::MalformedLine {
                    line_no,
                    cause: format!("issue {id} is resolved before it was created"),
                });
            }
            if parent_id.is_some() && issue_type != IssueType::SubTask {
                return Err(IngestError::MalformedLine {
                    line_no,
                    cause: format!("issue {id} has a parent but is not a sub-task"),
                });
            }
            Ok(IssueRecord {
                id,
                issue_type,
                created,
                resolved,
                resolution,
                status,
                parent_id,
            })
        })
        .collect()
}

/// Parses the commit log. `tagged_issue_ids` is left empty; see
/// [`tag_commits`].
pub fn parse_commits<R: BufRead>(reader: R) -> Result<Vec<CommitRecord>, IngestError> {
    json_objects(reader)
        .map(|item| {
            let (line_no, map) = item?;
            let f = Fields { map: &map, line_no };
            Ok(CommitRecord {
                hash: f.required("hash")?.to_string(),
                timestamp: f.timestamp("timestamp", f.required("timestamp")?)?,
                message: f.required("message")?.to_string(),
                tagged_issue_ids: Vec::new(),
            })
        })
        .collect()
}

/// Issues resolved inside `window` with an accepted resolution, excluding
/// sub-tasks.
pub fn select_resolved_issues(
    issues: &[IssueRecord],
    window: &ReleaseWindow,
    config: &SelectionConfig,
) -> Vec<IssueRecord> {
    issues
        .iter()
        .filter(|i| i.issue_type != IssueType::SubTask)
        .filter(|i| i.resolved.is_some_and(|r| window.contains(r)))
        .filter(|i| config.accepts(&i.resolution))
        .cloned()
        .collect()
}

/// Derives release windows from `maven-release-plugin` commits.
///
/// A "prepare release ID" commit ends release `ID`; the release starts at
/// the latest "prepare for next development iteration" commit since the
/// previous release ended. The first release starts at the first commit of
/// the log. When no such commit follows a previous release, the commit
/// right after that release's tag is used.
pub fn detect_release_windows(commits: &[CommitRecord]) -> Result<ReleaseManifest, IngestError> {
    let Some(first) = commits.first() else {
        return Err(IngestError::NoReleaseTagsFound);
    };
    let mut releases = Vec::new();
    let mut warnings = Vec::new();
    let mut inception = Some(first.timestamp);
    let mut after_release = false;
    for c in commits {
        if after_release {
            inception = Some(c.timestamp);
            after_release = false;
        }
        if c.message.contains(NEXT_ITERATION_MARKER) {
            inception = Some(c.timestamp);
        } else if let Some(pos) = c.message.find(RELEASE_MARKER) {
            let id = c.message[pos + RELEASE_MARKER.len()..]
                .split_whitespace()
                .next()
                .unwrap_or_default();
            if id.is_empty() {
                warnings.push(format!("commit {}: release tag without an id", c.hash));
                continue;
            }
            match inception.map(|start| ReleaseWindow::new(id, start, c.timestamp)) {
                Some(Ok(w)) => releases.push(w),
                _ => warnings.push(format!(
                    "release {id}: empty development iteration, skipped"
                )),
            }
            inception = None;
            after_release = true;
        }
    }
    if releases.is_empty() {
        return Err(IngestError::NoReleaseTagsFound);
    }
    let mut manifest = ReleaseManifest::new(releases)?;
    warnings.append(&mut manifest.warnings);
    manifest.warnings = warnings;
    Ok(manifest)
}

/// Serializes issues in the export format read by [`parse_issues`].
pub fn issues_to_jsonl(issues: &[IssueRecord]) -> String {
    let mut out = String::new();
    for i in issues {
        let line = serde_json::json!({
            "id": i.id,
            "type": i.issue_type.name(),
            "created": format_timestamp(i.created),
            "resolved": i.resolved.map(format_timestamp),
            "resolution": if i.resolution.is_empty() { None } else { Some(&i.resolution) },
            "status": i.status,
            "parent": i.parent_id,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}

/// Serializes commits in the log format read by [`parse_commits`].
pub fn commits_to_jsonl(commits: &[CommitRecord]) -> String {
    let mut out = String::new();
    for c in commits {
        let line = serde_json::json!({
            "hash": c.hash,
            "timestamp": format_timestamp(c.timestamp),
            "message": c.message,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}

fn issue_key_pattern() -> &'static Regex {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    PATTERN.get_or_init(|| Regex::new(r"\b[A-Z][A-Z0-9]*-[0-9]+\b").expect("valid regex"))
}

/// Tracker keys (`PROJ-123`) in order of first appearance.
pub fn extract_issue_keys(message: &str) -> Vec<String> {
    let mut seen = HashSet::new();
    issue_key_pattern()
        .find_iter(message)
        .map(|m| m.as_str())
        .filter(|k| seen.insert(*k))
        .map(str::to_string)
        .collect()
}

pub fn tag_commits(commits: Vec<CommitRecord>) -> Vec<CommitRecord> {
    commits
        .into_iter()
        .map(|mut c| {
            c.tagged_issue_ids = extract_issue_keys(&c.message);
            c
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> Timestamp {
        parse_timestamp(s).unwrap()
    }

    fn issue_line(id: &str, ty: &str, created: &str, resolved: Option<&str>, resolution: &str) -> String {
        serde_json::json!({
            "id": id, "type": ty, "created": created, "resolved": resolved,
            "resolution": resolution, "status": "Closed", "parent": null
        })
        .to_string()
    }

    fn commit(hash: &str, t: &str, message: &str) -> CommitRecord {
        CommitRecord {
            hash: hash.into(),
            timestamp: ts(t),
            message: message.into(),
            tagged_issue_ids: vec![],
        }
    }

    #[test]
    fn parses_recurrent_issue() {
        let line = issue_line("APP-1", "Bug", "2015-01-02T00:00:00Z", Some("2015-01-05T00:00:00Z"), "Fixed");
        let issues = parse_issues(line.as_bytes()).unwrap();
        assert_eq!(issues.len(), 1);
        let i = &issues[0];
        assert_eq!(i.issue_type, IssueType::Bug);
        assert!(i.issue_type.is_recurrent());
        assert_eq!(i.resolved, Some(ts("2015-01-05T00:00:00Z")));
        assert_eq!(i.resolution, "Fixed");
    }

    #[test]
    fn unknown_type_is_other_and_non_recurrent() {
        let line = issue_line("APP-2", "Wish", "2015-01-02T00:00:00Z", None, "");
        let issues = parse_issues(line.as_bytes()).unwrap();
        assert_eq!(issues[0].issue_type, IssueType::Other("Wish".into()));
        assert!(!issues[0].issue_type.is_recurrent());
    }

    #[test]
    fn resolved_before_created_is_malformed() {
        let good = issue_line("A-1", "Bug", "2015-01-02T00:00:00Z", None, "");
        let bad = issue_line("A-2", "Bug", "2015-01-05T00:00:00Z", Some("2015-01-02T00:00:00Z"), "Fixed");
        let text = format!("{good}\n{bad}\n");
        match parse_issues(text.as_bytes()) {
            Err(IngestError::MalformedLine { line_no, .. }) => assert_eq!(line_no, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_field_and_bad_json() {
        let text = r#"{"id":"A-1","created":"2015-01-02T00:00:00Z","status":"Open"}"#;
        assert!(matches!(
            parse_issues(text.as_bytes()),
            Err(IngestError::MissingField { field: "type", line_no: 1 })
        ));
        assert!(matches!(
            parse_issues("{not json".as_bytes()),
            Err(IngestError::MalformedLine { line_no: 1, .. })
        ));
    }

    #[test]
    fn parent_requires_subtask() {
        let line = r#"{"id":"A-2","type":"Bug","created":"2015-01-02T00:00:00Z","status":"Open","parent":"A-1"}"#;
        assert!(matches!(parse_issues(line.as_bytes()), Err(IngestError::MalformedLine { .. })));
        let line = r#"{"id":"A-2","type":"Sub-task","created":"2015-01-02T00:00:00Z","status":"Open","parent":"A-1"}"#;
        assert_eq!(parse_issues(line.as_bytes()).unwrap()[0].issue_type, IssueType::SubTask);
    }

    #[test]
    fn timestamps_are_utc_seconds() {
        let line = issue_line("A-1", "Task", "2015-01-02T02:00:00.750+02:00", None, "");
        let i = &parse_issues(line.as_bytes()).unwrap()[0];
        assert_eq!(i.created, ts("2015-01-02T00:00:00Z"));
    }

    #[test]
    fn selection_rules() {
        let w = ReleaseWindow::new("R", ts("2015-01-01T00:00:00Z"), ts("2015-02-01T00:00:00Z")).unwrap();
        let mk = |id: &str, ty: IssueType, resolved: Option<&str>, resolution: &str| IssueRecord {
            id: id.into(),
            issue_type: ty,
            created: ts("2014-12-01T00:00:00Z"),
            resolved: resolved.map(ts),
            resolution: resolution.into(),
            status: "Closed".into(),
            parent_id: None,
        };
        let issues = vec![
            mk("fixed", IssueType::Bug, Some("2015-01-10T00:00:00Z"), "Fixed"),
            mk("invalid", IssueType::Bug, Some("2015-01-10T00:00:00Z"), "Invalid"),
            mk("subtask", IssueType::SubTask, Some("2015-01-10T00:00:00Z"), "Fixed"),
            mk("outside", IssueType::Bug, Some("2015-03-10T00:00:00Z"), "Fixed"),
            mk("open", IssueType::Bug, None, ""),
            mk("at-ending", IssueType::Task, Some("2015-02-01T00:00:00Z"), "Done"),
        ];
        let cfg = SelectionConfig::default();
        let selected = select_resolved_issues(&issues, &w, &cfg);
        let ids: Vec<&str> = selected.iter().map(|i| i.id.as_str()).collect();
        assert_eq!(ids, ["fixed", "at-ending"]);
        assert_eq!(select_resolved_issues(&selected, &w, &cfg), selected);
    }

    #[test]
    fn detects_single_release() {
        let commits = vec![
            commit("a", "2015-01-01T00:00:00Z", "[maven-release-plugin] prepare for next development iteration"),
            commit("b", "2015-01-05T00:00:00Z", "APP-1: work"),
            commit("c", "2015-01-10T00:00:00Z", "[maven-release-plugin] prepare release app-1.0"),
        ];
        let m = detect_release_windows(&commits).unwrap();
        assert_eq!(m.releases.len(), 1);
        let r = &m.releases[0];
        assert_eq!(r.release_id, "app-1.0");
        assert_eq!(r.inception, ts("2015-01-01T00:00:00Z"));
        assert_eq!(r.ending, ts("2015-01-10T00:00:00Z"));
    }

    #[test]
    fn no_tags_is_an_error() {
        let commits = vec![commit("a", "2015-01-01T00:00:00Z", "cleanup")];
        assert!(matches!(detect_release_windows(&commits), Err(IngestError::NoReleaseTagsFound)));
        assert!(matches!(detect_release_windows(&[]), Err(IngestError::NoReleaseTagsFound)));
    }

    #[test]
    fn manifest_round_trip_sorts_and_warns() {
        let text = r#"{"releases":[
            {"id":"2","inception":"2015-02-01T00:00:00Z","ending":"2015-03-01T00:00:00Z"},
            {"id":"1","inception":"2015-01-01T00:00:00Z","ending":"2015-02-15T00:00:00Z"}]}"#;
        let m = ReleaseManifest::from_json(text).unwrap();
        assert_eq!(m.releases[0].release_id, "1");
        assert_eq!(m.warnings.len(), 1);
        let again = ReleaseManifest::from_json(&m.to_json()).unwrap();
        assert_eq!(again.releases, m.releases);
    }

    #[test]
    fn manifest_rejects_duplicates_and_empty_windows() {
        let dup = r#"{"releases":[
            {"id":"1","inception":"2015-01-01T00:00:00Z","ending":"2015-02-01T00:00:00Z"},
            {"id":"1","inception":"2015-02-01T00:00:00Z","ending":"2015-03-01T00:00:00Z"}]}"#;
        assert!(ReleaseManifest::from_json(dup).is_err());
        let empty = r#"{"releases":[{"id":"1","inception":"2015-01-01T00:00:00Z","ending":"2015-01-01T00:00:00Z"}]}"#;
        assert!(ReleaseManifest::from_json(empty).is_err());
    }

    #[test]
    fn tagging_examples() {
        assert_eq!(extract_issue_keys("APP-6906: fix NPE in ..."), ["APP-6906"]);
        assert_eq!(
            extract_issue_keys("Merge APP-1723 and APP-6324"),
            ["APP-1723", "APP-6324"]
        );
        assert!(extract_issue_keys("cleanup whitespace").is_empty());
        assert_eq!(extract_issue_keys("APP-1 again APP-1, LIB2-7"), ["APP-1", "LIB2-7"]);
        assert!(extract_issue_keys("app-12 x-1 9AB-1").is_empty());
        let tagged = tag_commits(vec![commit("a", "2015-01-01T00:00:00Z", "LUCENE-5: x")]);
        assert_eq!(tagged[0].tagged_issue_ids, ["LUCENE-5"]);
    }
}
