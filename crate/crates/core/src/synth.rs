//! Seeded generator of synthetic issue exports and commit logs whose
//! release trajectories follow planted pattern families.
//!
//! Every release gets a state sequence drawn from one family prototype,
//! random state durations, and a set of issues that realizes exactly that
//! sequence once selected and merged. Distractor issues (sub-tasks,
//! rejected resolutions, unresolved issues, non-relevant issues hidden
//! under relevant ones) are mixed in without changing the planted
//! trajectory. Commits carry `maven-release-plugin` markers so release
//! windows can be recovered from the log alone.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::{CommitRecord, ReleaseManifest};
use crate::model::{parse_timestamp, IssueRecord, IssueType, Letter, ReleaseWindow, StateSymbol, Timestamp};

/// A family of similar trajectories: for each DSS position, the states
/// it may take, and the position's share of the release duration. A state
/// listed several times at a position is drawn that many times as often.
#[derive(Debug, Clone)]
pub struct FamilyPrototype {
    pub name: String,
    pub positions: Vec<Vec<StateSymbol>>,
    pub weights: Vec<f64>,
}

impl FamilyPrototype {
    fn new(name: &str, positions: &[&[&str]], weights: &[f64]) -> Self {
        assert_eq!(positions.len(), weights.len());
        FamilyPrototype {
            name: name.into(),
            positions: positions
                .iter()
                .map(|alts| alts.iter().map(|s| s.parse().expect("valid state")).collect())
                .collect(),
            weights: weights.to_vec(),
        }
    }
}

/// Six families loosely shaped after recurrent release paths: a complex
/// start settling on bugs, a four-state descent, single-state releases, a
/// path through a clean state, technical-task churn, and feature-driven
/// releases. Variants are rare and never borrow another family's states
/// at the same position.
pub fn default_families() -> Vec<FamilyPrototype> {
    vec![
        FamilyPrototype::new("complex-then-atomic", &[&["BIF", "BIF", "BIF", "BIF", "BI"], &["B"]], &[0.6, 0.4]),
        FamilyPrototype::new("four-state-descent", &[&["BIFT"], &["BIT", "BIT", "BIT", "BIT", "BIF"], &["B"], &["I"]], &[0.25, 0.3, 0.25, 0.2]),
        FamilyPrototype::new("single-state", &[&["I"]], &[1.0]),
        FamilyPrototype::new("through-zen", &[&["B", "B", "B", "B", "I"], &["Z"], &["B"], &["BI"]], &[0.25, 0.3, 0.2, 0.25]),
        FamilyPrototype::new("technical-churn", &[&["BIFT"], &["BIF"], &["BIFT"], &["T"], &["FT"]], &[0.15, 0.15, 0.2, 0.25, 0.25]),
        FamilyPrototype::new("feature-driven", &[&["F"], &["IF"], &["F", "F", "F", "F", "X"], &["Z"]], &[0.3, 0.3, 0.2, 0.2]),
    ]
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    pub project_key: String,
    pub start: Timestamp,
    pub families: Vec<FamilyPrototype>,
    /// Releases per family; the total is the corpus size.
    pub family_sizes: Vec<usize>,
    pub min_days: i64,
    pub max_days: i64,
    /// Fractional jitter applied to each state's share of the release.
    pub duration_jitter: f64,
}

impl Default for SynthConfig {
    /// 84 releases over six families.
    fn default() -> Self {
        SynthConfig {
            seed: 2015,
            project_key: "SYN".into(),
            start: parse_timestamp("2008-01-07T09:00:00Z").expect("valid literal"),
            families: default_families(),
            family_sizes: vec![24, 18, 12, 12, 9, 9],
            min_days: 40,
            max_days: 150,
            duration_jitter: 0.25,
        }
    }
}

/// Ground truth for one generated release.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedRelease {
    pub window: ReleaseWindow,
    pub family: usize,
    /// `(state, start, end)` in Unix seconds.
    pub segments: Vec<(StateSymbol, i64, i64)>,
}

impl PlantedRelease {
    pub fn dss(&self) -> Vec<StateSymbol> {
        self.segments.iter().map(|s| s.0).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub issues: Vec<IssueRecord>,
    /// Sorted by timestamp; tagged ids are left empty.
    pub commits: Vec<CommitRecord>,
    pub manifest: ReleaseManifest,
    pub planted: Vec<PlantedRelease>,
}

const MINUTE: i64 = 60;
const DAY: i64 = 86_400;
const X_TYPES: [&str; 4] = ["Wish", "Documentation", "Test", "Dependency upgrade"];

struct Generator {
    rng: ChaCha8Rng,
    key: String,
    next_issue: usize,
    next_commit: u64,
    issues: Vec<IssueRecord>,
}

fn ts(secs: i64) -> Timestamp {
    chrono::DateTime::from_timestamp(secs, 0).expect("in range")
}

fn letter_type(letter: Letter) -> IssueType {
    match letter {
        Letter::B => IssueType::Bug,
        Letter::I => IssueType::Improvement,
        Letter::F => IssueType::NewFeature,
        Letter::T => IssueType::Task,
    }
}

impl Generator {
    fn issue_id(&mut self) -> String {
        self.next_issue += 1;
        format!("{}-{}", self.key, self.next_issue)
    }

    fn push_issue(
        &mut self,
        issue_type: IssueType,
        created: i64,
        resolved: Option<i64>,
        resolution: &str,
        parent: Option<String>,
    ) -> String {
        let id = self.issue_id();
        self.issues.push(IssueRecord {
            id: id.clone(),
            issue_type,
            created: ts(created),
            resolved: resolved.map(ts),
            resolution: resolution.into(),
            status: if resolved.is_some() { "Closed" } else { "Open" }.into(),
            parent_id: parent,
        });
        id
    }

    fn commit_hash(&mut self) -> String {
        self.next_commit += 1;
        format!("{:040x}", u128::from(self.next_commit).wrapping_mul(0x9E37_79B9_7F4A_7C15_F39C_C060_5CED_C835))
    }

    fn resolution(&mut self) -> &'static str {
        ["Fixed", "Fixed", "Implemented", "Done"].choose(&mut self.rng).unwrap()
    }

    /// Covers `[start, end]` with a chain of 1-3 overlapping issues.
    fn cover(&mut self, issue_type: &IssueType, start: i64, end: i64, clip_start: bool) -> Vec<(String, i64, i64)> {
        let pieces = self.rng.gen_range(1..=3usize);
        let mut cuts: Vec<i64> = (1..pieces)
            .map(|_| self.rng.gen_range(start + (end - start) / 10..=end - (end - start) / 10))
            .collect();
        cuts.sort_unstable();
        let mut bounds = vec![start];
        bounds.extend(cuts);
        bounds.push(end);
        let mut out = Vec::new();
        for k in 0..pieces {
            let mut created = bounds[k];
            let resolved = bounds[k + 1];
            if k > 0 {
                // Overlap the previous piece a little so the chain stays connected.
                created = (created - self.rng.gen_range(0..=(resolved - created) / 4)).max(start);
            }
            if k == 0 && clip_start {
                created -= self.rng.gen_range(0..=30) * DAY;
            }
            let created = created.min(resolved);
            let res = self.resolution();
            let id = self.push_issue(issue_type.clone(), created, Some(resolved), res, None);
            out.push((id, created.max(start), resolved));
        }
        out
    }
}

/// Generates a corpus from `config`. Equal configs give identical output.
pub fn generate(config: &SynthConfig) -> SyntheticCorpus {
    let mut gen = Generator {
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        key: config.project_key.clone(),
        next_issue: 0,
        next_commit: 0,
        issues: Vec::new(),
    };
    let mut families: Vec<usize> = config
        .family_sizes
        .iter()
        .enumerate()
        .flat_map(|(f, &n)| std::iter::repeat_n(f, n))
        .collect();
    families.shuffle(&mut gen.rng);

    let mut commits: Vec<CommitRecord> = Vec::new();
    let mut planted = Vec::new();
    let mut cursor = config.start.timestamp();
    let slug = config.project_key.to_lowercase();

    for (r, &family) in families.iter().enumerate() {
        let proto = &config.families[family];
        let release_id = format!("{slug}-{}.{}", 1 + r / 10, r % 10);
        let days = gen.rng.gen_range(config.min_days..=config.max_days);
        let inception = cursor;
        let ending = inception + days * DAY + gen.rng.gen_range(0..24 * 60) * MINUTE;

        // States, with adjacent positions kept distinct.
        let mut states: Vec<StateSymbol> = Vec::new();
        for alts in &proto.positions {
            let choices: Vec<StateSymbol> =
                alts.iter().copied().filter(|s| states.last() != Some(s)).collect();
            states.push(*choices.choose(&mut gen.rng).expect("prototype keeps adjacent positions distinct"));
        }

        // Durations: jittered shares, cut at whole minutes.
        let shares: Vec<f64> = proto
            .weights
            .iter()
            .map(|w| w * gen.rng.gen_range(1.0 - config.duration_jitter..=1.0 + config.duration_jitter))
            .collect();
        let total: f64 = shares.iter().sum();
        let span = (ending - inception) / MINUTE;
        let mut bounds = vec![inception];
        let mut acc = 0.0;
        for s in &shares[..shares.len() - 1] {
            acc += s / total;
            bounds.push(inception + (acc * span as f64).round() as i64 * MINUTE);
        }
        bounds.push(ending);
        let segments: Vec<(StateSymbol, i64, i64)> =
            states.iter().enumerate().map(|(k, &s)| (s, bounds[k], bounds[k + 1])).collect();

        // Issues realizing each maximal run of a letter (or of X).
        let mut realized: Vec<(String, i64, i64)> = Vec::new();
        let mut runs: Vec<(IssueType, i64, i64)> = Vec::new();
        for letter in Letter::ALL {
            let mut k = 0;
            while k < segments.len() {
                if !segments[k].0.contains(letter) {
                    k += 1;
                    continue;
                }
                let start = segments[k].1;
                while k < segments.len() && segments[k].0.contains(letter) {
                    k += 1;
                }
                runs.push((letter_type(letter), start, segments[k - 1].2));
            }
        }
        for &(s, a, b) in &segments {
            if s.is_x() {
                let ty = IssueType::from_name(X_TYPES.choose(&mut gen.rng).unwrap());
                runs.push((ty, a, b));
            }
        }
        for (ty, a, b) in runs {
            let clip = a == inception && gen.rng.gen_bool(0.5);
            realized.extend(gen.cover(&ty, a, b, clip));
        }

        // Distractors.
        for &(s, a, b) in &segments {
            let len = b - a;
            if s.is_letter_state() && gen.rng.gen_bool(0.4) {
                let lo = a + len / 4;
                let hi = a + len / 2;
                let ty = IssueType::from_name(X_TYPES.choose(&mut gen.rng).unwrap());
                let res = gen.resolution();
                gen.push_issue(ty, lo, Some(hi), res, None);
            }
            if gen.rng.gen_bool(0.3) {
                let lo = a + len / 3;
                let res = gen.resolution();
                gen.push_issue(IssueType::SubTask, lo, Some(b - len / 3), res, Some(format!("{}-1", gen.key)));
            }
            if s.is_z() {
                gen.push_issue(IssueType::Bug, a + len / 4, Some(b - len / 4), "Won't Fix", None);
            }
        }
        if gen.rng.gen_bool(0.5) {
            gen.push_issue(IssueType::Improvement, inception + DAY, None, "", None);
        }

        // Commits: the dev-iteration marker, tagged and untagged work, the release marker.
        let dev_marker = CommitRecord {
            hash: gen.commit_hash(),
            timestamp: ts(inception),
            message: "[maven-release-plugin] prepare for next development iteration".into(),
            tagged_issue_ids: vec![],
        };
        let release_marker = CommitRecord {
            hash: gen.commit_hash(),
            timestamp: ts(ending),
            message: format!("[maven-release-plugin] prepare release {release_id}"),
            tagged_issue_ids: vec![],
        };
        commits.push(dev_marker);
        let n_commits = gen.rng.gen_range(15..=60);
        let mut minutes: Vec<i64> = (0..n_commits)
            .map(|_| gen.rng.gen_range(1..span))
            .collect();
        minutes.sort_unstable();
        minutes.dedup();
        for m in minutes {
            let t = inception + m * MINUTE;
            let active: Vec<&(String, i64, i64)> =
                realized.iter().filter(|(_, a, b)| *a <= t && t <= *b).collect();
            let message = match active.choose(&mut gen.rng) {
                Some((id, _, _)) if gen.rng.gen_bool(0.6) => {
                    if gen.rng.gen_bool(0.1) {
                        let other = &realized.choose(&mut gen.rng).unwrap().0;
                        format!("{id}: address review comments, see also {other}")
                    } else {
                        format!("{id}: {}", ["fix", "refactor", "add test for", "update"].choose(&mut gen.rng).unwrap())
                    }
                }
                _ => ["cleanup whitespace", "Merge branch 'trunk'", "update build"].choose(&mut gen.rng).unwrap().to_string(),
            };
            commits.push(CommitRecord {
                hash: gen.commit_hash(),
                timestamp: ts(t),
                message,
                tagged_issue_ids: vec![],
            });
        }
        commits.push(release_marker);

        planted.push(PlantedRelease {
            window: ReleaseWindow::new(release_id, ts(inception), ts(ending)).expect("positive duration"),
            family,
            segments,
        });
        cursor = ending + 60 * MINUTE;
    }

    let manifest = ReleaseManifest::new(planted.iter().map(|p| p.window.clone()).collect())
        .expect("generated windows are disjoint with unique ids");
    SyntheticCorpus {
        issues: gen.issues,
        commits,
        manifest,
        planted,
    }
}
