//! The `detect-releases`, `build`, `analyze` and `render` stages.
//!
//! Output layout under the output directory:
//!
//! ```text
//! manifest.json  summary.json  build.log
//! trajectories/{issues,commits}/<release>.json
//! analysis/<flavor>/  statistics, distances, clusters, patterns, figures
//! ```
//!
//! Data files depend only on inputs and configuration; run times and dates
//! go to the `.log` files.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use reltraj::clustering::{extract_patterns, hierarchical_cluster, ClusterAssignment};
use reltraj::commits::{build_commit_trajectory, commit_stats, CommitStats};
use reltraj::distance::{distance_matrix, scm_from_rates};
use reltraj::ingest::{
    commits_to_jsonl, detect_release_windows, issues_to_jsonl, parse_commits, parse_issues, select_resolved_issues,
    tag_commits,
};
use reltraj::model::{format_timestamp, TrajectoryDoc};
use reltraj::seqstats::{dss_frequency, modal_trajectory, summarize, transition_rates};
use reltraj::synth::{generate, SynthConfig};
use reltraj::trajectory::{issues_trajectory, normalize, to_dss};
use reltraj::{
    CommitRecord, CommitTrajectoryError, Flavor, ModalTrajectory, ReleaseManifest, StateSymbol, Trajectory,
    TransitionMatrix,
};
use serde::Serialize;

use crate::config::{OmMode, RunConfig};
use crate::svg;

/// File name used for a release's artifacts.
pub fn file_stem(release_id: &str) -> String {
    release_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') { c } else { '_' })
        .collect()
}

pub fn trajectory_path(out: &Path, flavor: Flavor, release_id: &str) -> PathBuf {
    out.join("trajectories").join(flavor.as_str()).join(format!("{}.json", file_stem(release_id)))
}

pub fn analysis_dir(out: &Path, flavor: Flavor) -> PathBuf {
    out.join("analysis").join(flavor.as_str())
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_log(path: &Path, stage: &str, started: Instant, lines: &[String]) -> Result<()> {
    let mut text = format!(
        "{stage} finished {} in {:.3}s\n",
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        started.elapsed().as_secs_f64()
    );
    for l in lines {
        text.push_str(l);
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn open(path: &Path, stage: &str) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("{stage}: opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

pub fn read_commits(path: &Path, stage: &str) -> Result<Vec<CommitRecord>> {
    let commits = parse_commits(open(path, stage)?)
        .with_context(|| format!("{stage}: parsing commits {}", path.display()))?;
    Ok(tag_commits(commits))
}

pub fn detect_releases(commits: &Path) -> Result<ReleaseManifest> {
    let commits = read_commits(commits, "detect-releases")?;
    detect_release_windows(&commits).context("detect-releases")
}

#[derive(Debug, Clone, Serialize)]
struct CommitSummary {
    #[serde(flatten)]
    stats: CommitStats,
    /// Share of the window's commits kept, in percent.
    pct_commits_tagged: f64,
    trajectory: bool,
}

#[derive(Debug, Clone, Serialize)]
struct ReleaseSummary {
    release_id: String,
    inception: String,
    ending: String,
    days: f64,
    issues_selected: usize,
    issues_by_state: BTreeMap<StateSymbol, usize>,
    distinct_states: usize,
    transitions: usize,
    commits: Option<CommitSummary>,
}

#[derive(Debug, Clone, Serialize)]
struct BuildSummary {
    issues_parsed: usize,
    commits_parsed: Option<usize>,
    releases: Vec<ReleaseSummary>,
    warnings: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct BuildReport {
    pub releases: usize,
    pub commit_trajectories: usize,
    pub warnings: Vec<String>,
}

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Builds both trajectory flavors for every release.
pub fn build(cfg: &RunConfig) -> Result<BuildReport> {
    let started = Instant::now();
    cfg.validate()?;
    let Some(issues_path) = &cfg.issues else {
        bail!("build: no issue file given (--issues)");
    };
    let issues = parse_issues(open(issues_path, "build")?)
        .with_context(|| format!("build: parsing issues {}", issues_path.display()))?;
    let mut warnings = Vec::new();
    if issues.is_empty() {
        warnings.push(format!("issue file {} is empty; every trajectory is Z", issues_path.display()));
    }
    let commits = cfg.commits.as_deref().map(|p| read_commits(p, "build")).transpose()?;
    let manifest = match (&cfg.manifest, &commits) {
        (Some(p), _) => {
            let text = fs::read_to_string(p).with_context(|| format!("build: reading manifest {}", p.display()))?;
            ReleaseManifest::from_json(&text).with_context(|| format!("build: parsing manifest {}", p.display()))?
        }
        (None, Some(c)) => detect_release_windows(c).context("build: detecting releases")?,
        (None, None) => bail!("build: releases need either --manifest or --commits"),
    };
    warnings.extend(manifest.warnings.iter().cloned());

    let traj_root = cfg.out.join("trajectories");
    if traj_root.exists() {
        fs::remove_dir_all(&traj_root).with_context(|| format!("build: clearing {}", traj_root.display()))?;
    }
    for flavor in [Flavor::IssuesBased, Flavor::CommitsBased] {
        fs::create_dir_all(traj_root.join(flavor.as_str()))?;
    }

    let mut report = BuildReport { releases: manifest.releases.len(), ..Default::default() };
    let mut rows = Vec::with_capacity(manifest.releases.len());
    for w in &manifest.releases {
        let selected = select_resolved_issues(&issues, w, &cfg.selection);
        let t = issues_trajectory(&selected, w);
        write_json(&trajectory_path(&cfg.out, Flavor::IssuesBased, &w.release_id), &t.to_doc())?;

        let commit_summary = match &commits {
            None => None,
            Some(commits) => {
                let built = match build_commit_trajectory(commits, &selected, w) {
                    Ok(ct) => {
                        write_json(&trajectory_path(&cfg.out, Flavor::CommitsBased, &w.release_id), &ct.trajectory.to_doc())?;
                        report.commit_trajectories += 1;
                        true
                    }
                    Err(e @ CommitTrajectoryError::NoTaggedCommits { .. }) => {
                        warnings.push(e.to_string());
                        false
                    }
                };
                let stats = commit_stats(commits, &selected, w);
                let pct = if stats.commits_in_window == 0 {
                    0.0
                } else {
                    round1(100.0 * stats.commits_kept as f64 / stats.commits_in_window as f64)
                };
                Some(CommitSummary { stats, pct_commits_tagged: pct, trajectory: built })
            }
        };

        let mut by_state = BTreeMap::new();
        for i in &selected {
            if let Some(s) = i.issue_type.state() {
                *by_state.entry(s).or_insert(0) += 1;
            }
        }
        let summary = summarize(&t);
        rows.push(ReleaseSummary {
            release_id: w.release_id.clone(),
            inception: format_timestamp(w.inception),
            ending: format_timestamp(w.ending),
            days: round1(w.duration_seconds() as f64 / 86_400.0),
            issues_selected: selected.len(),
            issues_by_state: by_state,
            distinct_states: summary.distinct_states.len(),
            transitions: summary.transitions,
            commits: commit_summary,
        });
    }

    fs::write(cfg.out.join("manifest.json"), manifest.to_json() + "\n")?;
    write_json(
        &cfg.out.join("summary.json"),
        &BuildSummary {
            issues_parsed: issues.len(),
            commits_parsed: commits.as_ref().map(Vec::len),
            releases: rows,
            warnings: warnings.clone(),
        },
    )?;
    write_log(&cfg.out.join("build.log"), "build", started, &warnings)?;
    report.warnings = warnings;
    Ok(report)
}

/// Trajectories of `flavor` written by `build`, in release order.
pub fn load_trajectories(out: &Path, flavor: Flavor) -> Result<Vec<Trajectory>> {
    let manifest_path = out.join("manifest.json");
    let text = fs::read_to_string(&manifest_path)
        .with_context(|| format!("missing build outputs in {}; run `reltraj build` first", out.display()))?;
    let manifest = ReleaseManifest::from_json(&text).with_context(|| format!("parsing {}", manifest_path.display()))?;
    let mut out_list = Vec::new();
    for w in &manifest.releases {
        let path = trajectory_path(out, flavor, &w.release_id);
        if !path.exists() {
            // Releases without tagged commits have no commits-based trajectory.
            if flavor == Flavor::CommitsBased {
                continue;
            }
            bail!("missing build output {}; run `reltraj build` first", path.display());
        }
        let doc: TrajectoryDoc = serde_json::from_str(&fs::read_to_string(&path)?)
            .with_context(|| format!("parsing {}", path.display()))?;
        out_list.push(Trajectory::from_doc(&doc).with_context(|| format!("loading {}", path.display()))?);
    }
    if out_list.is_empty() {
        bail!("no {} trajectories under {}", flavor.as_str(), out.display());
    }
    Ok(out_list)
}

#[derive(Debug, Clone)]
pub struct AnalyzeReport {
    pub releases: usize,
    pub clusters: ClusterAssignment,
    pub patterns: usize,
}

/// Summaries, transition rates, modal trajectory, distances, clusters and
/// patterns for the trajectories of `cfg.flavor`, plus their figures.
pub fn analyze(cfg: &RunConfig) -> Result<AnalyzeReport> {
    let started = Instant::now();
    cfg.validate()?;
    let trajectories = load_trajectories(&cfg.out, cfg.flavor).context("analyze")?;
    let dss: Vec<_> = trajectories.iter().map(to_dss).collect();
    let normalized: Vec<Vec<StateSymbol>> = trajectories.iter().map(|t| normalize(t, cfg.positions)).collect();
    let seqs: Vec<(String, Vec<StateSymbol>)> = trajectories
        .iter()
        .zip(&dss)
        .zip(&normalized)
        .map(|((t, d), n)| {
            let states = match cfg.om_mode {
                OmMode::Normalized => n.clone(),
                OmMode::Dss => d.states.clone(),
            };
            (t.release_id.clone(), states)
        })
        .collect();

    let tm = transition_rates(&dss).context("analyze: transition rates")?;
    let modal = Modal {
        dss: modal_trajectory(&dss.iter().map(|d| &d.states[..]).collect::<Vec<_>>()).context("analyze: modal trajectory")?,
        normalized: modal_trajectory(&normalized).context("analyze: modal trajectory")?,
    };
    let scm = scm_from_rates(&tm, &StateSymbol::all(), cfg.indel).context("analyze: substitution costs")?;
    let dm = distance_matrix(&seqs, &scm).context("analyze: distances")?;
    let clusters = hierarchical_cluster(&dm, cfg.k, cfg.linkage).context("analyze: clustering")?;
    let patterns = extract_patterns(&clusters, &dss, cfg.min_size);

    let dir = analysis_dir(&cfg.out, cfg.flavor);
    fs::create_dir_all(&dir).with_context(|| format!("analyze: creating {}", dir.display()))?;
    write_json(&dir.join("summaries.json"), &trajectories.iter().map(summarize).collect::<Vec<_>>())?;
    write_json(&dir.join("transitions.json"), &tm)?;
    write_json(&dir.join("modal.json"), &modal.dss)?;
    write_json(&dir.join("modal_normalized.json"), &modal.normalized)?;
    write_json(&dir.join("dss_frequency.json"), &dss_frequency(&dss))?;
    write_json(&dir.join("scm.json"), &scm)?;
    let mut seq_csv = String::from("release_id,sequence\n");
    for (id, states) in &seqs {
        let joined: Vec<String> = states.iter().map(|s| s.to_string()).collect();
        seq_csv.push_str(&format!("{},{}\n", csv_field(id), joined.join("-")));
    }
    fs::write(dir.join("sequences.csv"), seq_csv)?;
    fs::write(dir.join("distances.csv"), dm.to_csv())?;
    fs::write(dir.join("clusters.csv"), clusters.to_csv())?;
    write_json(&dir.join("clusters.json"), &clusters)?;
    write_json(&dir.join("patterns.json"), &patterns)?;
    write_figures(&dir, cfg, &trajectories, &tm, &modal, &clusters)?;

    let log = vec![
        format!("flavor={} om_mode={:?} positions={} k={} linkage={:?}", cfg.flavor.as_str(), cfg.om_mode, cfg.positions, cfg.k, cfg.linkage),
        format!("{} releases, {} patterns", trajectories.len(), patterns.len()),
    ];
    write_log(&dir.join("analyze.log"), "analyze", started, &log)?;
    Ok(AnalyzeReport { releases: trajectories.len(), clusters, patterns: patterns.len() })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Redraws the figures of an earlier `analyze` run from its JSON outputs.
pub fn render(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let trajectories = load_trajectories(&cfg.out, cfg.flavor).context("render")?;
    let dir = analysis_dir(&cfg.out, cfg.flavor);
    let read = |name: &str| -> Result<String> {
        let p = dir.join(name);
        fs::read_to_string(&p).with_context(|| format!("render: missing {}; run `reltraj analyze` first", p.display()))
    };
    let tm: TransitionMatrix = serde_json::from_str(&read("transitions.json")?).context("render: transitions.json")?;
    let modal = Modal {
        dss: serde_json::from_str(&read("modal.json")?).context("render: modal.json")?,
        normalized: serde_json::from_str(&read("modal_normalized.json")?).context("render: modal_normalized.json")?,
    };
    let clusters: ClusterAssignment = serde_json::from_str(&read("clusters.json")?).context("render: clusters.json")?;
    write_figures(&dir, cfg, &trajectories, &tm, &modal, &clusters)
}

/// Modal trajectories over DSS positions and over normalized positions.
struct Modal {
    dss: ModalTrajectory,
    normalized: ModalTrajectory,
}

pub const FIGURES: [&str; 5] = ["sequences.svg", "patterns.svg", "transitions.svg", "modal.svg", "modal_normalized.svg"];

fn write_figures(
    dir: &Path,
    cfg: &RunConfig,
    trajectories: &[Trajectory],
    tm: &TransitionMatrix,
    modal: &Modal,
    clusters: &ClusterAssignment,
) -> Result<Vec<PathBuf>> {
    let flavor = cfg.flavor.as_str();
    let rows: Vec<svg::IndexRow> = trajectories
        .iter()
        .map(|t| svg::IndexRow { label: t.release_id.clone(), trajectory: t })
        .collect();
    let index = svg::sequence_index_plot(&format!("Release trajectories ({flavor})"), &rows, &[]);

    // Clusters largest first, members in release order.
    let label_of: BTreeMap<&str, usize> =
        clusters.release_ids.iter().map(String::as_str).zip(clusters.labels.iter().copied()).collect();
    let mut order: Vec<usize> = (1..=clusters.k()).collect();
    order.sort_by(|a, b| clusters.sizes[b - 1].cmp(&clusters.sizes[a - 1]).then(a.cmp(b)));
    let mut grouped = Vec::new();
    let mut groups = Vec::new();
    let mut rank = 0;
    for c in order {
        let size = clusters.sizes[c - 1];
        let name = if size >= cfg.min_size {
            rank += 1;
            format!("Pattern {rank}: cluster {c}, {size} releases")
        } else {
            format!("Cluster {c}, {size} releases")
        };
        groups.push((grouped.len(), name));
        for t in trajectories {
            if label_of.get(t.release_id.as_str()) == Some(&c) {
                grouped.push(svg::IndexRow { label: t.release_id.clone(), trajectory: t });
            }
        }
    }
    let patterns = svg::sequence_index_plot(&format!("Trajectories by cluster ({flavor})"), &grouped, &groups);

    let figures = [
        index,
        patterns,
        svg::transition_heatmap(&format!("Transition rates ({flavor})"), tm),
        svg::modal_plot(&format!("Modal trajectory, DSS positions ({flavor})"), &modal.dss),
        svg::modal_plot(&format!("Modal trajectory, {} normalized positions ({flavor})", cfg.positions), &modal.normalized),
    ];
    let mut written = Vec::new();
    for (name, body) in FIGURES.iter().zip(figures) {
        let p = dir.join(name);
        fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
        written.push(p);
    }
    Ok(written)
}

/// Writes a synthetic corpus: inputs for `build` plus the planted family
/// of each release.
pub fn write_synthetic(dir: &Path, config: &SynthConfig) -> Result<usize> {
    let corpus = generate(config);
    fs::create_dir_all(dir).with_context(|| format!("synth: creating {}", dir.display()))?;
    fs::write(dir.join("issues.jsonl"), issues_to_jsonl(&corpus.issues))?;
    fs::write(dir.join("commits.jsonl"), commits_to_jsonl(&corpus.commits))?;
    fs::write(dir.join("manifest.json"), corpus.manifest.to_json() + "\n")?;
    let mut planted = String::from("release_id,family,name\n");
    for p in &corpus.planted {
        let name = &config.families[p.family].name;
        planted.push_str(&format!("{},{},{}\n", csv_field(&p.window.release_id), p.family + 1, name));
    }
    fs::write(dir.join("planted.csv"), planted)?;
    Ok(corpus.planted.len())
}
