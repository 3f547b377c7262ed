//! Run configuration: defaults, then a TOML file, then `RTK_` environment
//! variables and command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use reltraj::clustering::{DEFAULT_K, DEFAULT_MIN_PATTERN_SIZE};
use reltraj::distance::DEFAULT_INDEL;
use reltraj::{Flavor, Linkage, SelectionConfig, DEFAULT_POSITIONS};
use serde::{Deserialize, Serialize};

/// Which sequences Optimal Matching compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OmMode {
    /// Time-normalized sequences of `positions` states.
    #[default]
    Normalized,
    /// Distinct successive states, durations dropped.
    Dss,
}

impl std::str::FromStr for OmMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "normalized" => Ok(OmMode::Normalized),
            "dss" => Ok(OmMode::Dss),
            other => Err(format!("unknown OM mode {other:?}, expected normalized or dss")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub issues: Option<PathBuf>,
    pub commits: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub selection: SelectionConfig,
    pub positions: usize,
    pub indel: f64,
    pub k: usize,
    pub min_size: usize,
    pub om_mode: OmMode,
    pub linkage: Linkage,
    pub flavor: Flavor,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            issues: None,
            commits: None,
            manifest: None,
            selection: SelectionConfig::default(),
            positions: DEFAULT_POSITIONS,
            indel: DEFAULT_INDEL,
            k: DEFAULT_K,
            min_size: DEFAULT_MIN_PATTERN_SIZE,
            om_mode: OmMode::Normalized,
            linkage: Linkage::Ward,
            flavor: Flavor::IssuesBased,
            out: PathBuf::from("out"),
        }
    }
}

/// Configuration file contents; every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub issues: Option<PathBuf>,
    pub commits: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub accept: Option<Vec<String>>,
    pub reject: Option<Vec<String>>,
    pub positions: Option<usize>,
    pub indel: Option<f64>,
    pub k: Option<usize>,
    pub min_size: Option<usize>,
    pub om_mode: Option<OmMode>,
    pub linkage: Option<Linkage>,
    pub flavor: Option<Flavor>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    /// Reads a TOML file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("config: reading {}", path.display()))?;
        let mut cfg: FileConfig = toml::from_str(&text).with_context(|| format!("config: parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.issues, &mut cfg.commits, &mut cfg.manifest, &mut cfg.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Flags shared by `build`, `analyze` and `render`.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Issue export, one JSON object per line.
    #[arg(long, env = "RTK_ISSUES")]
    pub issues: Option<PathBuf>,
    /// Commit log, one JSON object per line.
    #[arg(long, env = "RTK_COMMITS")]
    pub commits: Option<PathBuf>,
    /// Release manifest; detected from the commit log when absent.
    #[arg(long, env = "RTK_MANIFEST")]
    pub manifest: Option<PathBuf>,
    /// Accepted resolutions, comma separated.
    #[arg(long, env = "RTK_ACCEPT", value_delimiter = ',')]
    pub accept: Option<Vec<String>>,
    /// Rejected resolutions, comma separated.
    #[arg(long, env = "RTK_REJECT", value_delimiter = ',')]
    pub reject: Option<Vec<String>>,
    /// Length of time-normalized sequences.
    #[arg(long, env = "RTK_POSITIONS")]
    pub positions: Option<usize>,
    /// Insertion/deletion cost.
    #[arg(long, env = "RTK_INDEL")]
    pub indel: Option<f64>,
    /// Number of clusters.
    #[arg(short, long, env = "RTK_K")]
    pub k: Option<usize>,
    /// Smallest cluster reported as a pattern.
    #[arg(long, env = "RTK_MIN_SIZE")]
    pub min_size: Option<usize>,
    /// Sequences compared by Optimal Matching: normalized or dss.
    #[arg(long, env = "RTK_OM_MODE")]
    pub om_mode: Option<OmMode>,
    /// single, complete, average or ward.
    #[arg(long, env = "RTK_LINKAGE")]
    pub linkage: Option<Linkage>,
    /// Trajectories to analyze: issues or commits.
    #[arg(long, env = "RTK_FLAVOR")]
    pub flavor: Option<Flavor>,
    /// Output directory.
    #[arg(short, long, env = "RTK_OUT")]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Layers `file` and then `args` over the defaults.
    pub fn resolve(file: Option<FileConfig>, args: ConfigArgs) -> RunConfig {
        let file = file.unwrap_or_default();
        let d = RunConfig::default();
        let accept = args.accept.or(file.accept);
        let reject = args.reject.or(file.reject);
        let selection = match (accept, reject) {
            (None, None) => d.selection,
            (a, r) => SelectionConfig::with_sets(
                a.unwrap_or_else(|| d.selection.accept.iter().cloned().collect()),
                r.unwrap_or_else(|| d.selection.reject.iter().cloned().collect()),
            ),
        };
        RunConfig {
            issues: args.issues.or(file.issues),
            commits: args.commits.or(file.commits),
            manifest: args.manifest.or(file.manifest),
            selection,
            positions: args.positions.or(file.positions).unwrap_or(d.positions),
            indel: args.indel.or(file.indel).unwrap_or(d.indel),
            k: args.k.or(file.k).unwrap_or(d.k),
            min_size: args.min_size.or(file.min_size).unwrap_or(d.min_size),
            om_mode: args.om_mode.or(file.om_mode).unwrap_or(d.om_mode),
            linkage: args.linkage.or(file.linkage).unwrap_or(d.linkage),
            flavor: args.flavor.or(file.flavor).unwrap_or(d.flavor),
            out: args.out.or(file.out).unwrap_or(d.out),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.positions == 0 || self.k == 0 || self.min_size == 0 {
            bail!("config: positions, k and min_size must be positive");
        }
        if !(self.indel.is_finite() && self.indel > 0.0) {
            bail!("config: indel must be positive, got {}", self.indel);
        }
        for p in [&self.issues, &self.commits, &self.manifest].into_iter().flatten() {
            if !p.is_file() {
                bail!("config: input {} does not exist", p.display());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_override_defaults() {
        let file: FileConfig = toml::from_str("k = 4\npositions = 50\nlinkage = \"average\"\naccept = [\"Fixed\"]").unwrap();
        let args = ConfigArgs { k: Some(3), ..Default::default() };
        let cfg = RunConfig::resolve(Some(file), args);
        assert_eq!(cfg.k, 3);
        assert_eq!(cfg.positions, 50);
        assert_eq!(cfg.linkage, Linkage::Average);
        assert!(cfg.selection.accepts("fixed"));
        assert!(!cfg.selection.accepts("done"));
        assert!(cfg.selection.reject.contains("duplicate"));
        assert_eq!(cfg.min_size, DEFAULT_MIN_PATTERN_SIZE);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("clusters = 4").is_err());
    }

    #[test]
    fn validation() {
        assert!(RunConfig::default().validate().is_ok());
        assert!(RunConfig { k: 0, ..Default::default() }.validate().is_err());
        assert!(RunConfig { indel: 0.0, ..Default::default() }.validate().is_err());
        assert!(RunConfig { issues: Some("/nonexistent/x.jsonl".into()), ..Default::default() }.validate().is_err());
    }
}
