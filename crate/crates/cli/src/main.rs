use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use reltraj::synth::SynthConfig;
use reltraj_cli::pipeline;
use reltraj_cli::{ConfigArgs, FileConfig, RunConfig};

/// Release trajectories from issue trackers and commit logs.
#[derive(Parser)]
#[command(name = "reltraj", version)]
struct Cli {
    /// TOML configuration file; flags and RTK_ variables take precedence.
    #[arg(long, global = true, env = "RTK_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find release windows from maven-release-plugin commits.
    DetectReleases {
        #[arg(long, env = "RTK_COMMITS")]
        commits: PathBuf,
        /// Manifest file to write; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build issues- and commits-based trajectories for every release.
    Build(ConfigArgs),
    /// Summarize, compare and cluster built trajectories.
    Analyze(ConfigArgs),
    /// Redraw figures from an earlier analysis.
    Render(ConfigArgs),
    /// Write a synthetic corpus with planted trajectory families.
    Synth {
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value_t = SynthConfig::default().seed)]
        seed: u64,
    },
}

fn resolve(config: &Option<PathBuf>, args: ConfigArgs) -> Result<RunConfig> {
    let file = config.as_deref().map(FileConfig::load).transpose()?;
    Ok(RunConfig::resolve(file, args))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::DetectReleases { commits, output } => {
            let manifest = pipeline::detect_releases(&commits)?;
            for w in &manifest.warnings {
                eprintln!("warning: {w}");
            }
            let json = manifest.to_json() + "\n";
            match output {
                Some(p) => std::fs::write(&p, json)?,
                None => print!("{json}"),
            }
            eprintln!("{} releases", manifest.releases.len());
        }
        Command::Build(args) => {
            let cfg = resolve(&cli.config, args)?;
            let report = pipeline::build(&cfg)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!(
                "built {} issues-based and {} commits-based trajectories in {}",
                report.releases,
                report.commit_trajectories,
                cfg.out.display()
            );
        }
        Command::Analyze(args) => {
            let cfg = resolve(&cli.config, args)?;
            let report = pipeline::analyze(&cfg)?;
            eprintln!(
                "analyzed {} releases: {} clusters of sizes {:?}, {} patterns; outputs in {}",
                report.releases,
                report.clusters.k(),
                report.clusters.sizes,
                report.patterns,
                pipeline::analysis_dir(&cfg.out, cfg.flavor).display()
            );
        }
        Command::Render(args) => {
            let cfg = resolve(&cli.config, args)?;
            for p in pipeline::render(&cfg)? {
                eprintln!("wrote {}", p.display());
            }
        }
        Command::Synth { out, seed } => {
            let n = pipeline::write_synthetic(&out, &SynthConfig { seed, ..Default::default() })?;
            eprintln!("wrote {n} synthetic releases to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
