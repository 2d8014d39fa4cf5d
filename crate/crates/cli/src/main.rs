//! Seeded, config-driven experiment runner.
//!
//! One binary, one subcommand per experiment. Every run writes its artifacts
//! plus a `run.json` manifest stamped with the config hash and seed; identical
//! configs and seeds produce byte-identical artifacts at any `--jobs` value.

mod config;
mod experiments;
mod output;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use config::{ConstantsMode, ExperimentConfig};
use output::OutputDir;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "gibbslab", version, about = "Thermal-state transport, shadows, and phase-learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory override.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Constants mode override.
    #[arg(long, global = true, value_enum)]
    mode: Option<ConstantsMode>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Recover Gibbs parameters by max entropy and score in transport distance.
    Tomography,
    /// Learn a local observable across the parameter box from samples.
    LearnPhase,
    /// Concentration trials for robust region-restricted shadow averages.
    Shadows,
    /// Max-entropy parameter recovery against the strong-convexity bound.
    Maxent,
    /// Covariance / indistinguishability / kernel-truncation / light-cone decay curves.
    DecayScan,
    /// Conditional-mutual-information scan plus recovery-map defect.
    MarkovScan,
    /// Two-sided transport bounds and entropy continuity on random pairs.
    W1Report,
    /// Classical spin checks: concentration bound, transport oracle, decay.
    Classical,
}

impl Command {
    fn kind(self) -> &'static str {
        match self {
            Command::Tomography => "tomography",
            Command::LearnPhase => "learn-phase",
            Command::Shadows => "shadows",
            Command::Maxent => "maxent",
            Command::DecayScan => "decay-scan",
            Command::MarkovScan => "markov-scan",
            Command::W1Report => "w1-report",
            Command::Classical => "classical",
        }
    }
}

fn main() {
    // Single-threaded BLAS: determinism does not depend on core count, and
    // rayon owns the outer parallelism.
    if std::env::var_os("OPENBLAS_NUM_THREADS").is_none() {
        std::env::set_var("OPENBLAS_NUM_THREADS", "1");
    }
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("building worker pool")?;
    }
    let kind = cli.command.kind();
    let config_path = cli.config.as_ref().context("--config is required")?;
    let mut cfg = ExperimentConfig::load(config_path)?;
    cfg.require_kind(kind)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(mode) = cli.mode {
        cfg.mode = Some(mode);
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    // The only environment knob: an output-directory override (flag wins).
    if cfg.out.is_none() {
        if let Some(dir) = std::env::var_os("GIBBSLAB_OUT") {
            cfg.out = Some(PathBuf::from(dir).join(kind));
        }
    }
    let hash = cfg.hash(kind);
    let out_dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out").join(kind));
    let mut out = OutputDir::create(&out_dir)?;

    let result = match cli.command {
        Command::Tomography => experiments::tomography(&cfg, &mut out, &hash),
        Command::LearnPhase => experiments::learn_phase(&cfg, &mut out, &hash),
        Command::Shadows => experiments::shadows(&cfg, &mut out, &hash),
        Command::Maxent => experiments::maxent(&cfg, &mut out, &hash),
        Command::DecayScan => experiments::decay_scan(&cfg, &mut out, &hash),
        Command::MarkovScan => experiments::markov_scan(&cfg, &mut out, &hash),
        Command::W1Report => experiments::w1_report(&cfg, &mut out, &hash),
        Command::Classical => experiments::classical(&cfg, &mut out, &hash),
    };
    match result {
        Ok(()) => {
            out.finish(kind, &hash, cfg.seed)?;
            println!("{kind}: artifacts in {}", out_dir.display());
            Ok(())
        }
        Err(e) => {
            OutputDir::write_error(&out_dir, kind, &hash, cfg.seed, &format!("{e:#}"));
            Err(e)
        }
    }
}
