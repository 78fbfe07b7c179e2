//! Batch pipeline driver. Each stage is a subcommand sharing one JSON
//! config; artifacts are CSV/JSON files plus a Markdown report. Exit codes:
//! 0 success, 2 input/config error, 3 convergence failure.

mod artifacts;
mod manifest;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use playstyle::lineup::DesignMode;

use stages::StageContext;

#[derive(Debug)]
pub enum AppError {
    /// Bad input or configuration; exit code 2.
    Input(String),
    /// MCMC failed to converge or was rejected; exit code 3.
    Convergence(String),
}

impl AppError {
    pub fn input(msg: impl Into<String>) -> Self {
        AppError::Input(msg.into())
    }

    pub fn convergence(msg: impl Into<String>) -> Self {
        AppError::Convergence(msg.into())
    }
}

#[derive(Parser)]
#[command(name = "playstyle", version, about = "Offensive playing-style analysis pipeline")]
struct Cli {
    /// Cap the worker-thread pool.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    /// Per-cluster player counts (5-player analysis).
    Counts5,
    /// Cluster-pair combination counts (2-player analysis).
    Combos2,
}

impl From<ModeArg> for DesignMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Counts5 => DesignMode::Counts5,
            ModeArg::Combos2 => DesignMode::Combos2,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset (segments, playtypes, lineups, truth).
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Extract shot features, fit the PCA, and build role features.
    Features {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Features -> PCA -> EMD matrix -> Ward -> silhouette sweep -> cut.
    ClusterShots {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also dump one transport-plan CSV per player pair.
        #[arg(long)]
        dump_plans: bool,
    },
    /// Role features -> fuzzy C-means memberships + histogram.
    ClusterRoles {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Assemble the design matrix from lineups and a clustering output.
    BuildDesign {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Directory holding memberships.csv or assignments.csv.
        #[arg(long)]
        clusters: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Path to a merge-map JSON, or the built-in "shooting-13to5".
        #[arg(long)]
        merge_map: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the model: Bayesian effects (combos2) or baseline CV (counts5).
    Fit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        clusters: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        merge_map: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Emit effects.csv even when the fit has not converged.
        #[arg(long)]
        force: bool,
    },
    /// Assemble the Markdown report from the stage artifacts in --out.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // ignore failure: the global pool may already be initialized
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(AppError::Convergence(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(command: Command) -> Result<(), AppError> {
    match command {
        Command::Synth { config, out, seed } => {
            let ctx = StageContext::load(&config, seed)?;
            stages::cmd_synth(&ctx, &out)
        }
        Command::Features { config, data, out } => {
            let ctx = StageContext::load(&config, None)?;
            stages::cmd_features(&ctx, &data, &out)
        }
        Command::ClusterShots {
            config,
            data,
            out,
            dump_plans,
        } => {
            let ctx = StageContext::load(&config, None)?;
            stages::cmd_cluster_shots(&ctx, &data, &out, dump_plans)
        }
        Command::ClusterRoles {
            config,
            data,
            out,
            seed,
        } => {
            let ctx = StageContext::load(&config, seed)?;
            stages::cmd_cluster_roles(&ctx, &data, &out)
        }
        Command::BuildDesign {
            config,
            data,
            clusters,
            mode,
            merge_map,
            out,
        } => {
            let ctx = StageContext::load(&config, None)?;
            let map = stages::resolve_merge_map(merge_map.as_deref())?;
            stages::cmd_build_design(&ctx, &data, &clusters, mode.into(), map, &out)
        }
        Command::Fit {
            config,
            data,
            clusters,
            mode,
            merge_map,
            out,
            seed,
            force,
        } => {
            let ctx = StageContext::load(&config, seed)?;
            let map = stages::resolve_merge_map(merge_map.as_deref())?;
            stages::cmd_fit(&ctx, &data, &clusters, mode.into(), map, &out, force)
        }
        Command::Report { out } => stages::cmd_report(&out),
    }
}
