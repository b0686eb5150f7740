//! `ocp2d`: experiment runner for the two-dimensional one-component plasma
//! laboratory. Every run is driven by a versioned TOML config plus a seed
//! list; identical config + seed reproduce byte-identical outputs.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::{config_digest, sha256_hex, ExperimentConfig};
use output::RunContext;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("acceptance audit failure: {0}")]
    AuditFailure(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) | CliError::Numeric(_) => 3,
            CliError::AuditFailure(_) => 4,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ocp2d",
    about = "Sample the 2D one-component plasma, measure hyperuniformity, and audit its energy identities",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Path to the experiment TOML.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed list with a single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for fan-out across chains/seeds.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run Metropolis chains of the full model and store traces/checkpoints.
    Sample(RunArgs),
    /// Number variance of the exact beta = 2 (Ginibre) oracle.
    Ginibre(RunArgs),
    /// Number variance of the Poisson baseline.
    Poisson(RunArgs),
    /// Number variance of Metropolis samples.
    Variance(RunArgs),
    /// Discrepancy tail exceedance probabilities.
    Tails(RunArgs),
    /// Conditional-independence error audit over random subsystem instances.
    Errorci(RunArgs),
    /// Spin-wave construction checks (divergence, area, H1 budget, averaging error).
    #[command(name = "spinwave-check")]
    SpinwaveCheck(RunArgs),
    /// Radial transport checks (pushforward KS, displacement norm, mass, slope).
    #[command(name = "transport-check")]
    TransportCheck(RunArgs),
    /// Inequality audits over sampled configurations.
    Audit(RunArgs),
    /// Aggregate variance runs into a hyperuniformity summary table.
    Report(RunArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Sample(_) => "sample",
            Command::Ginibre(_) => "ginibre",
            Command::Poisson(_) => "poisson",
            Command::Variance(_) => "variance",
            Command::Tails(_) => "tails",
            Command::Errorci(_) => "errorci",
            Command::SpinwaveCheck(_) => "spinwave-check",
            Command::TransportCheck(_) => "transport-check",
            Command::Audit(_) => "audit",
            Command::Report(_) => "report",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Sample(a)
            | Command::Ginibre(a)
            | Command::Poisson(a)
            | Command::Variance(a)
            | Command::Tails(a)
            | Command::Errorci(a)
            | Command::SpinwaveCheck(a)
            | Command::TransportCheck(a)
            | Command::Audit(a)
            | Command::Report(a) => a,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stop = Arc::new(AtomicBool::new(false));
    {
        let stop = stop.clone();
        // Flush checkpoints and stop cleanly on Ctrl-C.
        let _ = ctrlc::set_handler(move || stop.store(true, Ordering::Relaxed));
    }
    match run(&cli.command, &stop) {
        Ok(interrupted) => {
            if interrupted {
                eprintln!("interrupted; checkpoints flushed");
                ExitCode::from(130)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: &Command, stop: &AtomicBool) -> Result<bool, CliError> {
    let args = command.args();
    let (cfg, config_bytes) = ExperimentConfig::load(&args.config)?;
    if cfg.command != command.name() {
        return Err(CliError::Config(format!(
            "config is for command {:?} but {:?} was invoked",
            cfg.command,
            command.name()
        )));
    }
    let seeds: Vec<u64> = match args.seed {
        Some(s) => vec![s],
        None => cfg.seeds.clone(),
    };
    // The output directory is the one knob with an environment override.
    let out_root = args
        .out
        .clone()
        .or_else(|| std::env::var_os("OCP2D_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(&cfg.output_dir));

    let digest = config_digest(&config_bytes, command.name(), &seeds);
    let input_hash = match command {
        Command::Report(_) => commands::report_input_hash(&cfg)?,
        _ => sha256_hex(&config_bytes),
    };
    let mut ctx = RunContext::create(
        &out_root,
        command.name(),
        digest,
        input_hash,
        seeds.clone(),
        &config_bytes,
    )?;

    let result = match command {
        Command::Sample(a) => commands::cmd_sample(&cfg, &mut ctx, &seeds, a.threads, stop),
        Command::Ginibre(_) => commands::cmd_ginibre(&cfg, &mut ctx, &seeds, stop),
        Command::Poisson(_) => commands::cmd_poisson(&cfg, &mut ctx, &seeds, stop),
        Command::Variance(a) => commands::cmd_variance(&cfg, &mut ctx, &seeds, a.threads, stop),
        Command::Tails(a) => commands::cmd_tails(&cfg, &mut ctx, &seeds, a.threads, stop),
        Command::Errorci(_) => commands::cmd_errorci(&cfg, &mut ctx, &seeds),
        Command::SpinwaveCheck(_) => commands::cmd_spinwave_check(&cfg, &mut ctx),
        Command::TransportCheck(_) => commands::cmd_transport_check(&cfg, &mut ctx),
        Command::Audit(_) => commands::cmd_audit(&cfg, &mut ctx, &seeds),
        Command::Report(_) => commands::cmd_report(&cfg, &mut ctx),
    };
    let interrupted = ctx.interrupted;
    match result {
        Ok(()) => {
            ctx.finish()?;
            Ok(interrupted)
        }
        Err(e) => {
            // Audit failures still produce their artifacts.
            if matches!(e, CliError::AuditFailure(_)) {
                let _ = ctx.finish();
            }
            Err(e)
        }
    }
}
