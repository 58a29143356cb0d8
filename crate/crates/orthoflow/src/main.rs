//! Thin command-line front end over the library: configured runs, resume,
//! snapshot analysis and the epsilon sweep.
//!
//! Exit codes: 0 success, 1 config error, 2 numerical blow-up, 3 I/O error.

use clap::{Parser, Subcommand};
use orthoflow::experiment::{self, RunConfig, ThetaConfig};
use orthoflow::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "orthoflow", about = "Periodic-box flow laboratory", version)]
struct Cli {
    /// Worker threads for parallel sections (results are identical for any
    /// value).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override the configured output directory.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a configured run.
    Run { config: PathBuf },
    /// Continue a checkpointed run to a new end time.
    Resume {
        checkpoint: PathBuf,
        #[arg(long)]
        t_end: f64,
        /// Run configuration (cadences, thresholds); defaults match `run`.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Snapshot-only diagnostics of a checkpoint.
    Analyze {
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        omega_threshold_rel: f64,
        /// Also solve the least-squares theta on the snapshot.
        #[arg(long)]
        theta: bool,
    },
    /// Run once, evaluating partition diagnostics for each epsilon in the
    /// sweep list.
    SweepEpsilon { config: PathBuf },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::InvalidParameter(_)
        | Error::InvalidResolution(_)
        | Error::InvalidLength(_) => 1,
        Error::NumericalBlowUp { .. } => 2,
        _ => 3,
    }
}

fn default_resume_config(out_dir: &std::path::Path) -> RunConfig {
    RunConfig {
        scenario: experiment::Scenario::Random,
        grid_n: 16,
        viscosity: 0.0,
        t_end: 1.0,
        cfl: 0.5,
        dt_max: 0.1,
        dealias: true,
        diag_every_steps: 1,
        omega_threshold_rel: 1e-6,
        omega_threshold_sweep: Vec::new(),
        theta: Default::default(),
        particles: Default::default(),
        output_dir: out_dir.to_path_buf(),
        checkpoint_every_steps: 0,
        rng_seed: 0,
        abc: Default::default(),
        random: Default::default(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("orthoflow: failed to size thread pool: {e}");
            return ExitCode::from(1);
        }
    }

    let result: Result<u8, Error> = (|| match &cli.command {
        Command::Run { config } => {
            let cfg = RunConfig::from_path(config)?;
            let outcome = experiment::run(&cfg, cli.output_dir.as_deref())?;
            report(&outcome);
            Ok(if outcome.status.is_blow_up() { 2 } else { 0 })
        }
        Command::Resume {
            checkpoint,
            t_end,
            config,
        } => {
            let base_dir = cli
                .output_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from("resume_out"));
            let cfg = match config {
                Some(path) => RunConfig::from_path(path)?,
                None => default_resume_config(&base_dir),
            };
            let outcome = experiment::resume(checkpoint, &cfg, *t_end, cli.output_dir.as_deref())?;
            report(&outcome);
            Ok(if outcome.status.is_blow_up() { 2 } else { 0 })
        }
        Command::Analyze {
            checkpoint,
            omega_threshold_rel,
            theta,
        } => {
            let out_dir = cli
                .output_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from("analyze_out"));
            let theta_cfg = ThetaConfig {
                enabled: *theta,
                ..Default::default()
            };
            let record =
                experiment::analyze(checkpoint, *omega_threshold_rel, &theta_cfg, &out_dir)?;
            println!("analyze: t = {:.6e}", record.t);
            println!("  energy             = {:.6e}", record.energy);
            println!("  max_speed          = {:.6e}", record.max_speed);
            println!("  max_vorticity      = {:.6e}", record.max_vorticity);
            println!("  omega_set_fraction = {:.6e}", record.omega_set_fraction);
            println!("  lamb_residual      = {:.6e}", record.lamb_residual);
            println!(
                "  ns_energy_identity = {:.6e}",
                record.ns_energy_identity_residual
            );
            if let Some(v) = record.theta_transport_residual {
                println!("  theta_transport    = {v:.6e}");
            }
            println!("  written: {}", out_dir.join("analyze.csv").display());
            Ok(0)
        }
        Command::SweepEpsilon { config } => {
            let cfg = RunConfig::from_path(config)?;
            let outcome = experiment::sweep_epsilon(&cfg, cli.output_dir.as_deref())?;
            report(&outcome);
            Ok(if outcome.status.is_blow_up() { 2 } else { 0 })
        }
    })();

    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("orthoflow: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn report(outcome: &experiment::RunOutcome) {
    match outcome.status {
        experiment::RunStatus::Completed => {
            println!(
                "run completed: t = {:.6e} after {} steps, {} records -> {}",
                outcome.final_time,
                outcome.final_step,
                outcome.records.len(),
                outcome.output_dir.display()
            );
        }
        experiment::RunStatus::BlownUp { time, step } => {
            println!(
                "run halted: numerical blow-up at t = {time:.6e} (step {step}); partial \
                 outputs retained in {}",
                outcome.output_dir.display()
            );
        }
    }
    for claim in &outcome.ledger.claims {
        println!(
            "  claim {:<48} {:<12} violation {}",
            claim.name,
            claim.status.as_str(),
            claim
                .violation
                .map(|v| format!("{v:.3e}"))
                .unwrap_or_else(|| "-".into())
        );
    }
}
