//! numsplit — readout-induced qubit T1 degradation toolkit.
//!
//! Subcommands mirror the analysis pipeline: solve pointer fields, export
//! number-split emission spectra, predict decay rates against a TLS bath,
//! sweep drive frequency and measurement strength, cross-check with the
//! Lindblad oracle, fit TLS parameters from inversion-recovery traces, and
//! level drive amplitudes to a target SNR rate.
//!
//! Exit codes: 0 success, 2 configuration/validation error, 3 numerical or
//! fit failure, 4 partial sweep failure (some grid points failed).

mod commands;
mod config;
mod manifest;
mod outputs;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use config::{RawConfig, Resolved};

#[derive(Debug)]
pub enum CliError {
    /// Configuration or validation problem (exit 2).
    Config(Vec<String>),
    /// Numerical or fit failure (exit 3).
    Numerical(String),
    /// Some sweep points failed (exit 4).
    PartialSweep(String),
    /// I/O problem (exit 1).
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::PartialSweep(_) => 4,
        }
    }
}

impl From<numsplit_core::Error> for CliError {
    fn from(e: numsplit_core::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Closed-form pole arithmetic only.
    Analytic,
    /// Numerical route (adaptive quadrature / FFT) alongside the analytic one.
    Quadrature,
    /// Lindblad master-equation oracle.
    Oracle,
    /// Analytic and oracle together, with per-point deviations.
    Both,
}

#[derive(Parser)]
#[command(
    name = "numsplit",
    version,
    about = "Readout-induced qubit T1 degradation: number-split spectra, TLS overlap rates, Lindblad oracle"
)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV outputs and run manifests.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Seed for synthesized noise; overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Computation route where a command supports several.
    #[arg(long, global = true, value_enum, default_value_t = Method::Analytic)]
    method: Method,
    /// Relative tolerance for quadrature cross-checks.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Worker threads for sweep points (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the pointer fields and dephasing/shift coefficients.
    Pointer,
    /// Export emission spectra S_q(omega) for the configured drive choices.
    Spectrum,
    /// Predict the decay rate for the configured drive and bath.
    Rate,
    /// Map T1 over the drive-frequency and measurement-strength grids.
    Sweep,
    /// Run the Lindblad master-equation oracle and extract the decay rate.
    Oracle {
        /// Also certify convergence (step halving and a Fock-truncation bump).
        #[arg(long)]
        certify: bool,
    },
    /// Fit an inversion-recovery trace and export the TLS bath.
    FitTls {
        /// Input trace CSV with columns t_us,P_e.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Synthesize the trace from [fit.synth] (seeded) before fitting.
        #[arg(long)]
        synth: bool,
    },
    /// Level the drive amplitude to the target SNR rate over a frequency grid.
    Level,
}

/// Shared command context.
pub struct Ctx {
    pub resolved: Resolved,
    pub normalized: RawConfig,
    pub seed: u64,
    pub method: Method,
    pub tol: f64,
    pub jobs: usize,
    pub out_dir: PathBuf,
}

fn load_config(cli: &Cli) -> Result<Ctx, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config(vec!["--config is required".into()]))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
    let raw = RawConfig::parse(&text).map_err(|e| CliError::Config(vec![e]))?;
    let resolved = raw.resolve().map_err(CliError::Config)?;
    let normalized = raw.normalized().map_err(CliError::Config)?;
    let seed = cli.seed.unwrap_or(resolved.seed);
    if cli.tol < 1e-12 || cli.tol > 1e-4 || cli.tol.is_nan() {
        return Err(CliError::Config(vec![format!(
            "--tol must lie in [1e-12, 1e-4], got {}",
            cli.tol
        )]));
    }
    Ok(Ctx {
        resolved,
        normalized,
        seed,
        method: cli.method,
        tol: cli.tol,
        jobs: cli.jobs,
        out_dir: cli.out_dir.clone(),
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = load_config(&cli)?;
    match &cli.command {
        Command::Pointer => commands::pointer::run(&ctx),
        Command::Spectrum => commands::spectrum::run(&ctx),
        Command::Rate => commands::rate::run(&ctx),
        Command::Sweep => commands::sweep::run(&ctx),
        Command::Oracle { certify } => commands::oracle::run(&ctx, *certify),
        Command::FitTls { trace, synth } => commands::fit_tls::run(&ctx, trace.as_deref(), *synth),
        Command::Level => commands::level::run(&ctx),
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            match &e {
                CliError::Config(errors) => {
                    eprintln!("configuration error:");
                    for msg in errors {
                        eprintln!("  - {msg}");
                    }
                }
                CliError::Numerical(msg) => eprintln!("numerical failure: {msg}"),
                CliError::PartialSweep(msg) => eprintln!("partial sweep failure: {msg}"),
                CliError::Io(msg) => eprintln!("io error: {msg}"),
            }
            e.exit_code()
        }
    };
    std::process::exit(code);
}
