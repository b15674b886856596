//! Command-line front end. Settings are resolved in order: built-in
//! defaults, `--config` file, `--set key=value` pairs, then named flags
//! (the output directory flag also reads `SHUS_OUTPUT_DIR`).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use super::{
    cmd_exit_times, cmd_reference, cmd_trajectory, cmd_weight_stats, run_validation, with_threads, CommandReport,
    ExperimentConfig, ValidationSizes,
};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "shus",
    version,
    about = "Adaptive biasing samplers on the two-well benchmark"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One long chain: positions, log-weights and stepsizes.
    Trajectory(ExperimentArgs),
    /// Mean first exit times over a β grid, with exponential and power fits.
    ExitTimes(ExperimentArgs),
    /// Replica variance and bias of the log-weights, with decay fits.
    WeightStats(ExperimentArgs),
    /// Quadrature reference weights.
    Reference(ExperimentArgs),
    /// Invariant suite; prints a JSON report, fails on any violation.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Flat `key = value` config file.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Any config key, e.g. `--set fit_window=1e4,1e6`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long, env = super::OUTPUT_DIR_ENV)]
    pub output_dir: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// shus, wl, shus-alpha or partial-bias.
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long)]
    pub gamma_star: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    /// Bias exponent of the partial-bias scheme.
    #[arg(long = "a")]
    pub a: Option<String>,
    /// nonlinear or linear.
    #[arg(long)]
    pub wl_update: Option<String>,
    /// Renormalization threshold M.
    #[arg(long)]
    pub threshold: Option<String>,
    /// One value or a comma-separated increasing grid.
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long, short = 'd')]
    pub strata: Option<String>,
    #[arg(long)]
    pub half_width: Option<String>,
    /// Proposal standard deviation, or `auto` for 2R/d.
    #[arg(long)]
    pub sigma: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long, short = 'k')]
    pub replicas: Option<String>,
    #[arg(long)]
    pub max_iters: Option<String>,
    #[arg(long)]
    pub steps: Option<String>,
    #[arg(long)]
    pub stride: Option<String>,
    #[arg(long)]
    pub gamma_sweep: Option<String>,
    #[arg(long)]
    pub wl_compare: Option<String>,
}

impl ExperimentArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        let override_err = |reason: String| Error::Config { line: 0, reason };
        for pair in &self.set {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| override_err(format!("`--set` expects KEY=VALUE, got `{pair}`")))?;
            cfg.set(k.trim(), v.trim()).map_err(override_err)?;
        }
        let flags = [
            ("scheme", &self.scheme),
            ("gamma", &self.gamma),
            ("gamma_star", &self.gamma_star),
            ("alpha", &self.alpha),
            ("a", &self.a),
            ("wl_update", &self.wl_update),
            ("threshold", &self.threshold),
            ("beta", &self.beta),
            ("strata", &self.strata),
            ("half_width", &self.half_width),
            ("sigma", &self.sigma),
            ("seed", &self.seed),
            ("replicas", &self.replicas),
            ("max_iters", &self.max_iters),
            ("steps", &self.steps),
            ("stride", &self.stride),
            ("gamma_sweep", &self.gamma_sweep),
            ("wl_compare", &self.wl_compare),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, v).map_err(override_err)?;
            }
        }
        if let Some(dir) = &self.output_dir {
            cfg.output_dir = dir.clone();
        }
        if let Some(t) = self.threads {
            cfg.threads = (t > 0).then_some(t);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run reduced sizes (seconds instead of tens of seconds).
    #[arg(long)]
    pub quick: bool,
    #[arg(long)]
    pub threads: Option<usize>,
}

fn print_report(report: &CommandReport) {
    println!("{}", report.summary);
    for f in &report.files {
        println!("wrote {}", f.display());
    }
}

/// Runs a parsed command. Returns whether every validation check passed
/// (always true for the other commands).
pub fn run(cli: Cli) -> Result<bool> {
    let experiment = |args: &ExperimentArgs, cmd: fn(&ExperimentConfig) -> Result<CommandReport>| -> Result<bool> {
        let cfg = args.resolve()?;
        print_report(&cmd(&cfg)?);
        Ok(true)
    };
    match &cli.command {
        Command::Trajectory(a) => experiment(a, cmd_trajectory),
        Command::ExitTimes(a) => experiment(a, cmd_exit_times),
        Command::WeightStats(a) => experiment(a, cmd_weight_stats),
        Command::Reference(a) => experiment(a, cmd_reference),
        Command::Validate(v) => {
            let sizes = if v.quick {
                ValidationSizes {
                    sa_trials: 10_000,
                    bound_steps: 100_000,
                    invariance_steps: 20_000,
                    oracle_trials: 1000,
                    degeneration_steps: 10_000,
                }
            } else {
                ValidationSizes::default()
            };
            let threads = v.threads.filter(|t| *t > 0);
            let report = with_threads(threads, || run_validation(sizes, v.seed))??;
            let mut stdout = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, &report)?;
            writeln!(stdout)?;
            Ok(report.passed)
        }
    }
}

/// Entry point shared by the binary and tests.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("validation failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
