//! Command-line experiment runner for fixed-phase-shifter hybrid precoding.
//!
//! `fps run` executes a Monte-Carlo sweep and writes a CSV summary plus a
//! JSON sidecar with per-realization data; `fps verify` certifies the
//! closed-form scale/switch solver against brute-force references.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod manifest;
pub mod output;
pub mod verify;

use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use fps_precoding::oracle::OracleBudget;
use fps_precoding::{run_sweep, EvalResult};

use manifest::{
    apply_paper_scale, classify, default_values, load_config, parse_algorithms, RunManifest, SweepKind,
    DESK_REALIZATIONS, PAPER_REALIZATIONS,
};
use verify::{VerifyOptions, VerifyReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("infeasible dimensions: {0}")]
    Infeasible(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Run(String),
    #[error("verification failed")]
    Mismatch(Box<VerifyReport>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Io(_) | CliError::Run(_) | CliError::Mismatch(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fps",
    version,
    about = "Fixed-phase-shifter hybrid precoding experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte-Carlo sweep and write CSV + JSON results
    Run(RunArgs),
    /// Check the closed-form solver against brute-force references
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// TOML file with system configuration keys
    #[arg(long)]
    pub config: PathBuf,
    /// Swept variable: snr, nc (number of phase shifters) or single
    #[arg(long, default_value = "single")]
    pub sweep: SweepKind,
    /// Comma-separated sweep values (defaults depend on the sweep)
    #[arg(long, allow_hyphen_values = true)]
    pub values: Option<String>,
    /// Comma-separated algorithms: fps-altmin, fully-digital
    #[arg(long, default_value = "fps-altmin,fully-digital")]
    pub algos: String,
    /// Channel realizations per sweep point
    #[arg(long)]
    pub realizations: Option<usize>,
    /// Base seed; overrides `rng_seed` from the config
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV output path; the JSON sidecar uses the same stem
    #[arg(long)]
    pub out: PathBuf,
    /// 12x12 transmit array, 128 subcarriers for multicarrier configs and
    /// 1000 realizations
    #[arg(long)]
    pub paper_scale: bool,
    /// Fill the runtime_ms column (makes the CSV body run-dependent)
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    pub cases: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Length of each random instance
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    /// Points in the dense alpha scan
    #[arg(long, default_value_t = 100_001)]
    pub grid_points: usize,
}

impl From<&VerifyArgs> for VerifyOptions {
    fn from(a: &VerifyArgs) -> Self {
        VerifyOptions {
            cases: a.cases,
            seed: a.seed,
            budget: OracleBudget {
                max_n: OracleBudget::default().max_n,
                grid_points: a.grid_points,
            },
            n: a.n,
        }
    }
}

fn parse_values(kind: SweepKind, raw: Option<&str>) -> Result<Vec<f64>, CliError> {
    let Some(raw) = raw else {
        return Ok(default_values(kind));
    };
    if kind == SweepKind::Single {
        return Err(CliError::Config(
            "`--values` does not apply to a single-point run".into(),
        ));
    }
    let values = raw
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("sweep value `{}` is not a number", s.trim())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(CliError::Config("`--values` is empty".into()));
    }
    if kind == SweepKind::Nc && values.iter().any(|&v| v < 1.0 || v.fract() != 0.0) {
        return Err(CliError::Config(
            "phase-shifter counts must be positive integers".into(),
        ));
    }
    Ok(values)
}

pub fn build_manifest(args: &RunArgs) -> Result<RunManifest, CliError> {
    let mut config = load_config(&args.config)?;
    if args.paper_scale {
        apply_paper_scale(&mut config);
    }
    if let Some(seed) = args.seed {
        config.rng_seed = seed;
    }
    config.validate().map_err(classify)?;
    let realizations = args.realizations.unwrap_or(if args.paper_scale {
        PAPER_REALIZATIONS
    } else {
        DESK_REALIZATIONS
    });
    let timestamp_unix_s = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(RunManifest {
        config_path: args.config.clone(),
        sweep: args.sweep,
        sweep_values: parse_values(args.sweep, args.values.as_deref())?,
        algorithms: parse_algorithms(&args.algos)?,
        realizations,
        output_path: args.out.clone(),
        seed: config.rng_seed,
        paper_scale: args.paper_scale,
        timing: args.timing,
        timestamp_unix_s,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config,
    })
}

pub fn cmd_run(manifest: &RunManifest) -> Result<Vec<EvalResult>, CliError> {
    let results = run_sweep(
        &manifest.config,
        &manifest.sweep_spec(),
        &manifest.algorithms,
        manifest.realizations,
    )
    .map_err(classify)?;
    for r in &results {
        println!(
            "{}={} {}: mean_se {:.4} (std {:.4}, {} ok, {} failed)",
            r.sweep_var,
            r.sweep_value,
            r.algorithm_tag,
            r.mean_se,
            r.std_se,
            r.n_realizations(),
            r.failures.len()
        );
    }
    let sidecar = output::write_outputs(manifest, &results)?;
    println!(
        "wrote {} and {}",
        manifest.output_path.display(),
        sidecar.display()
    );
    Ok(results)
}

pub fn cmd_verify(opts: &VerifyOptions, solver: verify::Solver) -> Result<VerifyReport, CliError> {
    if opts.cases == 0 {
        eprintln!("warning: 0 cases requested, nothing was checked");
    }
    let report = verify::verify(opts, solver)?;
    match &report.mismatch {
        None => {
            println!(
                "verify: PASS {} cases, n = {}, max |df| = {:e}, max grid gain = {:e}, {:.0} ms",
                report.cases, report.n, report.max_abs_df, report.max_grid_gain, report.elapsed_ms
            );
            Ok(report)
        }
        Some(m) => {
            println!("verify: FAIL at case {}: {}", m.case, m.property);
            println!("{}", serde_json::to_string_pretty(m).unwrap_or_default());
            Err(CliError::Mismatch(Box::new(report)))
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Run(args) => build_manifest(args).and_then(|m| cmd_run(&m)).map(drop),
        Command::Verify(args) => cmd_verify(&args.into(), verify::closed_form_solver).map(drop),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            if !matches!(e, CliError::Mismatch(_)) {
                eprintln!("error: {e}");
            }
            e.exit_code()
        }
    }
}
