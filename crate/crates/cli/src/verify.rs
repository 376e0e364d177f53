use std::time::Instant;

use fps_precoding::fps::fit_scaled_binary;
use fps_precoding::oracle::{brute_force_alpha_s, grid_alpha_scan, OracleBudget};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::manifest::classify;
use crate::CliError;

/// Largest allowed gap between the closed form and enumeration.
pub const EXACTNESS_TOL: f64 = 1e-9;
/// Largest allowed improvement of the grid scan over the closed form.
pub const GRID_TOL: f64 = 1e-6;

/// A scalar-scale binary fit under test: returns `(alpha, selection)`.
pub type Solver = fn(&[f64]) -> fps_precoding::Result<(f64, Vec<bool>)>;

pub fn closed_form_solver(x: &[f64]) -> fps_precoding::Result<(f64, Vec<bool>)> {
    fit_scaled_binary(x).map(|fit| (fit.alpha, fit.selection))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub cases: usize,
    pub seed: u64,
    pub budget: OracleBudget,
    /// Length of every random instance.
    pub n: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            cases: 1000,
            seed: 0,
            budget: OracleBudget::default(),
            n: 12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub case: usize,
    pub property: String,
    pub x: Vec<f64>,
    pub solver_alpha: f64,
    pub solver_objective: f64,
    pub brute_force_alpha: f64,
    pub brute_force_objective: f64,
    pub grid_alpha: f64,
    pub grid_objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub cases: usize,
    pub n: usize,
    pub max_abs_df: f64,
    pub max_grid_gain: f64,
    pub elapsed_ms: f64,
    pub mismatch: Option<Mismatch>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none()
    }
}

fn objective(x: &[f64], alpha: f64, selection: &[bool]) -> f64 {
    x.iter()
        .zip(selection)
        .map(|(&v, &on)| if on { (v - alpha).powi(2) } else { v * v })
        .sum()
}

/// Instance `i` is drawn from its own stream so any single case can be
/// regenerated from `(seed, i)`.
pub fn instance(seed: u64, case: usize, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case as u64);
    loop {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if x.iter().any(|&v| v != 0.0) {
            return x;
        }
    }
}

/// Checks the solver against exhaustive enumeration and a dense grid scan
/// on random instances, stopping at the first mismatch.
pub fn verify(opts: &VerifyOptions, solver: Solver) -> Result<VerifyReport, CliError> {
    if opts.n == 0 {
        return Err(CliError::Config("instance length must be positive".into()));
    }
    let budget = OracleBudget::new(opts.budget.max_n, opts.budget.grid_points).map_err(classify)?;
    if opts.n > budget.max_n {
        return Err(CliError::Config(format!(
            "instance length {} exceeds the enumeration budget of {}",
            opts.n, budget.max_n
        )));
    }
    let start = Instant::now();
    let mut report = VerifyReport {
        cases: opts.cases,
        n: opts.n,
        max_abs_df: 0.0,
        max_grid_gain: f64::NEG_INFINITY,
        elapsed_ms: 0.0,
        mismatch: None,
    };
    for case in 0..opts.cases {
        let x = instance(opts.seed, case, opts.n);
        let (alpha, selection) = solver(&x).map_err(classify)?;
        let f = objective(&x, alpha, &selection);
        let brute = brute_force_alpha_s(&x, &budget).map_err(classify)?;
        let (grid_alpha, grid_f) = grid_alpha_scan(&x, &budget).map_err(classify)?;
        let df = (f - brute.objective).abs();
        let gain = f - grid_f;
        report.max_abs_df = report.max_abs_df.max(df);
        report.max_grid_gain = report.max_grid_gain.max(gain);
        let failed = if !(df < EXACTNESS_TOL) {
            Some("closed form differs from enumeration")
        } else if gain > GRID_TOL {
            Some("grid scan beats the closed form")
        } else {
            None
        };
        if let Some(property) = failed {
            report.mismatch = Some(Mismatch {
                case,
                property: property.into(),
                x,
                solver_alpha: alpha,
                solver_objective: f,
                brute_force_alpha: brute.alpha,
                brute_force_objective: brute.objective,
                grid_alpha,
                grid_objective: grid_f,
            });
            break;
        }
    }
    if opts.cases == 0 {
        report.max_grid_gain = 0.0;
    }
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}
