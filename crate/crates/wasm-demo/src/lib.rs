//! Browser bindings for three interactive views: the piecewise objective of
//! the scale/switch fit, one AltMin run on a random channel, and a small
//! sweep over the number of phase shifters. Every export returns a JSON
//! string; failures come back as `{"error": "..."}`.

use fps_precoding::evaluation::{run_realization, Algorithm};
use fps_precoding::fps::{switch_on, AlphaCandidate, AlphaSearchProblem};
use fps_precoding::{run_sweep, Sweep, SystemConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct AlphaCurve {
    pub x_sorted: Vec<f64>,
    /// Interval endpoints `2 x~_j` where the selection pattern changes.
    pub breakpoints: Vec<f64>,
    pub candidates: Vec<AlphaCandidate>,
    pub alpha: f64,
    pub objective: f64,
    pub selection: Vec<bool>,
    pub curve_alpha: Vec<f64>,
    pub curve_f: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct AltMinRun {
    pub n_shifters: usize,
    pub seed: u64,
    pub snr_db: f64,
    pub surrogate_trace: Vec<f64>,
    pub true_objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub mean_candidate_set_size: f64,
    pub se_hybrid: f64,
    pub se_digital: f64,
}

#[derive(Debug, Serialize)]
pub struct SweepPoint {
    pub n_shifters: usize,
    pub se_hybrid: f64,
    pub se_hybrid_std: f64,
    pub se_digital: f64,
}

/// `f(alpha) = min_s ‖x − alpha s‖²` sampled on `points` values of alpha,
/// together with the candidate set and the exact minimizer.
pub fn alpha_curve(x: &[f64], points: usize) -> Result<AlphaCurve, String> {
    let problem = AlphaSearchProblem::new(x.to_vec()).map_err(|e| e.to_string())?;
    let fit = problem.solve();
    let x_sorted = problem.x_sorted().to_vec();
    let lo = 2.0 * x_sorted[0].min(0.0) - 0.5;
    let hi = 2.0 * x_sorted[x_sorted.len() - 1].max(0.0) + 0.5;
    let points = points.max(2);
    let curve_alpha: Vec<f64> = (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect();
    let curve_f = curve_alpha
        .iter()
        .map(|&a| {
            x.iter()
                .map(|&v| if switch_on(v, a) { (v - a).powi(2) } else { v * v })
                .sum()
        })
        .collect();
    Ok(AlphaCurve {
        breakpoints: x_sorted.iter().map(|v| 2.0 * v).collect(),
        x_sorted,
        candidates: problem.candidates().to_vec(),
        alpha: fit.alpha,
        objective: fit.objective,
        selection: fit.selection,
        curve_alpha,
        curve_f,
    })
}

fn demo_config(n_shifters: usize, snr_db: f64, seed: u64) -> Result<SystemConfig, String> {
    let cfg = SystemConfig {
        n_shifters,
        snr_db,
        rng_seed: seed,
        ..SystemConfig::desk_su_sc()
    };
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

/// One single-user AltMin design on the 64-antenna desk profile.
pub fn altmin_run(n_shifters: usize, snr_db: f64, seed: u64) -> Result<AltMinRun, String> {
    let cfg = demo_config(n_shifters, snr_db, seed)?;
    let hybrid = run_realization(&cfg, Algorithm::FpsAltmin, 0)
        .map_err(|e| e.to_string())?
        .record;
    let digital = run_realization(&cfg, Algorithm::FullyDigital, 0)
        .map_err(|e| e.to_string())?
        .record;
    Ok(AltMinRun {
        n_shifters,
        seed,
        snr_db,
        surrogate_trace: hybrid.surrogate_trace.unwrap_or_default(),
        true_objective: hybrid.true_objective.unwrap_or(f64::NAN),
        iterations: hybrid.altmin_iterations,
        converged: hybrid.altmin_converged.unwrap_or(false),
        mean_candidate_set_size: hybrid.mean_candidate_set_size.unwrap_or(f64::NAN),
        se_hybrid: hybrid.spectral_efficiency_bits_per_s_per_hz,
        se_digital: digital.spectral_efficiency_bits_per_s_per_hz,
    })
}

/// Mean spectral efficiency against the number of phase shifters.
pub fn shifter_sweep(
    values: &[usize],
    realizations: usize,
    snr_db: f64,
    seed: u64,
) -> Result<Vec<SweepPoint>, String> {
    let cfg = demo_config(values.first().copied().unwrap_or(1), snr_db, seed)?;
    let results = run_sweep(
        &cfg,
        &Sweep::Shifters(values.to_vec()),
        &[Algorithm::FpsAltmin, Algorithm::FullyDigital],
        realizations,
    )
    .map_err(|e| e.to_string())?;
    Ok(results
        .chunks(2)
        .map(|pair| SweepPoint {
            n_shifters: pair[0].sweep_value as usize,
            se_hybrid: pair[0].mean_se,
            se_hybrid_std: pair[0].std_se,
            se_digital: pair[1].mean_se,
        })
        .collect())
}

fn to_json<T: Serialize>(result: Result<T, String>) -> String {
    let value = result.and_then(|v| serde_json::to_value(v).map_err(|e| e.to_string()));
    match value {
        Ok(v) => v.to_string(),
        Err(e) => serde_json::json!({ "error": e }).to_string(),
    }
}

fn parse_list<T: std::str::FromStr>(raw: &str) -> Result<Vec<T>, String> {
    raw.split([',', ' ', '\n', '\t'])
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| format!("cannot parse `{s}`")))
        .collect()
}

/// `x` is a comma- or space-separated list of reals.
#[wasm_bindgen(js_name = alphaCurve)]
pub fn alpha_curve_js(x: &str, points: usize) -> String {
    to_json(parse_list::<f64>(x).and_then(|x| alpha_curve(&x, points)))
}

#[wasm_bindgen(js_name = altminRun)]
pub fn altmin_run_js(n_shifters: usize, snr_db: f64, seed: u32) -> String {
    to_json(altmin_run(n_shifters, snr_db, seed as u64))
}

/// `values` is a comma-separated list of phase-shifter counts.
#[wasm_bindgen(js_name = shifterSweep)]
pub fn shifter_sweep_js(values: &str, realizations: usize, snr_db: f64, seed: u32) -> String {
    to_json(parse_list::<usize>(values).and_then(|v| shifter_sweep(&v, realizations, snr_db, seed as u64)))
}
