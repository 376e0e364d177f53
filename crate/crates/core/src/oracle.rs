//! Brute-force references for the closed-form solvers. These are slow on
//! purpose and share no code with the solvers they check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Hard cap on exhaustive enumeration (`2^24` subsets).
pub const MAX_ENUMERATION: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBudget {
    pub max_n: usize,
    pub grid_points: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_n: 16,
            grid_points: 100_001,
        }
    }
}

impl OracleBudget {
    pub fn new(max_n: usize, grid_points: usize) -> Result<Self> {
        if max_n > MAX_ENUMERATION {
            return Err(Error::Budget {
                n: max_n,
                max_n: MAX_ENUMERATION,
            });
        }
        if grid_points < 2 {
            return Err(Error::InvalidConfig("grid scan needs at least two points".into()));
        }
        Ok(OracleBudget { max_n, grid_points })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BruteForceFit {
    pub alpha: f64,
    pub selection: Vec<bool>,
    pub objective: f64,
}

/// Enumerates all `2^n` binary vectors. For a nonzero `s` the best scale
/// is `<x,s>/<s,s>` and the residual `‖x‖² − <x,s>²/<s,s>`; `s = 0` leaves
/// `‖x‖²`. Ties go to the lexicographically smallest `s`.
pub fn brute_force_alpha_s(x: &[f64], budget: &OracleBudget) -> Result<BruteForceFit> {
    let n = x.len();
    if n > budget.max_n.min(MAX_ENUMERATION) {
        return Err(Error::Budget {
            n,
            max_n: budget.max_n.min(MAX_ENUMERATION),
        });
    }
    let norm_sq: f64 = x.iter().map(|v| v * v).sum();
    let mut best = (norm_sq, 0.0, 0u32);
    // bit (n - 1 - i) of the mask is s_i, so increasing masks visit
    // selections in lexicographic order
    for mask in 1u32..(1u32 << n) {
        let mut dot = 0.0;
        let mut count = 0usize;
        for (i, &v) in x.iter().enumerate() {
            if mask >> (n - 1 - i) & 1 == 1 {
                dot += v;
                count += 1;
            }
        }
        let f = norm_sq - dot * dot / count as f64;
        if f < best.0 {
            best = (f, dot / count as f64, mask);
        }
    }
    let (objective, alpha, mask) = best;
    Ok(BruteForceFit {
        alpha,
        selection: (0..n).map(|i| mask >> (n - 1 - i) & 1 == 1).collect(),
        objective,
    })
}

/// Dense scan of `alpha` over `[2 min(x) − 1, 2 max(x) + 1]`, choosing the
/// switches at each grid point by nearest-of-{0, alpha}. Returns the best
/// `(alpha, f)` seen.
pub fn grid_alpha_scan(x: &[f64], budget: &OracleBudget) -> Result<(f64, f64)> {
    if x.is_empty() || x.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateTarget);
    }
    let lo = 2.0 * x.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
    let hi = 2.0 * x.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let steps = budget.grid_points.max(2) - 1;
    let mut best = (f64::NAN, f64::INFINITY);
    for g in 0..=steps {
        let alpha = lo + (hi - lo) * g as f64 / steps as f64;
        let f: f64 = x
            .iter()
            .map(|&v| {
                let on = (alpha > 0.0 && v > alpha / 2.0) || (alpha < 0.0 && v < alpha / 2.0);
                if on {
                    (v - alpha) * (v - alpha)
                } else {
                    v * v
                }
            })
            .sum();
        if f < best.1 {
            best = (alpha, f);
        }
    }
    Ok(best)
}

/// Equal-power eigenbeamforming rate `sum_i log2(1 + sigma_i² snr / Ns)`
/// over the `n_streams` strongest singular values of `h`.
pub fn eigen_rate_oracle(h: &CMat, snr_linear: f64, n_streams: usize) -> f64 {
    let mut sv: Vec<f64> = h.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv.iter()
        .take(n_streams)
        .map(|s| (1.0 + s * s * snr_linear / n_streams as f64).log2())
        .sum()
}
