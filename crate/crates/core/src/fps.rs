//! Hybrid precoder design for the fixed-phase-shifter (FPS) architecture.
//!
//! The analog precoder is `S C`: a binary switch matrix `S` in front of a
//! bank of `N_c` fixed phase shifters replicated for each RF chain (`C`).
//! The digital precoder is `alpha F_DD` with `F_DD` semi-unitary. The
//! design alternates between
//!
//! * the exact joint update of `(alpha, S)`, which reduces to fitting a
//!   real vector by a scaled binary vector and is solved in closed form
//!   after one sort, and
//! * the update of `F_DD`, an orthogonal-Procrustes problem solved by one
//!   thin SVD.
//!
//! Both block updates are globally optimal for the surrogate objective
//! `‖F_opt‖² − 2 alpha Re Tr(F_DD F_opt^H S C) + alpha² ‖S‖²`, so the
//! surrogate never increases across iterations.

use std::cmp::Ordering;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, null_space, real, CMat, CVec, SvdFactors, C64};
use crate::sysmodel::{vstack, BlockLayout, ChannelSet, CombinerSet, Precoder, TargetPrecoder};

/// Fixed phases `theta_1..theta_Nc` and the normalized shifter vector
/// `c = exp(j theta) / sqrt(N_c)`, replicated once per RF chain.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseBank {
    phases: Vec<f64>,
    c: CVec,
    n_rf: usize,
}

impl PhaseBank {
    /// Phases uniformly spaced over the circle, `theta_i = 2 pi (i - 1) / N_c`.
    pub fn uniform(n_shifters: usize, n_rf: usize) -> Result<Self> {
        if n_shifters == 0 {
            return Err(Error::InvalidConfig(
                "phase bank needs at least one shifter".into(),
            ));
        }
        let phases = (0..n_shifters)
            .map(|i| 2.0 * PI * i as f64 / n_shifters as f64)
            .collect();
        PhaseBank::from_phases(phases, n_rf)
    }

    /// Arbitrary fixed phases (radians), wrapped into `[0, 2 pi)`.
    pub fn from_phases(phases: Vec<f64>, n_rf: usize) -> Result<Self> {
        if phases.is_empty() || n_rf == 0 {
            return Err(Error::InvalidConfig(
                "phase bank needs at least one shifter and one RF chain".into(),
            ));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig("phases must be finite".into()));
        }
        let phases: Vec<f64> = phases.into_iter().map(|p| p.rem_euclid(2.0 * PI)).collect();
        let scale = 1.0 / (phases.len() as f64).sqrt();
        let c = CVec::from_iterator(phases.len(), phases.iter().map(|&p| C64::from_polar(scale, p)));
        Ok(PhaseBank { phases, c, n_rf })
    }

    pub fn n_shifters(&self) -> usize {
        self.phases.len()
    }

    pub fn n_rf(&self) -> usize {
        self.n_rf
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// The shifter vector `c`.
    pub fn vector(&self) -> &CVec {
        &self.c
    }

    /// Block-diagonal `C = diag(c, .., c)`, `(N_c N_RF) x N_RF`.
    pub fn matrix(&self) -> CMat {
        let nc = self.n_shifters();
        let mut m = CMat::zeros(nc * self.n_rf, self.n_rf);
        for r in 0..self.n_rf {
            m.view_mut((r * nc, r), (nc, 1)).copy_from(&self.c);
        }
        m
    }
}

pub fn build_phase_bank(n_shifters: usize, n_rf: usize) -> Result<PhaseBank> {
    PhaseBank::uniform(n_shifters, n_rf)
}

/// Binary switch matrix, `N_t x (N_c N_RF)`, entries exactly 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchMatrix {
    bits: DMatrix<u8>,
}

impl SwitchMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SwitchMatrix {
            bits: DMatrix::zeros(rows, cols),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        SwitchMatrix {
            bits: DMatrix::from_fn(rows, cols, |i, j| u8::from(f(i, j))),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.bits.shape()
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[(row, col)] == 1
    }

    pub fn set(&mut self, row: usize, col: usize, on: bool) {
        self.bits[(row, col)] = u8::from(on);
    }

    /// Number of closed switches, which equals `‖S‖_F²`.
    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn bits(&self) -> &DMatrix<u8> {
        &self.bits
    }

    pub fn to_complex(&self) -> CMat {
        self.bits.map(|b| real(f64::from(b)))
    }

    /// `S C` without forming `C`.
    pub fn times_bank(&self, bank: &PhaseBank) -> CMat {
        let nc = bank.n_shifters();
        let (rows, cols) = self.shape();
        assert_eq!(cols, nc * bank.n_rf(), "switch columns must equal N_c * N_RF");
        let c = bank.vector();
        CMat::from_fn(rows, bank.n_rf(), |t, r| {
            (0..nc)
                .filter(|&i| self.bits[(t, r * nc + i)] == 1)
                .map(|i| c[i])
                .sum()
        })
    }
}

/// `M <= N_RF`: tall digital precoder with orthonormal columns.
/// `M >= N_RF`: wide digital precoder with orthonormal rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    SingleCarrier,
    Multicarrier,
}

impl Regime {
    pub fn for_dims(n_cols: usize, n_rf: usize) -> Regime {
        if n_cols <= n_rf {
            Regime::SingleCarrier
        } else {
            Regime::Multicarrier
        }
    }

    fn check(self, n_cols: usize, n_rf: usize) -> Result<()> {
        let ok = match self {
            Regime::SingleCarrier => n_cols <= n_rf,
            Regime::Multicarrier => n_cols >= n_rf,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{self:?} regime does not admit {n_cols} target columns with {n_rf} RF chains"
            )))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HybridPrecoder {
    pub switch: SwitchMatrix,
    pub bank: PhaseBank,
    pub alpha: f64,
    /// Semi-unitary digital factor (after block diagonalization this is the
    /// cascaded digital stage and no longer semi-unitary).
    pub f_dd: CMat,
    /// Digital precoder `N_RF x M`; `alpha F_DD` until normalized.
    pub f_bb: CMat,
    pub layout: BlockLayout,
}

impl HybridPrecoder {
    /// Analog precoder `S C`.
    pub fn analog(&self) -> CMat {
        self.switch.times_bank(&self.bank)
    }

    /// `S C F_BB`, the full antenna-domain precoder.
    pub fn effective(&self) -> CMat {
        self.analog() * &self.f_bb
    }

    pub fn transmit_power(&self) -> f64 {
        frobenius_sq(&self.effective())
    }
}

impl Precoder for HybridPrecoder {
    fn layout(&self) -> BlockLayout {
        self.layout
    }

    fn subcarrier_matrix(&self, subcarrier: usize) -> CMat {
        let s = self.layout.subcarrier_start(subcarrier);
        let w = self.layout.n_users * self.layout.n_streams;
        self.analog() * self.f_bb.columns(s, w)
    }
}

/// `Re Tr(F_DD F_opt^H S C)`.
fn coupling(f_opt: &CMat, analog: &CMat, f_dd: &CMat) -> f64 {
    let a = f_opt.adjoint() * analog;
    (f_dd * a).trace().re
}

/// Upper bound of `‖F_opt − alpha S C F_DD‖²` obtained by replacing
/// `‖S C F_DD‖²` with `‖S‖²`. The constant `‖F_opt‖²` is kept.
pub fn surrogate_objective(target: &TargetPrecoder, hp: &HybridPrecoder) -> f64 {
    surrogate_value(&target.f_opt, &hp.switch, &hp.bank, hp.alpha, &hp.f_dd)
}

fn surrogate_value(f_opt: &CMat, s: &SwitchMatrix, bank: &PhaseBank, alpha: f64, f_dd: &CMat) -> f64 {
    let analog = s.times_bank(bank);
    frobenius_sq(f_opt) - 2.0 * alpha * coupling(f_opt, &analog, f_dd) + alpha * alpha * s.count_ones() as f64
}

/// `‖F_opt − alpha S C F_DD‖²`.
pub fn true_objective(f_opt: &CMat, s: &SwitchMatrix, bank: &PhaseBank, alpha: f64, f_dd: &CMat) -> f64 {
    let approx = s.times_bank(bank) * f_dd * real(alpha);
    frobenius_sq(&(f_opt - approx))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `alpha < 0`: the selected entries are the `split` smallest ones.
    Negative,
    /// `alpha > 0`: the selected entries are all but the `split` smallest.
    Positive,
}

/// A finite stationary point of the piecewise quadratic `f(alpha)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaCandidate {
    /// Number of sorted entries below the threshold `alpha / 2`.
    pub split: usize,
    pub branch: Branch,
    pub alpha: f64,
    /// Closed-form `f` of this candidate.
    pub objective: f64,
}

/// Best scaled-binary fit of a real vector: `min ‖x − alpha s‖²`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledBinaryFit {
    pub alpha: f64,
    pub selection: Vec<bool>,
    /// `‖x − alpha s‖²` evaluated for the returned pair.
    pub objective: f64,
    pub candidate: AlphaCandidate,
    pub candidate_set_size: usize,
    /// True when no prefix/suffix mean fell inside its own interval and
    /// the per-interval clamped minima were searched instead.
    pub used_fallback: bool,
}

/// Sorted view of `x` with prefix/suffix sums and the candidate set of
/// prefix/suffix means that lie inside their own threshold interval.
///
/// With `x` sorted ascending as `x~`, the threshold `alpha / 2` falling
/// between `x~[split-1]` and `x~[split]` fixes the optimal selection: the
/// lower `split` entries when `alpha < 0`, the remaining upper entries when
/// `alpha > 0`. On that interval `f` is a quadratic whose vertex is the
/// mean of the selected entries. Only vertices inside
/// `[2 x~[split-1], 2 x~[split]]` with the matching sign are kept; the
/// interval endpoints never need to be evaluated.
#[derive(Clone, Debug)]
pub struct AlphaSearchProblem {
    x: Vec<f64>,
    sorted: Vec<f64>,
    prefix: Vec<f64>,
    suffix: Vec<f64>,
    sum_sq: f64,
    candidates: Vec<AlphaCandidate>,
}

impl AlphaSearchProblem {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateInput(
                "switch target contains non-finite entries".into(),
            ));
        }
        if x.iter().all(|&v| v == 0.0) {
            return Err(Error::DegenerateTarget);
        }
        let n = x.len();
        let mut sorted = x.clone();
        sorted.sort_by(f64::total_cmp);

        let mut prefix = vec![0.0; n + 1];
        for i in 0..n {
            prefix[i + 1] = prefix[i] + sorted[i];
        }
        // separate suffix sums avoid cancellation in total - prefix
        let mut suffix = vec![0.0; n + 1];
        for i in (0..n).rev() {
            suffix[i] = suffix[i + 1] + sorted[i];
        }
        let sum_sq = sorted.iter().map(|v| v * v).sum();

        let mut problem = AlphaSearchProblem {
            x,
            sorted,
            prefix,
            suffix,
            sum_sq,
            candidates: Vec::new(),
        };
        problem.candidates = problem.collect_candidates();
        Ok(problem)
    }

    fn interval(&self, split: usize) -> (f64, f64) {
        let n = self.sorted.len();
        let lo = if split == 0 {
            f64::NEG_INFINITY
        } else {
            2.0 * self.sorted[split - 1]
        };
        let hi = if split == n {
            f64::INFINITY
        } else {
            2.0 * self.sorted[split]
        };
        (lo, hi)
    }

    fn collect_candidates(&self) -> Vec<AlphaCandidate> {
        let n = self.sorted.len();
        let mut out = Vec::new();
        for split in 0..=n {
            let (lo, hi) = self.interval(split);
            let inside = |a: f64| {
                let slack = 1e-12 * a.abs();
                a >= lo - slack && a <= hi + slack
            };
            if split >= 1 {
                let sum = self.prefix[split];
                let alpha = sum / split as f64;
                if alpha < 0.0 && inside(alpha) {
                    out.push(AlphaCandidate {
                        split,
                        branch: Branch::Negative,
                        alpha,
                        objective: (self.sum_sq - sum * alpha).max(0.0),
                    });
                }
            }
            if split < n {
                let sum = self.suffix[split];
                let alpha = sum / (n - split) as f64;
                if alpha > 0.0 && inside(alpha) {
                    out.push(AlphaCandidate {
                        split,
                        branch: Branch::Positive,
                        alpha,
                        objective: (self.sum_sq - sum * alpha).max(0.0),
                    });
                }
            }
        }
        out
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn x_sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn candidates(&self) -> &[AlphaCandidate] {
        &self.candidates
    }

    /// Clamped vertex of every interval's quadratic, for inputs where the
    /// candidate set is empty.
    fn fallback_candidates(&self) -> Vec<AlphaCandidate> {
        let n = self.sorted.len();
        let mut out = Vec::new();
        for split in 0..=n {
            let (lo, hi) = self.interval(split);
            let mut push = |branch, count: usize, sum: f64, lo: f64, hi: f64| {
                if count == 0 || lo > hi {
                    return;
                }
                let alpha = (sum / count as f64).clamp(lo, hi);
                if alpha == 0.0 || !alpha.is_finite() {
                    return;
                }
                let objective = self.sum_sq - 2.0 * alpha * sum + count as f64 * alpha * alpha;
                out.push(AlphaCandidate {
                    split,
                    branch,
                    alpha,
                    objective: objective.max(0.0),
                });
            };
            push(
                Branch::Negative,
                split,
                self.prefix[split],
                lo,
                hi.min(-f64::MIN_POSITIVE),
            );
            push(
                Branch::Positive,
                n - split,
                self.suffix[split],
                lo.max(f64::MIN_POSITIVE),
                hi,
            );
        }
        out
    }

    pub fn solve(&self) -> ScaledBinaryFit {
        let (pool, used_fallback) = if self.candidates.is_empty() {
            (self.fallback_candidates(), true)
        } else {
            (self.candidates.clone(), false)
        };
        let tie = 1e-12 * self.sum_sq.max(f64::MIN_POSITIVE);
        let best = pool
            .iter()
            .copied()
            .reduce(|best, c| {
                if c.objective < best.objective - tie
                    || (c.objective <= best.objective + tie && c.alpha.abs() < best.alpha.abs())
                {
                    c
                } else {
                    best
                }
            })
            .expect("nonzero input always has a candidate");

        let alpha = best.alpha;
        let selection: Vec<bool> = self.x.iter().map(|&v| switch_on(v, alpha)).collect();
        let objective = self
            .x
            .iter()
            .zip(&selection)
            .map(|(&v, &s)| if s { (v - alpha).powi(2) } else { v * v })
            .sum();
        ScaledBinaryFit {
            alpha,
            selection,
            objective,
            candidate: best,
            candidate_set_size: self.candidates.len(),
            used_fallback,
        }
    }
}

/// Indicator rule for one switch given the scale: on iff the entry is
/// strictly closer to `alpha` than to 0. Entries exactly at `alpha / 2`
/// stay off.
pub fn switch_on(value: f64, alpha: f64) -> bool {
    match alpha.partial_cmp(&0.0) {
        Some(Ordering::Greater) => value > alpha / 2.0,
        Some(Ordering::Less) => value < alpha / 2.0,
        _ => false,
    }
}

/// Exact minimizer of `‖x − alpha s‖²` over real `alpha` and binary `s`.
pub fn fit_scaled_binary(x: &[f64]) -> Result<ScaledBinaryFit> {
    Ok(AlphaSearchProblem::new(x.to_vec())?.solve())
}

/// `Re(F_opt F_DD^H C^H)`, `N_t x (N_c N_RF)`.
pub fn switch_target(f_opt: &CMat, f_dd: &CMat, bank: &PhaseBank) -> DMatrix<f64> {
    let g = f_opt * f_dd.adjoint();
    let nc = bank.n_shifters();
    let c = bank.vector();
    DMatrix::from_fn(f_opt.nrows(), nc * bank.n_rf(), |t, col| {
        let (r, i) = (col / nc, col % nc);
        (g[(t, r)] * c[i].conj()).re
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlphaSwitchSolution {
    pub alpha: f64,
    pub switch: SwitchMatrix,
    /// `‖Re(F_opt F_DD^H C^H) − alpha S‖²` at the returned pair.
    pub objective: f64,
    pub candidate_set_size: usize,
}

/// Joint `(alpha, S)` update for fixed `F_DD`.
pub fn solve_alpha_switch(f_opt: &CMat, f_dd: &CMat, bank: &PhaseBank) -> Result<AlphaSwitchSolution> {
    if f_dd.nrows() != bank.n_rf() || f_dd.ncols() != f_opt.ncols() {
        return Err(Error::Shape(format!(
            "F_DD is {}x{}, expected {}x{}",
            f_dd.nrows(),
            f_dd.ncols(),
            bank.n_rf(),
            f_opt.ncols()
        )));
    }
    let target = switch_target(f_opt, f_dd, bank);
    let (rows, cols) = target.shape();
    // column-major vectorization, matching DMatrix storage
    let fit = fit_scaled_binary(target.as_slice())?;
    let switch = SwitchMatrix::from_fn(rows, cols, |i, j| fit.selection[i + rows * j]);
    Ok(AlphaSwitchSolution {
        alpha: fit.alpha,
        switch,
        objective: fit.objective,
        candidate_set_size: fit.candidate_set_size,
    })
}

/// Semi-unitary maximizer of `Re Tr(F_DD A)` for `A = alpha F_opt^H S C`:
/// with the thin SVD `A = U Sigma V^H`, `F_DD = V U^H`.
fn procrustes(f_opt: &CMat, s: &SwitchMatrix, bank: &PhaseBank, alpha: f64) -> Result<CMat> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::DegenerateScale);
    }
    let a = f_opt.adjoint() * s.times_bank(bank) * real(alpha);
    let svd = SvdFactors::thin(&a);
    Ok(&svd.v * svd.u.adjoint())
}

/// Digital update when `M <= N_RF` (orthonormal columns).
pub fn update_fdd_sc(f_opt: &CMat, s: &SwitchMatrix, bank: &PhaseBank, alpha: f64) -> Result<CMat> {
    Regime::SingleCarrier.check(f_opt.ncols(), bank.n_rf())?;
    procrustes(f_opt, s, bank, alpha)
}

/// Digital update when `M >= N_RF` (orthonormal rows).
pub fn update_fdd_mc(f_opt: &CMat, s: &SwitchMatrix, bank: &PhaseBank, alpha: f64) -> Result<CMat> {
    Regime::Multicarrier.check(f_opt.ncols(), bank.n_rf())?;
    procrustes(f_opt, s, bank, alpha)
}

/// `[V, 0]^H` from the SVD `F_opt = U Sigma V^H` (`N_RF x M`, `M <= N_RF`).
pub fn init_fdd_sc(f_opt: &CMat, n_rf: usize) -> Result<CMat> {
    let m = f_opt.ncols();
    Regime::SingleCarrier.check(m, n_rf)?;
    let svd = SvdFactors::thin(f_opt);
    let k = svd.v.ncols();
    let mut out = CMat::zeros(n_rf, m);
    out.rows_mut(0, k).copy_from(&svd.v.adjoint());
    if k < m {
        // F_opt with fewer rows than columns: complete V to a unitary basis
        let complement = null_space(&svd.v.adjoint(), 1e-12);
        out.rows_mut(k, m - k).copy_from(&complement.adjoint());
    }
    Ok(out)
}

/// First `N_RF` right singular vectors of `F_opt`, as rows (`M >= N_RF`).
pub fn init_fdd_mc(f_opt: &CMat, n_rf: usize) -> Result<CMat> {
    let m = f_opt.ncols();
    Regime::Multicarrier.check(m, n_rf)?;
    let svd = SvdFactors::thin(f_opt);
    let k = svd.v.ncols();
    if k >= n_rf {
        return Ok(svd.v.columns(0, n_rf).adjoint());
    }
    let complement = null_space(&svd.v.adjoint(), 1e-12);
    let mut out = CMat::zeros(n_rf, m);
    out.rows_mut(0, k).copy_from(&svd.v.adjoint());
    out.rows_mut(k, n_rf - k)
        .copy_from(&complement.columns(0, n_rf - k).adjoint());
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AltMinSettings {
    /// Relative change of the surrogate that stops the loop.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for AltMinSettings {
    fn default() -> Self {
        AltMinSettings {
            tol: 1e-4,
            max_iter: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AltMinReport {
    pub iterations: usize,
    /// Surrogate objective (constant `‖F_opt‖²` included) after each iteration.
    pub surrogate_trace: Vec<f64>,
    pub true_objective: f64,
    pub converged: bool,
    pub candidate_set_sizes: Vec<usize>,
}

impl AltMinReport {
    pub fn mean_candidate_set_size(&self) -> f64 {
        if self.candidate_set_sizes.is_empty() {
            return 0.0;
        }
        self.candidate_set_sizes.iter().sum::<usize>() as f64 / self.candidate_set_sizes.len() as f64
    }
}

/// Alternating minimization of the surrogate.
///
/// Each iteration solves `(alpha, S)` for the current `F_DD`, then `F_DD`
/// for the new `(alpha, S)`. Stops when the surrogate changes by at most
/// `tol * max(1, |g|)` relative to the value before the digital update of
/// the first iteration, or to the previous iteration afterwards. The
/// returned precoder has `F_BB = alpha F_DD` (not yet normalized).
type InitFn = fn(&CMat, usize) -> Result<CMat>;
type UpdateFn = fn(&CMat, &SwitchMatrix, &PhaseBank, f64) -> Result<CMat>;

pub fn altmin(
    target: &TargetPrecoder,
    bank: &PhaseBank,
    regime: Regime,
    settings: AltMinSettings,
) -> Result<(HybridPrecoder, AltMinReport)> {
    let f_opt = &target.f_opt;
    let n_rf = bank.n_rf();
    if !(settings.tol > 0.0) {
        return Err(Error::InvalidConfig("altmin tolerance must be > 0".into()));
    }
    let (init, update): (InitFn, UpdateFn) = match regime {
        Regime::SingleCarrier => (init_fdd_sc, update_fdd_sc),
        Regime::Multicarrier => (init_fdd_mc, update_fdd_mc),
    };
    let mut f_dd = init(f_opt, n_rf)?;
    let norm_sq = frobenius_sq(f_opt);

    let mut trace = Vec::new();
    let mut sizes = Vec::new();
    let mut converged = false;
    let mut last = None;
    let max_iter = settings.max_iter.max(1);

    for _ in 0..max_iter {
        let step = solve_alpha_switch(f_opt, &f_dd, bank)?;
        let prev = match last {
            Some(g) => g,
            None => {
                // g = ‖F_opt‖² − ‖X‖² + ‖X − alpha S‖² before the F_DD update
                let x_sq: f64 = switch_target(f_opt, &f_dd, bank).iter().map(|v| v * v).sum();
                norm_sq - x_sq + step.objective
            }
        };
        f_dd = update(f_opt, &step.switch, bank, step.alpha)?;
        let g = surrogate_value(f_opt, &step.switch, bank, step.alpha, &f_dd);
        trace.push(g);
        sizes.push(step.candidate_set_size);
        let alpha = step.alpha;
        let switch = step.switch;
        last = Some(g);

        if (g - prev).abs() <= settings.tol * g.abs().max(1.0) {
            converged = true;
        }
        if converged || trace.len() == max_iter {
            let report = AltMinReport {
                iterations: trace.len(),
                true_objective: true_objective(f_opt, &switch, bank, alpha, &f_dd),
                surrogate_trace: trace,
                converged,
                candidate_set_sizes: sizes,
            };
            let hp = HybridPrecoder {
                switch,
                bank: bank.clone(),
                alpha,
                f_bb: &f_dd * real(alpha),
                f_dd,
                layout: target.layout,
            };
            return Ok((hp, report));
        }
    }
    unreachable!("loop returns on its last iteration")
}

const BD_RANK_TOL: f64 = 1e-10;

/// Per-subcarrier effective channels `W_k^H H_k S C F_BB,f` (`Ns x K Ns`).
fn effective_channels(ch: &ChannelSet, hp: &HybridPrecoder, combiners: &CombinerSet, f: usize) -> Vec<CMat> {
    let x = hp.subcarrier_matrix(f);
    (0..ch.n_users)
        .map(|k| combiners.combiner(k, f).adjoint() * ch.get(k, f) * &x)
        .collect()
}

/// Cascades a block-diagonalizing baseband stage on every subcarrier so
/// that, after the combiners, no user sees another user's streams.
pub fn bd_baseband(ch: &ChannelSet, hp: &HybridPrecoder, combiners: &CombinerSet) -> Result<HybridPrecoder> {
    let layout = hp.layout;
    let (k_users, ns) = (layout.n_users, layout.n_streams);
    if k_users == 1 {
        return Ok(hp.clone());
    }
    let width = k_users * ns;
    let mut out = hp.clone();
    for f in 0..layout.n_subcarriers {
        let eff = effective_channels(ch, hp, combiners, f);
        let mut d = CMat::zeros(width, width);
        for k in 0..k_users {
            let others: Vec<&CMat> = (0..k_users).filter(|&j| j != k).map(|j| &eff[j]).collect();
            let basis = null_space(&vstack(&others), BD_RANK_TOL);
            if basis.ncols() < ns {
                return Err(Error::BdInfeasible {
                    subcarrier: f,
                    user: k,
                    null_dim: basis.ncols(),
                    required: ns,
                });
            }
            let svd = SvdFactors::thin(&(&eff[k] * &basis));
            let block = &basis * svd.v.columns(0, ns);
            d.columns_mut(k * ns, ns).copy_from(&block);
        }
        let s = layout.subcarrier_start(f);
        let bb = hp.f_bb.columns(s, width) * &d;
        out.f_bb.columns_mut(s, width).copy_from(&bb);
        let dd = hp.f_dd.columns(s, width) * &d;
        out.f_dd.columns_mut(s, width).copy_from(&dd);
    }
    Ok(out)
}

/// Largest inter-user leakage `‖W_j^H H_j S C F_BB,k‖_F` over subcarriers
/// and user pairs `j != k`.
pub fn bd_leakage(ch: &ChannelSet, hp: &HybridPrecoder, combiners: &CombinerSet) -> f64 {
    let layout = hp.layout;
    let ns = layout.n_streams;
    let mut worst: f64 = 0.0;
    for f in 0..layout.n_subcarriers {
        let eff = effective_channels(ch, hp, combiners, f);
        for (j, e) in eff.iter().enumerate() {
            for k in (0..layout.n_users).filter(|&k| k != j) {
                worst = worst.max(e.columns(k * ns, ns).norm());
            }
        }
    }
    worst
}

/// Scales the digital stage so that `‖S C F_BB‖² = K Ns F`.
pub fn normalize_digital(hp: &HybridPrecoder) -> Result<HybridPrecoder> {
    let power = hp.transmit_power();
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::Normalization(format!(
            "‖S C F_BB‖² = {power}; the switch matrix has {} closed switches, alternating minimization returned a degenerate analog precoder",
            hp.switch.count_ones()
        )));
    }
    let budget = hp.layout.n_cols() as f64;
    let mut out = hp.clone();
    out.f_bb *= real((budget / power).sqrt());
    Ok(out)
}
