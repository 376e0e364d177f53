//! Spectral efficiency of fully digital and FPS hybrid precoders, and
//! Monte-Carlo sweeps over SNR or phase-shifter count.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fps::{altmin, bd_baseband, bd_leakage, normalize_digital, PhaseBank, Regime};
use crate::linalg::{log2_det_hpd, real, CMat};
use crate::sysmodel::{
    design_combiners, fully_digital_precoder, generate_channels, ChannelSet, CombinerSet, Precoder,
    SystemConfig,
};

/// Ridge added to a covariance whose Cholesky factorization fails.
const REGULARIZATION: f64 = 1e-12;

/// Sum rate averaged over subcarriers, in bits/s/Hz.
///
/// Each stream of each user carries power `1 / Ns` relative to the noise
/// power `1 / SNR`, with the precoder normalized to total power `K Ns F`.
/// For user `k` on subcarrier `f` with combiner `W` and `G_j = W^H H F_j`,
///
/// `R_kf = log2 det(I + Q^{-1} G_k G_k^H / Ns)`,
/// `Q = sigma² W^H W + sum_{j != k} G_j G_j^H / Ns`.
pub fn spectral_efficiency<P: Precoder + ?Sized>(
    ch: &ChannelSet,
    precoder: &P,
    combiners: &CombinerSet,
    cfg: &SystemConfig,
) -> Result<f64> {
    let layout = precoder.layout();
    let ns = layout.n_streams;
    if layout.n_users != ch.n_users || layout.n_subcarriers != ch.n_subcarriers {
        return Err(Error::Shape(
            "precoder layout does not match the channel set".into(),
        ));
    }
    let noise = cfg.noise_power();
    let stream_power = 1.0 / ns as f64;
    let mut total = 0.0;
    for f in 0..ch.n_subcarriers {
        let x = precoder.subcarrier_matrix(f);
        for k in 0..ch.n_users {
            let w = combiners.combiner(k, f);
            let g = w.adjoint() * ch.get(k, f) * &x;
            let mut interference = w.adjoint() * &w * real(noise);
            for j in (0..ch.n_users).filter(|&j| j != k) {
                let gj = g.columns(j * ns, ns);
                interference += gj * gj.adjoint() * real(stream_power);
            }
            let gk = g.columns(k * ns, ns);
            let signal = gk * gk.adjoint() * real(stream_power);
            total += log_det_ratio(&(&interference + &signal), &interference, k, f);
        }
    }
    Ok(total / ch.n_subcarriers as f64)
}

fn log_det_ratio(num: &CMat, den: &CMat, user: usize, subcarrier: usize) -> f64 {
    if let (Some(a), Some(b)) = (log2_det_hpd(num), log2_det_hpd(den)) {
        return (a - b).max(0.0);
    }
    log::warn!(
        "singular noise covariance for user {user} on subcarrier {subcarrier}; regularizing with {REGULARIZATION:e} I"
    );
    let ridge = CMat::identity(den.nrows(), den.ncols()) * real(REGULARIZATION);
    let a = log2_det_hpd(&(num + &ridge)).unwrap_or(0.0);
    let b = log2_det_hpd(&(den + &ridge)).unwrap_or(0.0);
    (a - b).max(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    FullyDigital,
    FpsAltmin,
}

impl Algorithm {
    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::FullyDigital => "fully-digital",
            Algorithm::FpsAltmin => "fps-altmin",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fully-digital" | "digital" | "fd" => Ok(Algorithm::FullyDigital),
            "fps-altmin" | "fps" | "altmin" => Ok(Algorithm::FpsAltmin),
            other => Err(Error::InvalidConfig(format!(
                "unknown algorithm `{other}` (expected fully-digital or fps-altmin)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "kebab-case")]
pub enum Sweep {
    Snr(Vec<f64>),
    Shifters(Vec<usize>),
    Single,
}

impl Sweep {
    pub fn variable(&self) -> &'static str {
        match self {
            Sweep::Snr(_) => "snr_db",
            Sweep::Shifters(_) => "n_shifters",
            Sweep::Single => "single",
        }
    }

    /// `(sweep value, configuration)` for every point.
    pub fn points(&self, base: &SystemConfig) -> Vec<(f64, SystemConfig)> {
        match self {
            Sweep::Snr(values) => values
                .iter()
                .map(|&snr_db| {
                    (
                        snr_db,
                        SystemConfig {
                            snr_db,
                            ..base.clone()
                        },
                    )
                })
                .collect(),
            Sweep::Shifters(values) => values
                .iter()
                .map(|&n_shifters| {
                    (
                        n_shifters as f64,
                        SystemConfig {
                            n_shifters,
                            ..base.clone()
                        },
                    )
                })
                .collect(),
            Sweep::Single => vec![(0.0, base.clone())],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationRecord {
    pub index: usize,
    pub seed: u64,
    pub spectral_efficiency_bits_per_s_per_hz: f64,
    pub altmin_iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub altmin_converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_candidate_set_size: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surrogate_trace: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub true_objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bd_leakage: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationFailure {
    pub index: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub sweep_var: String,
    pub sweep_value: f64,
    pub algorithm_tag: String,
    pub per_realization: Vec<RealizationRecord>,
    pub failures: Vec<RealizationFailure>,
    pub mean_se: f64,
    /// Sample standard deviation of the per-realization values.
    pub std_se: f64,
    pub mean_iterations: f64,
    pub mean_candidate_set_size: Option<f64>,
    /// How the rate is aggregated over subcarriers.
    pub se_normalization: String,
    pub config_echo: SystemConfig,
    /// Wall time of the point; not part of the deterministic output.
    pub runtime_ms: f64,
}

impl EvalResult {
    pub fn n_realizations(&self) -> usize {
        self.per_realization.len()
    }

    pub fn standard_error(&self) -> f64 {
        let n = self.per_realization.len();
        if n == 0 {
            0.0
        } else {
            self.std_se / (n as f64).sqrt()
        }
    }
}

/// Everything produced by one realization of one pipeline.
pub struct PipelineOutput {
    pub channels: ChannelSet,
    pub combiners: CombinerSet,
    pub record: RealizationRecord,
}

/// Channel draw, target construction and one precoding pipeline:
/// fully digital, or AltMin → combiners → BD (K > 1) → normalization.
pub fn run_realization(cfg: &SystemConfig, algorithm: Algorithm, index: usize) -> Result<PipelineOutput> {
    let seed = cfg.rng_seed.wrapping_add(index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ch = generate_channels(cfg, &mut rng)?;
    let target = fully_digital_precoder(&ch, cfg)?;
    let mut record = RealizationRecord {
        index,
        seed,
        spectral_efficiency_bits_per_s_per_hz: 0.0,
        altmin_iterations: 0,
        altmin_converged: None,
        mean_candidate_set_size: None,
        surrogate_trace: None,
        true_objective: None,
        bd_leakage: None,
    };
    let combiners = match algorithm {
        Algorithm::FullyDigital => {
            let combiners = design_combiners(&ch, &target, cfg, cfg.combiner)?;
            record.spectral_efficiency_bits_per_s_per_hz =
                spectral_efficiency(&ch, &target, &combiners, cfg)?;
            combiners
        }
        Algorithm::FpsAltmin => {
            let bank = PhaseBank::uniform(cfg.n_shifters, cfg.n_rf_tx)?;
            let regime = Regime::for_dims(target.layout.n_cols(), cfg.n_rf_tx);
            let (mut hp, report) = altmin(&target, &bank, regime, cfg.altmin_settings())?;
            let combiners = design_combiners(&ch, &hp, cfg, cfg.combiner)?;
            if cfg.n_users > 1 {
                hp = bd_baseband(&ch, &hp, &combiners)?;
            }
            let hp = normalize_digital(&hp)?;
            if cfg.n_users > 1 {
                record.bd_leakage = Some(bd_leakage(&ch, &hp, &combiners));
            }
            record.spectral_efficiency_bits_per_s_per_hz = spectral_efficiency(&ch, &hp, &combiners, cfg)?;
            record.altmin_iterations = report.iterations;
            record.altmin_converged = Some(report.converged);
            record.mean_candidate_set_size = Some(report.mean_candidate_set_size());
            record.true_objective = Some(report.true_objective);
            record.surrogate_trace = Some(report.surrogate_trace);
            combiners
        }
    };
    Ok(PipelineOutput {
        channels: ch,
        combiners,
        record,
    })
}

fn run_indices(cfg: &SystemConfig, algorithm: Algorithm, n: usize) -> Vec<Result<RealizationRecord>> {
    let one = |i: usize| run_realization(cfg, algorithm, i).map(|out| out.record);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(one).collect()
    }
}

struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    fn start() -> Self {
        Stopwatch {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    fn elapsed_ms(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        {
            self.start.elapsed().as_secs_f64() * 1e3
        }
        #[cfg(target_arch = "wasm32")]
        {
            0.0
        }
    }
}

/// Runs every sweep point for every algorithm. Realization `i` uses seed
/// `rng_seed + i`, so all algorithms at a point see identical channels.
/// Failed realizations are logged, recorded and excluded from the
/// statistics.
pub fn run_sweep(
    cfg_base: &SystemConfig,
    sweep: &Sweep,
    algorithms: &[Algorithm],
    n_realizations: usize,
) -> Result<Vec<EvalResult>> {
    if n_realizations == 0 {
        return Err(Error::InvalidConfig(
            "at least one realization is required".into(),
        ));
    }
    if algorithms.is_empty() {
        return Err(Error::InvalidConfig("at least one algorithm is required".into()));
    }
    let points = sweep.points(cfg_base);
    for (_, cfg) in &points {
        cfg.validate()?;
    }
    let mut out = Vec::with_capacity(points.len() * algorithms.len());
    for (value, cfg) in points {
        for &algorithm in algorithms {
            let clock = Stopwatch::start();
            let mut records = Vec::with_capacity(n_realizations);
            let mut failures = Vec::new();
            for (i, result) in run_indices(&cfg, algorithm, n_realizations)
                .into_iter()
                .enumerate()
            {
                match result {
                    Ok(r) => records.push(r),
                    Err(e) => {
                        log::warn!(
                            "{} realization {i} at {}={value} failed: {e}",
                            algorithm,
                            sweep.variable()
                        );
                        failures.push(RealizationFailure {
                            index: i,
                            seed: cfg.rng_seed.wrapping_add(i as u64),
                            error: e.to_string(),
                        });
                    }
                }
            }
            let runtime_ms = clock.elapsed_ms();
            log::info!(
                "{}={value} {algorithm}: {} realizations, {} failed",
                sweep.variable(),
                records.len(),
                failures.len()
            );
            out.push(aggregate(
                sweep.variable(),
                value,
                algorithm,
                cfg.clone(),
                records,
                failures,
                runtime_ms,
            ));
        }
    }
    Ok(out)
}

fn aggregate(
    sweep_var: &str,
    sweep_value: f64,
    algorithm: Algorithm,
    cfg: SystemConfig,
    records: Vec<RealizationRecord>,
    failures: Vec<RealizationFailure>,
    runtime_ms: f64,
) -> EvalResult {
    let values: Vec<f64> = records
        .iter()
        .map(|r| r.spectral_efficiency_bits_per_s_per_hz)
        .collect();
    let (mean_se, std_se) = mean_std(&values);
    let n = records.len().max(1) as f64;
    let mean_iterations = records.iter().map(|r| r.altmin_iterations as f64).sum::<f64>() / n;
    let sizes: Vec<f64> = records.iter().filter_map(|r| r.mean_candidate_set_size).collect();
    let mean_candidate_set_size = (!sizes.is_empty()).then(|| sizes.iter().sum::<f64>() / sizes.len() as f64);
    EvalResult {
        sweep_var: sweep_var.to_string(),
        sweep_value,
        algorithm_tag: algorithm.tag().to_string(),
        per_realization: records,
        failures,
        mean_se,
        std_se,
        mean_iterations,
        mean_candidate_set_size,
        se_normalization: "per-subcarrier-average".to_string(),
        config_echo: cfg,
        runtime_ms,
    }
}

/// Mean and sample standard deviation (0 for fewer than two values).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CMat, C64};
    use crate::oracle::eigen_rate_oracle;
    use crate::sysmodel::{BlockLayout, CombinerMode, TargetPrecoder};

    fn scalar_cfg(snr_db: f64) -> SystemConfig {
        SystemConfig {
            n_streams: 1,
            snr_db,
            ..SystemConfig::desk_su_sc()
        }
    }

    #[test]
    fn unit_snr_scalar_link_is_one_bit() {
        let one = CMat::from_element(1, 1, real(1.0));
        let ch = ChannelSet::from_matrices(vec![vec![one.clone()]]).unwrap();
        let precoder = TargetPrecoder::new(one.clone(), BlockLayout::new(1, 1, 1)).unwrap();
        let w = CombinerSet {
            mode: CombinerMode::FullyDigital,
            w_rf: vec![one.clone()],
            w_bb: vec![vec![one]],
        };
        let r = spectral_efficiency(&ch, &precoder, &w, &scalar_cfg(0.0)).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_precoder_has_zero_rate() {
        let h = CMat::from_fn(3, 4, |i, j| C64::new(i as f64, j as f64));
        let ch = ChannelSet::from_matrices(vec![vec![h]]).unwrap();
        let precoder = TargetPrecoder::new(CMat::zeros(4, 1), BlockLayout::new(1, 1, 1)).unwrap();
        let w = CombinerSet {
            mode: CombinerMode::FullyDigital,
            w_rf: vec![CMat::identity(3, 3)],
            w_bb: vec![vec![CMat::identity(3, 1)]],
        };
        let r = spectral_efficiency(&ch, &precoder, &w, &scalar_cfg(10.0)).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn fully_digital_matches_eigen_rate() {
        let cfg = SystemConfig {
            snr_db: 5.0,
            ..SystemConfig::desk_su_sc()
        };
        for seed in 0..5 {
            let cfg = SystemConfig {
                rng_seed: seed,
                ..cfg.clone()
            };
            let out = run_realization(&cfg, Algorithm::FullyDigital, 0).unwrap();
            let oracle = eigen_rate_oracle(out.channels.get(0, 0), cfg.snr_linear(), cfg.n_streams);
            let se = out.record.spectral_efficiency_bits_per_s_per_hz;
            assert!((se - oracle).abs() < 1e-9, "se {se} oracle {oracle}");
        }
    }

    #[test]
    fn minimal_sweep_has_one_entry() {
        let res = run_sweep(
            &SystemConfig::desk_su_sc(),
            &Sweep::Snr(vec![0.0]),
            &[Algorithm::FullyDigital],
            1,
        )
        .unwrap();
        assert_eq!(res.len(), 1);
        assert_eq!(res[0].per_realization.len(), 1);
        assert_eq!(res[0].std_se, 0.0);
    }

    #[test]
    fn sweep_rejects_zero_realizations() {
        assert!(run_sweep(
            &SystemConfig::desk_su_sc(),
            &Sweep::Single,
            &[Algorithm::FpsAltmin],
            0
        )
        .is_err());
    }

    #[test]
    fn algorithm_names_parse() {
        assert_eq!("fps-altmin".parse::<Algorithm>().unwrap(), Algorithm::FpsAltmin);
        assert_eq!(
            "fully-digital".parse::<Algorithm>().unwrap(),
            Algorithm::FullyDigital
        );
        assert!("omp".parse::<Algorithm>().is_err());
    }

    #[test]
    fn mean_std_basic() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert!((m - 2.0).abs() < 1e-15 && (s - 1.0).abs() < 1e-15);
    }
}
