//! System configuration, clustered mm-wave channels over uniform planar
//! arrays, fully digital reference precoders and receive combiners.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fps::{self, AltMinSettings, PhaseBank, Regime};
use crate::linalg::{CMat, CVec, SvdFactors, C64};

/// Rectangular antenna grid, written `rowsxcols` in configuration files.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArrayGrid {
    pub rows: usize,
    pub cols: usize,
}

impl ArrayGrid {
    pub fn new(rows: usize, cols: usize) -> Self {
        ArrayGrid { rows, cols }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Most square factorization `rows x cols` of `n` with `rows <= cols`
    /// and `rows >= 2`. `None` for primes and `n < 4`.
    pub fn most_square(n: usize) -> Option<ArrayGrid> {
        let mut best = None;
        let mut r = 2;
        while r * r <= n {
            if n.is_multiple_of(r) {
                best = Some(ArrayGrid::new(r, n / r));
            }
            r += 1;
        }
        best
    }
}

impl fmt::Display for ArrayGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

impl FromStr for ArrayGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("array grid `{s}` is not of the form ROWSxCOLS"));
        let (r, c) = s.trim().split_once(['x', 'X', '*']).ok_or_else(bad)?;
        let rows = r.trim().parse().map_err(|_| bad())?;
        let cols = c.trim().parse().map_err(|_| bad())?;
        Ok(ArrayGrid::new(rows, cols))
    }
}

impl Serialize for ArrayGrid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ArrayGrid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CombinerMode {
    #[default]
    FullyDigital,
    HybridFps,
}

/// All dimensions, power and channel-model parameters of one experiment.
///
/// `snr_db` is the nominal SNR `P / (K Ns F sigma^2)` in dB.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub n_tx_antennas: usize,
    pub n_rx_antennas: usize,
    pub n_users: usize,
    pub n_subcarriers: usize,
    pub n_streams: usize,
    pub n_rf_tx: usize,
    pub n_rf_rx: usize,
    pub n_shifters: usize,
    pub snr_db: f64,
    pub rng_seed: u64,
    pub n_clusters: usize,
    pub n_rays: usize,
    pub angular_spread_deg: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tx_grid: Option<ArrayGrid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rx_grid: Option<ArrayGrid>,
    pub combiner: CombinerMode,
    pub altmin_tol: f64,
    pub altmin_max_iter: usize,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig::desk_su_sc()
    }
}

impl SystemConfig {
    /// Single-user single-carrier desk profile: 8x8 transmit array, 4x4
    /// receive array, four streams over four RF chains, 30 shifters.
    pub fn desk_su_sc() -> Self {
        SystemConfig {
            n_tx_antennas: 64,
            n_rx_antennas: 16,
            n_users: 1,
            n_subcarriers: 1,
            n_streams: 4,
            n_rf_tx: 4,
            n_rf_rx: 4,
            n_shifters: 30,
            snr_db: 0.0,
            rng_seed: 0,
            n_clusters: 5,
            n_rays: 10,
            angular_spread_deg: 10.0,
            tx_grid: Some(ArrayGrid::new(8, 8)),
            rx_grid: Some(ArrayGrid::new(4, 4)),
            combiner: CombinerMode::FullyDigital,
            altmin_tol: 1e-4,
            altmin_max_iter: 100,
        }
    }

    /// Two-user, 16-subcarrier desk profile.
    pub fn desk_mu_mc() -> Self {
        SystemConfig {
            n_users: 2,
            n_subcarriers: 16,
            n_streams: 2,
            n_rf_tx: 4,
            n_rf_rx: 2,
            ..SystemConfig::desk_su_sc()
        }
    }

    /// 144-antenna (12x12) base station, 16-antenna (4x4) users.
    pub fn paper_su_sc() -> Self {
        SystemConfig {
            n_tx_antennas: 144,
            tx_grid: Some(ArrayGrid::new(12, 12)),
            ..SystemConfig::desk_su_sc()
        }
    }

    /// Four users, 128 subcarriers, eight transmit RF chains, two streams.
    pub fn paper_mu_mc() -> Self {
        SystemConfig {
            n_users: 4,
            n_subcarriers: 128,
            n_streams: 2,
            n_rf_tx: 8,
            n_rf_rx: 2,
            ..SystemConfig::paper_su_sc()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_tx_antennas", self.n_tx_antennas),
            ("n_rx_antennas", self.n_rx_antennas),
            ("n_users", self.n_users),
            ("n_subcarriers", self.n_subcarriers),
            ("n_streams", self.n_streams),
            ("n_rf_tx", self.n_rf_tx),
            ("n_rf_rx", self.n_rf_rx),
            ("n_shifters", self.n_shifters),
            ("n_clusters", self.n_clusters),
            ("n_rays", self.n_rays),
            ("altmin_max_iter", self.altmin_max_iter),
        ];
        for (key, value) in positive {
            if value == 0 {
                return Err(Error::InvalidConfig(format!(
                    "`{key}` must be a positive integer"
                )));
            }
        }
        if !self.snr_db.is_finite() {
            return Err(Error::InvalidConfig("`snr_db` must be finite".into()));
        }
        if !(self.angular_spread_deg >= 0.0 && self.angular_spread_deg.is_finite()) {
            return Err(Error::InvalidConfig(
                "`angular_spread_deg` must be finite and >= 0".into(),
            ));
        }
        if !(self.altmin_tol > 0.0) {
            return Err(Error::InvalidConfig("`altmin_tol` must be > 0".into()));
        }
        let ks = self.n_users * self.n_streams;
        if !(ks <= self.n_rf_tx && self.n_rf_tx < self.n_tx_antennas) {
            return Err(Error::InfeasibleDimensions(format!(
                "transmitter requires K*Ns <= N_RF^t < N_t, got K*Ns = {ks}, N_RF^t = {}, N_t = {}",
                self.n_rf_tx, self.n_tx_antennas
            )));
        }
        if !(self.n_streams <= self.n_rf_rx && self.n_rf_rx < self.n_rx_antennas) {
            return Err(Error::InfeasibleDimensions(format!(
                "receiver requires Ns <= N_RF^r < N_r, got Ns = {}, N_RF^r = {}, N_r = {}",
                self.n_streams, self.n_rf_rx, self.n_rx_antennas
            )));
        }
        self.tx_array()?;
        self.rx_array()?;
        Ok(())
    }

    pub fn tx_array(&self) -> Result<ArrayGrid> {
        resolve_grid("tx_grid", self.tx_grid, self.n_tx_antennas)
    }

    pub fn rx_array(&self) -> Result<ArrayGrid> {
        resolve_grid("rx_grid", self.rx_grid, self.n_rx_antennas)
    }

    pub fn snr_linear(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    /// Noise power with the total transmit power normalized to `K Ns F`.
    pub fn noise_power(&self) -> f64 {
        1.0 / self.snr_linear()
    }

    pub fn layout(&self) -> BlockLayout {
        BlockLayout::new(self.n_users, self.n_subcarriers, self.n_streams)
    }

    pub fn altmin_settings(&self) -> AltMinSettings {
        AltMinSettings {
            tol: self.altmin_tol,
            max_iter: self.altmin_max_iter,
        }
    }

    /// Total transmit power budget `K Ns F`.
    pub fn power_budget(&self) -> f64 {
        (self.n_users * self.n_streams * self.n_subcarriers) as f64
    }
}

fn resolve_grid(key: &str, grid: Option<ArrayGrid>, n: usize) -> Result<ArrayGrid> {
    match grid {
        Some(g) if g.len() == n && g.rows > 0 => Ok(g),
        Some(g) => Err(Error::InvalidConfig(format!(
            "`{key}` = {g} does not tile {n} antennas"
        ))),
        None => ArrayGrid::most_square(n).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "{n} antennas do not factor into a rectangular planar grid; set `{key}` explicitly"
            ))
        }),
    }
}

/// Column layout of concatenated per-(user, subcarrier) blocks.
///
/// Block `(k, f)` (zero based) occupies block index `k + K f`, i.e. the
/// users of one subcarrier are contiguous.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLayout {
    pub n_users: usize,
    pub n_subcarriers: usize,
    pub n_streams: usize,
}

impl BlockLayout {
    pub fn new(n_users: usize, n_subcarriers: usize, n_streams: usize) -> Self {
        BlockLayout {
            n_users,
            n_subcarriers,
            n_streams,
        }
    }

    pub fn n_cols(&self) -> usize {
        self.n_users * self.n_subcarriers * self.n_streams
    }

    pub fn block_start(&self, user: usize, subcarrier: usize) -> usize {
        (user + self.n_users * subcarrier) * self.n_streams
    }

    /// First column of subcarrier `f`; the subcarrier spans `K Ns` columns.
    pub fn subcarrier_start(&self, subcarrier: usize) -> usize {
        self.block_start(0, subcarrier)
    }
}

/// Unit-norm UPA response with half-wavelength spacing.
///
/// Element `(m, n)` carries phase `pi (m sin(az) sin(el) + n cos(el))`.
pub fn upa_steering(grid: ArrayGrid, azimuth: f64, elevation: f64) -> CVec {
    let n = grid.len();
    let scale = 1.0 / (n as f64).sqrt();
    let u = azimuth.sin() * elevation.sin();
    let v = elevation.cos();
    CVec::from_fn(n, |idx, _| {
        let m = (idx / grid.cols) as f64;
        let c = (idx % grid.cols) as f64;
        C64::from_polar(scale, PI * (m * u + c * v))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub gain: C64,
    pub aod_azimuth: f64,
    pub aod_elevation: f64,
    pub aoa_azimuth: f64,
    pub aoa_elevation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub delay_tap: usize,
    pub rays: Vec<Ray>,
}

/// Per-user, per-subcarrier channel matrices `H_{k,f}` (`N_r x N_t`)
/// together with the cluster parameters that generated them.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet {
    pub n_users: usize,
    pub n_subcarriers: usize,
    channels: Vec<CMat>,
    pub cluster_params: Vec<Vec<Cluster>>,
}

impl ChannelSet {
    pub fn get(&self, user: usize, subcarrier: usize) -> &CMat {
        &self.channels[user + self.n_users * subcarrier]
    }

    pub fn iter(&self) -> impl Iterator<Item = &CMat> {
        self.channels.iter()
    }

    /// Wraps explicit matrices indexed `[subcarrier][user]`, with no
    /// cluster parameters attached.
    pub fn from_matrices(per_subcarrier: Vec<Vec<CMat>>) -> Result<Self> {
        let n_subcarriers = per_subcarrier.len();
        let n_users = per_subcarrier.first().map_or(0, Vec::len);
        if n_subcarriers == 0 || n_users == 0 || per_subcarrier.iter().any(|v| v.len() != n_users) {
            return Err(Error::Shape(
                "channel matrices must form a non-empty F x K grid".into(),
            ));
        }
        let shape = per_subcarrier[0][0].shape();
        let channels: Vec<CMat> = per_subcarrier.into_iter().flatten().collect();
        if channels.iter().any(|h| h.shape() != shape) {
            return Err(Error::Shape("all channel matrices must share one shape".into()));
        }
        Ok(ChannelSet {
            n_users,
            n_subcarriers,
            channels,
            cluster_params: vec![Vec::new(); n_users],
        })
    }

    /// Builds `H_{k,f} = g sum_cl exp(-j 2 pi f d_cl / F) sum_ray gain a_r a_t^H`
    /// with `g = sqrt(N_t N_r / (N_cl N_ray))`, where the ray count is the
    /// configured `n_clusters * n_rays`.
    pub fn synthesize(cfg: &SystemConfig, cluster_params: Vec<Vec<Cluster>>) -> Result<Self> {
        let tx = cfg.tx_array()?;
        let rx = cfg.rx_array()?;
        if cluster_params.len() != cfg.n_users {
            return Err(Error::Shape(format!(
                "expected cluster parameters for {} users, got {}",
                cfg.n_users,
                cluster_params.len()
            )));
        }
        let n_paths = (cfg.n_clusters * cfg.n_rays) as f64;
        let scale = ((cfg.n_tx_antennas * cfg.n_rx_antennas) as f64 / n_paths).sqrt();
        let n_sub = cfg.n_subcarriers;

        let mut per_user_taps: Vec<Vec<(usize, CMat)>> = Vec::with_capacity(cfg.n_users);
        for clusters in &cluster_params {
            let mut taps = Vec::with_capacity(clusters.len());
            for cl in clusters {
                let mut h = CMat::zeros(cfg.n_rx_antennas, cfg.n_tx_antennas);
                for ray in &cl.rays {
                    let ar = upa_steering(rx, ray.aoa_azimuth, ray.aoa_elevation);
                    let at = upa_steering(tx, ray.aod_azimuth, ray.aod_elevation);
                    h += (ar * ray.gain) * at.adjoint();
                }
                taps.push((cl.delay_tap, h));
            }
            per_user_taps.push(taps);
        }

        let mut channels = Vec::with_capacity(cfg.n_users * n_sub);
        for f in 0..n_sub {
            for taps in &per_user_taps {
                let mut h = CMat::zeros(cfg.n_rx_antennas, cfg.n_tx_antennas);
                for (d, tap) in taps {
                    let phase = -2.0 * PI * (f * d) as f64 / n_sub as f64;
                    h += tap * C64::from_polar(scale, phase);
                }
                channels.push(h);
            }
        }
        Ok(ChannelSet {
            n_users: cfg.n_users,
            n_subcarriers: n_sub,
            channels,
            cluster_params,
        })
    }
}

fn laplacian<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    let u: f64 = rng.random::<f64>() - 0.5;
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws a clustered channel realization for every user.
///
/// Cluster mean azimuths are uniform on `[-pi, pi)`, mean elevations
/// uniform on `[0, pi)`; ray offsets are Laplacian with the configured
/// angular spread (standard deviation); ray gains are `CN(0, 1)`. Cluster
/// `i` is assigned delay tap `i`.
pub fn generate_channels<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<ChannelSet> {
    cfg.tx_array()?;
    cfg.rx_array()?;
    let b = cfg.angular_spread_deg.to_radians() / std::f64::consts::SQRT_2;
    let mut params = Vec::with_capacity(cfg.n_users);
    for _ in 0..cfg.n_users {
        let mut clusters = Vec::with_capacity(cfg.n_clusters);
        for tap in 0..cfg.n_clusters {
            let aod_az = rng.random_range(-PI..PI);
            let aod_el = rng.random_range(0.0..PI);
            let aoa_az = rng.random_range(-PI..PI);
            let aoa_el = rng.random_range(0.0..PI);
            let rays = (0..cfg.n_rays)
                .map(|_| Ray {
                    gain: complex_gaussian(rng),
                    aod_azimuth: aod_az + laplacian(rng, b),
                    aod_elevation: aod_el + laplacian(rng, b),
                    aoa_azimuth: aoa_az + laplacian(rng, b),
                    aoa_elevation: aoa_el + laplacian(rng, b),
                })
                .collect();
            clusters.push(Cluster { delay_tap: tap, rays });
        }
        params.push(clusters);
    }
    ChannelSet::synthesize(cfg, params)
}

/// Anything that yields an `N_t x Ns` transmit matrix per (user, subcarrier).
pub trait Precoder {
    fn layout(&self) -> BlockLayout;

    /// Effective antenna-domain precoder of the whole subcarrier
    /// (`N_t x K Ns`, users in order).
    fn subcarrier_matrix(&self, subcarrier: usize) -> CMat;
}

/// Concatenated fully digital precoder `[F(1,1) .. F(K,F)]`, `N_t x K Ns F`.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetPrecoder {
    pub f_opt: CMat,
    pub layout: BlockLayout,
}

impl TargetPrecoder {
    pub fn new(f_opt: CMat, layout: BlockLayout) -> Result<Self> {
        if f_opt.ncols() != layout.n_cols() {
            return Err(Error::Shape(format!(
                "target has {} columns, layout expects {}",
                f_opt.ncols(),
                layout.n_cols()
            )));
        }
        Ok(TargetPrecoder { f_opt, layout })
    }

    pub fn block(&self, user: usize, subcarrier: usize) -> CMat {
        let s = self.layout.block_start(user, subcarrier);
        self.f_opt.columns(s, self.layout.n_streams).into_owned()
    }
}

impl Precoder for TargetPrecoder {
    fn layout(&self) -> BlockLayout {
        self.layout
    }

    fn subcarrier_matrix(&self, subcarrier: usize) -> CMat {
        let s = self.layout.subcarrier_start(subcarrier);
        let w = self.layout.n_users * self.layout.n_streams;
        self.f_opt.columns(s, w).into_owned()
    }
}

const RANK_TOL: f64 = 1e-10;

/// Eigenbeamforming (single user) or block diagonalization followed by
/// eigenbeamforming (multiuser), with unit-norm streams so each block has
/// squared Frobenius norm `Ns`.
pub fn fully_digital_precoder(ch: &ChannelSet, cfg: &SystemConfig) -> Result<TargetPrecoder> {
    let layout = cfg.layout();
    let ns = cfg.n_streams;
    let nt = ch.get(0, 0).ncols();
    let mut f_opt = CMat::zeros(nt, layout.n_cols());
    for f in 0..ch.n_subcarriers {
        for k in 0..ch.n_users {
            let projected = if ch.n_users == 1 {
                ch.get(k, f).clone()
            } else {
                let others: Vec<&CMat> = (0..ch.n_users)
                    .filter(|&j| j != k)
                    .map(|j| ch.get(j, f))
                    .collect();
                let stacked = vstack(&others);
                let svd = SvdFactors::thin(&stacked);
                let rank = svd.rank(RANK_TOL);
                if nt - rank < ns {
                    return Err(Error::InfeasibleDimensions(format!(
                        "block diagonalization for user {k} on subcarrier {f} leaves a {}-dimensional null space, {ns} streams requested",
                        nt - rank
                    )));
                }
                // H_k (I - V_r V_r^H): its row space lies in the null space
                // of the other users' channels
                let vr = svd.v.columns(0, rank);
                let h = ch.get(k, f);
                h - (h * vr) * vr.adjoint()
            };
            let svd = SvdFactors::thin(&projected);
            if svd.rank(RANK_TOL) < ns {
                return Err(Error::InfeasibleDimensions(format!(
                    "user {k} on subcarrier {f} supports only {} streams after interference nulling, {ns} requested",
                    svd.rank(RANK_TOL)
                )));
            }
            let block = svd.v.columns(0, ns);
            let start = layout.block_start(k, f);
            f_opt.columns_mut(start, ns).copy_from(&block);
        }
    }
    TargetPrecoder::new(f_opt, layout)
}

pub(crate) fn vstack(mats: &[&CMat]) -> CMat {
    let cols = mats.first().map_or(0, |m| m.ncols());
    let rows: usize = mats.iter().map(|m| m.nrows()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut r = 0;
    for m in mats {
        out.rows_mut(r, m.nrows()).copy_from(m);
        r += m.nrows();
    }
    out
}

/// Receive combiners `W_{k,f} = W_RF,k W_BB,k,f`.
///
/// In fully digital mode `W_RF,k` is the `N_r x N_r` identity and
/// `W_BB,k,f` holds orthonormal columns.
#[derive(Clone, Debug, PartialEq)]
pub struct CombinerSet {
    pub mode: CombinerMode,
    pub w_rf: Vec<CMat>,
    /// Indexed `[user][subcarrier]`.
    pub w_bb: Vec<Vec<CMat>>,
}

impl CombinerSet {
    pub fn combiner(&self, user: usize, subcarrier: usize) -> CMat {
        &self.w_rf[user] * &self.w_bb[user][subcarrier]
    }
}

/// Top-`Ns` left singular vectors of `H_{k,f} F_{k,f}` per user and
/// subcarrier; in hybrid mode these targets are factorized per user with
/// the fixed-phase-shifter alternating minimization (no power constraint).
pub fn design_combiners<P: Precoder + ?Sized>(
    ch: &ChannelSet,
    precoder: &P,
    cfg: &SystemConfig,
    mode: CombinerMode,
) -> Result<CombinerSet> {
    let layout = precoder.layout();
    let ns = layout.n_streams;
    let nr = ch.get(0, 0).nrows();
    let mut digital = vec![Vec::with_capacity(ch.n_subcarriers); ch.n_users];
    for f in 0..ch.n_subcarriers {
        let fm = precoder.subcarrier_matrix(f);
        for (k, per_user) in digital.iter_mut().enumerate() {
            let block = fm.columns(k * ns, ns);
            let eff = ch.get(k, f) * block;
            if eff.iter().all(|z| z.norm_sqr() == 0.0) {
                return Err(Error::DegenerateInput(format!(
                    "effective channel of user {k} on subcarrier {f} is zero"
                )));
            }
            let svd = SvdFactors::thin(&eff);
            per_user.push(svd.u.columns(0, ns).into_owned());
        }
    }

    match mode {
        CombinerMode::FullyDigital => Ok(CombinerSet {
            mode,
            w_rf: vec![CMat::identity(nr, nr); ch.n_users],
            w_bb: digital,
        }),
        CombinerMode::HybridFps => {
            let bank = PhaseBank::uniform(cfg.n_shifters, cfg.n_rf_rx)?;
            let rx_layout = BlockLayout::new(1, ch.n_subcarriers, ns);
            let mut w_rf = Vec::with_capacity(ch.n_users);
            let mut w_bb = Vec::with_capacity(ch.n_users);
            for blocks in digital {
                let refs: Vec<&CMat> = blocks.iter().collect();
                let target = TargetPrecoder::new(hstack(&refs), rx_layout)?;
                let regime = Regime::for_dims(rx_layout.n_cols(), cfg.n_rf_rx);
                let (hp, _) = fps::altmin(&target, &bank, regime, cfg.altmin_settings())?;
                w_rf.push(hp.analog());
                w_bb.push(
                    (0..ch.n_subcarriers)
                        .map(|f| hp.f_bb.columns(f * ns, ns).into_owned())
                        .collect(),
                );
            }
            Ok(CombinerSet { mode, w_rf, w_bb })
        }
    }
}

pub(crate) fn hstack(mats: &[&CMat]) -> CMat {
    let rows = mats.first().map_or(0, |m| m.nrows());
    let cols: usize = mats.iter().map(|m| m.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut c = 0;
    for m in mats {
        out.columns_mut(c, m.ncols()).copy_from(m);
        c += m.ncols();
    }
    out
}
