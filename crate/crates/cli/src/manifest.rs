use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fps_precoding::sysmodel::ArrayGrid;
use fps_precoding::{Algorithm, Error as CoreError, Sweep, SystemConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_SNR_DB: [f64; 5] = [-10.0, -5.0, 0.0, 5.0, 10.0];
pub const DEFAULT_SHIFTERS: [usize; 6] = [5, 10, 15, 20, 25, 30];
pub const DESK_REALIZATIONS: usize = 100;
pub const PAPER_REALIZATIONS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    Snr,
    Nc,
    Single,
}

impl FromStr for SweepKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "snr" => Ok(SweepKind::Snr),
            "nc" | "n_shifters" | "n-shifters" | "shifters" => Ok(SweepKind::Nc),
            "single" => Ok(SweepKind::Single),
            other => Err(format!("unknown sweep `{other}` (expected snr, nc or single)")),
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepKind::Snr => "snr",
            SweepKind::Nc => "nc",
            SweepKind::Single => "single",
        })
    }
}

/// Everything needed to reproduce a run. The resolved system configuration
/// is stored alongside the path so the output is self-contained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_path: PathBuf,
    pub sweep: SweepKind,
    pub sweep_values: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub realizations: usize,
    pub output_path: PathBuf,
    pub seed: u64,
    pub paper_scale: bool,
    pub timing: bool,
    pub timestamp_unix_s: u64,
    pub version: String,
    pub config: SystemConfig,
}

impl RunManifest {
    pub fn sweep_spec(&self) -> Sweep {
        match self.sweep {
            SweepKind::Snr => Sweep::Snr(self.sweep_values.clone()),
            SweepKind::Nc => Sweep::Shifters(self.sweep_values.iter().map(|&v| v as usize).collect()),
            SweepKind::Single => Sweep::Single,
        }
    }

    /// Header lines written in front of every output file. Only the
    /// timestamp line differs between reruns of the same manifest.
    pub fn header_lines(&self) -> Vec<String> {
        let config = serde_json::to_string(&self.config).unwrap_or_default();
        let algos: Vec<&str> = self.algorithms.iter().map(|a| a.tag()).collect();
        let values: Vec<String> = self.sweep_values.iter().map(|v| v.to_string()).collect();
        vec![
            format!("config_path: {}", self.config_path.display()),
            format!("sweep: {}", self.sweep),
            format!("sweep_values: [{}]", values.join(", ")),
            format!("algorithms: [{}]", algos.join(", ")),
            format!("realizations: {}", self.realizations),
            format!("output_path: {}", self.output_path.display()),
            format!("seed: {}", self.seed),
            format!("paper_scale: {}", self.paper_scale),
            format!("timing: {}", self.timing),
            format!("version: {}", self.version),
            format!("config: {config}"),
            format!("timestamp_unix_s: {}", self.timestamp_unix_s),
        ]
    }
}

/// Reads a flat TOML table of `SystemConfig` keys. Keys that are absent
/// keep their desk-profile defaults.
pub fn load_config(path: &Path) -> Result<SystemConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<SystemConfig, CliError> {
    toml::from_str::<SystemConfig>(text).map_err(|e| {
        let msg = e.message().to_string();
        match unknown_key(&msg) {
            Some(key) => CliError::Config(format!("unknown configuration key `{key}`")),
            None => CliError::Config(format!("invalid configuration: {}", msg.trim())),
        }
    })
}

fn unknown_key(message: &str) -> Option<&str> {
    let rest = message.strip_prefix("unknown field `")?;
    rest.split('`').next()
}

/// Applies the reproduction-scale overrides: a 12x12 transmit array and,
/// for multicarrier configurations, 128 subcarriers.
pub fn apply_paper_scale(cfg: &mut SystemConfig) {
    cfg.n_tx_antennas = 144;
    cfg.tx_grid = Some(ArrayGrid::new(12, 12));
    if cfg.n_subcarriers > 1 {
        cfg.n_subcarriers = 128;
    }
}

pub fn parse_algorithms(list: &str) -> Result<Vec<Algorithm>, CliError> {
    let algos = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<Algorithm>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(classify)?;
    if algos.is_empty() {
        return Err(CliError::Config(
            "`--algos` must name at least one algorithm".into(),
        ));
    }
    Ok(algos)
}

pub fn default_values(kind: SweepKind) -> Vec<f64> {
    match kind {
        SweepKind::Snr => DEFAULT_SNR_DB.to_vec(),
        SweepKind::Nc => DEFAULT_SHIFTERS.iter().map(|&v| v as f64).collect(),
        SweepKind::Single => Vec::new(),
    }
}

pub fn classify(e: CoreError) -> CliError {
    match e {
        CoreError::InvalidConfig(msg) => CliError::Config(msg),
        CoreError::InfeasibleDimensions(msg) => CliError::Infeasible(msg),
        other => CliError::Run(other.to_string()),
    }
}
