//! Hybrid precoding for millimeter-wave MIMO with a small bank of fixed
//! phase shifters followed by an adaptive switch network.
//!
//! * [`sysmodel`]: configuration, clustered channels over planar arrays,
//!   fully digital reference precoders and receive combiners.
//! * [`fps`]: the alternating-minimization design of the switch matrix,
//!   scale and digital precoder, plus block diagonalization and power
//!   normalization.
//! * [`evaluation`]: spectral efficiency and Monte-Carlo sweeps.
//! * [`oracle`]: brute-force references used for verification.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evaluation;
pub mod fps;
pub mod linalg;
pub mod oracle;
pub mod sysmodel;

pub use error::{Error, Result};
pub use evaluation::{run_sweep, spectral_efficiency, Algorithm, EvalResult, Sweep};
pub use fps::{
    altmin, bd_baseband, build_phase_bank, normalize_digital, solve_alpha_switch, AltMinReport,
    AltMinSettings, HybridPrecoder, PhaseBank, Regime, SwitchMatrix,
};
pub use sysmodel::{
    design_combiners, fully_digital_precoder, generate_channels, ChannelSet, CombinerMode, CombinerSet,
    SystemConfig, TargetPrecoder,
};
