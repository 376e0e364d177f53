use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("infeasible dimensions: {0}")]
    InfeasibleDimensions(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("degenerate scale: alpha must be nonzero for the digital precoder update")]
    DegenerateScale,

    #[error("degenerate target: Re(F_opt F_DD^H C^H) is identically zero, the target is orthogonal to the phase bank")]
    DegenerateTarget,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("block diagonalization infeasible on subcarrier {subcarrier} for user {user}: null space dimension {null_dim} < {required} streams")]
    BdInfeasible {
        subcarrier: usize,
        user: usize,
        null_dim: usize,
        required: usize,
    },

    #[error("normalization failed: {0}")]
    Normalization(String),

    #[error("oracle budget exceeded: n = {n} > max_n = {max_n}")]
    Budget { n: usize, max_n: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
