use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("support violation at symbol {index}: p > 0 but q = 0")]
    SupportViolation { index: usize },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resource cap exceeded: {what} needs {needed} items, cap is {cap}")]
    ResourceCap {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    #[error("singular channel matrix (|det| = {det_abs:e})")]
    Singular { det_abs: f64 },

    #[error("no grid point lies inside the channel image at grid resolution {grid_n}")]
    EmptyMessageSet { grid_n: usize },

    #[error("degenerate packing: {0}")]
    Degenerate(String),

    #[error("index {index} out of range for {len} centers")]
    Index { index: usize, len: usize },

    #[error("zero variance of the log-likelihood ratio")]
    ZeroVariance,

    #[error("infeasible target: {0}")]
    Infeasible(String),

    #[error("distribution is outside the channel image: coordinate {index} of the preimage is {value:e}")]
    NotInImage { index: usize, value: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}
