use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("operator has no rule for basis vector {0}")]
    UncoveredBasisVector(String),
    #[error("index {index} out of range for {len} atoms")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
    #[error("cavity not empty after preparation (photon probability {0:e})")]
    ResidualPhoton(f64),
    #[error("cavity photon number would exceed one for basis vector {0}")]
    PhotonOverflow(String),
    #[error("invalid channel specification: {0}")]
    InvalidSpec(String),
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("value {value} outside admissible range [0, {limit}]")]
    OutOfRange { value: f64, limit: f64 },
    #[error("phase propagation ill-conditioned: |sin(mean phase)| = {0} <= 0.1")]
    IllConditioned(f64),
    #[error("objective is not unimodal on the search interval")]
    Multimodal,
    #[error("remote atom {0} is the probe atom")]
    RemoteIsProbe(usize),
}
