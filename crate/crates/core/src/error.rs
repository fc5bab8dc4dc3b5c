use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("cat phase δ = {0} is not one of 0, π/2, π")]
    UnsupportedCatPhase(f64),

    #[error("no {family} state has mean photon number {target}: {reason}")]
    Unreachable {
        family: &'static str,
        target: f64,
        reason: &'static str,
    },

    #[error("distribution did not converge before the hard ceiling n = {ceiling}")]
    CeilingReached { ceiling: usize },

    #[error("Fock dimension {dim} too small, need at least {required}")]
    DimensionTooSmall { dim: usize, required: usize },

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("k = {k} exceeds n = {n}")]
    BinomialDomain { n: u64, k: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
