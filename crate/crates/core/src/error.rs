use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} overflows binary64; use log mode")]
    Overflow { what: String },

    #[error("evaluation domain exceeded: {0}")]
    DomainExceeded(String),

    #[error("non-evaluable near pole: relative distance {distance:e} below threshold {threshold:e}")]
    NearPole { distance: f64, threshold: f64 },

    #[error("inadmissible direction: {0}")]
    InadmissibleDirection(String),

    #[error("no admissible direction")]
    NoAdmissibleDirection,

    #[error("decay envelope violated at log-radius {log_r}: |g| / envelope = {ratio}")]
    EnvelopeViolated { log_r: f64, ratio: f64 },

    #[error("integrand is not integrable with the supplied envelope: {0}")]
    NonIntegrable(String),

    #[error("{what} did not converge within {budget} nodes")]
    NonConvergence { what: String, budget: usize },

    #[error("maximiser reached n_cap = {n_cap}; increase n_cap")]
    NCapReached { n_cap: usize },

    #[error("derivative order {k} exceeds series order {order}")]
    OrderTooLarge { k: usize, order: usize },

    #[error("constraint violated: {0}")]
    ConstraintViolated(String),

    #[error("growth-class witness failed: {0}")]
    WitnessFailed(String),

    #[error("fit rejected: {0}")]
    FitRejected(String),

    #[error("configuration invalid: {0}")]
    Config(String),
}
