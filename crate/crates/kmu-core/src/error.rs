use thiserror::Error;

/// Errors produced by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("{func}: parameter {detail} is a pole")]
    Pole { func: &'static str, detail: String },

    #[error("{func}: series diverges for z = {z}")]
    Divergence { func: &'static str, z: f64 },

    #[error("{func}: no convergence after {terms} terms (last bound {bound:e})")]
    NoConvergence {
        func: &'static str,
        terms: usize,
        bound: f64,
    },

    #[error("coefficient {index} exceeds the log-magnitude cap ({log_mag:.1} > {cap:.1})")]
    Overflow { index: usize, log_mag: f64, cap: f64 },

    #[error("{func}: cancellation ratio {ratio:e} leaves no significant digits")]
    IllConditioned { func: &'static str, ratio: f64 },

    #[error("BEP approach 1 requires K/(g_b w_hat) < 1, got {ratio}")]
    GateViolation { ratio: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input")]
    EmptyInput,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        func,
        detail: detail.into(),
    }
}
