use thiserror::Error;

use crate::feynman_kac::ZeroMassDiagnostics;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("the Dirac time covariance has no pointwise value; use big_gamma or the pair rule")]
    DiracPointwiseEval,

    #[error("white spatial noise has no pointwise value; use the mollified surrogate")]
    WhitePointwiseEval,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no finite threshold frequency: C_N stays above {tau:e} up to N = {cap:e}")]
    NoFiniteThreshold { tau: f64, cap: f64 },

    #[error("scale function undefined: {0}")]
    ScaleUndefined(String),

    #[error("quadrature failed to reach tolerance {tol:e} (estimated error {estimate:e})")]
    QuadratureFailure { tol: f64, estimate: f64 },

    #[error("every replica landed outside the support of u0 ({} replicas)", .0.n_rep)]
    AllZeroMass(Box<ZeroMassDiagnostics>),

    #[error("identity mismatch: {lhs} vs {rhs} (relative gap {gap:e})")]
    IdentityMismatch { lhs: f64, rhs: f64, gap: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("no bracket: {0}")]
    NoBracket(String),

    #[error("config error at `{key}`: {constraint}")]
    Config { key: String, constraint: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, constraint: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            constraint: constraint.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
