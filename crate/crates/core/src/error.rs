use thiserror::Error;

/// Errors produced by the solvers and their supporting primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {what} = {value} ({requirement})")]
    Domain {
        what: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("quadratic has no real root (discriminant {discriminant})")]
    NoRealRoot { discriminant: f64 },

    #[error("overflow evaluating {what} at {value}")]
    Overflow { what: &'static str, value: f64 },

    #[error("non-finite input: {what} = {value}")]
    NonFinite { what: &'static str, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid bracket [{lo}, {hi}]: residuals {f_lo} and {f_hi} do not change sign")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("derivative vanished at x = {x}")]
    DerivativeZero { x: f64 },

    #[error("no solution on the {branch} branch for p = {p}, X = {x}")]
    NoSolutionOnBranch {
        branch: &'static str,
        p: f64,
        x: f64,
    },

    #[error("equation cannot be transformed: {0}")]
    Untransformable(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn finite(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { what, value })
    }
}
