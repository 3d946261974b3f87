use thiserror::Error;

/// Errors raised by the group-theoretic and numerical routines of this crate.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("words live over different alphabets ({left} vs {right})")]
    AlphabetMismatch { left: String, right: String },

    #[error("duplicate generator name {0:?}")]
    DuplicateName(String),

    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),

    #[error("invalid generator name {0:?}")]
    InvalidName(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("coset enumeration exceeded {limit} cosets (possibly infinite index)")]
    CosetLimit { limit: usize },

    #[error("search budget of {budget} exceeded: {what}")]
    Budget { budget: u64, what: String },

    #[error("root finding failed to converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("root tracking failed at lambda = {lambda}: {reason}")]
    Tracking { lambda: String, reason: String },

    #[error("lambda = {lambda} is within guard distance of critical value {critical}")]
    NearCritical { lambda: String, critical: f64 },

    #[error("tietze step rejected: {0}")]
    Tietze(String),

    #[error("invalid group model: {0}")]
    InvalidModel(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
