use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("degenerate economy: aggregate capital is zero, capital rent is undefined")]
    DegenerateEconomy,

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("numerical blow-up at step {step} (household {household}): {detail}")]
    NumericalBlowUp {
        step: u64,
        household: usize,
        detail: String,
    },

    #[error("graph error: {0}")]
    Graph(String),

    #[error("graph is disconnected: node {to} is unreachable from node {from}")]
    Disconnected { from: usize, to: usize },

    #[error("graph sampling gave up after {attempts} attempts: {reason}")]
    ResampleExhausted { attempts: usize, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid bisection bracket: {0}")]
    Bracket(String),

    #[error("no periodicity detected")]
    NoPeriodicity,

    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// Process exit status: 1 for bad input, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParam { .. }
            | Error::Config { .. }
            | Error::Graph(_)
            | Error::ResampleExhausted { .. }
            | Error::Io(_)
            | Error::Json(_) => 1,
            _ => 2,
        }
    }
}
