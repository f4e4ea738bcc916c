use thiserror::Error;

/// Errors reported by the bound evaluators, the simulators and the file
/// readers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty preamble: m = 0 denotes perfect CSI and has no estimate")]
    EmptyPreamble,
    #[error("optimizer did not converge after {iterations} iterations ({what})")]
    NotConverged { what: &'static str, iterations: usize },
    #[error("bisection could not bracket the {what}")]
    NotBracketed { what: &'static str },
    #[error("target error probability {target:e} not reached in [{lo} dB, {hi} dB]")]
    TargetNotBracketed { target: f64, lo: f64, hi: f64 },
    #[error("degree sequence infeasible: {0}")]
    InfeasibleDegrees(String),
    #[error("malformed code file: {0}")]
    Parse(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
