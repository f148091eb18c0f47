use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("element index ({n}, {m}) outside panel range n in [{n_lo}, {n_hi}], m in [{m_lo}, {m_hi}]")]
    IndexOutOfRange {
        n: i64,
        m: i64,
        n_lo: i64,
        n_hi: i64,
        m_lo: i64,
        m_hi: i64,
    },

    #[error("endpoint coincides with element center ({x}, {y}, {z})")]
    CoincidentPoints { x: f64, y: f64, z: f64 },

    #[error("invalid RF configuration: {0}")]
    InvalidConfig(String),

    #[error("subcarrier index {s} out of range for S = {count}")]
    SubcarrierOutOfRange { s: usize, count: usize },

    #[error("absorption model: {0}")]
    Absorption(String),

    #[error("argument {re} + {im}i outside supported window |re|, |im| <= {limit}")]
    OutOfWindow { re: f64, im: f64, limit: f64 },

    #[error("erf({re} + {im}i) overflows double precision")]
    Overflow { re: f64, im: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("reflection coefficient {index} has modulus {modulus}, expected 1")]
    NotUnitModulus { index: usize, modulus: f64 },

    #[error("power iteration did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
