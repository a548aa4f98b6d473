//! Crate-wide error type with CLI exit-code classification.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("order mismatch: requested order {requested} exceeds input order {available}")]
    OrderMismatch { requested: usize, available: usize },

    #[error("non-invertible germ: leading coefficient is zero")]
    NonInvertible,

    #[error("resonance at order {order}: divisor tau^n - 1 vanishes")]
    Resonant { order: usize },

    #[error("degree {got} too small: operation requires degree >= {needed}")]
    DegreeTooSmall { needed: usize, got: usize },

    #[error("degree cap exceeded: f^m has degree {required}, configured cap is {cap}")]
    CapExceeded { required: u64, cap: u64 },

    #[error("point out of chart domain: {0}")]
    OutOfDomain(String),

    #[error("seed rejected: admissible radius is {admissible_radius:.6e}")]
    SeedRejected { admissible_radius: f64 },

    #[error("cycle is not hyperbolic (|multiplier| = 1 within tolerance)")]
    NotHyperbolic,

    #[error("cycle is not repelling (|multiplier| <= 1)")]
    NotRepelling,

    #[error("multiplier is resonant of order {order}; condition undefined")]
    ResonantMultiplier { order: u64 },

    #[error("insufficient precision: {required_bits} bits required, {have_bits} available")]
    InsufficientPrecision { required_bits: u64, have_bits: u64 },

    #[error("precision exhausted in {stage}: about {needed_bits} bits would be required")]
    PrecisionExhausted { stage: String, needed_bits: u64 },

    #[error("bit cap exceeded: construction needs {required} bits, cap is {cap}")]
    BitCapExceeded { required: u64, cap: u64 },

    #[error("root finder did not converge: {0}")]
    NonConvergence(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    /// Process exit status for the CLI: 1 usage/parse, 2 precondition
    /// refusal, 3 precision exhaustion.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 1,
            Error::PrecisionExhausted { .. } | Error::InsufficientPrecision { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
