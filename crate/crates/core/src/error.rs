//! Crate-wide error type.
//!
//! Every fallible operation reports a structured error; nothing is silently
//! rounded, guessed or truncated. Precision problems are kept distinct from
//! domain problems so that callers (in particular the CLI) can map them to
//! different exit codes.

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),

    #[error("unsupported prime {0}: need a prime in 2..=31")]
    BadPrime(u64),

    #[error("relative precision {prec} out of range for p={p} (max {max})")]
    BadPrecision { p: u64, prec: u32, max: u32 },

    #[error("division by exact zero")]
    DivisionByZero,

    #[error("division by a value indistinguishable from zero at precision O(p^{0})")]
    DivisionByPrecisionZero(i64),

    #[error("log domain: need val(a-1) >= {required}, got {got}")]
    LogDomain { required: i64, got: String },

    #[error("exp domain: need val(a) >= {required}, got {got}")]
    ExpDomain { required: i64, got: String },

    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),

    #[error("point outside the function domain: {0}")]
    OutsideDomain(String),

    #[error("operand domains differ")]
    DomainMismatch,

    #[error("no analytic refinement found after {depth} levels (pole or image escapes every disk)")]
    PoleInDisk { depth: u32 },

    #[error("polynomial degree {found} exceeds the allowed bound {bound}")]
    DegreeBound { found: usize, bound: usize },

    #[error("operator needs a reducible character (algebraic exponent >= 0), got m = {0}")]
    NotReducible(i64),

    #[error("precision exhausted during elimination: pivot valuation {pivot_val} at or beyond cutoff {cutoff}")]
    EliminationPrecision { pivot_val: i64, cutoff: i64 },

    #[error("group order exceeds the configured bound {0}")]
    OrderBound(usize),

    #[error("no suitable splitting prime found below {0}")]
    NoSplittingPrime(u64),

    #[error("character table / group mismatch: {0}")]
    TableMismatch(String),

    #[error("multiplicity failed the integrality check: {0}")]
    NonIntegerMultiplicity(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Convenience constructor for parse errors.
    pub fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }

    /// True for errors that signal exhausted working precision rather than a
    /// failed mathematical check or bad input.
    pub fn is_precision(&self) -> bool {
        matches!(
            self,
            Error::DivisionByPrecisionZero(_)
                | Error::InsufficientPrecision(_)
                | Error::EliminationPrecision { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
