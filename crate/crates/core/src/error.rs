//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by exact-arithmetic kernels.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An integer division inside ghost-component inversion was not exact.
    /// This means the coefficient plugin violated its torsion-freeness or
    /// lift/reduce contract.
    #[error("inexact integer division in ghost inversion: plugin contract violated")]
    GhostDivision,

    /// Generators do not span a lattice (echelon form has fewer than n rows
    /// after inverting u).
    #[error("generators do not span a lattice (rank {rank} < {n})")]
    NotALattice { rank: usize, n: usize },

    /// A value is known to too few digits to decide the requested congruence.
    #[error("precision shortfall: needed {needed} digits, have {have}")]
    PrecisionShortfall { needed: i64, have: i64 },

    /// Division by a power of the uniformizer on an element of smaller valuation.
    #[error("not divisible: valuation {valuation} < {requested}")]
    NotDivisible { valuation: i64, requested: i64 },

    /// A truncated deformed exponential had a non p-integral coefficient.
    #[error("deformed exponential coefficient is not p-integral at T^{degree}")]
    NotIntegral { degree: usize },

    /// Parameters outside the range a checker is proven for.
    #[error("out of scope: {0}")]
    OutOfScope(String),

    /// Malformed input data (matrix shape, context mismatch, bad Eisenstein
    /// coefficients and similar).
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
