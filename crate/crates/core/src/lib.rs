//! Exact-arithmetic kernels for classifying finite flat models of the group
//! schemes of p^n-th roots of unity over a discrete valuation ring, two ways:
//! through matrices over Laurent polynomials in characteristic p, and through
//! Kummer-type congruences in the ramified mixed-characteristic ring, with a
//! dictionary checking that the two classifications coincide for n <= 3.
//!
//! Everything is exact: Witt vectors are computed through ghost components
//! over torsion-free lifts, Laurent series carry optional precision caps, and
//! the pi-adic quotient ring uses digit normal forms.

pub mod error;
pub mod ring;
pub mod fq;
pub mod witt;
pub mod laurent;
pub mod series;
pub mod gmatrix;
pub mod lattice;
pub mod classify;
pub mod okring;
pub mod kummer;
pub mod dictionary;
pub mod sampling;

pub use error::{Error, Result};
pub use fq::{Fq, FqElem};
pub use ring::{BigIntRing, GhostRing, IntPolyQuot, IntPolyQuotMod, Ring, WittCoeffs};
pub use witt::WittVector;

/// Laurent polynomial over F_q, the workhorse coefficient type of the
/// characteristic-p side.
pub type FqPoly = laurent::LaurentPoly<Fq>;

/// Laurent polynomial with arbitrary-precision integer coefficients.
pub type IntPoly = laurent::LaurentPoly<BigIntRing>;

/// Witt vector over F_q.
pub type FqWitt = WittVector<FqElem>;



