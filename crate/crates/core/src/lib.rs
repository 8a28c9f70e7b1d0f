//! Fredholm-determinant invariants of Steinberg symbols of loops on the circle.
//!
//! The determinant invariant of a pair of nonvanishing loops is computed from
//! Fourier coefficients and, independently, from Fredholm determinants of
//! truncated Toeplitz operators; a contour-integral evaluation cross-checks
//! the coefficient formula. Alongside sit the multiplicative character modulo
//! `2πi` and the chain-level homological algebra behind it.

pub mod block;
pub mod corpus;
pub mod cyclic;
pub mod error;
pub mod fourier;
pub mod fredholm;
pub mod group;
pub mod invariants;
pub mod linalg;
pub mod quadrature;
pub mod toeplitz;

pub use error::{Error, ErrorKind, Result};
