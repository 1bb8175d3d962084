//! Numerical laboratory for trace identities of Toeplitz semi-commutators
//! on weighted Bergman spaces over the disk and the two-ball.
//!
//! The crate computes both sides of the identities independently —
//! operator-matrix traces in the graded monomial basis on one side,
//! geometric special-function integrals on the other — and ships a
//! verification suite that compares them at pinned tolerances.
//!
//! Entry points:
//! - [`operators`]: truncated Toeplitz/Hankel operators, exact diagonal
//!   sums, Hilbert-Schmidt norms with tail extrapolation.
//! - [`verify`]: right-hand sides, both-sides reports, asymptotic scans
//!   and the lemma-checker suite.
//! - [`cli`]: configuration and the command surface behind the `bergtrace`
//!   binary. Each major capability also has a runnable example under
//!   `examples/`.

pub mod error;
pub mod geometry;
pub mod quadrature;
pub mod operators;
pub mod specfun;
pub mod symbols;
pub mod verify;

pub use error::{Error, Result};
