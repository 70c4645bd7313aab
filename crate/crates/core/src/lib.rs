//! Construction, verification, analysis, and benchmarking of embedded (4,5)
//! pairs of explicit 7-stage Runge-Kutta methods with the FSAL property.
//!
//! The crate covers the full path from free parameters to a working adaptive
//! integrator:
//!
//! * [`trees`] — rooted trees, densities, symmetries, elementary weights;
//! * [`tableau`] — exact pair representation, validation, file format, and the
//!   built-in registry (five constructed pairs plus five literature pairs);
//! * [`mod@derive`] — the general 6-parameter construction `(c2..c6, c'3)` and the
//!   five pair families A, A', B, B', C;
//! * [`analyze`] — order-condition residuals, `T6`/`T7` error norms, stability
//!   polynomial and region boundary, stage-order and interpolant diagnostics;
//! * [`integrate`] — FSAL-aware embedded stepping with the elementary
//!   `h <- 0.9 h (ATOL/E)^(1/5)` controller and dense output;
//! * [`problems`] — the A3, A4, D5, and PLEI benchmark problems;
//! * [`mod@bench`] — work-precision records and the family-curve parameter scan.

pub mod analyze;
pub mod bench;
pub mod derive;
pub mod integrate;
pub mod problems;
pub mod scalar;
pub mod stage;
pub mod tableau;
pub mod trees;

pub use scalar::{Mode, Rational, Scalar};
pub use tableau::{builtin, builtin_names, AnyPair, ButcherPair, Interpolant};
