//! Riemann–Liouville fractional differential systems: special functions,
//! singular quadrature, an integral-equation solver and numerical
//! attractivity certificates for linear perturbed systems
//!
//! D^α x = A x + Q(t) x + g(t),  lim_{t→0⁺} t^{1−α} x(t) = x₀,  0 < α < 1.

// Argument checks are written as !(x > 0.0) so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attractivity;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod quadrature;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
