//! Γ, B and Mittag-Leffler functions.

mod gamma;
mod matrix;
mod mittag_leffler;

pub use gamma::{beta, gamma, gamma_sign, ln_gamma, rgamma};
pub use matrix::{ml_kernel, ml_matrix, MatrixMl, EIGENVECTOR_COND_LIMIT};
pub use mittag_leffler::{ml_real, ml_scalar, MlIndex, MlMethod, MlValue, DEFAULT_ML_TOL};
