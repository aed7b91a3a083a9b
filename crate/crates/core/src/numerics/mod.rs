//! Dense complex-matrix kernels: products, Hermitian factorizations and norms.
//!
//! Everything here is a pure function of its inputs and safe to call from any
//! number of threads.

mod decomp;
mod matrix;
pub mod random;

pub use decomp::{
    cholesky, from_nalgebra, hpd_inverse, logdet_hpd, singular_values, spectral_norm,
    spectral_norm_or_svd, to_nalgebra, HERMITIAN_TOL, POWER_ITERATION_CAP,
};
pub use matrix::{vec_norm, vec_norm_sq, vec_real_inner, vec_sub, ComplexMatrix, C64};
