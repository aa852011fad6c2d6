//! Dense complex linear algebra: matrix type, LU inversion and the
//! non-symmetric eigensolver.

mod eig;
mod lu;
mod matrix;

pub use eig::{
    eig, eig_with, eigenvalues, phase_factor, spectral_norm, trace_weighted_exp, EigOptions, Gauge,
    SpectralData, DEFAULT_COND_CEILING, DEFAULT_TOL_EIG,
};
pub use lu::{mat_inverse, Lu, SINGULAR_PIVOT_RATIO};
pub use matrix::{dot_conj, vec_norm, ComplexMatrix};
