//! Sparse storage, direct and iterative solvers, and the eigensolver.

pub mod eigen;
pub mod envelope;
pub mod pcg;
pub mod sparse;
pub mod tensor;

pub use eigen::{lowest_eigenpairs, EigenOptions, EigenPairs};
pub use envelope::{rcm_ordering, EnvelopeCholesky};
pub use pcg::{pcg, PcgOutcome};
pub use sparse::Csr;
pub use tensor::TensorSolver;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    for (a, b) in y.iter_mut().zip(x) {
        *a += s * b;
    }
}
