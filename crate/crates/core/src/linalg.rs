//! Small complex linear-algebra helpers shared across the crate.
//!
//! Everything here is plumbing over `nalgebra`: Hermitian symmetrization,
//! eigen-decompositions sorted descending, positive-definite solves, and
//! circularly-symmetric Gaussian draws. Dimensions in this crate are tiny
//! (tens at most), so dense decompositions are always appropriate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Hermitian part `(M + M^H) / 2` of a square matrix.
pub(crate) fn hermitian_part(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Real part of the trace.
pub(crate) fn trace_re(m: &DMatrix<Complex64>) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

/// Real Frobenius inner product `Re tr(A^H B)`.
pub(crate) fn frobenius_inner_re(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.dotc(b).re
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.
///
/// Returns `(eigenvalues, eigenvectors)` with `eigenvectors.column(i)` the
/// unit-norm eigenvector for `eigenvalues[i]`. The input is symmetrized
/// first, so callers may pass matrices that are Hermitian only up to
/// round-off.
pub(crate) fn hermitian_eigen(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let herm = hermitian_part(m);
    let eig = nalgebra::SymmetricEigen::new(herm);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Principal (largest-eigenvalue) unit eigenvector of a Hermitian matrix.
pub(crate) fn principal_eigenvector(m: &DMatrix<Complex64>) -> (f64, DVector<Complex64>) {
    let (values, vectors) = hermitian_eigen(m);
    (values[0], vectors.column(0).into_owned())
}

/// Solves `A x = b` for Hermitian positive-definite `A`.
///
/// Uses a Cholesky factorization and falls back to LU if the factorization
/// fails (only possible when `A` is indefinite to round-off).
pub(crate) fn solve_hermitian_pd(
    a: &DMatrix<Complex64>,
    b: &DVector<Complex64>,
) -> Option<DVector<Complex64>> {
    if let Some(chol) = a.clone().cholesky() {
        return Some(chol.solve(b));
    }
    a.clone().lu().solve(b)
}

/// Draws a length-`n` circularly-symmetric complex Gaussian vector with unit
/// variance per entry (real and imaginary parts each `N(0, 1/2)`).
pub(crate) fn complex_gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<Complex64> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    DVector::from_fn(n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re * scale, im * scale)
    })
}

/// Uniform phase vector: entries `e^{j θ}` with `θ ~ U[0, 2π)`.
pub(crate) fn random_phase_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<Complex64> {
    DVector::from_fn(n, |_, _| {
        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        Complex64::from_polar(1.0, theta)
    })
}
