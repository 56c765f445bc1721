//! Small complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Unconjugated inner product `Σ a_k b_k`, i.e. a row vector `a` acting on a column `b`.
pub fn dotu(a: &CVector, b: &CVector) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// `Σ |a_k|²`
pub fn norm_sqr(a: &CVector) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Unit-modulus complex number `e^{jψ}`.
pub fn cis(psi: f64) -> Complex64 {
    Complex64::from_polar(1.0, psi)
}

/// Eigen-decomposition of a Hermitian matrix; eigenvalues are real.
pub fn hermitian_eigen(m: &CMatrix) -> (DVector<f64>, CMatrix) {
    let eig = SymmetricEigen::new(m.clone());
    (eig.eigenvalues, eig.eigenvectors)
}

/// Spectral norm of a Hermitian matrix (largest absolute eigenvalue).
pub fn hermitian_spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let (values, _) = hermitian_eigen(m);
    values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Outer product `a b^H`.
pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}
