//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Eigenvalues within this fraction of the largest are treated as rounding noise.
pub const PSD_CLAMP_REL: f64 = 1e-8;

pub fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Largest |a_ij - conj(a_ji)| relative to the largest entry magnitude.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let scale = m
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst / scale
}

/// Real eigenvalues of a Hermitian matrix, unsorted.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect()
}

/// Eigen-decomposition with eigenvalues clamped to zero when they fall within
/// `-PSD_CLAMP_REL * max` of zero. More negative eigenvalues are an error.
pub fn psd_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let eig = SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max);
    let mut values = Vec::with_capacity(m.nrows());
    for &v in eig.eigenvalues.iter() {
        if v < -PSD_CLAMP_REL * max.max(f64::MIN_POSITIVE) {
            return Err(Error::Numeric(format!(
                "matrix is not positive semidefinite: eigenvalue {v:e} vs largest {max:e}"
            )));
        }
        values.push(v.max(0.0));
    }
    Ok((values, eig.eigenvectors))
}

/// Hermitian square root `V diag(sqrt(max(σ,0))) V^H`.
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let (values, vectors) = psd_eigen(m)?;
    let n = m.nrows();
    let mut scaled = vectors.clone();
    for (j, v) in values.iter().enumerate() {
        let s = v.sqrt();
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    Ok(&scaled * vectors.adjoint())
}

/// Natural log-determinant of a Hermitian positive definite matrix via Cholesky.
pub fn ln_det_hpd(m: CMatrix) -> Result<f64> {
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::Numeric("matrix is not positive definite".into()))?;
    let l = chol.l_dirty();
    Ok((0..l.nrows()).map(|i| 2.0 * l[(i, i)].re.ln()).sum())
}
