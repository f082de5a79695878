//! Validated Hermitian positive-semidefinite matrices: the spatial correlation
//! matrix (unit diagonal) and the efficiency-weighted covariance matrix.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const DIAGONAL_TOL: f64 = 1e-10;
pub const PSD_TOL_REL: f64 = 1e-8;

/// Common read access for anything the metrics can consume.
pub trait SpatialMatrix {
    fn entries(&self) -> &CMatrix;

    fn order(&self) -> usize {
        self.entries().nrows()
    }
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(Error::invalid(format!(
            "expected a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    Ok(())
}

fn check_hermitian_psd(m: &CMatrix) -> Result<()> {
    let defect = linalg::hermitian_defect(m);
    if defect > HERMITIAN_TOL {
        return Err(Error::invalid(format!(
            "matrix is not Hermitian (defect {defect:e})"
        )));
    }
    let eig = linalg::hermitian_eigenvalues(m);
    let max = eig.iter().copied().fold(0.0f64, f64::max);
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOL_REL * max {
        return Err(Error::invalid(format!(
            "matrix is not positive semidefinite (eigenvalue {min:e}, largest {max:e})"
        )));
    }
    Ok(())
}

/// Spatial correlation matrix Φ: Hermitian, PSD, unit diagonal, |ρ| ≤ 1.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix {
    entries: CMatrix,
}

impl CorrelationMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        check_square(&entries)?;
        for i in 0..entries.nrows() {
            let d = entries[(i, i)];
            if (d - Complex64::new(1.0, 0.0)).norm() > DIAGONAL_TOL {
                return Err(Error::invalid(format!(
                    "diagonal entry {i} is {d}, expected 1"
                )));
            }
        }
        if let Some(z) = entries.iter().find(|z| z.norm() > 1.0 + HERMITIAN_TOL) {
            return Err(Error::invalid(format!(
                "correlation magnitude {} exceeds 1",
                z.norm()
            )));
        }
        check_hermitian_psd(&entries)?;
        Ok(Self { entries })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            entries: CMatrix::identity(n, n),
        }
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.entries[(m, n)]
    }

    pub fn into_inner(self) -> CMatrix {
        self.entries
    }
}

impl SpatialMatrix for CorrelationMatrix {
    fn entries(&self) -> &CMatrix {
        &self.entries
    }
}

/// Receive covariance R = Φ ∘ Ξ: Hermitian, PSD, diagonal in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    entries: CMatrix,
}

impl CovarianceMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        check_square(&entries)?;
        for i in 0..entries.nrows() {
            let d = entries[(i, i)];
            if d.im.abs() > DIAGONAL_TOL || d.re < -DIAGONAL_TOL || d.re > 1.0 + DIAGONAL_TOL {
                return Err(Error::invalid(format!(
                    "diagonal entry {i} is {d}, expected [0, 1]"
                )));
            }
        }
        check_hermitian_psd(&entries)?;
        Ok(Self { entries })
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.entries[(m, n)]
    }

    pub fn into_inner(self) -> CMatrix {
        self.entries
    }
}

impl From<CorrelationMatrix> for CovarianceMatrix {
    fn from(phi: CorrelationMatrix) -> Self {
        Self {
            entries: phi.entries,
        }
    }
}

impl SpatialMatrix for CovarianceMatrix {
    fn entries(&self) -> &CMatrix {
        &self.entries
    }
}

/// Mirror the upper triangle into the lower one as conjugates and force a real
/// diagonal, so the result is Hermitian bit-for-bit.
pub(crate) fn hermitize_upper(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            m[(j, i)] = m[(i, j)].conj();
        }
    }
}
