use nalgebra::{DMatrix, Schur, SymmetricEigen};

use crate::{Error, Result, C64};

const SCHUR_MAX_ITER: usize = 10_000;

/// Eigenvalues of a small dense matrix, unsorted. Exactly Hermitian input
/// takes the symmetric path so the result is exactly real.
pub fn ritz_values(h: &DMatrix<C64>) -> Result<Vec<C64>> {
    let m = h.nrows();
    if h.ncols() != m {
        return Err(Error::DimensionMismatch { expected: m, got: h.ncols() });
    }
    if h.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite);
    }
    if m == 0 {
        return Ok(vec![]);
    }
    if h == &h.adjoint() {
        let e = SymmetricEigen::new(h.clone());
        return Ok(e.eigenvalues.iter().map(|&x| C64::new(x, 0.0)).collect());
    }
    let schur = Schur::try_new(h.clone(), f64::EPSILON, SCHUR_MAX_ITER).ok_or(Error::NotConverged)?;
    let (_, t) = schur.unpack();
    Ok((0..m).map(|i| t[(i, i)]).collect())
}

/// Eigenvalues of the real symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta`.
pub fn ritz_values_hermitian_tridiagonal(alpha: &[f64], beta: &[f64]) -> Vec<f64> {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    });
    t.symmetric_eigenvalues().iter().cloned().collect()
}
