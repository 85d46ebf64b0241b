//! Truth oracles for `phi_p(tA)v`.
//!
//! Two independent routes: a dense augmented exponential for small `n` and a
//! matrix-free scaled Taylor series on the same augmented operator for
//! larger `n`.

use nalgebra::DMatrix;

use super::LinearOperator;
use crate::dense::expm;
use crate::{norm2, Error, Result, C64};

/// Largest dimension accepted by [`dense_reference_phi`].
pub const DENSE_GUARD: usize = 4000;

/// `phi_p(tA)v` from `exp` of the `(n+p)`-dimensional augmented matrix
/// `[[tA, v e_1^T], [0, K]]`, `K` the shift with ones on its superdiagonal.
pub fn dense_reference_phi(a: &DMatrix<C64>, v: &[C64], t: f64, p: usize) -> Result<Vec<C64>> {
    let n = a.nrows();
    if n > DENSE_GUARD {
        return Err(Error::GuardExceeded { n, limit: DENSE_GUARD });
    }
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
    }
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("t must be finite and >= 0, got {t}")));
    }
    let beta = norm2(v);
    if beta == 0.0 {
        return Ok(vec![C64::new(0.0, 0.0); n]);
    }
    let k = n + p;
    let mut m = DMatrix::zeros(k, k);
    m.view_mut((0, 0), (n, n)).copy_from(&(a * C64::new(t, 0.0)));
    if p == 0 {
        let e = expm(&m)?;
        let x = e * nalgebra::DVector::from_column_slice(v);
        return Ok(x.iter().cloned().collect());
    }
    for i in 0..n {
        m[(i, n)] = v[i] / beta;
    }
    for i in n..k - 1 {
        m[(i, i + 1)] = C64::new(1.0, 0.0);
    }
    let e = expm(&m)?;
    Ok((0..n).map(|i| e[(i, k - 1)] * beta).collect())
}

const TAYLOR_MAX_TERMS: usize = 120;

/// Matrix-free `phi_p(tA)v` by scaled Taylor steps on the augmented operator.
/// Cost is `O(t ||A|| )` matvecs; accurate to a few units of `t ||A|| eps`.
pub fn reference_phi_action(op: &LinearOperator, v: &[C64], t: f64, p: usize) -> Result<Vec<C64>> {
    let n = op.n();
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("t must be finite and >= 0, got {t}")));
    }
    let beta = norm2(v);
    if beta == 0.0 {
        return Ok(vec![C64::new(0.0, 0.0); n]);
    }
    let k = n + p;
    let aug = |z: &[C64], out: &mut [C64], scale: f64| -> Result<()> {
        op.apply_into(&z[..n], &mut out[..n])?;
        out[..n].iter_mut().for_each(|o| *o *= t * scale);
        if p > 0 {
            let a1 = z[n] * scale;
            for i in 0..n {
                out[i] += v[i] / beta * a1;
            }
            for i in n..k - 1 {
                out[i] = z[i + 1] * scale;
            }
            out[k - 1] = C64::new(0.0, 0.0);
        }
        Ok(())
    };
    let mnorm = t * op.norm2_estimate() * 1.05 + if p > 0 { 2.0 } else { 0.0 };
    let steps = mnorm.ceil().max(1.0) as usize;
    let scale = 1.0 / steps as f64;

    let mut z = vec![C64::new(0.0, 0.0); k];
    if p == 0 {
        z.copy_from_slice(v);
        z.iter_mut().for_each(|x| *x /= beta);
    } else {
        z[k - 1] = C64::new(1.0, 0.0);
    }
    let mut term = vec![C64::new(0.0, 0.0); k];
    let mut next = vec![C64::new(0.0, 0.0); k];
    for _ in 0..steps {
        term.copy_from_slice(&z);
        let mut quiet = 0;
        for j in 1..=TAYLOR_MAX_TERMS {
            aug(&term, &mut next, scale)?;
            let inv = 1.0 / j as f64;
            next.iter_mut().for_each(|x| *x *= inv);
            std::mem::swap(&mut term, &mut next);
            for (zi, ti) in z.iter_mut().zip(&term) {
                *zi += ti;
            }
            if norm2(&term) <= f64::EPSILON * 0.1 * norm2(&z) {
                quiet += 1;
                if quiet == 2 {
                    break;
                }
            } else {
                quiet = 0;
            }
            if j == TAYLOR_MAX_TERMS {
                return Err(Error::NotConverged);
            }
        }
        if z.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
    }
    Ok(z[..n].iter().map(|x| x * beta).collect())
}
