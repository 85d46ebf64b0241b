use nalgebra::DMatrix;

use super::{expm, expm_action_graded};
use crate::{Error, Result, C64};

fn check_square(h: &DMatrix<C64>) -> Result<usize> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), got: h.ncols() });
    }
    if h.nrows() == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    Ok(h.nrows())
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("t must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// `H~ = [[H, 0], [e_1 e_m^*, J]]` of size `m + p`, `J` the `p x p` shift with
/// ones on its subdiagonal.
///
/// Row `m + j` of `exp(tH~) e_1` equals `t^(j+1) e_m^* phi_(j+1)(tH) e_1`.
#[derive(Clone, Debug)]
pub struct AugmentedHessenberg {
    m: usize,
    p: usize,
    full: DMatrix<C64>,
}

impl AugmentedHessenberg {
    pub fn new(h: &DMatrix<C64>, p: usize) -> Result<Self> {
        let m = check_square(h)?;
        let k = m + p;
        let mut full = DMatrix::zeros(k, k);
        full.view_mut((0, 0), (m, m)).copy_from(h);
        for i in m..k {
            full[(i, i - 1)] = C64::new(1.0, 0.0);
        }
        Ok(Self { m, p, full })
    }

    pub fn m(&self) -> usize {
        self.m
    }
    pub fn p(&self) -> usize {
        self.p
    }
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.full
    }

    /// `exp(t H~) e_1`, length `m + p`, with trailing entries accurate
    /// relative to their own size.
    pub fn exp_first_column(&self, t: f64) -> Result<Vec<C64>> {
        check_t(t)?;
        let mut e1 = vec![C64::new(0.0, 0.0); self.m + self.p];
        e1[0] = C64::new(1.0, 0.0);
        expm_action_graded(&self.full, &e1, t)
    }
}

/// `beta phi_p(tH) e_1` through the block matrix `[[tH, e_1 e_1^T], [0, K]]`,
/// `K` with ones on its superdiagonal; the top of its last column is the
/// answer and `t = 0` yields `e_1 / p!`.
pub fn phi_action(h: &DMatrix<C64>, p: usize, t: f64, beta: f64) -> Result<Vec<C64>> {
    let m = check_square(h)?;
    check_t(t)?;
    let k = m + p;
    let mut big = DMatrix::zeros(k, k);
    big.view_mut((0, 0), (m, m)).copy_from(&(h * C64::new(t, 0.0)));
    if p == 0 {
        let e = expm(&big)?;
        return Ok(e.column(0).iter().map(|z| z * beta).collect());
    }
    big[(0, m)] = C64::new(1.0, 0.0);
    for i in m..k - 1 {
        big[(i, i + 1)] = C64::new(1.0, 0.0);
    }
    let e = expm(&big)?;
    Ok((0..m).map(|i| e[(i, k - 1)] * beta).collect())
}

/// `beta t^p e_m^* phi_p(tH) e_1`, read off as the `(m+p, 1)` entry of
/// `exp(tH~)`.
pub fn corner_phi(h: &DMatrix<C64>, p: usize, t: f64, beta: f64) -> Result<C64> {
    let aug = AugmentedHessenberg::new(h, p)?;
    let col = aug.exp_first_column(t)?;
    Ok(col[aug.m + p - 1] * beta)
}
