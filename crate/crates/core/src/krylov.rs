//! Arnoldi and Lanczos decompositions `A V_m = V_m H_m + h v_(m+1) e_m^*`.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dense::{ritz_values, ritz_values_hermitian_tridiagonal};
use crate::linops::{LinearOperator, Structure};
use crate::{dot, norm2, Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrthScheme {
    /// Modified Gram-Schmidt, single pass.
    Mgs,
    /// Second pass only when the first one lost more than half the norm.
    MgsReorth,
    /// Always two passes.
    FullReorth,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthPolicy {
    pub scheme: OrthScheme,
    /// Breakdown when `h_(k+1,k) <= breakdown_tol * ||A||`.
    pub breakdown_tol: f64,
}

impl Default for OrthPolicy {
    fn default() -> Self {
        Self { scheme: OrthScheme::MgsReorth, breakdown_tol: 1e-14 }
    }
}

impl OrthPolicy {
    pub fn new(scheme: OrthScheme, breakdown_tol: f64) -> Result<Self> {
        if !(breakdown_tol > 0.0) {
            return Err(Error::InvalidArgument(format!("breakdown_tol must be > 0, got {breakdown_tol}")));
        }
        Ok(Self { scheme, breakdown_tol })
    }

    pub fn full() -> Self {
        Self { scheme: OrthScheme::FullReorth, ..Self::default() }
    }
}

/// Lanczos tridiagonal `T` and the unit factor `sigma` with `H = D^-1 (sigma T) D`.
#[derive(Clone, Debug)]
struct Tridiagonal {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    sigma: C64,
}

#[derive(Clone, Debug)]
pub struct KrylovDecomposition {
    basis: Vec<Vec<C64>>,
    h: DMatrix<C64>,
    beta: f64,
    h_next: f64,
    log_gamma: f64,
    breakdown: bool,
    matvecs: usize,
    tridiagonal: Option<Tridiagonal>,
    ritz: OnceLock<Vec<C64>>,
}

impl KrylovDecomposition {
    /// Decomposition data without a basis, for working on `H` alone.
    ///
    /// `H` must be upper Hessenberg with real positive subdiagonal.
    pub fn from_hessenberg(h: DMatrix<C64>, beta: f64, h_next: f64) -> Result<Self> {
        let m = h.nrows();
        if m == 0 || h.ncols() != m {
            return Err(Error::WrongStructure { expected: "nonempty square matrix" });
        }
        for j in 0..m {
            for i in j + 2..m {
                if h[(i, j)] != C64::new(0.0, 0.0) {
                    return Err(Error::WrongStructure { expected: "upper Hessenberg" });
                }
            }
        }
        let mut log_gamma = 0.0;
        for j in 0..m - 1 {
            let s = h[(j + 1, j)];
            if s.im != 0.0 || !(s.re > 0.0) {
                return Err(Error::WrongStructure { expected: "real positive subdiagonal" });
            }
            log_gamma += s.re.ln();
        }
        if !(beta > 0.0) || !(h_next >= 0.0) {
            return Err(Error::InvalidArgument("beta must be > 0 and h_next >= 0".into()));
        }
        Ok(Self {
            basis: vec![],
            h,
            beta,
            h_next,
            log_gamma,
            breakdown: false,
            matvecs: 0,
            tridiagonal: None,
            ritz: OnceLock::new(),
        })
    }

    pub fn m(&self) -> usize {
        self.h.nrows()
    }
    pub fn h(&self) -> &DMatrix<C64> {
        &self.h
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    /// `h_(m+1,m)`.
    pub fn h_next(&self) -> f64 {
        self.h_next
    }
    /// `ln gamma_m`, the sum of the logs of the subdiagonal of `H`.
    pub fn log_gamma(&self) -> f64 {
        self.log_gamma
    }
    pub fn gamma(&self) -> f64 {
        self.log_gamma.exp()
    }
    /// True if the run stopped at an invariant subspace before reaching the
    /// requested dimension, or `h_next` fell below the breakdown threshold.
    pub fn breakdown(&self) -> bool {
        self.breakdown
    }
    pub fn matvecs(&self) -> usize {
        self.matvecs
    }
    /// Columns `v_1 .. v_(m+1)`; empty for [`KrylovDecomposition::from_hessenberg`].
    pub fn basis(&self) -> &[Vec<C64>] {
        &self.basis
    }

    /// Eigenvalues of `H`, cached. Lanczos-based decompositions use the
    /// tridiagonal factor so that they are exactly real (or exactly on the
    /// rotated axis).
    pub fn ritz_values(&self) -> Result<Vec<C64>> {
        if let Some(r) = self.ritz.get() {
            return Ok(r.clone());
        }
        let r = match &self.tridiagonal {
            Some(t) => ritz_values_hermitian_tridiagonal(&t.alpha, &t.beta)
                .into_iter()
                .map(|x| t.sigma * C64::new(x, 0.0))
                .collect(),
            None => ritz_values(&self.h)?,
        };
        Ok(self.ritz.get_or_init(|| r).clone())
    }

    /// `V_m c`.
    pub fn combine(&self, c: &[C64]) -> Result<Vec<C64>> {
        if self.basis.is_empty() {
            return Err(Error::InvalidArgument("decomposition carries no basis".into()));
        }
        if c.len() != self.m() {
            return Err(Error::DimensionMismatch { expected: self.m(), got: c.len() });
        }
        let n = self.basis[0].len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (v, &cj) in self.basis.iter().zip(c) {
            for (o, x) in out.iter_mut().zip(v) {
                *o += x * cj;
            }
        }
        Ok(out)
    }

    /// Same subspace seen through `A' = sigma A`, `|sigma| = 1`, written as an
    /// exact decomposition of `A'` with positive subdiagonal: columns become
    /// `sigma^(j-1) v_j` and `H' = D^-1 (sigma H) D`, `D = diag(sigma^(j-1))`.
    pub fn rotated(&self, sigma: C64) -> Result<Self> {
        if ((sigma.norm() - 1.0).abs()) > 1e-15 {
            return Err(Error::InvalidArgument("rotation factor must have unit modulus".into()));
        }
        let m = self.m();
        let pow = |k: i64| -> C64 { sigma.powi(k as i32) };
        let h = DMatrix::from_fn(m, m, |i, j| {
            let e = self.h[(i, j)];
            if i == j + 1 {
                e
            } else {
                e * sigma * pow(j as i64 - i as i64)
            }
        });
        let basis = self
            .basis
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let s = pow(j as i64);
                v.iter().map(|x| x * s).collect()
            })
            .collect();
        let tridiagonal = self.tridiagonal.as_ref().map(|t| Tridiagonal { sigma: t.sigma * sigma, ..t.clone() });
        Ok(Self {
            basis,
            h,
            beta: self.beta,
            h_next: self.h_next,
            log_gamma: self.log_gamma,
            breakdown: self.breakdown,
            matvecs: self.matvecs,
            tridiagonal,
            ritz: OnceLock::new(),
        })
    }
}

fn start(op: &LinearOperator, v: &[C64], m: usize) -> Result<(f64, Vec<C64>)> {
    if v.len() != op.n() {
        return Err(Error::DimensionMismatch { expected: op.n(), got: v.len() });
    }
    if m == 0 {
        return Err(Error::InvalidArgument("Krylov dimension must be positive".into()));
    }
    if v.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite);
    }
    let beta = norm2(v);
    if beta == 0.0 {
        return Err(Error::ZeroStartVector);
    }
    Ok((beta, v.iter().map(|z| z / beta).collect()))
}

fn mgs_pass(basis: &[Vec<C64>], w: &mut [C64], coeffs: &mut [C64]) {
    for (b, c) in basis.iter().zip(coeffs.iter_mut()) {
        let d = dot(b, w);
        w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= d * bi);
        *c += d;
    }
}

fn finish_column(w: Vec<C64>, hn: f64) -> Vec<C64> {
    if hn > 0.0 {
        w.into_iter().map(|z| z / hn).collect()
    } else {
        w
    }
}

/// Arnoldi process, `m` steps.
pub fn arnoldi(op: &LinearOperator, v: &[C64], m: usize, policy: &OrthPolicy) -> Result<KrylovDecomposition> {
    arnoldi_until(op, v, m, policy, |_, _, _| false)
}

/// Arnoldi with an early stop: after step `k` the closure receives
/// `(k, beta, h_(k+1,k))` and returning true ends the run at dimension `k`.
pub fn arnoldi_until(
    op: &LinearOperator,
    v: &[C64],
    m: usize,
    policy: &OrthPolicy,
    mut stop: impl FnMut(usize, f64, f64) -> bool,
) -> Result<KrylovDecomposition> {
    let (beta, v1) = start(op, v, m)?;
    let scale = op.norm2_estimate().max(f64::MIN_POSITIVE);
    let mut basis = vec![v1];
    let mut hfull = DMatrix::<C64>::zeros(m + 1, m);
    let mut k = m;
    let mut breakdown = false;
    let mut matvecs = 0;
    let mut hn = 0.0;
    for j in 0..m {
        let mut w = op.matvec(&basis[j])?;
        matvecs += 1;
        let before = norm2(&w);
        let mut coeffs = vec![C64::new(0.0, 0.0); j + 1];
        mgs_pass(&basis, &mut w, &mut coeffs);
        let again = match policy.scheme {
            OrthScheme::Mgs => false,
            OrthScheme::FullReorth => true,
            OrthScheme::MgsReorth => norm2(&w) < before * std::f64::consts::FRAC_1_SQRT_2,
        };
        if again {
            mgs_pass(&basis, &mut w, &mut coeffs);
        }
        for (i, c) in coeffs.into_iter().enumerate() {
            hfull[(i, j)] = c;
        }
        hn = norm2(&w);
        if !hn.is_finite() {
            return Err(Error::NonFinite);
        }
        hfull[(j + 1, j)] = C64::new(hn, 0.0);
        basis.push(finish_column(w, hn));
        if hn <= policy.breakdown_tol * scale {
            breakdown = true;
            k = j + 1;
            break;
        }
        if j + 1 < m && stop(j + 1, beta, hn) {
            k = j + 1;
            break;
        }
    }
    let h = hfull.view((0, 0), (k, k)).into_owned();
    let log_gamma = (0..k.saturating_sub(1)).map(|j| h[(j + 1, j)].re.ln()).sum();
    Ok(KrylovDecomposition {
        basis,
        h,
        beta,
        h_next: hn,
        log_gamma,
        breakdown,
        matvecs,
        tridiagonal: None,
        ritz: OnceLock::new(),
    })
}

/// Hermitian Lanczos, `m` steps. Reorthogonalisation follows `policy`.
pub fn lanczos(op: &LinearOperator, v: &[C64], m: usize, policy: &OrthPolicy) -> Result<KrylovDecomposition> {
    lanczos_until(op, v, m, policy, |_, _, _| false)
}

/// Lanczos with the same early-stop contract as [`arnoldi_until`].
pub fn lanczos_until(
    op: &LinearOperator,
    v: &[C64],
    m: usize,
    policy: &OrthPolicy,
    mut stop: impl FnMut(usize, f64, f64) -> bool,
) -> Result<KrylovDecomposition> {
    if op.structure() != Structure::Hermitian {
        return Err(Error::WrongStructure { expected: "Hermitian operator" });
    }
    let (beta, v1) = start(op, v, m)?;
    let scale = op.norm2_estimate().max(f64::MIN_POSITIVE);
    let mut basis = vec![v1];
    let mut alpha: Vec<f64> = vec![];
    let mut offd: Vec<f64> = vec![];
    let mut breakdown = false;
    let mut matvecs = 0;
    let mut hn = 0.0;
    for j in 0..m {
        let mut w = op.matvec(&basis[j])?;
        matvecs += 1;
        if j > 0 {
            let b = offd[j - 1];
            w.iter_mut().zip(&basis[j - 1]).for_each(|(wi, vi)| *wi -= vi * b);
        }
        let a = dot(&basis[j], &w).re;
        w.iter_mut().zip(&basis[j]).for_each(|(wi, vi)| *wi -= vi * a);
        let passes = match policy.scheme {
            OrthScheme::Mgs => 0,
            OrthScheme::MgsReorth => 1,
            OrthScheme::FullReorth => 2,
        };
        let mut extra = vec![C64::new(0.0, 0.0); j + 1];
        for _ in 0..passes {
            mgs_pass(&basis, &mut w, &mut extra);
        }
        alpha.push(a);
        hn = norm2(&w);
        if !hn.is_finite() {
            return Err(Error::NonFinite);
        }
        basis.push(finish_column(w, hn));
        if hn <= policy.breakdown_tol * scale {
            breakdown = true;
            break;
        }
        if j + 1 < m && stop(j + 1, beta, hn) {
            break;
        }
        if j + 1 < m {
            offd.push(hn);
        }
    }
    let k = alpha.len();
    offd.truncate(k.saturating_sub(1));
    let h = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            C64::new(alpha[i], 0.0)
        } else if i == j + 1 {
            C64::new(offd[j], 0.0)
        } else if j == i + 1 {
            C64::new(offd[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let log_gamma = offd.iter().map(|b| b.ln()).sum();
    Ok(KrylovDecomposition {
        basis,
        h,
        beta,
        h_next: hn,
        log_gamma,
        breakdown,
        matvecs,
        tridiagonal: Some(Tridiagonal { alpha, beta: offd, sigma: C64::new(1.0, 0.0) }),
        ritz: OnceLock::new(),
    })
}

/// Picks the process from the operator structure. Skew-Hermitian `A` runs
/// Lanczos on the Hermitian `iA` and is rotated back, so `H` keeps a real
/// positive subdiagonal and purely imaginary Ritz values.
pub fn krylov_decompose(op: &LinearOperator, v: &[C64], m: usize, policy: &OrthPolicy) -> Result<KrylovDecomposition> {
    krylov_decompose_until(op, v, m, policy, |_, _, _| false)
}

pub fn krylov_decompose_until(
    op: &LinearOperator,
    v: &[C64],
    m: usize,
    policy: &OrthPolicy,
    stop: impl FnMut(usize, f64, f64) -> bool,
) -> Result<KrylovDecomposition> {
    match op.structure() {
        Structure::Hermitian => lanczos_until(op, v, m, policy, stop),
        Structure::General => arnoldi_until(op, v, m, policy, stop),
        Structure::SkewHermitian => {
            let b = op.scaled(C64::new(0.0, 1.0))?;
            lanczos_until(&b, v, m, policy, stop)?.rotated(C64::new(0.0, -1.0))
        }
    }
}

/// `||A V_m - V_m H_m - h v_(m+1) e_m^*||_2`.
pub fn decomposition_residual(dec: &KrylovDecomposition, op: &LinearOperator) -> Result<f64> {
    if dec.basis.is_empty() {
        return Err(Error::InvalidArgument("decomposition carries no basis".into()));
    }
    let m = dec.m();
    let n = op.n();
    let mut r = DMatrix::<C64>::zeros(n, m);
    for j in 0..m {
        let mut col = op.matvec(&dec.basis[j])?;
        for i in 0..=(j + 1).min(m - 1) {
            let hij = dec.h[(i, j)];
            col.iter_mut().zip(&dec.basis[i]).for_each(|(c, v)| *c -= v * hij);
        }
        if j + 1 == m {
            col.iter_mut().zip(&dec.basis[m]).for_each(|(c, v)| *c -= v * dec.h_next);
        }
        r.column_mut(j).copy_from_slice(&col);
    }
    Ok(spectral_norm(&r))
}

/// `||V_(m+1)^* V_(m+1) - I||_2`.
pub fn orthogonality_level(dec: &KrylovDecomposition) -> f64 {
    let k = dec.basis.len();
    let g = DMatrix::from_fn(k, k, |i, j| {
        dot(&dec.basis[i], &dec.basis[j]) - if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
    });
    nalgebra::SymmetricEigen::new(g).eigenvalues.iter().fold(0.0, |a: f64, x| a.max(x.abs()))
}

fn spectral_norm(r: &DMatrix<C64>) -> f64 {
    let g = r.adjoint() * r;
    nalgebra::SymmetricEigen::new(g).eigenvalues.iter().fold(0.0, |a: f64, x| a.max(*x)).max(0.0).sqrt()
}
