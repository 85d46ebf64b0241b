//! Linear operators, test-problem generators and reference oracles.

mod csr;
mod generators;
mod mtx;
mod reference;

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{dot, norm2, Error, Result, C64};

pub use csr::CsrMatrix;
pub use generators::{
    build_convection_diffusion_2d, build_laplacian_1d, build_schrodinger_double_well, convection_diffusion_csr,
    laplacian_1d, laplacian_csr, schrodinger_csr, schrodinger_nodes,
};
pub use mtx::{load_matrix_market, parse_matrix_market, write_matrix_market, MtxSymmetry};
pub use reference::{dense_reference_phi, reference_phi_action, DENSE_GUARD};

/// Symmetry class of an operator, used to pick Lanczos over Arnoldi.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    Hermitian,
    SkewHermitian,
    General,
}

/// Matrix-free action `x -> Ax` together with its adjoint.
pub trait MatVec: Send + Sync {
    fn dim(&self) -> usize;
    /// `y = A x`; `y` is overwritten.
    fn apply_into(&self, x: &[C64], y: &mut [C64]);
    /// `y = A^* x`.
    fn apply_adjoint_into(&self, x: &[C64], y: &mut [C64]);

    fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        let mut e = vec![C64::new(0.0, 0.0); n];
        let mut y = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = C64::new(1.0, 0.0);
            self.apply_into(&e, &mut y);
            out.column_mut(j).copy_from_slice(&y);
            e[j] = C64::new(0.0, 0.0);
        }
        out
    }
}

impl MatVec for DMatrix<C64> {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (j, &xj) in x.iter().enumerate() {
            if xj == C64::new(0.0, 0.0) {
                continue;
            }
            for (yi, a) in y.iter_mut().zip(self.column(j).iter()) {
                *yi += a * xj;
            }
        }
    }
    fn apply_adjoint_into(&self, x: &[C64], y: &mut [C64]) {
        for (j, yj) in y.iter_mut().enumerate() {
            *yj = dot(self.column(j).as_slice(), x);
        }
    }
    fn to_dense(&self) -> DMatrix<C64> {
        self.clone()
    }
}

/// `c * A` without materialising the product.
struct Scaled {
    inner: Arc<dyn MatVec>,
    c: C64,
}

impl MatVec for Scaled {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        self.inner.apply_into(x, y);
        y.iter_mut().for_each(|v| *v *= self.c);
    }
    fn apply_adjoint_into(&self, x: &[C64], y: &mut [C64]) {
        self.inner.apply_adjoint_into(x, y);
        let cc = self.c.conj();
        y.iter_mut().for_each(|v| *v *= cc);
    }
}

struct Identity(usize);

impl MatVec for Identity {
    fn dim(&self) -> usize {
        self.0
    }
    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        y.copy_from_slice(x);
    }
    fn apply_adjoint_into(&self, x: &[C64], y: &mut [C64]) {
        y.copy_from_slice(x);
    }
}

const ESTIMATE_SEED: u64 = 0x5eed_0001;
const POWER_ITERATIONS: usize = 20;
const MU2_LANCZOS_STEPS: usize = 40;

/// A square operator with its symmetry class and cheap norm estimates.
///
/// Immutable after construction; cloning shares the underlying action.
#[derive(Clone)]
pub struct LinearOperator {
    n: usize,
    inner: Arc<dyn MatVec>,
    structure: Structure,
    norm2_estimate: f64,
    mu2_estimate: f64,
}

impl std::fmt::Debug for LinearOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearOperator")
            .field("n", &self.n)
            .field("structure", &self.structure)
            .field("norm2_estimate", &self.norm2_estimate)
            .field("mu2_estimate", &self.mu2_estimate)
            .finish()
    }
}

impl LinearOperator {
    /// Wraps `inner` and computes `norm2_estimate` and `mu2_estimate`.
    ///
    /// The structure flag is trusted, not verified; see [`LinearOperator::check_structure`].
    pub fn new(inner: impl MatVec + 'static, structure: Structure) -> Result<Self> {
        Self::from_arc(Arc::new(inner), structure)
    }

    pub fn from_arc(inner: Arc<dyn MatVec>, structure: Structure) -> Result<Self> {
        let n = inner.dim();
        if n == 0 {
            return Err(Error::InvalidArgument("operator dimension must be positive".into()));
        }
        let norm2_estimate = estimate_norm2(inner.as_ref());
        if !norm2_estimate.is_finite() {
            return Err(Error::NonFinite);
        }
        let mu2_estimate = match structure {
            Structure::SkewHermitian => 0.0,
            _ => estimate_mu2(inner.as_ref()),
        };
        Ok(Self { n, inner, structure, norm2_estimate, mu2_estimate })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(Identity(n), Structure::Hermitian)
    }

    pub fn from_dense(a: DMatrix<C64>, structure: Structure) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
        }
        Self::new(a, structure)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn structure(&self) -> Structure {
        self.structure
    }
    pub fn norm2_estimate(&self) -> f64 {
        self.norm2_estimate
    }
    pub fn mu2_estimate(&self) -> f64 {
        self.mu2_estimate
    }

    pub fn matvec(&self, x: &[C64]) -> Result<Vec<C64>> {
        let mut y = vec![C64::new(0.0, 0.0); self.n];
        self.apply_into(x, &mut y)?;
        Ok(y)
    }

    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        if y.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: y.len() });
        }
        self.inner.apply_into(x, y);
        Ok(())
    }

    pub fn adjoint_matvec(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        let mut y = vec![C64::new(0.0, 0.0); self.n];
        self.inner.apply_adjoint_into(x, &mut y);
        Ok(y)
    }

    /// `c * A`. Multiplying by a unit imaginary factor swaps Hermitian and
    /// skew-Hermitian; real factors keep the class.
    pub fn scaled(&self, c: C64) -> Result<Self> {
        let structure = match self.structure {
            Structure::General => Structure::General,
            s if c.im == 0.0 => s,
            Structure::Hermitian if c.re == 0.0 => Structure::SkewHermitian,
            Structure::SkewHermitian if c.re == 0.0 => Structure::Hermitian,
            _ => Structure::General,
        };
        Self::from_arc(Arc::new(Scaled { inner: self.inner.clone(), c }), structure)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        self.inner.to_dense()
    }

    /// Randomised test of the structure flag. Returns the largest normalised
    /// violation over `samples` random pairs.
    pub fn check_structure(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = self.norm2_estimate.max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let x = random_unit(&mut rng, self.n);
            let y = random_unit(&mut rng, self.n);
            let ax = self.matvec(&x).expect("dimension checked");
            let ay = self.matvec(&y).expect("dimension checked");
            let v = match self.structure {
                Structure::Hermitian => (dot(&x, &ay) - dot(&y, &ax).conj()).norm(),
                Structure::SkewHermitian => dot(&x, &ax).re.abs(),
                Structure::General => 0.0,
            };
            worst = worst.max(v / scale);
        }
        worst
    }
}

pub(crate) fn random_unit(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    let mut x: Vec<C64> = (0..n).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    x
}

fn estimate_norm2(a: &dyn MatVec) -> f64 {
    let n = a.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(ESTIMATE_SEED);
    let mut x = random_unit(&mut rng, n);
    let mut y = vec![C64::new(0.0, 0.0); n];
    let mut z = vec![C64::new(0.0, 0.0); n];
    let mut est = 0.0;
    for _ in 0..POWER_ITERATIONS {
        a.apply_into(&x, &mut y);
        est = norm2(&y);
        a.apply_adjoint_into(&y, &mut z);
        let nz = norm2(&z);
        if nz == 0.0 || !nz.is_finite() {
            break;
        }
        est = nz.sqrt();
        x.iter_mut().zip(&z).for_each(|(xi, zi)| *xi = zi / nz);
    }
    est
}

/// Largest eigenvalue of `(A + A^*)/2` from a short fully reorthogonalised
/// Lanczos run. The extreme Ritz value converges much faster than a plain
/// power iteration when the spectrum is clustered near its top.
fn estimate_mu2(a: &dyn MatVec) -> f64 {
    let n = a.dim();
    let steps = MU2_LANCZOS_STEPS.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(ESTIMATE_SEED ^ 0xff);
    let mut basis: Vec<Vec<C64>> = vec![random_unit(&mut rng, n)];
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    let mut t1 = vec![C64::new(0.0, 0.0); n];
    let mut t2 = vec![C64::new(0.0, 0.0); n];
    for j in 0..steps {
        let q = &basis[j];
        a.apply_into(q, &mut t1);
        a.apply_adjoint_into(q, &mut t2);
        let mut w: Vec<C64> = t1.iter().zip(&t2).map(|(p, r)| (p + r) * 0.5).collect();
        alpha.push(dot(q, &w).re);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= c * bi);
            }
        }
        let nw = norm2(&w);
        if j + 1 == steps || nw <= 1e-13 * alpha.iter().fold(1e-300_f64, |m, v| m.max(v.abs())) {
            break;
        }
        beta.push(nw);
        basis.push(w.into_iter().map(|v| v / nw).collect());
    }
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
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
    t.symmetric_eigenvalues().iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}
