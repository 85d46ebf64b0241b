use super::{CsrMatrix, LinearOperator, Structure};
use crate::{norm2, Error, Result, C64};

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `tridiag(1, -2, 1)` of size `n`, unscaled.
pub fn laplacian_csr(n: usize) -> Result<CsrMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("laplacian needs n >= 2, got {n}")));
    }
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        if i > 0 {
            t.push((i, i - 1, re(1.0)));
        }
        t.push((i, i, re(-2.0)));
        if i + 1 < n {
            t.push((i, i + 1, re(1.0)));
        }
    }
    CsrMatrix::from_triplets(n, &t)
}

/// Hermitian operator `B = tridiag(1, -2, 1)`. Eigenvalues of `-B` are
/// `4 sin^2(j pi / (2(n+1)))`, `j = 1..n`.
pub fn build_laplacian_1d(n: usize) -> Result<LinearOperator> {
    LinearOperator::new(laplacian_csr(n)?, Structure::Hermitian)
}

/// Short alias for [`build_laplacian_1d`].
pub fn laplacian_1d(n: usize) -> Result<LinearOperator> {
    build_laplacian_1d(n)
}

/// `Delta + nu (d/dx1 + d/dx2)` on the unit square with zero Dirichlet data,
/// `N x N` interior nodes, central differences. Unknown `(i, j)` lives at
/// index `i + N j`.
pub fn convection_diffusion_csr(big_n: usize, nu: f64) -> Result<CsrMatrix> {
    if big_n < 2 {
        return Err(Error::InvalidArgument(format!("convection-diffusion needs N >= 2, got {big_n}")));
    }
    if !nu.is_finite() {
        return Err(Error::NonFinite);
    }
    let h = 1.0 / (big_n as f64 + 1.0);
    let d2 = 1.0 / (h * h);
    let c = nu / (2.0 * h);
    let n = big_n * big_n;
    let mut t = Vec::with_capacity(5 * n);
    for j in 0..big_n {
        for i in 0..big_n {
            let k = i + big_n * j;
            t.push((k, k, re(-4.0 * d2)));
            if i > 0 {
                t.push((k, k - 1, re(d2 - c)));
            }
            if i + 1 < big_n {
                t.push((k, k + 1, re(d2 + c)));
            }
            if j > 0 {
                t.push((k, k - big_n, re(d2 - c)));
            }
            if j + 1 < big_n {
                t.push((k, k + big_n, re(d2 + c)));
            }
        }
    }
    CsrMatrix::from_triplets(n, &t)
}

/// Dimension `N^2`; Hermitian when `nu = 0`.
pub fn build_convection_diffusion_2d(big_n: usize, nu: f64) -> Result<LinearOperator> {
    let structure = if nu == 0.0 { Structure::Hermitian } else { Structure::General };
    LinearOperator::new(convection_diffusion_csr(big_n, nu)?, structure)
}

const DW_LEFT: f64 = -10.0;
const DW_WIDTH: f64 = 20.0;

/// Mesh nodes `x_j = -10 + j h`, `h = 20/n`, `j = 0..n-1` (periodic).
pub fn schrodinger_nodes(n: usize) -> Vec<f64> {
    let h = DW_WIDTH / n as f64;
    (0..n).map(|j| DW_LEFT + j as f64 * h).collect()
}

/// Periodic 3-point Laplacian plus `diag(x^4 - 15 x^2)`.
pub fn schrodinger_csr(n: usize) -> Result<CsrMatrix> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!("double well needs n >= 4, got {n}")));
    }
    let h = DW_WIDTH / n as f64;
    let d2 = 1.0 / (h * h);
    let x = schrodinger_nodes(n);
    let mut t = Vec::with_capacity(3 * n);
    for (i, xi) in x.iter().enumerate() {
        let v = xi.powi(4) - 15.0 * xi * xi;
        t.push((i, (i + n - 1) % n, re(d2)));
        t.push((i, i, re(-2.0 * d2 + v)));
        t.push((i, (i + 1) % n, re(d2)));
    }
    CsrMatrix::from_triplets(n, &t)
}

/// Returns the Hermitian `B` and the normalised wavepacket centred at
/// `x = -2.5`. The propagation operator is `A = -iB`.
pub fn build_schrodinger_double_well(n: usize) -> Result<(LinearOperator, Vec<C64>)> {
    let b = LinearOperator::new(schrodinger_csr(n)?, Structure::Hermitian)?;
    let amp = (0.2 * std::f64::consts::PI).powf(-0.25);
    let mut v: Vec<C64> =
        schrodinger_nodes(n).into_iter().map(|x| re(amp * (-(x + 2.5).powi(2) / 0.4).exp())).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    Ok((b, v))
}
