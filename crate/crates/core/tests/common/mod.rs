#![allow(dead_code)]

use krylov_defect::prelude::*;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn diff_norm(x: &[C64], y: &[C64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
}

pub fn random_vector(n: usize, rng: &mut impl Rng) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let s = norm(&v);
    v.into_iter().map(|z| z / s).collect()
}

/// Upper Hessenberg, entries in the complex unit box, subdiagonal in [0.1, 1].
pub fn random_hessenberg(m: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    DMatrix::from_fn(m, m, |i, j| {
        if i == j + 1 {
            c(rng.random_range(0.1..1.0), 0.0)
        } else if i <= j {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        } else {
            c(0.0, 0.0)
        }
    })
}

/// `exp(tM) b` by plain Taylor series on substeps with `||tau M||_1 <= 1/2`.
/// Each series runs until the term is negligible in every component, so tiny
/// entries of graded results keep their relative accuracy.
pub fn taylor_exp_action(m: &DMatrix<C64>, b: &[C64], t: f64) -> Vec<C64> {
    let n1 = (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let steps = ((t * n1) / 0.5).ceil().max(1.0) as usize;
    let tau = t / steps as f64;
    let mut x = DVector::from_column_slice(b);
    for _ in 0..steps {
        let mut term = x.clone();
        let mut acc = x.clone();
        for k in 1..200 {
            term = (m * &term) * C64::new(tau / k as f64, 0.0);
            acc += &term;
            if term.iter().zip(acc.iter()).all(|(d, a)| d.norm() <= 1e-18 * a.norm() || d.norm() == 0.0) {
                break;
            }
        }
        x = acc;
    }
    x.iter().cloned().collect()
}

/// Lower-left augmentation `[[H, 0], [e_1 e_m^*, J]]` of size `m + p`.
pub fn lower_left_augmented(h: &DMatrix<C64>, p: usize) -> DMatrix<C64> {
    let m = h.nrows();
    let mut a = DMatrix::zeros(m + p, m + p);
    a.view_mut((0, 0), (m, m)).copy_from(h);
    for j in 0..p {
        let (r, col) = (m + j, if j == 0 { m - 1 } else { m + j - 1 });
        a[(r, col)] = c(1.0, 0.0);
    }
    a
}

/// `exp_t[l_1..l_M]` as the series `sum_j t^(M-1+j) h_j(l) / (M-1+j)!` with
/// complete homogeneous symmetric polynomials `h_j`. Accurate for small `t|l|`.
pub fn divdiff_series(nodes: &[C64], t: f64, terms: usize) -> C64 {
    let mm = nodes.len();
    let mut h = vec![c(0.0, 0.0); terms];
    h[0] = c(1.0, 0.0);
    for &l in nodes {
        for j in 1..terms {
            let prev = h[j - 1];
            h[j] += l * prev;
        }
    }
    let mut sum = c(0.0, 0.0);
    let mut coef = t.powi(mm as i32 - 1) / (1..mm).map(|k| k as f64).product::<f64>();
    for (j, hj) in h.iter().enumerate() {
        sum += hj * coef;
        coef *= t / (mm + j) as f64;
    }
    sum
}

/// `phi_q(tA) x` from `y' = Ay + s^(q-1)/(q-1)! x`, `y(0) = 0`, written as
/// `exp` of the augmented operator `(y, c) -> (Ay + c_1 x, Jc)` with Taylor
/// substeps of size `||tau A|| <= 1`.
pub fn phi_oracle(op: &LinearOperator, x: &[C64], t: f64, q: usize) -> Vec<C64> {
    let n = op.n();
    if q == 0 {
        return exp_oracle(op, x, t);
    }
    let steps = (t * op.norm2_estimate() * 1.05).ceil().max(1.0) as usize;
    let tau = t / steps as f64;
    let mut y = vec![c(0.0, 0.0); n];
    let mut cc = vec![c(0.0, 0.0); q];
    cc[q - 1] = c(1.0, 0.0);
    for _ in 0..steps {
        let (mut ty, mut tc) = (y.clone(), cc.clone());
        let (mut ay, mut ac) = (y.clone(), cc.clone());
        for k in 1..100 {
            let f = tau / k as f64;
            let mut ny = op.matvec(&ty).expect("matvec");
            for (a, b) in ny.iter_mut().zip(x) {
                *a += b * tc[0];
            }
            ny.iter_mut().for_each(|z| *z *= f);
            let mut nc: Vec<C64> = (0..q).map(|i| if i + 1 < q { tc[i + 1] * f } else { c(0.0, 0.0) }).collect();
            std::mem::swap(&mut ty, &mut ny);
            std::mem::swap(&mut tc, &mut nc);
            ay.iter_mut().zip(&ty).for_each(|(a, b)| *a += b);
            ac.iter_mut().zip(&tc).for_each(|(a, b)| *a += b);
            if norm(&ty) <= 1e-18 * norm(&ay).max(1e-300) && norm(&tc) <= 1e-18 {
                break;
            }
        }
        y = ay;
        cc = ac;
    }
    let s = t.powi(q as i32);
    y.into_iter().map(|z| z / s).collect()
}

fn exp_oracle(op: &LinearOperator, x: &[C64], t: f64) -> Vec<C64> {
    let steps = (t * op.norm2_estimate() * 1.05).ceil().max(1.0) as usize;
    let tau = t / steps as f64;
    let mut y = x.to_vec();
    for _ in 0..steps {
        let mut term = y.clone();
        let mut acc = y.clone();
        for k in 1..100 {
            term = op.matvec(&term).expect("matvec");
            term.iter_mut().for_each(|z| *z *= tau / k as f64);
            acc.iter_mut().zip(&term).for_each(|(a, b)| *a += b);
            if norm(&term) <= 1e-18 * norm(&acc) {
                break;
            }
        }
        y = acc;
    }
    y
}

/// `||beta V phi_p(tH) e_1 - phi_p(tA) v||` written as
/// `t ||V H beta phi_(p+1)(tH) e_1 - phi_(p+1)(tA) A v||` to avoid the
/// cancellation of the `v/p!` terms, together with a rounding floor.
pub fn true_error(op: &LinearOperator, dec: &KrylovDecomposition, v: &[C64], p: usize, t: f64) -> (f64, f64) {
    let m = dec.m();
    let y = upper_right_phi(dec.h(), p + 1, t);
    let hy: Vec<C64> = (0..m).map(|i| (0..m).map(|j| dec.h()[(i, j)] * y[j] * dec.beta()).sum()).collect();
    let approx = dec.combine(&hy).expect("combine");
    let av = op.matvec(v).expect("matvec");
    let exact = phi_oracle(op, &av, t, p + 1);
    let scale = norm(&exact).max(norm(&approx));
    let err = t * diff_norm(&approx, &exact);
    let floor = 64.0 * f64::EPSILON * t * scale * (t * op.norm2_estimate()).max(1.0);
    (err, floor)
}

/// `phi_q(tH) e_1` as the top block of `exp(t [[H, e_1 e_1^T..], [0, J]])`,
/// via the Taylor oracle.
pub fn upper_right_phi(h: &DMatrix<C64>, q: usize, t: f64) -> Vec<C64> {
    let m = h.nrows();
    let mut a = DMatrix::zeros(m + q, m + q);
    a.view_mut((0, 0), (m, m)).copy_from(h);
    a[(0, m)] = c(1.0, 0.0);
    for j in 1..q {
        a[(m + j - 1, m + j)] = c(1.0, 0.0);
    }
    let mut b = vec![c(0.0, 0.0); m + q];
    b[m + q - 1] = c(1.0, 0.0);
    let x = taylor_exp_action(&a, &b, t);
    let s = t.powi(q as i32);
    x[..m].iter().map(|z| z / s).collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
}

pub struct Fixture {
    pub name: String,
    pub op: LinearOperator,
    pub v: Vec<C64>,
}

pub fn convdiff(big_n: usize, nu: f64) -> Fixture {
    let op = build_convection_diffusion_2d(big_n, nu).unwrap();
    let n = op.n();
    let v = vec![c(1.0 / (n as f64).sqrt(), 0.0); n];
    Fixture { name: format!("convdiff N={big_n} nu={nu}"), op, v }
}

pub fn laplacian(n: usize, seed: u64) -> Fixture {
    let op = build_laplacian_1d(n).unwrap();
    let v = random_vector(n, &mut rng(seed));
    Fixture { name: format!("laplacian n={n}"), op, v }
}

pub fn schrodinger(n: usize) -> Fixture {
    let (b, v) = build_schrodinger_double_well(n).unwrap();
    Fixture { name: format!("schrodinger n={n}"), op: b.scaled(c(0.0, -1.0)).unwrap(), v }
}
