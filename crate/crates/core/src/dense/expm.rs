use nalgebra::DMatrix;

use crate::{Error, Result, C64};

const THETA: [f64; 4] = [1.495585217958292e-2, 2.539_398_330_063_23e-1, 9.504178996162932e-1, 2.097847961257068];
const THETA13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] =
    [17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const SPLIT_THRESHOLD: usize = 24;

/// Complex product. Above a small size it is split into four real products
/// so the blocked real kernel does the work.
pub fn cmatmul(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    if a.nrows().max(a.ncols()).max(b.ncols()) < SPLIT_THRESHOLD {
        return a * b;
    }
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    re.zip_map(&im, C64::new)
}

fn one_norm(a: &DMatrix<C64>) -> f64 {
    a.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn add_scaled_identity(m: &mut DMatrix<C64>, c: f64) {
    for i in 0..m.nrows() {
        m[(i, i)] += c;
    }
}

/// Matrix exponential by 13th-order Pade scaling and squaring with lower
/// degrees for small norms.
///
/// Non-finite input gives [`Error::NonFinite`]; a result that overflows gives
/// [`Error::Overflow`].
pub fn expm(a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let k = a.nrows();
    if a.ncols() != k {
        return Err(Error::DimensionMismatch { expected: k, got: a.ncols() });
    }
    if a.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite);
    }
    if k == 0 {
        return Ok(a.clone());
    }
    let norm = one_norm(a);
    let id = DMatrix::<C64>::identity(k, k);
    if norm == 0.0 {
        return Ok(id);
    }

    let a2 = cmatmul(a, a);
    let low: [&[f64]; 4] = [&B3, &B5, &B7, &B9];
    for (deg, theta) in THETA.iter().enumerate() {
        if norm <= *theta {
            let b = low[deg];
            let mut powers = vec![id.clone(), a2.clone()];
            for _ in 2..b.len() / 2 {
                let next = cmatmul(powers.last().unwrap(), &a2);
                powers.push(next);
            }
            let mut u = DMatrix::zeros(k, k);
            let mut v = DMatrix::zeros(k, k);
            for (j, pw) in powers.iter().enumerate() {
                u += pw * C64::new(b[2 * j + 1], 0.0);
                v += pw * C64::new(b[2 * j], 0.0);
            }
            let u = cmatmul(a, &u);
            return solve_pade(&u, &v, 0, norm);
        }
    }

    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    if s > 1100 {
        return Err(Error::Overflow { norm });
    }
    let sc = C64::new(2f64.powi(-s), 0.0);
    let a1 = a * sc;
    let a2 = &a2 * (sc * sc);
    let a4 = cmatmul(&a2, &a2);
    let a6 = cmatmul(&a4, &a2);
    let b = |i: usize| C64::new(B13[i], 0.0);
    let mut inner_u = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    inner_u = cmatmul(&a6, &inner_u) + &a6 * b(7) + &a4 * b(5) + &a2 * b(3);
    add_scaled_identity(&mut inner_u, B13[1]);
    let u = cmatmul(&a1, &inner_u);
    let inner_v = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let mut v = cmatmul(&a6, &inner_v) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2);
    add_scaled_identity(&mut v, B13[0]);
    solve_pade(&u, &v, s, norm)
}

fn solve_pade(u: &DMatrix<C64>, v: &DMatrix<C64>, s: i32, norm: f64) -> Result<DMatrix<C64>> {
    let p = v + u;
    let q = v - u;
    let mut r = q.lu().solve(&p).ok_or(Error::Overflow { norm })?;
    for _ in 0..s {
        r = cmatmul(&r, &r);
        if r.iter().any(|z| !z.is_finite()) {
            return Err(Error::Overflow { norm });
        }
    }
    if r.iter().any(|z| !z.is_finite()) {
        return Err(Error::Overflow { norm });
    }
    Ok(r)
}

const GRADED_STEP_NORM: f64 = 0.5;
const GRADED_MAX_TERMS: usize = 400;

/// `exp(tM) b` by Taylor substeps of norm at most 1/2 after a diagonal shift.
///
/// Unlike [`expm`], every component is accumulated with a componentwise
/// stopping test, so components that are tiny because of the sparsity
/// structure (for instance the trailing entries of `exp(tH) e_1` for
/// Hessenberg `H`) keep their relative accuracy.
pub fn expm_action_graded(m: &DMatrix<C64>, b: &[C64], t: f64) -> Result<Vec<C64>> {
    let k = m.nrows();
    if m.ncols() != k {
        return Err(Error::DimensionMismatch { expected: k, got: m.ncols() });
    }
    if b.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: b.len() });
    }
    if !(t >= 0.0) || !t.is_finite() || m.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite);
    }
    if t == 0.0 || k == 0 {
        return Ok(b.to_vec());
    }
    let shift = (0..k).map(|i| m[(i, i)]).sum::<C64>() / k as f64;
    let mut a = m * C64::new(t, 0.0);
    for i in 0..k {
        a[(i, i)] -= shift * t;
    }
    let norm = one_norm(&a);
    let steps = ((norm / GRADED_STEP_NORM).ceil() as usize).max(1);
    if steps > 1 << 24 {
        return Err(Error::Overflow { norm });
    }
    a /= C64::new(steps as f64, 0.0);
    let lead_zeros = b.iter().rev().take_while(|z| **z == C64::new(0.0, 0.0)).count();

    let mut y = b.to_vec();
    let mut term = vec![C64::new(0.0, 0.0); k];
    let mut next = vec![C64::new(0.0, 0.0); k];
    let step_factor = (shift * t / steps as f64).exp();
    for _ in 0..steps {
        term.copy_from_slice(&y);
        let mut converged = false;
        for j in 1..=GRADED_MAX_TERMS {
            for (i, ni) in next.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (l, tl) in term.iter().enumerate() {
                    acc += a[(i, l)] * tl;
                }
                *ni = acc / j as f64;
            }
            std::mem::swap(&mut term, &mut next);
            let mut done = j > lead_zeros + 2;
            for (yi, ti) in y.iter_mut().zip(&term) {
                *yi += ti;
                if ti.norm() > 0.25 * f64::EPSILON * yi.norm() {
                    done = false;
                }
            }
            if done {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NotConverged);
        }
        y.iter_mut().for_each(|z| *z *= step_factor);
        if y.iter().any(|z| !z.is_finite()) {
            return Err(Error::Overflow { norm });
        }
    }
    Ok(y)
}
