//! Adaptive Gauss-Kronrod (7/15) integration of a real function.

use std::collections::BinaryHeap;

use crate::Result;

// Tabulated nodes and weights, kept at full published precision.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_INTERVALS: usize = 2000;
const PRESAMPLES: usize = 64;
const NEAR_ZERO_RATIO: f64 = 1e-3;

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&o.error)
    }
}

fn gk15(f: &mut impl FnMut(f64) -> Result<f64>, a: f64, b: f64) -> Result<Piece> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x)? + f(c + x)?;
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    Ok(Piece { a, b, value: k * h, error: ((k - g) * h).abs() })
}

/// Interior points where a coarse sample of `f` dips below a small fraction
/// of its neighbourhood maximum.
fn near_zeros(f: &mut impl FnMut(f64) -> Result<f64>, a: f64, b: f64) -> Result<Vec<f64>> {
    let xs: Vec<f64> = (0..=PRESAMPLES).map(|i| a + (b - a) * i as f64 / PRESAMPLES as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect::<Result<_>>()?;
    let mut out = vec![];
    for i in 1..PRESAMPLES {
        let lo = i.saturating_sub(4);
        let hi = (i + 4).min(PRESAMPLES);
        let local_max = ys[lo..=hi].iter().cloned().fold(0.0, f64::max);
        if ys[i] <= ys[i - 1] && ys[i] <= ys[i + 1] && ys[i] < NEAR_ZERO_RATIO * local_max {
            out.push(xs[i]);
        }
    }
    Ok(out)
}

/// Integrates `f` over `[a, b]` until the estimated error is at most
/// `max(abs_tol, rel_tol |I|)`. Stops unconverged after a fixed number of
/// subintervals and reports the best value.
pub fn integrate(
    mut f: impl FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult> {
    let mut evals = 0usize;
    let mut counted = |x: f64| {
        evals += 1;
        f(x)
    };
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, converged: true, evaluations: 0 });
    }
    let mut cuts = vec![a];
    cuts.extend(near_zeros(&mut counted, a, b)?);
    cuts.push(b);
    let mut heap = BinaryHeap::new();
    for w in cuts.windows(2) {
        heap.push(gk15(&mut counted, w[0], w[1])?);
    }
    let mut converged = false;
    loop {
        let value: f64 = heap.iter().map(|p| p.value).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) {
            converged = true;
            break;
        }
        if heap.len() >= MAX_INTERVALS {
            break;
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        heap.push(gk15(&mut counted, worst.a, mid)?);
        heap.push(gk15(&mut counted, mid, worst.b)?);
    }
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    drop(heap);
    Ok(QuadResult { value, error, converged, evaluations: evals })
}
