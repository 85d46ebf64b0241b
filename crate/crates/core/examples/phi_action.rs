//! Krylov approximation of phi_p(tA)v compared with a reference action.
use krylov_defect::prelude::*;

fn main() -> Result<()> {
    let n = 300;
    let op = build_laplacian_1d(n)?;
    let v: Vec<C64> = (0..n).map(|i| C64::new(((i * 7) % 13) as f64 / 13.0, 0.0)).collect();
    let t = 2.0;
    for p in 0..=2 {
        let reference = reference_phi_action(&op, &v, t, p)?;
        for m in [8, 16, 32] {
            let dec = krylov_decompose(&op, &v, m, &OrthPolicy::full())?;
            let y = phi_action(dec.h(), p, t, dec.beta())?;
            let u = dec.combine(&y)?;
            let err = u.iter().zip(&reference).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            println!("p = {p}, m = {m:2}: ||u_m - phi_p(tA)v|| = {err:.3e}");
        }
    }
    Ok(())
}
