//! Ritz values of the 1D Laplacian against its closed-form spectrum.
use std::f64::consts::PI;

use krylov_defect::prelude::*;

fn main() -> Result<()> {
    let n = 400;
    let op = laplacian_1d(n)?;
    let v = vec![C64::new(1.0, 0.0); n];
    let exact_min = -4.0 * (PI * n as f64 / (2.0 * (n as f64 + 1.0))).sin().powi(2);
    println!("n = {n}, ||A||_2 ~ {:.6}, exact extreme eigenvalue {exact_min:.6}", op.norm2_estimate());
    for m in [5, 10, 20, 40] {
        let dec = krylov_decompose(&op, &v, m, &OrthPolicy::full())?;
        let ritz = dec.ritz_values()?;
        let lo = ritz.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let hi = ritz.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        println!("m = {m:2}: Ritz values in [{lo:.6}, {hi:.6}]");
    }
    Ok(())
}
