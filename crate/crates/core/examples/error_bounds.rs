//! Every estimator at a fixed t next to the true error.
use krylov_defect::bench::{true_error, Oracle};
use krylov_defect::prelude::*;

fn main() -> Result<()> {
    let op = build_convection_diffusion_2d(12, 100.0)?;
    let v: Vec<C64> = vec![C64::new(1.0, 0.0); op.n()];
    let m = 12;
    let p = 1;
    let t = 0.01;
    let dec = krylov_decompose(&op, &v, m, &OrthPolicy::full())?;
    let err = true_error(&Oracle::new(&op), &dec, &v, p, t)?;
    println!("true error {:.4e}", err.norm);
    for kind in EstimatorKind::ALL {
        match estimate(kind, &dec, p, t, 1e-6) {
            Ok(z) => println!("{:<20} {:.4e}  proven bound: {}", kind.name(), z.value, z.is_proven_bound),
            Err(e) => println!("{:<20} unavailable ({e})", kind.name()),
        }
    }
    Ok(())
}
