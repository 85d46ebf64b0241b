//! Decomposition residual and loss of orthogonality per Gram-Schmidt variant.
use krylov_defect::prelude::*;

fn main() -> Result<()> {
    let op = build_convection_diffusion_2d(30, 300.0)?;
    let v: Vec<C64> = (0..op.n()).map(|i| C64::new((i as f64 * 0.7).sin() + 1.0, 0.0)).collect();
    println!("{:<12} {:>4} {:>14} {:>14}", "scheme", "m", "residual", "orthogonality");
    for scheme in [OrthScheme::Mgs, OrthScheme::MgsReorth, OrthScheme::FullReorth] {
        let policy = OrthPolicy { scheme, ..OrthPolicy::default() };
        for m in [20, 60] {
            let dec = arnoldi(&op, &v, m, &policy)?;
            println!(
                "{:<12} {m:>4} {:>14.3e} {:>14.3e}",
                format!("{scheme:?}"),
                decomposition_residual(&dec, &op)?,
                orthogonality_level(&dec)
            );
        }
    }
    Ok(())
}
