//! Effective order rho(t) from the Krylov data and from the asymptotic expansion.
use krylov_defect::prelude::*;

fn main() -> Result<()> {
    let op = build_laplacian_1d(200)?;
    let v = vec![C64::new(1.0, 0.0); 200];
    let (m, p) = (10, 0);
    let dec = krylov_decompose(&op, &v, m, &OrthPolicy::full())?;
    let nodes = NodeSet::new(dec.ritz_values()?, p)?;
    let exp2 = rho_coeffs(&nodes, 2);
    let (rho1, rho2) = rho12_from_traces(dec.h(), p);
    println!("rho_1 = {rho1:.6}, rho_2 = {rho2:.6} (traces)");
    println!("{:>10} {:>12} {:>12} {:>12}", "t", "rho(t)", "exact", "K=2");
    for t in [1e-4, 1e-3, 1e-2, 1e-1, 1.0] {
        println!(
            "{t:>10.1e} {:>12.6} {:>12.6} {:>12.6}",
            krylov_defect::estimators::effective_order_rho(&dec, p, t)?,
            effective_order_exact(&nodes, t)?,
            exp2.effective_order(t)
        );
    }
    Ok(())
}
