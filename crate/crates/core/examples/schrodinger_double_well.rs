//! Skew-Hermitian case: real-part and factorial bounds coincide.
use krylov_defect::estimators::factorial_xi_max;
use krylov_defect::prelude::*;

fn main() -> Result<()> {
    let (b, v) = build_schrodinger_double_well(400)?;
    let op = b.scaled(C64::new(0.0, -1.0))?;
    println!("structure {:?}, ||B||_2 ~ {:.1}", op.structure(), b.norm2_estimate());
    for m in [10, 20, 30] {
        let dec = krylov_decompose(&op, &v, m, &OrthPolicy::full())?;
        let t = solve_t_of_m(&dec, &StepControl::new(1e-8, EstimatorKind::BoundRealPart, m, 1.0, 0)?)?.t;
        let a = bound_real_part(&dec, 0, t)?;
        let f = bound_factorial(&dec, 0, t, factorial_xi_max(&dec, 0)?)?;
        println!("m = {m:2}: t(m) = {t:.4e}, real-part {:.6e}, factorial {:.6e}", a.value, f.value);
    }
    Ok(())
}
