//! Write an operator to Matrix Market, read it back and run an estimate on it.
use krylov_defect::linops::{laplacian_csr, write_matrix_market};
use krylov_defect::prelude::*;

fn main() -> Result<()> {
    let path = std::env::temp_dir().join("krylov_defect_laplacian.mtx");
    write_matrix_market(&laplacian_csr(100)?, &path)?;
    let csr = load_matrix_market(&path)?;
    println!("read n = {} with {} nonzeros", csr.n(), csr.nnz());
    let op = LinearOperator::new(csr, Structure::Hermitian)?;
    let dec = krylov_decompose(&op, &vec![C64::new(1.0, 0.0); 100], 10, &OrthPolicy::full())?;
    println!("real-spectrum bound at t = 0.5: {:.4e}", bound_exact_real(&dec, 0, 0.5)?.value);
    std::fs::remove_file(&path)?;
    Ok(())
}
