//! Build a complex transforming matrix for a non-normal embeddable system
//! `A = D⁻¹S` and check the mapped Hamiltonian.

use ode2schrod::linalg::inverse;
use ode2schrod::{carleman_construct, structure_check, Matrix, StructureKind, ToleranceConfig};

fn main() -> ode2schrod::Result<()> {
    let tol = ToleranceConfig::default();
    let d = Matrix::from_real_rows(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.2, 0.0, 0.2, 3.0]);
    let s = Matrix::from_real_rows(3, 3, &[0.0, 1.0, -2.0, -1.0, 0.0, 0.5, 2.0, -0.5, 0.0]);
    let a = inverse(&d)?.matmul(&s)?;

    let t = carleman_construct(&a, Some(5), &tol)?;
    println!("B is {}x{}", t.b.rows(), t.b.cols());
    println!("anti-hermitian residual of B A C_B: {:.2e}", t.residual);
    let h = structure_check(&t.hamiltonian.scale(ode2schrod::Complex::new(0.0, -1.0)), StructureKind::Antihermitian, &tol)?;
    println!("H hermitian: {} (residual {:.2e})", h.holds, h.residual);
    let cb = t.c.matmul(&t.b)?;
    println!("‖C_B B − I‖ = {:.2e}", cb.max_abs_diff(&Matrix::identity(3)));
    Ok(())
}
