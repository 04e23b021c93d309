//! Real transforming matrix for a rotation, then the second-quantized
//! Hamiltonian on the truncated Fock space and its one-particle sector.

use ode2schrod::{fock_block, fock_hamiltonian, koopman_construct, Complex, Matrix, ToleranceConfig};

fn main() -> ode2schrod::Result<()> {
    let tol = ToleranceConfig::default();
    let a = Matrix::from_real_rows(3, 3, &[0.0, 2.0, 0.0, -2.0, 0.0, 1.0, 0.0, -1.0, 0.0]);
    let t = koopman_construct(&a, None, &tol)?;
    println!("Koopman generator (real anti-symmetric, residual {:.2e}):", t.residual);
    for row in t.generator.nested_real() {
        println!("  {:?}", row.iter().map(|x| format!("{x:+.4}")).collect::<Vec<_>>());
    }

    let fock = fock_hamiltonian(&t.generator, 2, &tol)?;
    println!("Fock space: {} modes, n_max 2, dimension {}", fock.modes(), fock.dim());
    for total in 0..=2 {
        println!("  sector N={total}: {:?}", fock.sector_range(total)?);
    }
    // −iĤ restricted to one particle reproduces the generator.
    let one = fock_block(&fock, 1)?.scale(Complex::new(0.0, -1.0));
    println!("max |(−iĤ)₁ − G| = {:.2e}", one.max_abs_diff(&t.generator));
    Ok(())
}
