//! Evolve a classical state and its embedded quantum state side by side and
//! report how well `B x(t)` tracks `ψ(t)` and how well `C ψ(t)` recovers `x(t)`.

use ode2schrod::linalg::inverse;
use ode2schrod::simulate::{default_grid, normalized, observable_expectation};
use ode2schrod::{carleman_construct, embedding_roundtrip, propagate_state, Complex, Matrix, ToleranceConfig};

fn main() -> ode2schrod::Result<()> {
    let tol = ToleranceConfig::default();
    let d = Matrix::from_real_rows(2, 2, &[3.0, 1.0, 1.0, 1.0]);
    let s = Matrix::from_real_rows(2, 2, &[0.0, 2.0, -2.0, 0.0]);
    let a = inverse(&d)?.matmul(&s)?;
    let t = carleman_construct(&a, None, &tol)?;

    let times = default_grid();
    let x0 = [1.0, -0.5];
    let report = embedding_roundtrip(&t, &x0, &times, &tol)?;
    println!("{report:#?}");
    println!("passes: {}", report.passes());

    let y0 = t.b.apply(&[Complex::new(1.0, 0.0), Complex::new(-0.5, 0.0)])?;
    let psi = propagate_state(&t.hamiltonian, &normalized(&y0)?, &[0.0, 5.0], &tol)?;
    // Population of the first amplitude.
    let mut proj = vec![Complex::new(0.0, 0.0); t.b.rows()];
    proj[0] = Complex::new(1.0, 0.0);
    let p0 = observable_expectation(&psi.states[1], &Matrix::diagonal(&proj), &tol)?;
    println!("⟨P₀⟩ at t = 5: {:.12} (imaginary residual {:.1e})", p0.value, p0.imaginary_residual);
    Ok(())
}
