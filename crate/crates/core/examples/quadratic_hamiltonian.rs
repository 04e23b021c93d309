//! Two coupled degrees of freedom with a positive-definite quadratic
//! Hamiltonian, and the same system with the sign of the energy flipped.
//! For this H̃ the principal square root is the integer-pattern matrix
//! `(1/√5)M`, so verifying that root by hand reproduces the same generator.

use ode2schrod::{canonical_matrix, quad_embed, quad_embed_with_root, Matrix, QuadraticHamiltonian, ToleranceConfig};

fn print(label: &str, m: &Matrix) {
    println!("{label}");
    for row in m.nested_real() {
        println!("  {:?}", row.iter().map(|x| format!("{x:+.4}")).collect::<Vec<_>>());
    }
}

fn main() -> ode2schrod::Result<()> {
    let tol = ToleranceConfig::default();
    let h = QuadraticHamiltonian::new(
        Matrix::from_real_rows(4, 4, &[1., 0., 0., 1., 0., 2., 1., 0., 0., 1., 1., 0., 1., 0., 0., 2.]),
        &tol,
    )?;
    print("A = 2 J H̃", &canonical_matrix(&h));

    let principal = quad_embed(&h, &tol)?;
    print("generator from the principal root", &principal.generator);

    let s = 1.0 / 5f64.sqrt();
    let root = Matrix::from_real_rows(4, 4, &[2., 0., 0., 1., 0., 3., 1., 0., 0., 1., 2., 0., 1., 0., 0., 3.]).scale_real(s);
    let t = quad_embed_with_root(&h, &root, &tol)?;
    println!("max |G_principal − G_hand| = {:.2e}", principal.generator.max_abs_diff(&t.generator));

    let negative = QuadraticHamiltonian::new(h.matrix().scale_real(-1.0), &tol)?;
    let t = quad_embed(&negative, &tol)?;
    print("generator for −H̃ (root −√(H̃))", &t.generator);
    println!("energy at z = (1, 0, 0, 0): {}", h.energy(&[1.0, 0.0, 0.0, 0.0]));
    Ok(())
}
