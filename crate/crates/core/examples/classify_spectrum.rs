//! Classify a few small systems: a rotation, a damped oscillator and a
//! Jordan block. Only the first one can be mapped to a Schrödinger equation.

use ode2schrod::{classify, Matrix, ToleranceConfig};

fn main() -> ode2schrod::Result<()> {
    let tol = ToleranceConfig::default();
    let cases = [
        ("rotation", Matrix::from_real_rows(2, 2, &[0.0, 1.0, -1.0, 0.0])),
        ("damped", Matrix::from_real_rows(2, 2, &[-0.1, 1.0, -1.0, -0.1])),
        ("jordan", Matrix::from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0])),
    ];
    for (name, a) in cases {
        let c = classify(&a, &tol)?;
        println!(
            "{name:>8}: embeddable={} diagonalizable={} max|Re λ|={:.3e} ({})",
            c.embeddable,
            c.diagonalizable,
            c.max_real_part,
            c.reason().unwrap_or("ok"),
        );
    }
    Ok(())
}
