//! Truncated Carleman linearization of the logistic equation
//! `ẋ = −x + 0.1 x²` compared with its closed-form solution.

use ode2schrod::simulate::propagate_ode;
use ode2schrod::{carleman_linearize, PolynomialSystem};

fn main() -> ode2schrod::Result<()> {
    let (a, b, x0) = (-1.0, 0.1, 0.5);
    let sys = PolynomialSystem::logistic(a, b);
    let exact = |t: f64| a * x0 / ((a + b * x0) * (-a * t).exp() - b * x0);
    let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();

    for k in [1, 2, 4, 8] {
        let m = carleman_linearize(&sys, k, 1_000_000)?;
        let traj = propagate_ode(&m, &sys.lift(&[x0], k), &times)?;
        let err = times
            .iter()
            .zip(&traj.states)
            .map(|(&t, y)| (y[0].re - exact(t)).abs())
            .fold(0.0, f64::max);
        println!("K = {k}: dimension {:>2}, max error on [0,1] = {err:.3e}", m.rows());
    }
    Ok(())
}
