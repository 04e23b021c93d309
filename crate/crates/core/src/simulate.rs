//! Dense reference evolution of `ẋ = Ax` and of the embedded Schrödinger
//! equation, plus the round-trip checks tying the two together.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::carleman::EmbeddingTransform;
use crate::error::{Error, Result};
use crate::linalg::{expm, hermitian_eigen, Complex, Matrix, ToleranceConfig};

/// Allowed deviation of `‖ψ₀‖` from one.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Largest imaginary part tolerated in an expectation value, relative to
/// `‖O‖`.
pub const EXPECTATION_IMAG_TOL: f64 = 1e-12;

/// Pass thresholds used by [`RoundTripReport::passes`].
pub const EMBED_TOL: f64 = 1e-9;
pub const DRIFT_TOL: f64 = 1e-10;
pub const RECOVERY_TOL: f64 = 1e-9;

/// Sampled solution with per-sample norms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Complex>>,
    pub norms: Vec<f64>,
}

impl Trajectory {
    fn from_states(times: &[f64], states: Vec<Vec<Complex>>) -> Self {
        let norms = states.iter().map(|s| norm(s)).collect();
        Trajectory {
            times: times.to_vec(),
            states,
            norms,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with columns `t, re_0, im_0, …, norm`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let dim = self.states.first().map_or(0, Vec::len);
        let mut header = vec!["t".to_string()];
        for k in 0..dim {
            header.push(format!("re_{k}"));
            header.push(format!("im_{k}"));
        }
        header.push("norm".into());
        writeln!(out, "{}", header.join(","))?;
        for ((t, s), n) in self.times.iter().zip(&self.states).zip(&self.norms) {
            let mut fields = vec![format!("{t:.16e}")];
            for z in s {
                fields.push(format!("{:.16e}", z.re));
                fields.push(format!("{:.16e}", z.im));
            }
            fields.push(format!("{n:.16e}"));
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

pub(crate) fn norm(v: &[Complex]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dist(a: &[Complex], b: &[Complex]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn complexify(x: &[f64]) -> Vec<Complex> {
    x.iter().map(|&r| Complex::new(r, 0.0)).collect()
}

/// Parses `"start:step:stop"` into an inclusive uniform grid.
pub fn parse_time_grid(grid: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = grid.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::BadParameter(format!(
            "time grid must look like start:step:stop, got {grid:?}"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::BadParameter(format!("bad number {p:?} in time grid")))
        })
        .collect::<Result<_>>()?;
    uniform_grid(nums[0], nums[1], nums[2])
}

/// `start, start + step, …` up to and including `stop` (within rounding).
pub fn uniform_grid(start: f64, step: f64, stop: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && step.is_finite() && stop.is_finite()) {
        return Err(Error::NonFinite);
    }
    if step <= 0.0 || stop < start {
        return Err(Error::BadParameter(format!(
            "time grid needs step > 0 and stop ≥ start (got {start}:{step}:{stop})"
        )));
    }
    let span = (stop - start) / step;
    let count = (span + 1e-9).floor() as usize;
    if count > 10_000_000 {
        return Err(Error::SizeOverflow {
            requested: count,
            cap: 10_000_000,
        });
    }
    Ok((0..=count).map(|k| start + k as f64 * step).collect())
}

/// `{0, 0.1, …, 10}`.
pub fn default_grid() -> Vec<f64> {
    uniform_grid(0.0, 0.1, 10.0).expect("constant grid is valid")
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite);
    }
    if times.first() != Some(&0.0) {
        return Err(Error::BadParameter("time grid must start at 0".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::BadParameter("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Steps `v ← e^{MΔ} v` across the grid, reusing the exponential while the
/// spacing repeats.
fn evolve(m: &Matrix, v0: &[Complex], times: &[f64]) -> Result<Vec<Vec<Complex>>> {
    let mut states = vec![v0.to_vec()];
    let mut cached: Option<(f64, Matrix)> = None;
    for w in times.windows(2) {
        let dt = w[1] - w[0];
        let step = match &cached {
            Some((h, e)) if (h - dt).abs() <= 1e-12 * dt => e,
            _ => &cached.insert((dt, expm(m, dt)?)).1,
        };
        let next = step.apply(states.last().expect("nonempty"))?;
        states.push(next);
    }
    Ok(states)
}

/// `e^{−iHt} v₀` on the grid from one spectral decomposition of hermitian `H`.
fn evolve_hermitian(h: &Matrix, v0: &[Complex], times: &[f64]) -> Result<Vec<Vec<Complex>>> {
    let (values, vectors) = hermitian_eigen(h)?;
    let coeffs = vectors.adjoint().apply(v0)?;
    let v = vectors.as_inner();
    Ok(times
        .iter()
        .map(|&t| {
            let phased: Vec<Complex> = coeffs
                .iter()
                .zip(&values)
                .map(|(c, &l)| c * Complex::from_polar(1.0, -l * t))
                .collect();
            (0..v.nrows())
                .map(|r| (0..v.ncols()).map(|k| v[(r, k)] * phased[k]).sum())
                .collect()
        })
        .collect())
}

/// `x(t) = e^{At} x₀` on the grid, by dense exponentials of the grid steps.
pub fn propagate_ode(a: &Matrix, x0: &[f64], times: &[f64]) -> Result<Trajectory> {
    check_times(times)?;
    if x0.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let states = evolve(a, &complexify(x0), times)?;
    Ok(Trajectory::from_states(times, states))
}

/// Classical fourth-order Runge–Kutta with `substeps` equal steps between
/// consecutive grid points; a cross-check for [`propagate_ode`].
pub fn propagate_rk4(a: &Matrix, x0: &[f64], times: &[f64], substeps: usize) -> Result<Trajectory> {
    check_times(times)?;
    let substeps = substeps.max(1);
    let f = |v: &[Complex]| a.apply(v);
    let axpy = |v: &[Complex], k: &[Complex], h: f64| -> Vec<Complex> {
        v.iter().zip(k).map(|(x, y)| x + y * h).collect()
    };
    let mut state = complexify(x0);
    let mut states = vec![state.clone()];
    for w in times.windows(2) {
        let h = (w[1] - w[0]) / substeps as f64;
        for _ in 0..substeps {
            let k1 = f(&state)?;
            let k2 = f(&axpy(&state, &k1, h / 2.0))?;
            let k3 = f(&axpy(&state, &k2, h / 2.0))?;
            let k4 = f(&axpy(&state, &k3, h))?;
            for (i, s) in state.iter_mut().enumerate() {
                *s += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
            }
        }
        states.push(state.clone());
    }
    Ok(Trajectory::from_states(times, states))
}

fn hermitian_residual(h: &Matrix) -> f64 {
    let diff = h.max_abs_diff(&h.adjoint());
    if diff == 0.0 {
        0.0
    } else {
        diff / h.max_norm()
    }
}

/// `ψ(t) = e^{−iHt} ψ₀` for hermitian `H` and unit `ψ₀`, from the spectral
/// decomposition of `H`.
pub fn propagate_state(
    h: &Matrix,
    psi0: &[Complex],
    times: &[f64],
    tol: &ToleranceConfig,
) -> Result<Trajectory> {
    check_times(times)?;
    if !h.is_square() {
        return Err(Error::ShapeMismatch("Hamiltonian must be square".into()));
    }
    let residual = hermitian_residual(h);
    if residual > tol.rel_tol {
        return Err(Error::NotHermitian { residual });
    }
    let n0 = norm(psi0);
    if (n0 - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { norm: n0 });
    }
    let states = evolve_hermitian(h, psi0, times)?;
    Ok(Trajectory::from_states(times, states))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub value: f64,
    pub imaginary_residual: f64,
}

/// `⟨ψ|O|ψ⟩` for hermitian `O` and unit `ψ`.
pub fn observable_expectation(
    psi: &[Complex],
    o: &Matrix,
    tol: &ToleranceConfig,
) -> Result<Expectation> {
    if !o.is_square() || o.cols() != psi.len() {
        return Err(Error::ShapeMismatch(format!(
            "observable is {}x{} but the state has length {}",
            o.rows(),
            o.cols(),
            psi.len()
        )));
    }
    let residual = hermitian_residual(o);
    if residual > tol.rel_tol {
        return Err(Error::NotHermitian { residual });
    }
    let n = norm(psi);
    if (n - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { norm: n });
    }
    let o_psi = o.hermitian_part().apply(psi)?;
    let z: Complex = psi.iter().zip(&o_psi).map(|(a, b)| a.conj() * b).sum();
    let imaginary_residual = z.im.abs();
    if imaginary_residual > EXPECTATION_IMAG_TOL * o.max_norm().max(1.0) {
        return Err(Error::InvariantViolation(format!(
            "expectation value has imaginary part {imaginary_residual:.3e}"
        )));
    }
    Ok(Expectation {
        value: z.re,
        imaginary_residual,
    })
}

/// Errors accumulated by evolving `x(t)` classically and `y(t) = B x(t)`
/// through the mapped generator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundTripReport {
    /// `max_t ‖B x(t) − y(t)‖`.
    pub max_embed_error: f64,
    /// `max_t |‖y(t)‖ − ‖y(0)‖| / ‖y(0)‖`.
    pub max_norm_drift: f64,
    /// `max_t ‖C_B y(t) − x(t)‖`.
    pub max_recovery_error: f64,
    /// `min_t |⟨ψ_ref(t)|ψ(t)⟩|` with `ψ_ref = Bx/‖Bx‖` and `ψ` evolved by
    /// `e^{−iHt}` from `ψ(0)`.
    pub fidelity_floor: f64,
    /// `‖B x₀‖`.
    pub reference_norm: f64,
    /// `‖x₀‖`.
    pub initial_norm: f64,
}

impl RoundTripReport {
    /// Embedding error relative to `‖B x₀‖`.
    pub fn relative_embed_error(&self) -> f64 {
        self.max_embed_error / self.reference_norm
    }

    /// Checks every error against the module thresholds.
    pub fn passes(&self) -> bool {
        self.relative_embed_error() <= EMBED_TOL
            && self.max_norm_drift <= DRIFT_TOL
            && self.max_recovery_error <= RECOVERY_TOL * self.initial_norm.max(1.0)
            && (1.0 - self.fidelity_floor) <= EMBED_TOL
    }
}

/// Evolves both sides of the embedding on `times` and reports the
/// discrepancies.
pub fn embedding_roundtrip(
    t: &EmbeddingTransform,
    x0: &[f64],
    times: &[f64],
    tol: &ToleranceConfig,
) -> Result<RoundTripReport> {
    if x0.len() != t.state_dim() {
        return Err(Error::ShapeMismatch(format!(
            "initial state has length {} but the transform expects {}",
            x0.len(),
            t.state_dim()
        )));
    }
    let initial_norm = x0.iter().map(|x| x * x).sum::<f64>().sqrt();
    if initial_norm == 0.0 {
        return Err(Error::BadParameter("initial state must be nonzero".into()));
    }
    let xs = propagate_ode(&t.a, x0, times)?;
    let y0 = t.b.apply(&complexify(x0))?;
    let reference_norm = norm(&y0);
    // y(t) = e^{Gt} y₀ = e^{−iHt} y₀; ψ is the same evolution from B x₀/‖B x₀‖.
    let ys = evolve_hermitian(&t.hamiltonian, &y0, times)?;
    let psi0: Vec<Complex> = y0.iter().map(|z| z / reference_norm).collect();
    let psis = propagate_state(&t.hamiltonian, &psi0, times, tol)?;

    let mut report = RoundTripReport {
        max_embed_error: 0.0,
        max_norm_drift: 0.0,
        max_recovery_error: 0.0,
        fidelity_floor: 1.0,
        reference_norm,
        initial_norm,
    };
    for ((x, y), psi) in xs.states.iter().zip(&ys).zip(&psis.states) {
        let bx = t.b.apply(x)?;
        report.max_embed_error = report.max_embed_error.max(dist(&bx, y));
        report.max_norm_drift = report
            .max_norm_drift
            .max((norm(y) - reference_norm).abs() / reference_norm);
        let cy = t.c.apply(y)?;
        report.max_recovery_error = report.max_recovery_error.max(dist(&cy, x));
        let bx_norm = norm(&bx);
        let overlap: Complex = bx.iter().zip(psi).map(|(a, b)| a.conj() * b).sum::<Complex>()
            / bx_norm;
        report.fidelity_floor = report.fidelity_floor.min(overlap.norm());
    }
    Ok(report)
}

/// Evolves `v0` under `e^{Mt}` on the grid (any square `M`).
pub fn propagate_linear(m: &Matrix, v0: &[Complex], times: &[f64]) -> Result<Trajectory> {
    check_times(times)?;
    Ok(Trajectory::from_states(times, evolve(m, v0, times)?))
}

/// Unit-norm copy of `v`.
pub fn normalized(v: &[Complex]) -> Result<Vec<Complex>> {
    let n = norm(v);
    if n == 0.0 {
        return Err(Error::NotNormalized { norm: 0.0 });
    }
    Ok(v.iter().map(|z| z / n).collect())
}
