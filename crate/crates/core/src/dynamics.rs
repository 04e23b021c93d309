//! Quadratic classical Hamiltonians and coupled harmonic oscillators.
//!
//! `H(q, p) = zᵀ H̃ z` with `z = (q, p)` gives Hamilton's equations
//! `ż = 2 J H̃ z`, `J = [[0, I], [−I, 0]]`. When `H̃` is definite, any real
//! root `BᵀB = ±H̃` is a Koopman–von Neumann transforming matrix.

use serde::{Deserialize, Serialize};

use crate::carleman::{carleman_verify, EmbeddingTransform};
use crate::error::{Error, Result};
use crate::koopman::{drop_zero_rows, koopman_verify};
use crate::linalg::{
    hermitian_eigen, sqrt_spd, structure_check, Complex, Matrix, StructureKind, ToleranceConfig,
    I, ONE,
};

/// Real symmetric `H̃` of size `2N × 2N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct QuadraticHamiltonian {
    h: Matrix,
}

impl QuadraticHamiltonian {
    pub fn new(h: Matrix, tol: &ToleranceConfig) -> Result<Self> {
        if !h.is_finite() {
            return Err(Error::NonFinite);
        }
        if !h.is_square() || !h.rows().is_multiple_of(2) {
            return Err(Error::ShapeMismatch(format!(
                "quadratic form must be 2N x 2N, got {}x{}",
                h.rows(),
                h.cols()
            )));
        }
        if !h.is_real() {
            return Err(Error::RealityViolation {
                max_imag: h.max_imag(),
            });
        }
        let diff = h.max_abs_diff(&h.transpose());
        let norm = h.max_norm();
        let residual = if diff == 0.0 { 0.0 } else { diff / norm };
        if residual > tol.rel_tol {
            return Err(Error::NotSymmetric { residual });
        }
        Ok(QuadraticHamiltonian { h })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.h
    }

    /// Number of degrees of freedom `N`.
    pub fn degrees_of_freedom(&self) -> usize {
        self.h.rows() / 2
    }

    /// `zᵀ H̃ z`.
    pub fn energy(&self, z: &[f64]) -> f64 {
        let n = self.h.rows();
        let mut e = 0.0;
        for i in 0..n {
            for j in 0..n {
                e += z[i] * self.h.get(i, j).re * z[j];
            }
        }
        e
    }
}

impl TryFrom<Vec<Vec<f64>>> for QuadraticHamiltonian {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        QuadraticHamiltonian::new(Matrix::from_nested(&rows)?, &ToleranceConfig::default())
    }
}

impl From<QuadraticHamiltonian> for Vec<Vec<f64>> {
    fn from(h: QuadraticHamiltonian) -> Self {
        h.h.nested_real()
    }
}

/// Standard symplectic matrix `[[0, I_N], [−I_N, 0]]`.
pub fn symplectic(n: usize) -> Matrix {
    let mut v = vec![0.0; 4 * n * n];
    for k in 0..n {
        v[k * 2 * n + n + k] = 1.0;
        v[(n + k) * 2 * n + k] = -1.0;
    }
    Matrix::from_real_rows(2 * n, 2 * n, &v)
}

/// `A = 2 J H̃`.
pub fn canonical_matrix(h: &QuadraticHamiltonian) -> Matrix {
    let n = h.degrees_of_freedom();
    let m = h.h.real_part();
    let mut a = nalgebra::DMatrix::<f64>::zeros(2 * n, 2 * n);
    for j in 0..2 * n {
        for k in 0..n {
            a[(k, j)] = 2.0 * m[(n + k, j)];
            a[(n + k, j)] = -2.0 * m[(k, j)];
        }
    }
    Matrix::from_real(&a)
}

/// Sign of a definite quadratic form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Definiteness {
    Positive,
    Negative,
}

/// Classifies `H̃` as positive or negative definite.
pub fn definiteness(h: &QuadraticHamiltonian, tol: &ToleranceConfig) -> Result<Definiteness> {
    let (values, _) = hermitian_eigen(&h.h)?;
    let lo = values.first().copied().unwrap_or(0.0);
    let hi = values.last().copied().unwrap_or(0.0);
    let floor = tol.abs_tol * h.h.max_norm();
    if lo > floor && lo > 0.0 {
        Ok(Definiteness::Positive)
    } else if hi < -floor && hi < 0.0 {
        Ok(Definiteness::Negative)
    } else {
        Err(Error::Indefinite {
            min_eigenvalue: lo,
            max_eigenvalue: hi,
        })
    }
}

/// Koopman transform from the principal root: `B = √H̃` for `H̃ > 0`, or
/// `−√(−H̃)` for `H̃ < 0`.
pub fn quad_embed(h: &QuadraticHamiltonian, tol: &ToleranceConfig) -> Result<EmbeddingTransform> {
    let root = match definiteness(h, tol)? {
        Definiteness::Positive => sqrt_spd(&h.h, tol)?,
        Definiteness::Negative => sqrt_spd(&h.h.scale_real(-1.0), tol)?,
    };
    quad_embed_with_root(h, &root, tol)
}

/// Koopman transform from a caller-supplied real root `B` with
/// `BᵀB = H̃` (positive case) or `BᵀB = −H̃` (negative case, transforming
/// matrix `−B`). The generator is assembled as `2BJBᵀ` (resp.
/// `2(−B)(−J)(−B)ᵀ`) and antisymmetrized exactly; it is cross-checked
/// against `B A C_B`.
pub fn quad_embed_with_root(
    h: &QuadraticHamiltonian,
    root: &Matrix,
    tol: &ToleranceConfig,
) -> Result<EmbeddingTransform> {
    let sign = definiteness(h, tol)?;
    if !root.is_real() {
        return Err(Error::RealityViolation {
            max_imag: root.max_imag(),
        });
    }
    let n2 = h.h.rows();
    if root.cols() != n2 {
        return Err(Error::ShapeMismatch(format!(
            "root must have {n2} columns, got {}",
            root.cols()
        )));
    }
    let target = match sign {
        Definiteness::Positive => h.h.clone(),
        Definiteness::Negative => h.h.scale_real(-1.0),
    };
    let gram = &root.transpose() * root;
    let gap = gram.max_abs_diff(&target);
    if gap > tol.rel_tol * target.max_norm().max(1.0) * 10.0 {
        return Err(Error::VerificationFailed(format!(
            "root does not square to the quadratic form (‖BᵀB − H̃‖ = {gap:.3e})"
        )));
    }
    let (b, j) = match sign {
        Definiteness::Positive => (root.clone(), symplectic(n2 / 2)),
        Definiteness::Negative => (root.scale_real(-1.0), symplectic(n2 / 2).scale_real(-1.0)),
    };
    let a = canonical_matrix(h);
    let mut t = koopman_verify(&a, &b, tol)?;
    let raw = (&(&b * &j) * &b.transpose()).scale_real(2.0);
    let generator = (&raw - &raw.transpose()).scale_real(0.5);
    let mismatch = generator.max_abs_diff(&t.generator);
    if mismatch > tol.rel_tol * a.max_norm().max(1.0) * gram.max_norm().max(1.0) {
        return Err(Error::VerificationFailed(format!(
            "2BJBᵀ disagrees with B A C_B by {mismatch:.3e}"
        )));
    }
    t.residual = structure_check(&generator, StructureKind::AntisymmetricReal, tol)?.residual;
    t.hamiltonian = generator.scale(I);
    t.generator = generator;
    Ok(t)
}

/// One spring of strength `kappa` between bodies `j` and `k` (1-based;
/// `j == k` anchors body `j` to the wall).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spring {
    pub j: usize,
    pub k: usize,
    pub kappa: f64,
}

/// Point masses joined by springs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkJson", into = "NetworkJson")]
pub struct OscillatorNetwork {
    masses: Vec<f64>,
    /// Symmetric `κ` (0-based).
    kappa: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetworkJson {
    pub masses: Vec<f64>,
    pub springs: Vec<Spring>,
}

impl OscillatorNetwork {
    pub fn new(masses: Vec<f64>, springs: &[Spring]) -> Result<Self> {
        let n = masses.len();
        if n == 0 {
            return Err(Error::InvariantViolation("network has no masses".into()));
        }
        if let Some(m) = masses.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::InvariantViolation(format!("mass must be positive, got {m}")));
        }
        let mut kappa = vec![vec![0.0; n]; n];
        let mut seen = vec![vec![false; n]; n];
        for s in springs {
            if s.j == 0 || s.k == 0 || s.j > n || s.k > n {
                return Err(Error::InvariantViolation(format!(
                    "spring ({}, {}) refers to a body outside 1..={n}",
                    s.j, s.k
                )));
            }
            if !(s.kappa.is_finite() && s.kappa >= 0.0) {
                return Err(Error::InvariantViolation(format!(
                    "spring constant must be nonnegative, got {}",
                    s.kappa
                )));
            }
            let (j, k) = (s.j.min(s.k) - 1, s.j.max(s.k) - 1);
            if seen[j][k] {
                return Err(Error::InvariantViolation(format!(
                    "spring ({}, {}) listed twice",
                    j + 1,
                    k + 1
                )));
            }
            seen[j][k] = true;
            kappa[j][k] = s.kappa;
            kappa[k][j] = s.kappa;
        }
        Ok(OscillatorNetwork { masses, kappa })
    }

    /// Every pair coupled with the same constant, every body anchored.
    pub fn uniform(masses: Vec<f64>, anchor: f64, coupling: f64) -> Result<Self> {
        let n = masses.len();
        let mut springs = Vec::new();
        for j in 1..=n {
            springs.push(Spring { j, k: j, kappa: anchor });
            for k in (j + 1)..=n {
                springs.push(Spring { j, k, kappa: coupling });
            }
        }
        Self::new(masses, &springs)
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// `κ_jk` with 0-based indices.
    pub fn kappa(&self, j: usize, k: usize) -> f64 {
        self.kappa[j][k]
    }

    /// Stiffness `K`: `K_jj = Σ_k κ_jk`, `K_jk = −κ_jk`.
    pub fn stiffness(&self) -> Matrix {
        let n = self.len();
        let mut v = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                if j == k {
                    v[j * n + j] = self.kappa[j].iter().sum();
                } else {
                    v[j * n + k] = -self.kappa[j][k];
                }
            }
        }
        Matrix::from_real_rows(n, n, &v)
    }

    /// `H̃ = ½ diag(K, M⁻¹)` in `(q, p)` coordinates.
    pub fn quadratic_form(&self) -> QuadraticHamiltonian {
        let n = self.len();
        let k = self.stiffness();
        let mut v = vec![0.0; 4 * n * n];
        for i in 0..n {
            for j in 0..n {
                v[i * 2 * n + j] = 0.5 * k.get(i, j).re;
            }
            v[(n + i) * 2 * n + n + i] = 0.5 / self.masses[i];
        }
        QuadraticHamiltonian {
            h: Matrix::from_real_rows(2 * n, 2 * n, &v),
        }
    }
}

impl TryFrom<NetworkJson> for OscillatorNetwork {
    type Error = Error;

    fn try_from(json: NetworkJson) -> Result<Self> {
        OscillatorNetwork::new(json.masses, &json.springs)
    }
}

impl From<OscillatorNetwork> for NetworkJson {
    fn from(net: OscillatorNetwork) -> Self {
        let n = net.len();
        let mut springs = Vec::new();
        for j in 0..n {
            for k in j..n {
                if net.kappa[j][k] != 0.0 {
                    springs.push(Spring {
                        j: j + 1,
                        k: k + 1,
                        kappa: net.kappa[j][k],
                    });
                }
            }
        }
        NetworkJson {
            masses: net.masses,
            springs,
        }
    }
}

/// Hamilton's equations in `(q, p)`: `A = [[0, M⁻¹], [−K, 0]]`.
pub fn oscillator_system(net: &OscillatorNetwork) -> Matrix {
    canonical_matrix(&net.quadratic_form())
}

/// Row template of the oscillator transforming matrix: `(column, value)`
/// pairs on the `(q, p)` state. The first `momentum_rows` rows are real in
/// both flavors; the spring rows carry a factor `i` in the Carleman one.
struct OscillatorRows {
    rows: Vec<Vec<(usize, f64)>>,
    momentum_rows: usize,
}

fn oscillator_rows(net: &OscillatorNetwork) -> OscillatorRows {
    let n = net.len();
    let mut rows = Vec::new();
    // √m_j ẋ_j = p_j / √m_j
    for j in 0..n {
        rows.push(vec![(n + j, 1.0 / net.masses[j].sqrt())]);
    }
    for j in 0..n {
        rows.push(vec![(j, net.kappa[j][j].sqrt())]);
    }
    for j in 0..n {
        for k in (j + 1)..n {
            let s = net.kappa[j][k].sqrt();
            rows.push(vec![(j, s), (k, -s)]);
        }
    }
    OscillatorRows { rows, momentum_rows: n }
}

fn assemble(n2: usize, rows: &[Vec<(usize, f64)>], phase: impl Fn(usize) -> Complex) -> Matrix {
    let mut v = vec![Complex::new(0.0, 0.0); rows.len() * n2];
    for (r, row) in rows.iter().enumerate() {
        for &(c, x) in row {
            v[r * n2 + c] = phase(r) * x;
        }
    }
    Matrix::from_complex_rows(rows.len(), n2, &v)
}

/// Carleman transforming matrix on `(q, p)`: rows
/// `√m_j ẋ_j`, `i√κ_jj x_j`, `i√κ_jk (x_j − x_k)` (j < k), with rows of
/// vanishing springs removed.
pub fn oscillator_carleman(net: &OscillatorNetwork, tol: &ToleranceConfig) -> Result<Matrix> {
    let t = oscillator_rows(net);
    let m = t.momentum_rows;
    let b = assemble(2 * net.len(), &t.rows, |r| if r < m { ONE } else { I });
    let (b, _) = drop_zero_rows(&b);
    let verdict = structure_check(&b, StructureKind::FullColumnRank, tol)?;
    if !verdict.holds {
        return Err(Error::RankDeficient {
            sigma_min: verdict.residual * b.max_norm(),
            threshold: tol.abs_tol * b.max_norm(),
        });
    }
    Ok(b)
}

/// Real counterpart of [`oscillator_carleman`] together with the diagonal
/// unitary relating the two mapped Hamiltonians.
#[derive(Clone, Debug)]
pub struct OscillatorKoopman {
    /// `B″`: the Carleman rows with the factor `i` removed.
    pub b_koopman: Matrix,
    /// `U = diag(1, …, 1, −i, …, −i)`, with `B″ = U B`.
    pub unitary: Matrix,
    pub carleman: EmbeddingTransform,
    pub koopman: EmbeddingTransform,
    /// `‖H_Koo − U H_Car U†‖` (max-norm).
    pub residual: f64,
}

pub fn oscillator_koopman(
    net: &OscillatorNetwork,
    tol: &ToleranceConfig,
) -> Result<OscillatorKoopman> {
    let a = oscillator_system(net);
    let b = oscillator_carleman(net, tol)?;
    let momentum = net.len();
    let phases: Vec<Complex> = (0..b.rows())
        .map(|r| if r < momentum { ONE } else { -I })
        .collect();
    let unitary = Matrix::diagonal(&phases);
    let b_koopman = (&unitary * &b).re();
    let carleman = carleman_verify(&a, &b, tol)?;
    let koopman = koopman_verify(&a, &b_koopman, tol)?;
    let conjugated = &(&unitary * &carleman.hamiltonian) * &unitary.adjoint();
    let residual = koopman.hamiltonian.max_abs_diff(&conjugated);
    Ok(OscillatorKoopman {
        b_koopman,
        unitary,
        carleman,
        koopman,
        residual,
    })
}
