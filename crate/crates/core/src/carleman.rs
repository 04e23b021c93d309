//! Carleman transforming matrices and Carleman linearization.
//!
//! A full-column-rank `B` is a Carleman transforming matrix for `A` when
//! `B A C_B` is anti-hermitian; then `y = Bx` obeys `i ẏ = H y` with
//! `H = i·B A C_B` hermitian.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::embeddability::{positive_witness, witness_to_transform, WitnessFlavor};
use crate::error::{Error, Result};
use crate::linalg::{
    pseudo_left_inverse, structure_check, Matrix, StructureKind, ToleranceConfig, I,
};

/// Default cap on the number of dense entries of a linearized system.
pub const DEFAULT_LINEARIZE_CAP: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Carleman,
    Koopman,
}

impl std::str::FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "carleman" => Ok(Flavor::Carleman),
            "koopman" => Ok(Flavor::Koopman),
            other => Err(Error::BadParameter(format!("unknown flavor {other:?}"))),
        }
    }
}

/// A verified embedding `y = Bx` of `ẋ = Ax`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTransform {
    pub flavor: Flavor,
    pub a: Matrix,
    pub b: Matrix,
    /// `C_B = (B†B)⁻¹B†`.
    pub c: Matrix,
    /// `B A C_B`.
    pub generator: Matrix,
    /// `i · B A C_B`.
    pub hamiltonian: Matrix,
    /// Structural residual of the generator (anti-hermitian for Carleman,
    /// real anti-symmetric for Koopman), relative to its max-norm.
    pub residual: f64,
}

impl EmbeddingTransform {
    pub fn state_dim(&self) -> usize {
        self.b.cols()
    }

    pub fn embedded_dim(&self) -> usize {
        self.b.rows()
    }

    /// Re-runs the verifier for this transform's flavor on its own `A`, `B`.
    pub fn reverify(&self, tol: &ToleranceConfig) -> Result<EmbeddingTransform> {
        match self.flavor {
            Flavor::Carleman => carleman_verify(&self.a, &self.b, tol),
            Flavor::Koopman => crate::koopman::koopman_verify(&self.a, &self.b, tol),
        }
    }
}

pub(crate) fn check_shapes(a: &Matrix, b: &Matrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "A must be square, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if b.cols() != a.rows() {
        return Err(Error::ShapeMismatch(format!(
            "B has {} columns but A is {}x{}",
            b.cols(),
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// `(C_B, B A C_B)` for a full-column-rank `B`.
pub(crate) fn mapped_generator(
    a: &Matrix,
    b: &Matrix,
    tol: &ToleranceConfig,
) -> Result<(Matrix, Matrix)> {
    check_shapes(a, b)?;
    let c = pseudo_left_inverse(b, tol)?;
    let generator = &(b * a) * &c;
    Ok((c, generator))
}

/// Accepts `b` iff `B A C_B` is anti-hermitian.
pub fn carleman_verify(a: &Matrix, b: &Matrix, tol: &ToleranceConfig) -> Result<EmbeddingTransform> {
    let (c, generator) = mapped_generator(a, b, tol)?;
    let verdict = structure_check(&generator, StructureKind::Antihermitian, tol)?;
    if !verdict.holds {
        return Err(Error::NotAntiHermitian {
            residual: verdict.residual,
        });
    }
    let hamiltonian = generator.scale(I);
    Ok(EmbeddingTransform {
        flavor: Flavor::Carleman,
        a: a.clone(),
        b: b.clone(),
        c,
        generator,
        hamiltonian,
        residual: verdict.residual,
    })
}

/// Verifies `b` against a caller-supplied left inverse `c_alt` (`c_alt·B = I`)
/// for which `B A c_alt` is anti-hermitian; such a `c_alt` must reproduce
/// the canonical generator. Returns the transform and
/// `‖B A c_alt − B A C_B‖ / ‖A‖`.
pub fn carleman_verify_with_inverse(
    a: &Matrix,
    b: &Matrix,
    c_alt: &Matrix,
    tol: &ToleranceConfig,
) -> Result<(EmbeddingTransform, f64)> {
    let t = carleman_verify(a, b, tol)?;
    let left = c_alt.matmul(b)?;
    let defect = left.max_abs_diff(&Matrix::identity(b.cols()));
    if defect > tol.rel_tol * c_alt.max_norm().max(1.0) * b.max_norm().max(1.0) {
        return Err(Error::PreconditionViolated(format!(
            "supplied C is not a left inverse of B (‖CB − I‖ = {defect:.3e})"
        )));
    }
    let alt = &(b * a) * c_alt;
    let verdict = structure_check(&alt, StructureKind::Antihermitian, tol)?;
    if !verdict.holds {
        return Err(Error::NotAntiHermitian {
            residual: verdict.residual,
        });
    }
    let norm = a.max_norm();
    let gap = alt.max_abs_diff(&t.generator);
    let gap = if norm > 0.0 { gap / norm } else { gap };
    Ok((t, gap))
}

/// Classifies `a` and, when embeddable, returns the Carleman transform
/// `B = [√D; 0]` built from a complex positive witness. `m_target` defaults
/// to `N`.
pub fn carleman_construct(
    a: &Matrix,
    m_target: Option<usize>,
    tol: &ToleranceConfig,
) -> Result<EmbeddingTransform> {
    let w = positive_witness(a, WitnessFlavor::Complex, tol)?;
    let b = witness_to_transform(&w, m_target.unwrap_or(a.rows()), tol)?;
    carleman_verify(a, &b, tol)
}

/// `ẋ = Σ_l F_l x^[l]` with `F_l ∈ ℝ^{N × N^l}` and `x^[l] = x⊗…⊗x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolynomialJson", into = "PolynomialJson")]
pub struct PolynomialSystem {
    n: usize,
    /// `terms[l-1]` is `F_l`; absent degrees are zero matrices.
    terms: Vec<DMatrix<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub n: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub degree: usize,
    pub matrix: Vec<Vec<f64>>,
}

impl PolynomialSystem {
    /// Builds a system from `(degree, F_l)` pairs.
    pub fn new(n: usize, terms: Vec<(usize, DMatrix<f64>)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadParameter("system dimension must be positive".into()));
        }
        let degree = terms.iter().map(|(l, _)| *l).max().unwrap_or(0);
        let mut out: Vec<Option<DMatrix<f64>>> = vec![None; degree];
        for (l, f) in terms {
            if l == 0 {
                return Err(Error::BadParameter(
                    "constant terms are not allowed (degree must be ≥ 1)".into(),
                ));
            }
            let cols = pow(n, l)?;
            if f.shape() != (n, cols) {
                return Err(Error::ShapeMismatch(format!(
                    "F_{l} must be {n}x{cols}, got {}x{}",
                    f.nrows(),
                    f.ncols()
                )));
            }
            if f.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite);
            }
            if out[l - 1].is_some() {
                return Err(Error::Parse(format!("degree {l} listed twice")));
            }
            out[l - 1] = Some(f);
        }
        let terms = out
            .into_iter()
            .enumerate()
            .map(|(k, f)| f.unwrap_or_else(|| DMatrix::zeros(n, n.pow(k as u32 + 1))))
            .collect();
        Ok(PolynomialSystem { n, terms })
    }

    /// `ẋ = a x + b x²` in one dimension.
    pub fn logistic(a: f64, b: f64) -> Self {
        PolynomialSystem {
            n: 1,
            terms: vec![DMatrix::from_element(1, 1, a), DMatrix::from_element(1, 1, b)],
        }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.terms.len()
    }

    /// `F_l`, or `None` past the top degree.
    pub fn term(&self, l: usize) -> Option<&DMatrix<f64>> {
        l.checked_sub(1).and_then(|k| self.terms.get(k))
    }

    /// Evaluates the right-hand side at `x`.
    pub fn rhs(&self, x: &[f64]) -> Vec<f64> {
        let mut power = vec![1.0];
        let mut out = vec![0.0; self.n];
        for f in &self.terms {
            power = kron_vec(&power, x);
            for (i, o) in out.iter_mut().enumerate() {
                *o += f.row(i).iter().zip(&power).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        out
    }

    /// The stacked monomial vector `(x, x^[2], …, x^[k])`.
    pub fn lift(&self, x: &[f64], k: usize) -> Vec<f64> {
        let mut power = vec![1.0];
        let mut out = Vec::new();
        for _ in 0..k {
            power = kron_vec(&power, x);
            out.extend_from_slice(&power);
        }
        out
    }
}

fn kron_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

fn pow(n: usize, e: usize) -> Result<usize> {
    u32::try_from(e)
        .ok()
        .and_then(|e| n.checked_pow(e))
        .ok_or(Error::SizeOverflow {
            requested: usize::MAX,
            cap: usize::MAX,
        })
}

impl TryFrom<PolynomialJson> for PolynomialSystem {
    type Error = Error;

    fn try_from(json: PolynomialJson) -> Result<Self> {
        let mut terms = Vec::with_capacity(json.terms.len());
        for t in json.terms {
            let m = Matrix::from_nested(&t.matrix)?;
            let m = m.to_real().expect("nested input is real");
            terms.push((t.degree, m));
        }
        PolynomialSystem::new(json.n, terms)
    }
}

impl From<PolynomialSystem> for PolynomialJson {
    fn from(sys: PolynomialSystem) -> Self {
        let terms = sys
            .terms
            .iter()
            .enumerate()
            .filter(|(_, f)| f.iter().any(|&x| x != 0.0))
            .map(|(k, f)| TermJson {
                degree: k + 1,
                matrix: f.row_iter().map(|r| r.iter().copied().collect()).collect(),
            })
            .collect();
        PolynomialJson { n: sys.n, terms }
    }
}

/// Transfer matrix `A^j_{j+l−1} = Σ_ν I_{N^{ν−1}} ⊗ F_l ⊗ I_{N^{j−ν}}`
/// (`N^j × N^{j+l−1}`), filled entrywise without forming the Kronecker
/// factors.
pub fn transfer_matrix(f: &Matrix, j: usize) -> Result<Matrix> {
    let f = f
        .to_real()
        .ok_or(Error::RealityViolation { max_imag: f.max_imag() })?;
    Ok(Matrix::from_real(&transfer_real(&f, j)?))
}

fn transfer_real(f: &DMatrix<f64>, j: usize) -> Result<DMatrix<f64>> {
    if j == 0 {
        return Err(Error::BadParameter("transfer order j must be ≥ 1".into()));
    }
    let n = f.nrows();
    let (l, _) = degree_of(n, f.ncols())?;
    pow(n, j + l - 1)?;
    Ok(transfer_block(f, n, l, j))
}

/// Recovers `l` from the column count `N^l`.
fn degree_of(n: usize, cols: usize) -> Result<(usize, usize)> {
    if n == 0 {
        return Err(Error::ShapeMismatch("F_l has no rows".into()));
    }
    if n == 1 {
        if cols == 1 {
            // Degree is not recoverable from a 1×1 block; it does not change
            // the entries either, only the column bookkeeping (always 1).
            return Ok((1, 1));
        }
        return Err(Error::ShapeMismatch(format!("1-row F_l must have 1 column, got {cols}")));
    }
    let mut width = n;
    let mut l = 1;
    while width < cols {
        width = width.checked_mul(n).ok_or_else(|| Error::ShapeMismatch("F_l too wide".into()))?;
        l += 1;
    }
    if width != cols {
        return Err(Error::ShapeMismatch(format!(
            "F_l has {cols} columns, which is not a power of N = {n}"
        )));
    }
    Ok((l, width))
}

/// Block upper-triangular Carleman matrix over `(x, x^[2], …, x^[K])`,
/// dropping every block whose column order exceeds `K`.
///
/// Fails with [`Error::SizeOverflow`] when the dense result would have more
/// than `cap` entries.
pub fn carleman_linearize(sys: &PolynomialSystem, k: usize, cap: usize) -> Result<Matrix> {
    if k == 0 {
        return Err(Error::BadParameter("truncation order K must be ≥ 1".into()));
    }
    let n = sys.n;
    let overflow = || Error::SizeOverflow {
        requested: usize::MAX,
        cap,
    };
    let mut offsets = Vec::with_capacity(k + 1);
    let mut total: usize = 0;
    for j in 1..=k {
        offsets.push(total);
        total = total.checked_add(pow(n, j).map_err(|_| overflow())?).ok_or_else(overflow)?;
    }
    offsets.push(total);
    let entries = total.checked_mul(total).ok_or_else(overflow)?;
    if entries > cap {
        return Err(Error::SizeOverflow {
            requested: entries,
            cap,
        });
    }
    let mut out = DMatrix::zeros(total, total);
    for j in 1..=k {
        for (idx, f) in sys.terms.iter().enumerate() {
            let l = idx + 1;
            let target = j + l - 1;
            if target > k || f.iter().all(|&x| x == 0.0) {
                continue;
            }
            let block = transfer_block(f, n, l, j);
            out.view_mut((offsets[j - 1], offsets[target - 1]), block.shape())
                .copy_from(&block);
        }
    }
    Ok(Matrix::from_real(&out))
}

/// Row tuple `(r_1..r_j)` picks up `F_l[r_ν, c]` at the column tuple with
/// position `ν` replaced by the `l` digits of `c`.
fn transfer_block(f: &DMatrix<f64>, n: usize, l: usize, j: usize) -> DMatrix<f64> {
    let width = n.pow(l as u32);
    let rows = n.pow(j as u32);
    let cols = n.pow((j + l - 1) as u32);
    let mut out = DMatrix::zeros(rows, cols);
    for r in 0..rows {
        for nu in 0..j {
            let tail = n.pow((j - nu - 1) as u32);
            let prefix = r / (tail * n);
            let digit = (r / tail) % n;
            let suffix = r % tail;
            for c in 0..width {
                let v = f[(digit, c)];
                if v != 0.0 {
                    out[(r, (prefix * width + c) * tail + suffix)] += v;
                }
            }
        }
    }
    out
}
