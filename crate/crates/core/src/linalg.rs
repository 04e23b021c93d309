//! Dense real/complex matrix kernel.
//!
//! Everything downstream works on [`Matrix`], a thin wrapper over a complex
//! `nalgebra` matrix that remembers whether all imaginary parts are exactly
//! zero. Real inputs take real code paths wherever the result has to stay
//! exactly real (square roots, pseudo-inverses, exponentials), so a real
//! transforming matrix never picks up imaginary rounding noise.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::linalg::{Schur, SymmetricEigen};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = Complex64;

pub(crate) const ZERO: Complex = Complex::new(0.0, 0.0);
pub(crate) const ONE: Complex = Complex::new(1.0, 0.0);
pub(crate) const I: Complex = Complex::new(0.0, 1.0);

/// Eigenvector matrices whose reciprocal condition number falls below this
/// are treated as defective.
pub const DEFECT_THRESHOLD: f64 = 1e-8;

/// Largest dimension the dense eigensolver accepts.
pub const MAX_EIG_DIM: usize = 512;

/// Dense complex matrix with a realness flag.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct Matrix {
    data: DMatrix<Complex>,
    real: bool,
}

impl Matrix {
    pub fn from_complex(data: DMatrix<Complex>) -> Self {
        let real = data.iter().all(|z| z.im == 0.0);
        Matrix { data, real }
    }

    pub fn from_real(data: &DMatrix<f64>) -> Self {
        Matrix {
            data: data.map(|x| Complex::new(x, 0.0)),
            real: true,
        }
    }

    /// Builds a real matrix from row-major values.
    pub fn from_real_rows(rows: usize, cols: usize, values: &[f64]) -> Self {
        Self::from_real(&DMatrix::from_row_slice(rows, cols, values))
    }

    /// Builds a complex matrix from row-major values.
    pub fn from_complex_rows(rows: usize, cols: usize, values: &[Complex]) -> Self {
        Self::from_complex(DMatrix::from_row_slice(rows, cols, values))
    }

    /// Builds a real matrix from nested rows, rejecting ragged input.
    pub fn from_nested(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Parse("ragged matrix rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Ok(Self::from_real_rows(r, c, &flat))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            data: DMatrix::zeros(rows, cols),
            real: true,
        }
    }

    pub fn identity(n: usize) -> Self {
        Matrix {
            data: DMatrix::identity(n, n),
            real: true,
        }
    }

    pub fn diagonal(values: &[Complex]) -> Self {
        Self::from_complex(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.data.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// True iff every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn get(&self, i: usize, j: usize) -> Complex {
        self.data[(i, j)]
    }

    pub fn entries_row_major(&self) -> Vec<Complex> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.data[(i, j)]);
            }
        }
        out
    }

    pub fn as_inner(&self) -> &DMatrix<Complex> {
        &self.data
    }

    pub fn into_inner(self) -> DMatrix<Complex> {
        self.data
    }

    /// Real view, available only when the realness flag is set.
    pub fn to_real(&self) -> Option<DMatrix<f64>> {
        self.real.then(|| self.real_part())
    }

    pub fn real_part(&self) -> DMatrix<f64> {
        self.data.map(|z| z.re)
    }

    pub fn imag_part(&self) -> DMatrix<f64> {
        self.data.map(|z| z.im)
    }

    pub fn re(&self) -> Matrix {
        Matrix::from_real(&self.real_part())
    }

    pub fn im(&self) -> Matrix {
        Matrix::from_real(&self.imag_part())
    }

    pub fn adjoint(&self) -> Matrix {
        Matrix {
            data: self.data.adjoint(),
            real: self.real,
        }
    }

    pub fn transpose(&self) -> Matrix {
        Matrix {
            data: self.data.transpose(),
            real: self.real,
        }
    }

    pub fn conj(&self) -> Matrix {
        Matrix {
            data: self.data.map(|z| z.conj()),
            real: self.real,
        }
    }

    pub fn scale(&self, factor: Complex) -> Matrix {
        Matrix::from_complex(&self.data * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Matrix {
        Matrix {
            data: self.data.map(|z| z * factor),
            real: self.real,
        }
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex {
        (0..self.rows().min(self.cols())).map(|k| self.data[(k, k)]).sum()
    }

    /// Largest imaginary magnitude.
    pub fn max_imag(&self) -> f64 {
        self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols() != rhs.rows() {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(self * rhs)
    }

    pub fn apply(&self, v: &[Complex]) -> Result<Vec<Complex>> {
        if v.len() != self.cols() {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols()
            )));
        }
        let out = &self.data * DVector::from_column_slice(v);
        Ok(out.iter().copied().collect())
    }

    /// Stacks `self` on top of `below`.
    pub fn vstack(&self, below: &Matrix) -> Result<Matrix> {
        if self.cols() != below.cols() {
            return Err(Error::ShapeMismatch(format!(
                "cannot stack {} columns over {} columns",
                self.cols(),
                below.cols()
            )));
        }
        let mut data = DMatrix::zeros(self.rows() + below.rows(), self.cols());
        data.rows_mut(0, self.rows()).copy_from(&self.data);
        data.rows_mut(self.rows(), below.rows()).copy_from(&below.data);
        Ok(Matrix {
            data,
            real: self.real && below.real,
        })
    }

    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = DMatrix::zeros(indices.len(), self.cols());
        for (dst, &src) in indices.iter().enumerate() {
            data.set_row(dst, &self.data.row(src));
        }
        Matrix::from_complex(data)
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        Matrix::from_complex(DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
            self.data[(rows[i], cols[j])]
        }))
    }

    /// Max-norm distance between two equally shaped matrices.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in max_abs_diff");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `(M + M†)/2`, exactly hermitian.
    pub fn hermitian_part(&self) -> Matrix {
        let data = (&self.data + self.data.adjoint()) * Complex::new(0.5, 0.0);
        Matrix::from_complex(data)
    }

    pub fn nested_real(&self) -> Vec<Vec<f64>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.data[(i, j)].re).collect())
            .collect()
    }

    pub fn nested_imag(&self) -> Vec<Vec<f64>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.data[(i, j)].im).collect())
            .collect()
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix({}x{}, real={}){}", self.rows(), self.cols(), self.real, self.data)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(re) = self.to_real() {
            write!(f, "{re}")
        } else {
            write!(f, "{}", self.data)
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Complex;

    fn index(&self, idx: (usize, usize)) -> &Complex {
        &self.data[idx]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        Matrix {
            data: &self.data * &rhs.data,
            real: self.real && rhs.real,
        }
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        Matrix {
            data: &self.data + &rhs.data,
            real: self.real && rhs.real,
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        Matrix {
            data: &self.data - &rhs.data,
            real: self.real && rhs.real,
        }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;

    fn neg(self) -> Matrix {
        Matrix {
            data: -&self.data,
            real: self.real,
        }
    }
}

/// Wire format: `{ "rows", "cols", "real": [[..]], "imag": [[..]] }` with
/// `imag` omitted for real matrices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub real: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imag: Option<Vec<Vec<f64>>>,
}

impl From<Matrix> for MatrixJson {
    fn from(m: Matrix) -> Self {
        MatrixJson {
            rows: m.rows(),
            cols: m.cols(),
            real: m.nested_real(),
            imag: (!m.is_real()).then(|| m.nested_imag()),
        }
    }
}

impl TryFrom<MatrixJson> for Matrix {
    type Error = Error;

    fn try_from(json: MatrixJson) -> Result<Matrix> {
        let check = |part: &Vec<Vec<f64>>, name: &str| -> Result<()> {
            if part.len() != json.rows || part.iter().any(|r| r.len() != json.cols) {
                return Err(Error::Parse(format!(
                    "\"{name}\" does not match the declared {}x{} shape",
                    json.rows, json.cols
                )));
            }
            Ok(())
        };
        check(&json.real, "real")?;
        if let Some(imag) = &json.imag {
            check(imag, "imag")?;
        }
        let data = DMatrix::from_fn(json.rows, json.cols, |i, j| {
            let im = json.imag.as_ref().map_or(0.0, |m| m[i][j]);
            Complex::new(json.real[i][j], im)
        });
        Ok(Matrix::from_complex(data))
    }
}

/// Numerical tolerances; every threshold is scaled by the max-norm of the
/// matrix under test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub cluster_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            cluster_tol: 1e-8,
        }
    }
}

impl ToleranceConfig {
    pub fn new(rel_tol: f64, abs_tol: f64, cluster_tol: f64) -> Result<Self> {
        let tol = ToleranceConfig {
            rel_tol,
            abs_tol,
            cluster_tol,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Result<Self> {
        Self::new(rel_tol, self.abs_tol, self.cluster_tol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("cluster_tol", self.cluster_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::BadParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Eigenvalues sorted by `(Re, Im)` with unit-norm right eigenvectors as the
/// columns of `eigenvectors`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<Complex>,
    pub eigenvectors: Matrix,
    /// Reciprocal 2-norm condition number of the eigenvector matrix.
    pub defect_score: f64,
    /// Largest `‖A p − λ p‖ / (‖A‖ ‖p‖)` over all pairs.
    pub max_residual: f64,
    /// Eigenvalue groups (indices into `eigenvalues`) merged at `cluster_tol`.
    pub clusters: Vec<Vec<usize>>,
}

impl EigenDecomposition {
    /// Returns `P Λ P⁻¹`.
    pub fn reconstruct(&self) -> Result<Matrix> {
        let p = &self.eigenvectors;
        let lambda = Matrix::diagonal(&self.eigenvalues);
        let p_inv = inverse(p)?;
        Ok(&(p * &lambda) * &p_inv)
    }
}

fn require_finite(m: &Matrix) -> Result<()> {
    if m.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn require_square(m: &Matrix, what: &str) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!(
            "{what} must be square, got {}x{}",
            m.rows(),
            m.cols()
        )))
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = if let Some(re) = m.to_real() {
        re.singular_values().iter().copied().collect()
    } else {
        m.as_inner().singular_values().iter().copied().collect()
    };
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn inverse(m: &Matrix) -> Result<Matrix> {
    require_square(m, "inverse operand")?;
    if let Some(re) = m.to_real() {
        let inv = re.try_inverse().ok_or(Error::Singular { sigma_min: 0.0 })?;
        return Ok(Matrix::from_real(&inv));
    }
    let inv = m
        .as_inner()
        .clone()
        .try_inverse()
        .ok_or(Error::Singular { sigma_min: 0.0 })?;
    Ok(Matrix::from_complex(inv))
}

/// Dense eigendecomposition: complex Schur form, back-substitution for
/// isolated eigenvalues, and a null-space basis of `A − μI` for eigenvalues
/// that coincide within `cluster_tol · ‖A‖`.
pub fn eig(a: &Matrix, tol: &ToleranceConfig) -> Result<EigenDecomposition> {
    require_square(a, "eigenvalue input")?;
    require_finite(a)?;
    let n = a.rows();
    if n > MAX_EIG_DIM {
        return Err(Error::SizeOverflow {
            requested: n,
            cap: MAX_EIG_DIM,
        });
    }
    let scale = a.max_norm();
    if n == 0 || scale == 0.0 {
        return Ok(EigenDecomposition {
            eigenvalues: vec![ZERO; n],
            eigenvectors: Matrix::identity(n),
            defect_score: 1.0,
            max_residual: 0.0,
            clusters: if n == 0 { vec![] } else { vec![(0..n).collect()] },
        });
    }

    let budget = 100 * n + 100;
    let schur = Schur::try_new(a.as_inner().clone(), f64::EPSILON, budget)
        .ok_or(Error::NoConvergence { budget })?;
    let (q, t) = schur.unpack();
    let raw: Vec<Complex> = (0..n).map(|k| t[(k, k)]).collect();

    // Sort by (Re, Im) after flushing rounding-level parts to zero so that
    // conjugate pairs on the imaginary axis order deterministically.
    let flush = tol.abs_tol * scale;
    let key = |z: Complex| {
        let f = |x: f64| if x.abs() <= flush { 0.0 } else { x };
        (f(z.re), f(z.im))
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (key(raw[i]), key(raw[j]));
        a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))
    });
    let eigenvalues: Vec<Complex> = order.iter().map(|&k| raw[k]).collect();

    let clusters = cluster(&eigenvalues, tol.cluster_tol * scale);

    let mut vectors = DMatrix::<Complex>::zeros(n, n);
    for group in &clusters {
        if group.len() == 1 {
            let sorted = group[0];
            let v = schur_eigenvector(&t, order[sorted], scale);
            vectors.set_column(sorted, &(&q * v));
        } else {
            let mean = group.iter().map(|&k| eigenvalues[k]).sum::<Complex>()
                / Complex::new(group.len() as f64, 0.0);
            let basis = null_space(a.as_inner(), mean, group.len());
            for (col, &sorted) in group.iter().enumerate() {
                vectors.set_column(sorted, &basis.column(col));
            }
        }
    }
    for mut col in vectors.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= Complex::new(norm, 0.0);
        }
        let peak = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if let Some(lead) = col.iter().copied().find(|z| z.norm() > 1e-10 * peak) {
            let phase = lead.conj() / lead.norm();
            col *= phase;
        }
    }

    let mut max_residual: f64 = 0.0;
    for (k, lambda) in eigenvalues.iter().enumerate() {
        let p = vectors.column(k);
        let r = a.as_inner() * p - p * *lambda;
        max_residual = max_residual.max(r.norm() / (scale * p.norm()));
    }

    let eigenvectors = Matrix::from_complex(vectors);
    let s = singular_values(&eigenvectors);
    let defect_score = match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    };

    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
        defect_score,
        max_residual,
        clusters,
    })
}

/// Single-linkage grouping of values closer than `radius`.
fn cluster(values: &[Complex], radius: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

/// Eigenvector of the upper-triangular `t` for its `k`-th diagonal entry.
fn schur_eigenvector(t: &DMatrix<Complex>, k: usize, scale: f64) -> DVector<Complex> {
    let n = t.nrows();
    let lambda = t[(k, k)];
    let small = f64::EPSILON * scale;
    let mut v = DVector::<Complex>::zeros(n);
    v[k] = ONE;
    for i in (0..k).rev() {
        let mut acc = ZERO;
        for j in (i + 1)..=k {
            acc += t[(i, j)] * v[j];
        }
        let mut d = t[(i, i)] - lambda;
        if d.norm() < small {
            d = Complex::new(small, 0.0);
        }
        v[i] = -acc / d;
    }
    v
}

/// Orthonormal basis (as columns) of the `dim` right singular vectors of
/// `A − μI` with the smallest singular values.
fn null_space(a: &DMatrix<Complex>, mu: Complex, dim: usize) -> DMatrix<Complex> {
    let n = a.nrows();
    let shifted = a - DMatrix::<Complex>::identity(n, n) * mu;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let mut basis = DMatrix::<Complex>::zeros(n, dim);
    for (col, &row) in idx.iter().take(dim).enumerate() {
        for r in 0..n {
            basis[(r, col)] = v_t[(row, r)].conj();
        }
    }
    basis
}

/// Hermitian eigendecomposition `(eigenvalues ascending, eigenvectors)` of
/// the hermitian part of `m`, on the real path when `m` is real.
pub fn hermitian_eigen(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    require_square(m, "hermitian eigen input")?;
    require_finite(m)?;
    let (values, vectors) = if let Some(re) = m.to_real() {
        let sym = (&re + re.transpose()) * 0.5;
        let e = SymmetricEigen::new(sym);
        (e.eigenvalues.iter().copied().collect::<Vec<_>>(), Matrix::from_real(&e.eigenvectors))
    } else {
        let herm = m.hermitian_part().into_inner();
        let e = SymmetricEigen::new(herm);
        (
            e.eigenvalues.iter().copied().collect::<Vec<_>>(),
            Matrix::from_complex(e.eigenvectors),
        )
    };
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let sorted: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
    let cols = Matrix::from_complex(DMatrix::from_fn(vectors.rows(), idx.len(), |r, c| {
        vectors[(r, idx[c])]
    }));
    Ok((sorted, cols))
}

fn hermitian_residual(m: &Matrix) -> f64 {
    relative(m.max_abs_diff(&m.adjoint()), m.max_norm())
}

fn relative(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Principal square root of a hermitian positive-definite matrix.
pub fn sqrt_spd(d: &Matrix, tol: &ToleranceConfig) -> Result<Matrix> {
    require_square(d, "square-root input")?;
    require_finite(d)?;
    let residual = hermitian_residual(d);
    if residual > tol.rel_tol {
        return Err(Error::NotHermitian { residual });
    }
    let (values, vectors) = hermitian_eigen(d)?;
    let min = values.first().copied().unwrap_or(f64::INFINITY);
    if min <= tol.abs_tol * d.max_norm() || min <= 0.0 {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    let roots: Vec<Complex> = values.iter().map(|&l| Complex::new(l.sqrt(), 0.0)).collect();
    let r = &(&vectors * &Matrix::diagonal(&roots)) * &vectors.adjoint();
    let r = r.hermitian_part();
    Ok(if d.is_real() { r.re() } else { r })
}

/// Polar decomposition `P = U · P₊` with `U` unitary and `P₊` hermitian
/// positive definite, computed from the SVD `P = W Σ V†` as `U = W V†`,
/// `P₊ = V Σ V†`.
pub fn polar_decompose(p: &Matrix, tol: &ToleranceConfig) -> Result<(Matrix, Matrix)> {
    require_square(p, "polar decomposition input")?;
    require_finite(p)?;
    let n = p.rows();
    if n == 0 {
        return Ok((Matrix::identity(0), Matrix::identity(0)));
    }
    let threshold = tol.abs_tol * p.max_norm();
    if let Some(re) = p.to_real() {
        let svd = re.svd(true, true);
        let sigma_min = svd.singular_values.min();
        if sigma_min <= threshold {
            return Err(Error::Singular { sigma_min });
        }
        let (w, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
        let u = &w * &v_t;
        let pos = v_t.transpose() * DMatrix::from_diagonal(&svd.singular_values) * &v_t;
        let pos = (&pos + pos.transpose()) * 0.5;
        return Ok((Matrix::from_real(&u), Matrix::from_real(&pos)));
    }
    let svd = p.as_inner().clone().svd(true, true);
    let sigma_min = svd.singular_values.min();
    if sigma_min <= threshold {
        return Err(Error::Singular { sigma_min });
    }
    let (w, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let u = &w * &v_t;
    let sigma = svd.singular_values.map(|s| Complex::new(s, 0.0));
    let pos = v_t.adjoint() * DMatrix::from_diagonal(&sigma) * &v_t;
    Ok((Matrix::from_complex(u), Matrix::from_complex(pos).hermitian_part()))
}

/// `C_B = (B†B)⁻¹ B†`, the left inverse that vanishes on `(Im B)⊥`.
pub fn pseudo_left_inverse(b: &Matrix, tol: &ToleranceConfig) -> Result<Matrix> {
    require_finite(b)?;
    if b.rows() < b.cols() {
        return Err(Error::RankDeficient {
            sigma_min: 0.0,
            threshold: 0.0,
        });
    }
    let s = singular_values(b);
    let sigma_min = s.last().copied().unwrap_or(0.0);
    let threshold = tol.abs_tol * b.max_norm();
    if b.cols() > 0 && sigma_min <= threshold {
        return Err(Error::RankDeficient {
            sigma_min,
            threshold,
        });
    }
    if let Some(re) = b.to_real() {
        let gram = re.transpose() * &re;
        let chol = gram
            .cholesky()
            .ok_or(Error::RankDeficient { sigma_min, threshold })?;
        return Ok(Matrix::from_real(&chol.solve(&re.transpose())));
    }
    let bh = b.as_inner().adjoint();
    let gram = &bh * b.as_inner();
    let chol = gram
        .cholesky()
        .ok_or(Error::RankDeficient { sigma_min, threshold })?;
    Ok(Matrix::from_complex(chol.solve(&bh)))
}

/// `exp(M t)` by Padé scaling and squaring.
pub fn expm(m: &Matrix, t: f64) -> Result<Matrix> {
    require_square(m, "exponential input")?;
    require_finite(m)?;
    if !t.is_finite() {
        return Err(Error::NonFinite);
    }
    let out = if let Some(re) = m.to_real() {
        Matrix::from_real(&(re * t).exp())
    } else {
        Matrix::from_complex((m.as_inner() * Complex::new(t, 0.0)).exp())
    };
    require_finite(&out)?;
    Ok(out)
}

/// Structural predicates checked by [`structure_check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    /// Residual `‖M + M†‖ / ‖M‖`.
    Antihermitian,
    /// Residual `max(‖M + Mᵀ‖, ‖Im M‖) / ‖M‖`.
    AntisymmetricReal,
    /// Residual `‖M − M†‖ / ‖M‖`; additionally the smallest eigenvalue of
    /// the hermitian part must exceed `abs_tol · ‖M‖`.
    PositiveDefinite,
    /// Residual `‖M†M − I‖`.
    Unitary,
    /// Residual `σ_min / ‖M‖`; holds when it exceeds `abs_tol`.
    FullColumnRank,
    /// Residual `|tr M| / ‖M‖`.
    TraceZero,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureVerdict {
    pub kind: StructureKind,
    pub holds: bool,
    pub residual: f64,
}

pub fn structure_check(
    m: &Matrix,
    kind: StructureKind,
    tol: &ToleranceConfig,
) -> Result<StructureVerdict> {
    require_finite(m)?;
    if kind != StructureKind::FullColumnRank {
        require_square(m, "structure-check input")?;
    }
    let norm = m.max_norm();
    let (holds, residual) = match kind {
        StructureKind::Antihermitian => {
            let r = relative((&m.data + m.data.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max), norm);
            (r <= tol.rel_tol, r)
        }
        StructureKind::AntisymmetricReal => {
            let sym = (&m.data + m.data.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            let r = relative(sym.max(m.max_imag()), norm);
            (r <= tol.rel_tol, r)
        }
        StructureKind::PositiveDefinite => {
            let r = hermitian_residual(m);
            let (values, _) = hermitian_eigen(m)?;
            let min = values.first().copied().unwrap_or(f64::INFINITY);
            (r <= tol.rel_tol && min > tol.abs_tol * norm && min > 0.0, r)
        }
        StructureKind::Unitary => {
            let gram = &m.adjoint() * m;
            let r = gram.max_abs_diff(&Matrix::identity(m.cols()));
            (r <= tol.rel_tol, r)
        }
        StructureKind::FullColumnRank => {
            if m.rows() < m.cols() {
                (false, 0.0)
            } else {
                let s = singular_values(m);
                let r = relative(s.last().copied().unwrap_or(0.0), norm);
                (m.cols() == 0 || r > tol.abs_tol, r)
            }
        }
        StructureKind::TraceZero => {
            let r = relative(m.trace().norm(), norm);
            (r <= tol.rel_tol, r)
        }
    };
    Ok(StructureVerdict {
        kind,
        holds,
        residual,
    })
}
