//! Koopman–von Neumann transforming matrices and the Fock-space Hamiltonian.
//!
//! A real full-column-rank `B` is a Koopman–von Neumann transforming matrix
//! when `B A C_B` is real anti-symmetric. Then `ã = B A C_B` defines the
//! second-quantized Hamiltonian
//! `Ĥ = (i/2) Σ_jk ã_jk (a†_j a_k − a_j a†_k)`, which conserves the total
//! occupation number and acts on the one-particle sector as `i·ã`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::carleman::{carleman_verify, mapped_generator, EmbeddingTransform, Flavor};
use crate::embeddability::{positive_witness, witness_to_transform, WitnessFlavor};
use crate::error::{Error, Result};
use crate::linalg::{structure_check, Complex, Matrix, StructureKind, ToleranceConfig, I, ZERO};

/// Largest occupation basis [`fock_hamiltonian`] will enumerate.
pub const FOCK_BASIS_CAP: usize = 100_000;

/// Largest basis [`FockHamiltonian::dense_operator`] will materialize.
pub const FOCK_DENSE_CAP: usize = 4096;

/// Default occupation truncation.
pub const DEFAULT_NMAX: usize = 2;

/// Accepts a real `b` iff `B A C_B` is real anti-symmetric.
pub fn koopman_verify(a: &Matrix, b: &Matrix, tol: &ToleranceConfig) -> Result<EmbeddingTransform> {
    if !b.is_real() {
        return Err(Error::RealityViolation {
            max_imag: b.max_imag(),
        });
    }
    let (c, generator) = mapped_generator(a, b, tol)?;
    let verdict = structure_check(&generator, StructureKind::AntisymmetricReal, tol)?;
    if !verdict.holds {
        return Err(Error::NotAntiSymmetric {
            residual: verdict.residual,
        });
    }
    let hamiltonian = generator.scale(I);
    Ok(EmbeddingTransform {
        flavor: Flavor::Koopman,
        a: a.clone(),
        b: b.clone(),
        c,
        generator,
        hamiltonian,
        residual: verdict.residual,
    })
}

/// Classifies `a` and builds a real transform from the real witness
/// `Re(B†B)`.
pub fn koopman_construct(
    a: &Matrix,
    m_target: Option<usize>,
    tol: &ToleranceConfig,
) -> Result<EmbeddingTransform> {
    let w = positive_witness(a, WitnessFlavor::Real, tol)?;
    let b = witness_to_transform(&w, m_target.unwrap_or(a.rows()), tol)?;
    koopman_verify(a, &b, tol)
}

/// `B′ = [Re B; Im B]`.
pub fn stack_real_imag(b: &Matrix) -> Matrix {
    b.re().vstack(&b.im()).expect("real and imaginary parts share a shape")
}

/// Verifies `b` as a Carleman matrix for `a`, then returns the Koopman
/// transform for `[Re B; Im B]`.
pub fn carleman_to_koopman(
    a: &Matrix,
    b: &Matrix,
    tol: &ToleranceConfig,
) -> Result<EmbeddingTransform> {
    carleman_verify(a, b, tol)?;
    koopman_verify(a, &stack_real_imag(b), tol)
}

/// Reinterprets a Koopman transform as a Carleman one (real anti-symmetric
/// generators are anti-hermitian).
pub fn koopman_to_carleman(t: &EmbeddingTransform, tol: &ToleranceConfig) -> Result<EmbeddingTransform> {
    if t.flavor != Flavor::Koopman {
        return Err(Error::PreconditionViolated("transform is not of Koopman flavor".into()));
    }
    koopman_verify(&t.a, &t.b, tol)?;
    carleman_verify(&t.a, &t.b, tol)
}

/// Largest number of entries with `|m_ij| > threshold` in any row or column.
pub fn sparsity(m: &Matrix, threshold: f64) -> usize {
    let (r, c) = m.shape();
    let mut cols = vec![0usize; c];
    let mut best = 0;
    for i in 0..r {
        let mut row = 0;
        for (j, count) in cols.iter_mut().enumerate() {
            if m.get(i, j).norm() > threshold {
                row += 1;
                *count += 1;
            }
        }
        best = best.max(row);
    }
    best.max(cols.into_iter().max().unwrap_or(0))
}

/// [`sparsity`] with the threshold `rel_tol · ‖M‖`.
pub fn sparsity_relative(m: &Matrix, tol: &ToleranceConfig) -> usize {
    sparsity(m, tol.rel_tol * m.max_norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparsityReport {
    /// Sparsity of `B A C_B`.
    pub s: usize,
    /// Sparsity of `B A C_B*` (entrywise conjugate of `C_B`).
    pub s_conj: usize,
    /// Sparsity of `B′ A C_B′` for `B′ = [Re B; Im B]`.
    pub s_stacked: usize,
    /// `s_stacked ≤ 2 (s + s_conj)`.
    pub bound_ok: bool,
}

/// Compares the sparsity of the stacked real transform with `2(s + s′)`.
/// Requires `B†B` real.
pub fn sparsity_bound_check(
    a: &Matrix,
    b: &Matrix,
    tol: &ToleranceConfig,
) -> Result<SparsityReport> {
    let gram = &b.adjoint() * b;
    if gram.max_imag() > tol.rel_tol * gram.max_norm() {
        return Err(Error::PreconditionViolated(format!(
            "B†B is not real (largest imaginary part {:.3e})",
            gram.max_imag()
        )));
    }
    let t = carleman_verify(a, b, tol)?;
    let conj = &(b * a) * &t.c.conj();
    let stacked = koopman_verify(a, &stack_real_imag(b), tol)?;
    let s = sparsity_relative(&t.generator, tol);
    let s_conj = sparsity_relative(&conj, tol);
    let s_stacked = sparsity_relative(&stacked.generator, tol);
    Ok(SparsityReport {
        s,
        s_conj,
        s_stacked,
        bound_ok: s_stacked <= 2 * (s + s_conj),
    })
}

/// Removes rows whose norm is at most `1e-12 · ‖B‖`; returns the kept
/// matrix and the original indices of its rows.
pub fn drop_zero_rows(b: &Matrix) -> (Matrix, Vec<usize>) {
    let threshold = 1e-12 * b.max_norm();
    let keep: Vec<usize> = (0..b.rows())
        .filter(|&i| {
            let norm = (0..b.cols()).map(|j| b.get(i, j).norm_sqr()).sum::<f64>().sqrt();
            norm > threshold
        })
        .collect();
    (b.select_rows(&keep), keep)
}

/// Number-conserving bosonic Hamiltonian truncated at total occupation
/// `n_max`, stored as sparse `(row, col, value)` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct FockHamiltonian {
    coefficients: Matrix,
    n_max: usize,
    basis: Vec<Vec<usize>>,
    /// Start offset of each total-number sector in `basis`.
    sector_start: Vec<usize>,
    entries: Vec<(usize, usize, Complex)>,
}

impl FockHamiltonian {
    pub fn coefficients(&self) -> &Matrix {
        &self.coefficients
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn modes(&self) -> usize {
        self.coefficients.rows()
    }

    /// Occupation tuples grouped by total number, ascending; within a sector
    /// in descending lexicographic order, so the one-particle sector lists
    /// `|1,0,…⟩` first and mode `j` sits at position `j`.
    pub fn basis(&self) -> &[Vec<usize>] {
        &self.basis
    }

    /// Nonzero matrix elements `⟨basis[row]| Ĥ |basis[col]⟩`.
    pub fn entries(&self) -> &[(usize, usize, Complex)] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn sector_range(&self, total: usize) -> Result<std::ops::Range<usize>> {
        if total > self.n_max {
            return Err(Error::BadSector {
                total,
                n_max: self.n_max,
            });
        }
        Ok(self.sector_start[total]..self.sector_start[total + 1])
    }

    pub fn dense_operator(&self) -> Result<Matrix> {
        let d = self.dim();
        if d > FOCK_DENSE_CAP {
            return Err(Error::SizeOverflow {
                requested: d,
                cap: FOCK_DENSE_CAP,
            });
        }
        let mut values = vec![ZERO; d * d];
        for &(r, c, v) in &self.entries {
            values[r * d + c] += v;
        }
        Ok(Matrix::from_complex_rows(d, d, &values))
    }

    /// Total occupation of each basis state.
    pub fn number_diagonal(&self) -> Vec<usize> {
        self.basis.iter().map(|n| n.iter().sum()).collect()
    }

    pub fn to_json(&self) -> Result<FockJson> {
        let op = self.dense_operator()?;
        Ok(FockJson {
            modes: self.modes(),
            n_max: self.n_max,
            basis: self.basis.clone(),
            coefficients: self.coefficients.clone(),
            operator: op,
        })
    }
}

/// Export format: basis tuples and the dense operator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FockJson {
    pub modes: usize,
    pub n_max: usize,
    pub basis: Vec<Vec<usize>>,
    pub coefficients: Matrix,
    pub operator: Matrix,
}

/// Assembles `Ĥ = (i/2) Σ_jk ã_jk (a†_j a_k − a_j a†_k)` on all occupation
/// tuples with total at most `n_max`.
pub fn fock_hamiltonian(
    coefficients: &Matrix,
    n_max: usize,
    tol: &ToleranceConfig,
) -> Result<FockHamiltonian> {
    if n_max == 0 {
        return Err(Error::BadParameter("n_max must be at least 1".into()));
    }
    let verdict = structure_check(coefficients, StructureKind::AntisymmetricReal, tol)?;
    if !verdict.holds {
        return Err(Error::NotAntiSymmetric {
            residual: verdict.residual,
        });
    }
    let modes = coefficients.rows();
    let (basis, sector_start) = occupation_basis(modes, n_max)?;
    let index: HashMap<&[usize], usize> =
        basis.iter().enumerate().map(|(k, n)| (n.as_slice(), k)).collect();

    let half_i = I * 0.5;
    let mut entries = Vec::new();
    let mut column: Vec<(usize, Complex)> = Vec::new();
    for (col, state) in basis.iter().enumerate() {
        column.clear();
        for j in 0..modes {
            for k in 0..modes {
                let coef = coefficients.get(j, k).re;
                if coef == 0.0 {
                    continue;
                }
                if let Some((out, amp)) = ladder(state, j, k, false) {
                    push(&mut column, index[out.as_slice()], half_i * (coef * amp));
                }
                if let Some((out, amp)) = ladder(state, j, k, true) {
                    push(&mut column, index[out.as_slice()], -half_i * (coef * amp));
                }
            }
        }
        column.sort_by_key(|&(r, _)| r);
        entries.extend(column.iter().filter(|(_, v)| *v != ZERO).map(|&(r, v)| (r, col, v)));
    }
    entries.sort_by_key(|&(r, c, _)| (r, c));

    Ok(FockHamiltonian {
        coefficients: coefficients.clone(),
        n_max,
        basis,
        sector_start,
        entries,
    })
}

fn push(column: &mut Vec<(usize, Complex)>, row: usize, v: Complex) {
    if let Some(slot) = column.iter_mut().find(|(r, _)| *r == row) {
        slot.1 += v;
    } else {
        column.push((row, v));
    }
}

/// `a†_j a_k |n⟩`, or `a_j a†_k |n⟩` when `anti` is set, as
/// `(state, amplitude)`; `None` when it vanishes.
fn ladder(n: &[usize], j: usize, k: usize, anti: bool) -> Option<(Vec<usize>, f64)> {
    let mut out = n.to_vec();
    if !anti {
        // a†_j a_k
        if out[k] == 0 {
            return None;
        }
        let mut amp = (out[k] as f64).sqrt();
        out[k] -= 1;
        out[j] += 1;
        amp *= (out[j] as f64).sqrt();
        Some((out, amp))
    } else {
        // a_j a†_k
        out[k] += 1;
        let mut amp = (out[k] as f64).sqrt();
        if out[j] == 0 {
            return None;
        }
        amp *= (out[j] as f64).sqrt();
        out[j] -= 1;
        Some((out, amp))
    }
}

/// All occupation tuples over `modes` modes with total at most `n_max`,
/// grouped by total and descending-lexicographic within each total.
fn occupation_basis(modes: usize, n_max: usize) -> Result<(Vec<Vec<usize>>, Vec<usize>)> {
    let mut basis = Vec::new();
    let mut starts = Vec::with_capacity(n_max + 2);
    for total in 0..=n_max {
        starts.push(basis.len());
        let mut current = vec![0; modes];
        compositions(modes, total, 0, &mut current, &mut basis, FOCK_BASIS_CAP)?;
    }
    starts.push(basis.len());
    Ok((basis, starts))
}

fn compositions(
    modes: usize,
    remaining: usize,
    pos: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    cap: usize,
) -> Result<()> {
    if pos == modes {
        if remaining == 0 {
            if out.len() >= cap {
                return Err(Error::SizeOverflow {
                    requested: out.len() + 1,
                    cap,
                });
            }
            out.push(current.clone());
        }
        return Ok(());
    }
    if pos + 1 == modes {
        current[pos] = remaining;
        compositions(modes, 0, pos + 1, current, out, cap)?;
        current[pos] = 0;
        return Ok(());
    }
    for v in (0..=remaining).rev() {
        current[pos] = v;
        compositions(modes, remaining - v, pos + 1, current, out, cap)?;
    }
    current[pos] = 0;
    Ok(())
}

/// Restriction of `Ĥ` to the states with total occupation `total`.
pub fn fock_block(h: &FockHamiltonian, total: usize) -> Result<Matrix> {
    let range = h.sector_range(total)?;
    let d = range.len();
    let mut values = vec![ZERO; d * d];
    for &(r, c, v) in &h.entries {
        if range.contains(&r) && range.contains(&c) {
            values[(r - range.start) * d + (c - range.start)] += v;
        }
    }
    Ok(Matrix::from_complex_rows(d, d, &values))
}
