//! Pure-imaginary diagonalizability and positive witnesses.
//!
//! `A` admits a transforming matrix exactly when it is diagonalizable with a
//! purely imaginary spectrum. The constructive route goes through a positive
//! definite `D` with `DA` anti-hermitian: writing `Q A Q⁻¹ = Λ` and taking the
//! polar factor `Q = U·Q′`, the choice `D = Q′²` works, and `B = [√D; 0]`
//! then satisfies `B†B = D`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, eig, hermitian_eigen, inverse, polar_decompose, sqrt_spd, structure_check, Complex,
    Matrix, StructureKind, ToleranceConfig, DEFECT_THRESHOLD,
};

/// Outcome of the embeddability test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub diagonalizable: bool,
    pub spectrum: Vec<Complex>,
    /// Largest `|Re λ|` over the spectrum.
    pub max_real_part: f64,
    pub embeddable: bool,
    pub diagnostics: Vec<String>,
    /// Reciprocal condition number of the eigenvector matrix.
    pub defect_score: f64,
}

impl Classification {
    /// Short reason for a negative verdict, `None` when embeddable.
    pub fn reason(&self) -> Option<&'static str> {
        if self.embeddable {
            None
        } else if !self.diagonalizable {
            Some("not diagonalizable")
        } else {
            Some("spectrum not purely imaginary")
        }
    }
}

/// Decides whether the real square matrix `a` is diagonalizable with a
/// purely imaginary spectrum.
pub fn classify(a: &Matrix, tol: &ToleranceConfig) -> Result<Classification> {
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    if !a.is_real() {
        return Err(Error::RealityViolation {
            max_imag: a.max_imag(),
        });
    }
    let e = eig(a, tol)?;
    let norm = a.max_norm();
    let max_real_part = e.eigenvalues.iter().map(|z| z.re.abs()).fold(0.0, f64::max);

    let mut diagnostics = Vec::new();
    let well_conditioned = e.defect_score >= DEFECT_THRESHOLD;
    let accurate = e.max_residual <= tol.cluster_tol;
    let diagonalizable = well_conditioned && accurate;
    if !well_conditioned {
        diagnostics.push(format!(
            "not diagonalizable: eigenvector matrix reciprocal condition {:.3e} below {:.0e}",
            e.defect_score, DEFECT_THRESHOLD
        ));
    } else if !accurate {
        diagnostics.push(format!(
            "not diagonalizable: eigenpair residual {:.3e} exceeds cluster tolerance {:.0e}",
            e.max_residual, tol.cluster_tol
        ));
    }
    let imaginary = max_real_part <= tol.rel_tol * norm;
    if !imaginary {
        diagnostics.push(format!(
            "spectrum leaves the imaginary axis: max |Re λ| = {:.3e} (threshold {:.3e})",
            max_real_part,
            tol.rel_tol * norm
        ));
    }
    Ok(Classification {
        diagonalizable,
        spectrum: e.eigenvalues,
        max_real_part,
        embeddable: diagonalizable && imaginary,
        diagnostics,
        defect_score: e.defect_score,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessFlavor {
    /// `D` hermitian, `DA` anti-hermitian.
    Complex,
    /// `D` real symmetric, `DA` real anti-symmetric.
    Real,
}

/// Positive definite `D` certifying that `A` is embeddable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositiveWitness {
    d: Matrix,
    flavor: WitnessFlavor,
}

impl PositiveWitness {
    /// Accepts `d` if it is hermitian (real symmetric for the real flavor)
    /// and positive definite.
    pub fn new(d: Matrix, flavor: WitnessFlavor, tol: &ToleranceConfig) -> Result<Self> {
        if !d.is_finite() {
            return Err(Error::NonFinite);
        }
        if flavor == WitnessFlavor::Real && !d.is_real() {
            return Err(Error::RealityViolation {
                max_imag: d.max_imag(),
            });
        }
        let herm = structure_check(&d, StructureKind::PositiveDefinite, tol)?;
        if herm.residual > tol.rel_tol {
            return Err(Error::NotHermitian {
                residual: herm.residual,
            });
        }
        let (values, _) = hermitian_eigen(&d)?;
        let min = values.first().copied().unwrap_or(0.0);
        if min.is_nan() || min <= tol.abs_tol * d.max_norm() {
            return Err(Error::WitnessDegenerate { min_eigenvalue: min });
        }
        Ok(PositiveWitness { d, flavor })
    }

    pub fn d(&self) -> &Matrix {
        &self.d
    }

    pub fn flavor(&self) -> WitnessFlavor {
        self.flavor
    }

    /// Checks that `D·A` has the structure the flavor demands.
    pub fn certifies(&self, a: &Matrix, tol: &ToleranceConfig) -> Result<bool> {
        let da = self.d.matmul(a)?;
        let kind = match self.flavor {
            WitnessFlavor::Complex => StructureKind::Antihermitian,
            WitnessFlavor::Real => StructureKind::AntisymmetricReal,
        };
        Ok(structure_check(&da, kind, tol)?.holds)
    }
}

/// Builds a witness for an embeddable `a`.
///
/// Complex flavor: `D = Q′²` where `Q = P⁻¹` brings `A` to diagonal form and
/// `Q = U·Q′` is its polar decomposition. Real flavor: `D = Re(B†B)` for the
/// complex-flavor `B = √D`, which equals the real part of the complex `D`.
pub fn positive_witness(
    a: &Matrix,
    flavor: WitnessFlavor,
    tol: &ToleranceConfig,
) -> Result<PositiveWitness> {
    let class = classify(a, tol)?;
    if !class.embeddable {
        return Err(Error::NotEmbeddable(Box::new(class)));
    }
    let n = a.rows();
    if n == 0 {
        return PositiveWitness::new(Matrix::identity(0), flavor, tol);
    }
    let e = eig(a, tol)?;
    let q = inverse(&e.eigenvectors)?;
    let (_, q_pos) = polar_decompose(&q, tol)?;
    let d_complex = (&q_pos * &q_pos).hermitian_part();
    let d = match flavor {
        WitnessFlavor::Complex => d_complex,
        WitnessFlavor::Real => {
            let b = sqrt_spd(&d_complex, tol).map_err(degenerate)?;
            (&b.adjoint() * &b).re().hermitian_part()
        }
    };
    // Scale so that ‖D‖ = 1; witnesses are homogeneous.
    let scale = d.max_norm();
    let d = if scale > 0.0 { d.scale_real(1.0 / scale) } else { d };
    PositiveWitness::new(d, flavor, tol)
}

fn degenerate(err: Error) -> Error {
    match err {
        Error::NotPositive { min_eigenvalue } => Error::WitnessDegenerate { min_eigenvalue },
        other => other,
    }
}

/// `B = [√D; 0]` with `m_target − N` zero rows.
pub fn witness_to_transform(
    w: &PositiveWitness,
    m_target: usize,
    tol: &ToleranceConfig,
) -> Result<Matrix> {
    let n = w.d.rows();
    if m_target < n {
        return Err(Error::BadDimension { m_target, n });
    }
    let root = sqrt_spd(&w.d, tol).map_err(degenerate)?;
    let root = match w.flavor {
        WitnessFlavor::Real => root.re(),
        WitnessFlavor::Complex => root,
    };
    root.vstack(&Matrix::zeros(m_target - n, n))
}

/// Like [`PositiveWitness::certifies`], but reports the residual on failure.
pub fn verify_witness(w: &PositiveWitness, a: &Matrix, tol: &ToleranceConfig) -> Result<()> {
    if w.certifies(a, tol)? {
        Ok(())
    } else {
        let da = w.d.matmul(a)?;
        let kind = match w.flavor {
            WitnessFlavor::Complex => StructureKind::Antihermitian,
            WitnessFlavor::Real => StructureKind::AntisymmetricReal,
        };
        let residual = linalg::structure_check(&da, kind, tol)?.residual;
        Err(match w.flavor {
            WitnessFlavor::Complex => Error::NotAntiHermitian { residual },
            WitnessFlavor::Real => Error::NotAntiSymmetric { residual },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn h_tilde() -> Matrix {
        Matrix::from_real_rows(
            4,
            4,
            &[1.0, 0.0, 0.0, 1.0, 0.0, 2.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 2.0],
        )
    }

    fn canonical_example() -> Matrix {
        Matrix::from_real_rows(
            4,
            4,
            &[
                0.0, 2.0, 2.0, 0.0, 2.0, 0.0, 0.0, 4.0, -2.0, 0.0, 0.0, -2.0, 0.0, -4.0, -2.0, 0.0,
            ],
        )
    }

    #[test]
    fn classify_examples() {
        let rot = Matrix::from_real_rows(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let c = classify(&rot, &tol()).unwrap();
        assert!(c.embeddable);
        assert!(c.max_real_part < 1e-15);

        let nil = Matrix::from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let c = classify(&nil, &tol()).unwrap();
        assert!(!c.embeddable && !c.diagonalizable);
        assert_eq!(c.reason(), Some("not diagonalizable"));

        assert!(classify(&canonical_example(), &tol()).unwrap().embeddable);
    }

    #[test]
    fn classify_rejects_growth_and_complex_input() {
        let a = Matrix::from_real_rows(2, 2, &[0.1, 1.0, -1.0, 0.1]);
        let c = classify(&a, &tol()).unwrap();
        assert!(c.diagonalizable && !c.embeddable);
        let z = Matrix::identity(2).scale(linalg::I);
        assert!(matches!(classify(&z, &tol()), Err(Error::RealityViolation { .. })));
    }

    #[test]
    fn verifier_accepts_hand_witnesses() {
        let rot = Matrix::from_real_rows(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let w = PositiveWitness::new(Matrix::identity(2), WitnessFlavor::Real, &tol()).unwrap();
        assert!(w.certifies(&rot, &tol()).unwrap());

        let a = Matrix::from_real_rows(2, 2, &[0.0, 2.0, -1.0, 0.0]);
        let d = Matrix::from_real_rows(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let w = PositiveWitness::new(d, WitnessFlavor::Real, &tol()).unwrap();
        assert!(w.certifies(&a, &tol()).unwrap());

        let w = PositiveWitness::new(h_tilde(), WitnessFlavor::Real, &tol()).unwrap();
        assert!(w.certifies(&canonical_example(), &tol()).unwrap());
        // Witnesses are homogeneous of degree one.
        let w = PositiveWitness::new(h_tilde().scale_real(7.5), WitnessFlavor::Real, &tol()).unwrap();
        assert!(w.certifies(&canonical_example(), &tol()).unwrap());
    }

    #[test]
    fn constructed_witnesses_certify() {
        for a in [
            Matrix::from_real_rows(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            Matrix::from_real_rows(2, 2, &[0.0, 2.0, -1.0, 0.0]),
            canonical_example(),
        ] {
            for flavor in [WitnessFlavor::Complex, WitnessFlavor::Real] {
                let w = positive_witness(&a, flavor, &tol()).unwrap();
                verify_witness(&w, &a, &tol()).unwrap();
                if flavor == WitnessFlavor::Real {
                    assert!(w.d().is_real());
                }
            }
        }
    }

    #[test]
    fn witness_rejects_non_embeddable() {
        let nil = Matrix::from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            positive_witness(&nil, WitnessFlavor::Complex, &tol()),
            Err(Error::NotEmbeddable(_))
        ));
    }

    #[test]
    fn witness_rejects_indefinite_matrix() {
        let d = Matrix::from_real_rows(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            PositiveWitness::new(d, WitnessFlavor::Real, &tol()),
            Err(Error::WitnessDegenerate { .. })
        ));
    }

    #[test]
    fn transform_from_witness() {
        let w = PositiveWitness::new(Matrix::identity(3), WitnessFlavor::Real, &tol()).unwrap();
        let b = witness_to_transform(&w, 3, &tol()).unwrap();
        assert!(b.max_abs_diff(&Matrix::identity(3)) < 1e-15);

        let d = Matrix::from_real_rows(2, 2, &[1.0, 0.0, 0.0, 4.0]);
        let w = PositiveWitness::new(d.clone(), WitnessFlavor::Real, &tol()).unwrap();
        let b = witness_to_transform(&w, 3, &tol()).unwrap();
        let expect = Matrix::from_real_rows(3, 2, &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        assert!(b.max_abs_diff(&expect) < 1e-15);
        assert!((&b.transpose() * &b).max_abs_diff(&d) < 1e-14);

        assert!(matches!(
            witness_to_transform(&w, 1, &tol()),
            Err(Error::BadDimension { m_target: 1, n: 2 })
        ));
    }

    #[test]
    fn transform_from_canonical_witness_squares_back() {
        let w = PositiveWitness::new(h_tilde(), WitnessFlavor::Real, &tol()).unwrap();
        let b = witness_to_transform(&w, 4, &tol()).unwrap();
        assert!(b.is_real());
        assert!((&b.transpose() * &b).max_abs_diff(&h_tilde()) < 1e-13);
        // The alternative root (1/√5)·M squares to the same witness.
        let s = 1.0 / 5f64.sqrt();
        let alt = Matrix::from_real_rows(
            4,
            4,
            &[2.0, 0.0, 0.0, 1.0, 0.0, 3.0, 1.0, 0.0, 0.0, 1.0, 2.0, 0.0, 1.0, 0.0, 0.0, 3.0],
        )
        .scale_real(s);
        assert!((&alt.transpose() * &alt).max_abs_diff(&h_tilde()) < 1e-13);
    }
}
