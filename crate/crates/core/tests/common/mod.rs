#![allow(dead_code)]

use nalgebra::DMatrix;
use ode2schrod::{Complex, Matrix};
use rand::Rng;

pub fn random_real(rng: &mut impl Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn random_spd(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let g = random_real(rng, n, n);
    &g * g.transpose() + DMatrix::identity(n, n) * 0.1
}

pub fn random_antisymmetric(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let g = random_real(rng, n, n);
    &g - g.transpose()
}

/// `A = D⁻¹S`: diagonalizable with purely imaginary spectrum.
pub fn random_embeddable(rng: &mut impl Rng, n: usize) -> Matrix {
    let d = random_spd(rng, n);
    let s = random_antisymmetric(rng, n);
    Matrix::from_real(&(d.try_inverse().expect("spd is invertible") * s))
}

/// `S diag(blocks) S⁻¹` with one rotation block shifted to `Re λ = shift`.
pub fn random_unstable(rng: &mut impl Rng, n: usize, shift: f64) -> Matrix {
    let mut core = DMatrix::<f64>::zeros(n, n);
    let mut k = 0;
    while k + 1 < n {
        let w = rng.gen_range(0.2..2.0);
        core[(k, k + 1)] = w;
        core[(k + 1, k)] = -w;
        k += 2;
    }
    core[(0, 0)] += shift;
    if n % 2 == 1 && n > 1 {
        core[(1, 1)] += shift;
    }
    similar(rng, &core)
}

/// Similarity transform of a rotation chain coupled by identity blocks,
/// or of the 2×2 nilpotent block.
pub fn random_jordan(rng: &mut impl Rng, n: usize) -> Matrix {
    let n = n.max(2);
    let mut core = DMatrix::<f64>::zeros(n, n);
    if n < 4 {
        core[(0, 1)] = 1.0;
    } else {
        let w = rng.gen_range(0.2..2.0);
        for k in 0..n / 2 {
            core[(2 * k, 2 * k + 1)] = w;
            core[(2 * k + 1, 2 * k)] = -w;
        }
        core[(0, 2)] = 1.0;
        core[(1, 3)] = 1.0;
    }
    similar(rng, &core)
}

fn similar(rng: &mut impl Rng, core: &DMatrix<f64>) -> Matrix {
    let n = core.nrows();
    let s = random_real(rng, n, n) + DMatrix::identity(n, n) * 2.0;
    let inv = s.clone().try_inverse().expect("diagonally shifted matrix is invertible");
    Matrix::from_real(&(s * core * inv))
}

/// Haar-ish random unitary from the QR factor of a complex Gaussian matrix.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> Matrix {
    let g = DMatrix::from_fn(n, n, |_, _| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    Matrix::from_complex(g.qr().q())
}

pub fn random_phases(rng: &mut impl Rng, n: usize) -> Matrix {
    let phases: Vec<Complex> = (0..n)
        .map(|_| Complex::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    Matrix::diagonal(&phases)
}

/// Number of nonzeros in the fullest row or column.
pub fn count_sparsity(m: &Matrix, threshold: f64) -> usize {
    let nz = |i: usize, j: usize| m.get(i, j).norm() > threshold;
    let rows = (0..m.rows()).map(|i| (0..m.cols()).filter(|&j| nz(i, j)).count());
    let cols = (0..m.cols()).map(|j| (0..m.rows()).filter(|&i| nz(i, j)).count());
    rows.chain(cols).max().unwrap_or(0)
}

pub fn example_form() -> Matrix {
    Matrix::from_real_rows(4, 4, &[1., 0., 0., 1., 0., 2., 1., 0., 0., 1., 1., 0., 1., 0., 0., 2.])
}

pub fn sparse_root() -> Matrix {
    Matrix::from_real_rows(4, 4, &[2., 0., 0., 1., 0., 3., 1., 0., 0., 1., 2., 0., 1., 0., 0., 3.])
        .scale_real(1.0 / 5f64.sqrt())
}

/// `2 J H̃` built by hand.
pub fn example_a() -> Matrix {
    let j = Matrix::from_real_rows(4, 4, &[0., 0., 1., 0., 0., 0., 0., 1., -1., 0., 0., 0., 0., -1., 0., 0.]);
    (&j * &example_form()).scale_real(2.0)
}
