//! Small dense helpers shared by the coin, spectral and coefficient code.

use nalgebra::{DMatrix, Matrix2, SymmetricEigen, Vector2};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Vec2 = Vector2<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Pauli matrices indexed 0..=3, with index 0 the identity.
pub fn pauli(r: usize) -> Mat2 {
    match r {
        0 => Mat2::identity(),
        1 => Mat2::new(ZERO, ONE, ONE, ZERO),
        2 => Mat2::new(ZERO, -I, I, ZERO),
        3 => Mat2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("pauli index {r} out of range"),
    }
}

/// Components c_r with m = sum_r c_r sigma_r.
pub fn pauli_decompose(m: &Mat2) -> [C64; 4] {
    let mut out = [ZERO; 4];
    for (r, slot) in out.iter_mut().enumerate() {
        *slot = (pauli(r) * m).trace() * 0.5;
    }
    out
}

pub fn to_dmatrix(m: &Mat2) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |i, j| m[(i, j)])
}

pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    max_abs(&(a - b))
}

/// max |(U^dagger U - I)_{ij}|
pub fn unitarity_deviation(u: &DMatrix<C64>) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - DMatrix::identity(n, n)))
}

pub fn hermiticity_deviation(h: &DMatrix<C64>) -> f64 {
    max_abs(&(h - h.adjoint()))
}

/// exp(-i s H) for Hermitian H.
pub fn expm_hermitian(h: &DMatrix<C64>, s: f64) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(h.clone());
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| C64::from_polar(1.0, -s * e)));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

/// exp(-i (v1 sigma1 + v2 sigma2 + v3 sigma3)).
pub fn su2_exp(v: [f64; 3]) -> Mat2 {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let (cr, sinc) = if r < 1e-8 {
        (1.0 - 0.5 * r * r, 1.0 - r * r / 6.0)
    } else {
        (r.cos(), r.sin() / r)
    };
    let a = c(cr, -v[2] * sinc);
    let b = c(-v[1] * sinc, -v[0] * sinc);
    Mat2::new(a, b, -b.conj(), a.conj())
}

/// Largest eigenvalue magnitude of a 2x2 Hermitian matrix (its spectral norm).
pub fn hermitian2_norm(h: &Mat2) -> f64 {
    let comps = pauli_decompose(h);
    let vec_len = (comps[1].re.powi(2) + comps[2].re.powi(2) + comps[3].re.powi(2)).sqrt();
    comps[0].re.abs() + vec_len
}

/// Rotates `v` so that its first component with modulus above `tol` is real and positive.
pub fn fix_phase(v: &mut [C64], tol: f64) {
    if let Some(z) = v.iter().find(|z| z.norm() > tol).copied() {
        let phase = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
}

pub fn vec2_normalized(v: Vec2) -> Vec2 {
    let n = v.norm();
    v / C64::from(n)
}
