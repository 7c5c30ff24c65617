//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest |A_ij − conj(A_ji)|.
pub fn hermitian_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// (A + Aᴴ)/2.
pub fn symmetrize(a: &CMat) -> CMat {
    (a + a.adjoint()) * c(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

pub fn eigh(a: &CMat) -> Eigh {
    let n = a.nrows();
    if n == 0 {
        return Eigh { values: vec![], vectors: CMat::zeros(0, 0) };
    }
    let se = SymmetricEigen::new(symmetrize(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[j].total_cmp(&se.eigenvalues[i]));
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, k| se.eigenvectors[(r, order[k])]);
    Eigh { values, vectors }
}

/// First `k` columns of `a` as an owned matrix.
pub fn leading_columns(a: &CMat, k: usize) -> CMat {
    a.columns(0, k).into_owned()
}

/// Orthonormal basis of the orthogonal complement of span(cols) in C^n.
///
/// The range is taken from a thin SVD with a relative singular-value cutoff;
/// the complement is then read off the projector I − QQᴴ.
pub fn orthogonal_complement(cols: &CMat, n: usize) -> CMat {
    if cols.ncols() == 0 {
        return CMat::identity(n, n);
    }
    let svd = cols.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-10 * smax)
        .collect();
    let q = CMat::from_fn(n, keep.len(), |r, k| u[(r, keep[k])]);
    let proj = CMat::identity(n, n) - &q * q.adjoint();
    let e = eigh(&proj);
    let dim = e.values.iter().filter(|&&v| v > 0.5).count();
    leading_columns(&e.vectors, dim)
}

/// Inverse of a Hermitian positive-definite matrix (Cholesky, LU fallback).
pub fn hpd_inverse(a: &CMat) -> Result<CMat> {
    if let Some(ch) = a.clone().cholesky() {
        return Ok(ch.inverse());
    }
    a.clone().try_inverse().ok_or_else(|| Error::Numerical {
        message: "matrix is singular".into(),
        residual: f64::INFINITY,
    })
}

/// tr(AB) without forming the product.
pub fn trace_prod(a: &CMat, b: &CMat) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}

/// Real part of tr(AB); used where AB is known to have a real trace.
pub fn rtrace_prod(a: &CMat, b: &CMat) -> f64 {
    trace_prod(a, b).re
}

/// I₂ ⊗ B.
pub fn kron_eye2(b: &CMat) -> CMat {
    blockdiag2(b, b)
}

pub fn blockdiag2(a: &CMat, b: &CMat) -> CMat {
    let mut out = CMat::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), (b.nrows(), b.ncols())).copy_from(b);
    out
}

/// ‖A − B‖_F / ‖B‖_F (or the absolute error when B is zero).
pub fn rel_frobenius(a: &CMat, b: &CMat) -> f64 {
    let d = (a - b).norm();
    let nb = b.norm();
    if nb == 0.0 { d } else { d / nb }
}

/// Largest |(UᴴU − I)_ij|.
pub fn orthonormality_defect(u: &CMat) -> f64 {
    let g = u.adjoint() * u;
    let n = g.nrows();
    max_abs(&(g - CMat::identity(n, n)))
}

/// Standard circularly-symmetric complex Gaussian: (x + jy)/√2.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    c(x, y) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix of i.i.d. CN(0,1) entries, filled column-major.
pub fn complex_normal_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let mut m = CMat::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = complex_normal(rng);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = complex_normal_matrix(&mut rng, n, n);
        &a * a.adjoint()
    }

    #[test]
    fn eigh_sorted_and_reconstructs() {
        let a = random_hermitian(12, 3);
        let e = eigh(&a);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        let lam = CMat::from_diagonal(&DVector::from_iterator(
            12,
            e.values.iter().map(|&v| c(v, 0.0)),
        ));
        let back = &e.vectors * lam * e.vectors.adjoint();
        assert!(rel_frobenius(&back, &a) < 1e-12);
        assert!(orthonormality_defect(&e.vectors) < 1e-12);
    }

    #[test]
    fn complement_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = complex_normal_matrix(&mut rng, 10, 3);
        let e = orthogonal_complement(&a, 10);
        assert_eq!(e.ncols(), 7);
        assert!(max_abs(&(e.adjoint() * &a)) < 1e-12);
        assert!(orthonormality_defect(&e) < 1e-12);
    }

    #[test]
    fn complement_of_nothing_is_identity() {
        let e = orthogonal_complement(&CMat::zeros(5, 0), 5);
        assert_eq!(e, CMat::identity(5, 5));
    }

    #[test]
    fn trace_product_matches_dense() {
        let a = random_hermitian(6, 1);
        let b = random_hermitian(6, 2);
        assert!((trace_prod(&a, &b) - (&a * &b).trace()).norm() < 1e-10);
    }

    #[test]
    fn hpd_inverse_roundtrip() {
        let a = random_hermitian(8, 5) + CMat::identity(8, 8);
        let inv = hpd_inverse(&a).unwrap();
        assert!(max_abs(&(&a * inv - CMat::identity(8, 8))) < 1e-10);
    }
}
