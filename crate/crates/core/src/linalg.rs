//! Dense complex linear-algebra helpers on top of `nalgebra`.
//!
//! Every routine that takes a "Hermitian" argument reads both triangles, so
//! callers symmetrize first when round-off matters.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

pub const J: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Returns `(m + m^H) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn from_real_diag(d: &RVec) -> CMat {
    CMat::from_diagonal(&d.map(c))
}

pub fn real_diag(m: &CMat) -> RVec {
    RVec::from_iterator(m.nrows().min(m.ncols()), (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)].re))
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().sum()
}

/// `tr(A B)` without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn frobenius_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Hermitian eigendecomposition with eigenvalues sorted in descending order.
pub fn herm_eig(m: &CMat) -> (RVec, CMat) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = RVec::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// `N x s` factor `U_s diag(sqrt(lambda_s))` of the top `s` eigenpairs of a
/// PSD matrix; negative eigenvalues are clipped.
pub fn psd_factor(m: &CMat, s: usize) -> CMat {
    let (vals, vecs) = herm_eig(m);
    let s = s.min(m.nrows());
    let mut out = CMat::zeros(m.nrows(), s);
    for j in 0..s {
        out.set_column(j, &(vecs.column(j) * c(vals[j].max(0.0).sqrt())));
    }
    out
}

/// Principal square root of a PSD matrix; negative eigenvalues are clipped.
pub fn psd_sqrt(m: &CMat) -> CMat {
    let (vals, vecs) = herm_eig(m);
    let d = vals.map(|v| c(v.max(0.0).sqrt()));
    &vecs * CMat::from_diagonal(&d) * vecs.adjoint()
}

/// Projection onto the PSD cone in Frobenius norm.
pub fn clip_psd(m: &CMat) -> CMat {
    let (vals, vecs) = herm_eig(m);
    let d = vals.map(|v| c(v.max(0.0)));
    hermitian_part(&(&vecs * CMat::from_diagonal(&d) * vecs.adjoint()))
}

/// `log det` of a Hermitian positive-definite matrix.
pub fn logdet_hpd(m: &CMat) -> Result<f64> {
    let ch = Cholesky::new(hermitian_part(m)).ok_or(Error::NotPositiveDefinite("logdet"))?;
    Ok(ch.l_dirty().diagonal().iter().take(m.nrows()).map(|z| 2.0 * z.re.ln()).sum())
}

/// Inverse of a Hermitian positive-definite matrix, Hermitian on output.
pub fn inv_hpd(m: &CMat) -> Result<CMat> {
    let ch = Cholesky::new(hermitian_part(m)).ok_or(Error::NotPositiveDefinite("inverse"))?;
    Ok(hermitian_part(&ch.inverse()))
}

/// General inverse through LU.
pub fn inv_general(m: &CMat) -> Result<CMat> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular matrix".into()))
}

/// Relative Frobenius change `||a - b|| / max(||a||, floor)`.
pub fn rel_change(new: &CMat, old: &CMat) -> f64 {
    let den = frobenius_sq(new).sqrt().max(1e-300);
    frobenius_sq(&(new - old)).sqrt() / den
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
