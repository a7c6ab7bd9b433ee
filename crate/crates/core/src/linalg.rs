//! Thin wrappers over nalgebra's dense decompositions.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::math;
use crate::{CMatrix, C64};

/// Hermitian part `(M + M*)/2`.
pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).unscale(2.0)
}

/// Largest `|M(x,y) − conj(M(y,x))|`.
pub(crate) fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for x in 0..n {
        for y in x..n {
            worst = worst.max((m[(x, y)] - m[(y, x)].conj()).norm());
        }
    }
    worst
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
pub(crate) fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Singular values, in no particular order.
pub(crate) fn singular_values(m: &CMatrix) -> DVector<f64> {
    if m.is_empty() {
        return DVector::zeros(0);
    }
    m.clone().singular_values()
}

/// `Σ_ij c_i conj(c_j) M(i,j)`.
pub(crate) fn quad_form(m: &CMatrix, c: &[C64]) -> C64 {
    let n = m.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += c[i] * c[j].conj() * m[(i, j)];
        }
    }
    acc
}

/// Orthonormal basis (as columns) of the hyperplane `{c : Σ c_i = 0}` in `R^n`,
/// taken from the Householder reflection exchanging `e_1` and `1/√n`.
pub(crate) fn sum_zero_basis(n: usize) -> DMatrix<f64> {
    if n <= 1 {
        return DMatrix::zeros(n, 0);
    }
    let v = 1.0 / math::sqrt(n as f64);
    let mut u = DVector::from_element(n, -v);
    u[0] += 1.0;
    let uu = u.dot(&u);
    let reflector = DMatrix::identity(n, n) - (&u * u.transpose()) * (2.0 / uu);
    reflector.columns(1, n - 1).into_owned()
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub(crate) fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub(crate) fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| C64::new(v, 0.0))
}
