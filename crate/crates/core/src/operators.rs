//! Hilbert–Schmidt operators `K_f ξ(x) = Σ_y f(x,y) ξ(y) μ_y`, Schur
//! multipliers, traces, Schatten norms and the flip map `R`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::kernels::{is_positive_definite, DefinitenessCertificate, Kernel};
use crate::linalg;
use crate::math;
use crate::space::FiniteSpace;
use crate::{CMatrix, Error, Result, C64};

/// The operator `K_f` on `L²(X)` with kernel `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct HSOperator {
    kernel: Kernel,
}

impl HSOperator {
    pub fn new(kernel: Kernel) -> Self {
        HSOperator { kernel }
    }

    pub fn from_values(space: Arc<FiniteSpace>, values: CMatrix) -> Result<Self> {
        Ok(HSOperator::new(Kernel::new(space, values)?))
    }

    /// Kernel of the identity operator: `δ_{xy} / μ_x`.
    pub fn identity(space: Arc<FiniteSpace>) -> Self {
        let w: Vec<f64> = space.weights().to_vec();
        HSOperator::new(Kernel::from_real_fn(space, |x, y| if x == y { 1.0 / w[x] } else { 0.0 }))
    }

    pub fn zeros(space: Arc<FiniteSpace>) -> Self {
        HSOperator::new(Kernel::zeros(space))
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn into_kernel(self) -> Kernel {
        self.kernel
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        self.kernel.space()
    }

    pub fn n(&self) -> usize {
        self.kernel.n()
    }

    pub fn get(&self, x: usize, y: usize) -> C64 {
        self.kernel.get(x, y)
    }

    pub fn max_abs_diff(&self, other: &HSOperator) -> f64 {
        self.kernel.max_abs_diff(&other.kernel)
    }

    pub(crate) fn map_kernel(&self, f: impl FnMut(usize, usize, C64) -> C64) -> HSOperator {
        HSOperator::new(self.kernel.map_indexed(f))
    }
}

impl From<Kernel> for HSOperator {
    fn from(kernel: Kernel) -> Self {
        HSOperator::new(kernel)
    }
}

/// `(K_f ξ)(x) = Σ_y f(x,y) ξ(y) μ_y`.
pub fn kf_apply(f: &HSOperator, xi: &[C64]) -> Result<Vec<C64>> {
    let sp = f.space();
    sp.check_len(xi.len())?;
    let w = sp.weights();
    Ok((0..f.n())
        .map(|x| (0..f.n()).map(|y| f.get(x, y) * xi[y] * w[y]).sum())
        .collect())
}

/// `K_f K_g = K_h` with `h(x,y) = Σ_z f(x,z) g(z,y) μ_z`.
pub fn compose(f: &HSOperator, g: &HSOperator) -> Result<HSOperator> {
    f.kernel.check_space(&g.kernel)?;
    let n = f.n();
    let w = f.space().weights();
    let weighted = CMatrix::from_fn(n, n, |z, y| g.get(z, y) * w[z]);
    HSOperator::from_values(f.space().clone(), f.kernel.values() * weighted)
}

/// `(K_f)* = K_{f*}` with `f*(x,y) = conj(f(y,x))`.
pub fn adjoint(f: &HSOperator) -> HSOperator {
    HSOperator::new(Kernel::from_fn(f.space().clone(), |x, y| f.get(y, x).conj()))
}

/// The flip `R : K_f ↦ K_{f(y,x)}`, an involutive antiautomorphism.
pub fn flip_r(f: &HSOperator) -> HSOperator {
    HSOperator::new(Kernel::from_fn(f.space().clone(), |x, y| f.get(y, x)))
}

/// `tr K_f = Σ_x f(x,x) μ_x`.
pub fn trace(f: &HSOperator) -> C64 {
    let w = f.space().weights();
    (0..f.n()).map(|x| f.get(x, x) * w[x]).sum()
}

/// `⟨z, y⟩ = tr(R(z) y)`.
pub fn duality_pairing(z: &HSOperator, y: &HSOperator) -> Result<C64> {
    Ok(trace(&compose(&flip_r(z), y)?))
}

/// `⟨f, g⟩_{S²} = tr(K_f* K_g) = Σ conj(f(x,y)) g(x,y) μ_x μ_y`.
pub fn hs_inner(f: &HSOperator, g: &HSOperator) -> Result<C64> {
    f.kernel.check_space(&g.kernel)?;
    let w = f.space().weights();
    let n = f.n();
    let mut acc = C64::new(0.0, 0.0);
    for x in 0..n {
        for y in 0..n {
            acc += f.get(x, y).conj() * g.get(x, y) * (w[x] * w[y]);
        }
    }
    Ok(acc)
}

/// `K_f ↦ K_{φ f}`.
pub fn schur_apply(phi: &Kernel, f: &HSOperator) -> Result<HSOperator> {
    Ok(HSOperator::new(phi.hadamard(&f.kernel)?))
}

/// Matrix of `K_f` in the orthonormal basis `e_k / √μ_k`: `√μ_x f(x,y) √μ_y`.
pub fn to_l2_matrix(f: &HSOperator) -> CMatrix {
    let s: Vec<f64> = f.space().weights().iter().map(|w| math::sqrt(*w)).collect();
    let n = f.n();
    CMatrix::from_fn(n, n, |x, y| f.get(x, y) * (s[x] * s[y]))
}

/// Inverse of [`to_l2_matrix`].
pub fn from_l2_matrix(space: Arc<FiniteSpace>, m: &CMatrix) -> Result<HSOperator> {
    space.check_len(m.nrows())?;
    space.check_len(m.ncols())?;
    let s: Vec<f64> = space.weights().iter().map(|w| math::sqrt(*w)).collect();
    let n = space.n();
    let values = CMatrix::from_fn(n, n, |x, y| m[(x, y)] / (s[x] * s[y]));
    HSOperator::from_values(space, values)
}

/// `ℓ^p` norm of a list of nonnegative numbers, `p ∈ [1, ∞]`.
pub(crate) fn lp_norm(values: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p == f64::INFINITY {
        values.fold(0.0, f64::max)
    } else if p == 1.0 {
        values.sum()
    } else if p == 2.0 {
        math::sqrt(values.map(|v| v * v).sum())
    } else {
        math::powf(values.map(|v| math::powf(v, p)).sum(), 1.0 / p)
    }
}

/// Schatten `p`-norm of `K_f`; `p = ∞` gives the operator norm.
pub fn schatten_norm(f: &HSOperator, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::domain("Schatten exponent must satisfy p ≥ 1"));
    }
    let sv = linalg::singular_values(&to_l2_matrix(f));
    Ok(lp_norm(sv.iter().copied(), p))
}

/// The multiplier `M_φ` is selfadjoint on `S²` iff `φ` is real.
pub fn is_selfadjoint_multiplier(phi: &Kernel, tol: f64) -> bool {
    phi.max_imag() <= tol
}

/// `M_φ` is unital (equivalently trace preserving) iff `φ(x,x) = 1`.
pub fn is_unital_multiplier(phi: &Kernel, tol: f64) -> bool {
    (0..phi.n()).all(|x| (phi.get(x, x) - C64::new(1.0, 0.0)).norm() <= tol)
}

/// `M_φ` is completely positive iff `φ` is a positive definite kernel.
pub fn is_cp_multiplier(phi: &Kernel, tol: f64) -> DefinitenessCertificate {
    is_positive_definite(phi, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RMatrix;
    use alloc::vec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn op(weights: &[f64], v: &[f64]) -> HSOperator {
        let n = weights.len();
        let sp = FiniteSpace::new(weights.to_vec()).unwrap();
        HSOperator::new(Kernel::from_real(sp, RMatrix::from_row_slice(n, n, v)).unwrap())
    }

    #[test]
    fn kf_apply_examples() {
        let xi = [c(2.0, 1.0), c(-3.0, 0.5)];
        let id = op(&[1.0, 1.0], &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(kf_apply(&id, &xi).unwrap(), xi.to_vec());
        let ones = [c(1.0, 0.0), c(1.0, 0.0)];
        assert_eq!(kf_apply(&op(&[1.0, 1.0], &[1.0; 4]), &ones).unwrap(), vec![c(2.0, 0.0); 2]);
        assert_eq!(kf_apply(&op(&[2.0, 3.0], &[1.0; 4]), &ones).unwrap(), vec![c(5.0, 0.0); 2]);
        assert!(kf_apply(&id, &xi[..1]).is_err());
    }

    #[test]
    fn compose_examples() {
        let f = op(&[1.0, 1.0], &[1.0, 2.0, 3.0, 4.0]);
        let id = op(&[1.0, 1.0], &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(compose(&f, &id).unwrap(), f);
        let ones = op(&[1.0, 1.0], &[1.0; 4]);
        assert_eq!(compose(&ones, &ones).unwrap(), op(&[1.0, 1.0], &[2.0; 4]));
        assert!(matches!(compose(&f, &op(&[1.0, 2.0], &[1.0; 4])), Err(Error::SpaceMismatch)));
    }

    #[test]
    fn adjoint_and_flip_examples() {
        let sym = op(&[1.0, 1.0], &[1.0, 2.0, 2.0, 5.0]);
        assert_eq!(adjoint(&sym), sym);
        assert_eq!(flip_r(&sym), sym);
        let sp = FiniteSpace::uniform(2).unwrap();
        let f = HSOperator::from_values(
            sp.clone(),
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)]),
        )
        .unwrap();
        let expected = HSOperator::from_values(
            sp,
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0), c(0.0, 0.0)]),
        )
        .unwrap();
        assert_eq!(adjoint(&f), expected);
        assert_eq!(adjoint(&adjoint(&f)), f);
        assert_eq!(flip_r(&flip_r(&f)), f);
    }

    #[test]
    fn trace_and_pairing_examples() {
        assert_eq!(trace(&op(&[1.0, 1.0], &[1.0, 5.0, 7.0, 2.0])), c(3.0, 0.0));
        assert_eq!(trace(&op(&[2.0, 3.0], &[1.0, 0.0, 0.0, 1.0])), c(5.0, 0.0));
        let id = op(&[1.0, 1.0], &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(duality_pairing(&id, &id).unwrap(), c(2.0, 0.0));
        let y = op(&[2.0, 3.0], &[1.0, 5.0, 7.0, 2.0]);
        let one = HSOperator::identity(y.space().clone());
        assert!((duality_pairing(&one, &y).unwrap() - trace(&y)).norm() < 1e-14);
    }

    #[test]
    fn schur_examples() {
        let f = op(&[1.0, 1.0], &[1.0, 2.0, 3.0, 4.0]);
        let ones = Kernel::constant(f.space().clone(), c(1.0, 0.0));
        assert_eq!(schur_apply(&ones, &f).unwrap(), f);
        let diag = Kernel::identity(f.space().clone());
        assert_eq!(schur_apply(&diag, &f).unwrap(), op(&[1.0, 1.0], &[1.0, 0.0, 0.0, 4.0]));
    }

    #[test]
    fn l2_matrix_examples() {
        let f = op(&[1.0, 1.0], &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(&to_l2_matrix(&f), f.kernel().values());
        let g = op(&[4.0, 9.0], &[1.0; 4]);
        let m = to_l2_matrix(&g);
        assert_eq!(m, CMatrix::from_row_slice(2, 2, &[c(4.0, 0.0), c(6.0, 0.0), c(6.0, 0.0), c(9.0, 0.0)]));
        assert!(from_l2_matrix(g.space().clone(), &m).unwrap().max_abs_diff(&g) < 1e-15);
    }

    #[test]
    fn schatten_examples() {
        let id = op(&[1.0; 3], &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!((schatten_norm(&id, 1.0).unwrap() - 3.0).abs() < 1e-12);
        assert!((schatten_norm(&id, f64::INFINITY).unwrap() - 1.0).abs() < 1e-12);
        let f = op(&[2.0, 0.5], &[1.0, -2.0, 0.5, 3.0]);
        let frob = to_l2_matrix(&f).norm();
        assert!((schatten_norm(&f, 2.0).unwrap() - frob).abs() < 1e-12);
        assert!(schatten_norm(&f, 0.5).is_err());
        assert!(schatten_norm(&f, f64::NAN).is_err());
    }

    #[test]
    fn multiplier_predicates() {
        let sp = FiniteSpace::uniform(2).unwrap();
        let real = Kernel::constant(sp.clone(), c(0.3, 0.0));
        assert!(is_selfadjoint_multiplier(&real, 0.0));
        assert!(!is_selfadjoint_multiplier(&Kernel::constant(sp.clone(), c(0.0, 1.0)), 1e-12));
        assert!(!is_unital_multiplier(&Kernel::zeros(sp.clone()), 1e-12));
        assert!(is_unital_multiplier(&Kernel::constant(sp.clone(), c(1.0, 0.0)), 0.0));
        assert!(is_cp_multiplier(&Kernel::constant(sp.clone(), c(1.0, 0.0)), 1e-12).verdict);
        let bad = Kernel::from_real(sp, RMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).unwrap();
        assert!(!is_cp_multiplier(&bad, 1e-12).verdict);
    }
}
