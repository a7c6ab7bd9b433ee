//! Kernels on a finite space, positive and negative definiteness, the
//! Schoenberg correspondence and the embedding of a negative definite kernel.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::gaussian::standard_normal;
use crate::linalg::{self, hermitian_eigen, quad_form};
use crate::math;
use crate::space::{same_space, Embedding, FiniteSpace};
use crate::{CMatrix, Error, RMatrix, Result, C64};

/// A complex function on `X × X`, stored as an `n × n` array.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    space: Arc<FiniteSpace>,
    values: CMatrix,
}

impl Kernel {
    pub fn new(space: Arc<FiniteSpace>, values: CMatrix) -> Result<Self> {
        space.check_len(values.nrows())?;
        space.check_len(values.ncols())?;
        Ok(Kernel { space, values })
    }

    pub fn from_real(space: Arc<FiniteSpace>, values: RMatrix) -> Result<Self> {
        Self::new(space, linalg::complexify(&values))
    }

    pub fn from_fn(space: Arc<FiniteSpace>, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let n = space.n();
        Kernel {
            values: CMatrix::from_fn(n, n, |x, y| f(x, y)),
            space,
        }
    }

    pub fn from_real_fn(space: Arc<FiniteSpace>, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        Self::from_fn(space, |x, y| C64::new(f(x, y), 0.0))
    }

    pub fn constant(space: Arc<FiniteSpace>, c: C64) -> Self {
        Self::from_fn(space, |_, _| c)
    }

    pub fn zeros(space: Arc<FiniteSpace>) -> Self {
        Self::constant(space, C64::new(0.0, 0.0))
    }

    /// 1 on the diagonal, 0 elsewhere.
    pub fn identity(space: Arc<FiniteSpace>) -> Self {
        Self::from_real_fn(space, |x, y| if x == y { 1.0 } else { 0.0 })
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &CMatrix {
        &self.values
    }

    pub fn into_values(self) -> CMatrix {
        self.values
    }

    pub fn get(&self, x: usize, y: usize) -> C64 {
        self.values[(x, y)]
    }

    pub fn map(&self, mut f: impl FnMut(C64) -> C64) -> Kernel {
        Kernel {
            space: self.space.clone(),
            values: self.values.map(|z| f(z)),
        }
    }

    /// Entrywise map with access to the indices.
    pub fn map_indexed(&self, mut f: impl FnMut(usize, usize, C64) -> C64) -> Kernel {
        let n = self.n();
        Kernel {
            space: self.space.clone(),
            values: CMatrix::from_fn(n, n, |x, y| f(x, y, self.values[(x, y)])),
        }
    }

    /// Entrywise (Hadamard) product.
    pub fn hadamard(&self, other: &Kernel) -> Result<Kernel> {
        self.check_space(other)?;
        Ok(Kernel {
            space: self.space.clone(),
            values: self.values.component_mul(&other.values),
        })
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.values)
    }

    pub fn max_abs_diff(&self, other: &Kernel) -> f64 {
        linalg::max_abs_diff(&self.values, &other.values)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, z| acc.max(z.im.abs()))
    }

    /// The scale-aware cutoff `1e−10 · n · max|entry|`.
    pub fn default_tolerance(&self) -> f64 {
        1e-10 * self.n() as f64 * self.max_abs()
    }

    pub(crate) fn check_space(&self, other: &Kernel) -> Result<()> {
        if same_space(&self.space, &other.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}

/// Outcome of a definiteness test.
///
/// When `verdict` is false, `witness` holds a coefficient vector on which the
/// quadratic form relevant to the test evaluates to `witness_value`, which is
/// either below `−tol` or not real.
#[derive(Debug, Clone, PartialEq)]
pub struct DefinitenessCertificate {
    pub verdict: bool,
    pub min_eigenvalue: f64,
    pub witness: Option<Vec<C64>>,
    pub witness_value: Option<C64>,
}

pub fn is_hermitian(k: &Kernel, tol: f64) -> bool {
    linalg::hermitian_defect(&k.values) <= tol
}

/// Coefficients `c = e_x + τ e_y` on which a non-Hermitian matrix has a
/// non-real quadratic form.
fn hermitian_witness(m: &CMatrix) -> Vec<C64> {
    let n = m.nrows();
    let (mut bx, mut by, mut worst) = (0, 0, -1.0);
    for x in 0..n {
        for y in x..n {
            let d = (m[(x, y)] - m[(y, x)].conj()).norm();
            if d > worst {
                (bx, by, worst) = (x, y, d);
            }
        }
    }
    let mut c = alloc::vec![C64::new(0.0, 0.0); n];
    if bx == by {
        c[bx] = C64::new(1.0, 0.0);
    } else {
        let defect = m[(bx, by)] - m[(by, bx)].conj();
        c[bx] = C64::new(1.0, 0.0);
        c[by] = C64::new(0.0, 1.0) * defect / defect.norm();
    }
    c
}

fn non_hermitian_certificate(m: &CMatrix, min_eigenvalue: f64) -> DefinitenessCertificate {
    let c = hermitian_witness(m);
    let value = quad_form(m, &c);
    DefinitenessCertificate {
        verdict: false,
        min_eigenvalue,
        witness: Some(c),
        witness_value: Some(value),
    }
}

/// Positive semidefiniteness of a Hermitian matrix, with the eigenvector of
/// the smallest eigenvalue as witness.
fn psd_certificate(m: &CMatrix, tol: f64) -> DefinitenessCertificate {
    let (vals, vecs) = hermitian_eigen(&linalg::hermitian_part(m));
    let min = vals.first().copied().unwrap_or(0.0);
    if linalg::hermitian_defect(m) > tol {
        return non_hermitian_certificate(m, min);
    }
    if min >= -tol {
        return DefinitenessCertificate {
            verdict: true,
            min_eigenvalue: min,
            witness: None,
            witness_value: None,
        };
    }
    let c: Vec<C64> = vecs.column(0).iter().map(|z| z.conj()).collect();
    let value = quad_form(m, &c);
    DefinitenessCertificate {
        verdict: false,
        min_eigenvalue: min,
        witness: Some(c),
        witness_value: Some(value),
    }
}

/// `Σ c_i conj(c_j) K(x_i,x_j) ≥ 0` for all `c`, decided by the smallest
/// eigenvalue.
pub fn is_positive_definite(k: &Kernel, tol: f64) -> DefinitenessCertificate {
    psd_certificate(&k.values, tol)
}

/// `Σ c_i conj(c_j) K(x_i,x_j) ≤ 0` for all `c` with `Σ c_i = 0`.
///
/// The certificate describes the form `c ↦ −Σ c_i conj(c_j) K(x_i,x_j)` on the
/// sum-zero hyperplane; `min_eigenvalue` is the smallest eigenvalue of its
/// compression.
pub fn is_negative_definite(k: &Kernel, tol: f64) -> DefinitenessCertificate {
    let m = &k.values;
    let n = m.nrows();
    let basis = linalg::complexify(&linalg::sum_zero_basis(n));
    let compressed = -(basis.adjoint() * linalg::hermitian_part(m) * &basis);
    let (vals, vecs) = hermitian_eigen(&compressed);
    let min = vals.first().copied().unwrap_or(0.0);
    if linalg::hermitian_defect(m) > tol {
        let mut cert = non_hermitian_certificate(m, min);
        cert.witness_value = cert.witness_value.map(|v| -v);
        return cert;
    }
    if min >= -tol {
        return DefinitenessCertificate {
            verdict: true,
            min_eigenvalue: min,
            witness: None,
            witness_value: None,
        };
    }
    let v = &basis * vecs.column(0);
    let c: Vec<C64> = v.iter().map(|z| z.conj()).collect();
    let value = -quad_form(m, &c);
    DefinitenessCertificate {
        verdict: false,
        min_eigenvalue: min,
        witness: Some(c),
        witness_value: Some(value),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchoenbergEntry {
    pub t: f64,
    pub verdict: bool,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchoenbergReport {
    pub entries: Vec<SchoenbergEntry>,
}

impl SchoenbergReport {
    pub fn all_positive(&self) -> bool {
        self.entries.iter().all(|e| e.verdict)
    }
}

/// Runs the positive definiteness test on `e^{−tψ}` for every `t` in the grid.
pub fn schoenberg_check(psi: &Kernel, t_grid: &[f64], tol: f64) -> SchoenbergReport {
    let entries = t_grid
        .iter()
        .map(|&t| {
            let phi = psi.map(|z| (z * -t).exp());
            let cert = is_positive_definite(&phi, tol);
            SchoenbergEntry {
                t,
                verdict: cert.verdict,
                min_eigenvalue: cert.min_eigenvalue,
            }
        })
        .collect();
    SchoenbergReport { entries }
}

/// Recovers points `α_x` with `‖α_x − α_y‖² = ψ(x,y)` from a real negative
/// definite kernel with zero diagonal.
///
/// The Gram matrix `½[ψ(x,b) + ψ(b,y) − ψ(x,y)]` is factorized through its
/// eigendecomposition; eigenvalues at or below `tol` are dropped, so the
/// returned dimension is the numerical rank (at least 1).
pub fn embed_ndk(psi: &Kernel, base: usize, tol: f64) -> Result<Embedding> {
    let n = psi.n();
    if base >= n {
        return Err(Error::precondition("base atom out of range"));
    }
    if psi.max_imag() > tol {
        return Err(Error::precondition("ψ must be real-valued"));
    }
    if (0..n).any(|x| psi.get(x, x).norm() > tol) {
        return Err(Error::precondition("ψ must vanish on the diagonal"));
    }
    let cert = is_negative_definite(psi, tol);
    if !cert.verdict {
        return Err(Error::Precondition {
            reason: "ψ is not negative definite".into(),
            certificate: Some(Box::new(cert)),
        });
    }
    let re = |x: usize, y: usize| psi.get(x, y).re;
    let gram = RMatrix::from_fn(n, n, |x, y| 0.5 * (re(x, base) + re(base, y) - re(x, y)));
    let gram = (&gram + gram.transpose()) * 0.5;
    let eig = gram.symmetric_eigen();
    let kept: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > tol).collect();
    let dim = kept.len().max(1);
    let points = RMatrix::from_fn(n, dim, |x, c| match kept.get(c) {
        Some(&k) => eig.eigenvectors[(x, k)] * math::sqrt(eig.eigenvalues[k]),
        None => 0.0,
    });
    Embedding::new(psi.space().clone(), points)
}

/// Positive definiteness of `φ` in the integral sense: the form
/// `ξ ↦ ∬ φ(x,y) conj(ξ(x)) ξ(y) dμ(x) dμ(y)` is nonnegative.
///
/// Decided on the congruent matrix `[μ_x φ(x,y) μ_y]`; in addition `n_trials`
/// random functions `ξ` (seeded) are evaluated, and any of them violating the
/// form overrides a positive verdict. Witnesses are functions `ξ`.
pub fn integrally_pd_check(phi: &Kernel, n_trials: usize, tol: f64, seed: u64) -> DefinitenessCertificate {
    let w = phi.space().weights();
    let n = phi.n();
    let weighted = CMatrix::from_fn(n, n, |x, y| phi.get(x, y) * (w[x] * w[y]));
    // ∬ φ conj(ξ(x)) ξ(y) = Σ c_x conj(c_y) M^T(x,y) with c = conj(ξ); use M^T
    // so the witness is ξ itself.
    let form_matrix = weighted.transpose();
    let mut cert = psd_certificate(&form_matrix, tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_trials {
        let xi: Vec<C64> = (0..n)
            .map(|_| C64::new(standard_normal(&mut rng), standard_normal(&mut rng)))
            .collect();
        let value = quad_form(&form_matrix, &xi);
        if value.re < -tol && cert.verdict {
            cert.verdict = false;
            cert.witness = Some(xi);
            cert.witness_value = Some(value);
        }
    }
    cert
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::psi_from_embedding;
    use alloc::vec;

    fn real(n: usize, v: &[f64]) -> Kernel {
        Kernel::from_real(FiniteSpace::uniform(n).unwrap(), RMatrix::from_row_slice(n, n, v)).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn hermitian_examples() {
        let sp = FiniteSpace::uniform(2).unwrap();
        assert!(is_hermitian(&Kernel::identity(sp.clone()), 0.0));
        let k = Kernel::new(
            sp,
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)]),
        )
        .unwrap();
        assert!(is_hermitian(&k, 0.0));
        assert!(!is_hermitian(&real(2, &[0.0, 1.0, 2.0, 0.0]), 1e-12));
    }

    #[test]
    fn positive_definite_examples() {
        assert!(is_positive_definite(&real(3, &[1.0; 9]), 1e-12).verdict);
        let cert = is_positive_definite(&real(2, &[1.0, 2.0, 2.0, 1.0]), 1e-12);
        assert!(!cert.verdict);
        assert!((cert.min_eigenvalue + 1.0).abs() < 1e-12);
        let value = cert.witness_value.unwrap();
        assert!((value.re + 1.0).abs() < 1e-12 && value.im.abs() < 1e-12);
        let w = cert.witness.unwrap();
        let norm: f64 = w.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_witness_has_non_real_form() {
        let cert = is_positive_definite(&real(2, &[1.0, 1.0, 3.0, 1.0]), 1e-12);
        assert!(!cert.verdict);
        assert!(cert.witness_value.unwrap().im.abs() > 0.5);
    }

    #[test]
    fn negative_definite_examples() {
        let swap = real(2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(is_negative_definite(&swap, 1e-12).verdict);
        assert!(!is_positive_definite(&swap, 1e-12).verdict);

        let bad = real(2, &[0.0, -1.0, -1.0, 0.0]);
        let cert = is_negative_definite(&bad, 1e-12);
        assert!(!cert.verdict);
        assert!(cert.witness_value.unwrap().re < -1e-12);
        let w = cert.witness.unwrap();
        let sum: C64 = w.iter().sum();
        assert!(sum.norm() < 1e-12);
    }

    #[test]
    fn negative_definite_single_atom_is_trivial() {
        assert!(is_negative_definite(&real(1, &[0.0]), 0.0).verdict);
    }

    #[test]
    fn schoenberg_examples() {
        let swap = real(2, &[0.0, 1.0, 1.0, 0.0]);
        let report = schoenberg_check(&swap, &[1.0], 1e-12);
        assert!(report.all_positive());
        assert!((report.entries[0].min_eigenvalue - (1.0 - (-1.0f64).exp())).abs() < 1e-12);

        let zero = real(3, &[0.0; 9]);
        assert!(schoenberg_check(&zero, &[1e-3, 1.0, 1e3], 1e-12).all_positive());

        // e^{−tψ} has off-diagonal e^{t} > 1, so its determinant 1 − e^{2t} < 0.
        let bad = real(2, &[0.0, -1.0, -1.0, 0.0]);
        let report = schoenberg_check(&bad, &[0.1, 1.0, 10.0], 1e-12);
        for e in &report.entries {
            assert!(!e.verdict);
            assert!((e.min_eigenvalue - (1.0 - e.t.exp())).abs() < 1e-9 * e.t.exp());
        }
    }

    #[test]
    fn embed_ndk_squared_line() {
        let psi = real(3, &[0.0, 1.0, 4.0, 1.0, 0.0, 1.0, 4.0, 1.0, 0.0]);
        let emb = embed_ndk(&psi, 0, 1e-12).unwrap();
        assert_eq!(emb.dim(), 1);
        // α_0 = 0 and |α_x| = x: the embedding is (0,1,2) up to sign.
        let p = emb.points();
        assert!(p[(0, 0)].abs() < 1e-12);
        assert!((p[(1, 0)].abs() - 1.0).abs() < 1e-12);
        assert!((p[(2, 0)] - 2.0 * p[(1, 0)]).abs() < 1e-12);
        assert!(psi_from_embedding(&emb).max_abs_diff(&psi) < 1e-12);
    }

    #[test]
    fn embed_ndk_zero_and_errors() {
        let zero = real(3, &[0.0; 9]);
        let emb = embed_ndk(&zero, 0, 1e-12).unwrap();
        assert_eq!(emb.points().amax(), 0.0);

        let bad = real(2, &[0.0, -1.0, -1.0, 0.0]);
        match embed_ndk(&bad, 0, 1e-12) {
            Err(Error::Precondition { certificate: Some(c), .. }) => assert!(!c.verdict),
            other => panic!("unexpected {other:?}"),
        }
        assert!(embed_ndk(&real(2, &[1.0, 1.0, 1.0, 0.0]), 0, 1e-12).is_err());
    }

    #[test]
    fn integral_pd_examples() {
        let sp = FiniteSpace::new(vec![0.5, 2.0, 3.0]).unwrap();
        let ones = Kernel::constant(sp, c(1.0, 0.0));
        assert!(integrally_pd_check(&ones, 50, 1e-12, 1).verdict);

        let cert = integrally_pd_check(&real(2, &[1.0, 2.0, 2.0, 1.0]), 50, 1e-12, 1);
        assert!(!cert.verdict);
        assert!((cert.min_eigenvalue + 1.0).abs() < 1e-12);
        assert!(cert.witness_value.unwrap().re < 0.0);
    }
}
