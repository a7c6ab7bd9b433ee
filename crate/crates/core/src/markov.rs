//! Standard and reversed Markov dilations.
//!
//! Standard: `π_t(z) = V_t z V_t*` with the increasing filtration `F_s` of
//! increments on `]0, s]`, and `E_s π_t = π_s T_{t−s}` for `0 ≤ s ≤ t`.
//!
//! Reversed: `π̃_r(z)` conjugates by the phases `√2 W(1_{]r,T]} ⊗ α_x)` built
//! from the increments after `r`, with the decreasing filtration `F̃_r` they
//! generate. For `s ≤ t`, conditioning `π̃_s` on `F̃_t` gives `π̃_t T_{t−s}`.

use alloc::sync::Arc;
use alloc::vec;
use core::ops::Range;

use crate::dilation::{check_embedding, phases_for};
use crate::gaussian::{derive_seed, CellStream, GaussianGridPath};
use crate::kernels::Kernel;
use crate::math;
use crate::mc::{sigma_gate, GateSummary, McAccumulator, McSampler, MCEstimate};
use crate::operators::HSOperator;
use crate::semigroup::SchurSemigroup;
use crate::space::{Embedding, FiniteSpace};
use crate::{Error, Result};

/// One sample of an operator-valued random variable, tied to its path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathOperator<'a> {
    pub path: &'a GaussianGridPath,
    pub kernel: Kernel,
}

impl PathOperator<'_> {
    pub fn operator(&self) -> HSOperator {
        HSOperator::new(self.kernel.clone())
    }
}

fn ordered(s: f64, t: f64) -> Result<()> {
    if !(s >= 0.0) {
        return Err(Error::domain("conditioning time must be ≥ 0"));
    }
    if s > t {
        return Err(Error::Ordering { s, t });
    }
    Ok(())
}

fn phase_conjugate(emb: &Embedding, brownian: &[f64], f: &HSOperator) -> Result<HSOperator> {
    if !crate::space::same_space(emb.space(), f.space()) {
        return Err(Error::SpaceMismatch);
    }
    let theta = phases_for(emb, brownian);
    Ok(f.map_kernel(|x, y, v| math::cis(theta[x] - theta[y]) * v))
}

/// `π_t(z)` on the path: kernel `e^{i√2 W_t(α_x−α_y)} z(x,y)`.
pub fn pi_t<'a>(path: &'a GaussianGridPath, emb: &Embedding, t: f64, z: &HSOperator) -> Result<PathOperator<'a>> {
    if !(t >= 0.0) {
        return Err(Error::domain("π_t is defined for t ≥ 0"));
    }
    check_embedding(path, emb)?;
    let b = path.brownian_increment(0.0, t)?;
    Ok(PathOperator {
        path,
        kernel: phase_conjugate(emb, &b, z)?.into_kernel(),
    })
}

/// `E_s π_t(K_f)` in closed form: kernel
/// `e^{i√2 W_s(α_x−α_y)} e^{−(t−s)ψ(x,y)} f(x,y)`.
pub fn cond_exp_exact<'a>(
    path: &'a GaussianGridPath,
    emb: &Embedding,
    s: f64,
    t: f64,
    f: &HSOperator,
) -> Result<PathOperator<'a>> {
    ordered(s, t)?;
    check_embedding(path, emb)?;
    path.index_of(t)?;
    let b = path.brownian_increment(0.0, s)?;
    let theta = phases_for(emb, &b);
    let kernel = f
        .map_kernel(|x, y, v| {
            math::cis(theta[x] - theta[y]) * math::exp(-(t - s) * emb.squared_distance(x, y)) * v
        })
        .into_kernel();
    Ok(PathOperator { path, kernel })
}

/// Averages `π_t(resample_after(path, s, seed_k))(K_f)` over `k`.
#[derive(Debug, Clone)]
pub struct CondExpSampler {
    emb: Embedding,
    f: HSOperator,
    frozen: vec::Vec<f64>,
    step: f64,
    first_cell: i64,
    cells: usize,
    n_samples: u64,
    root_seed: u64,
}

impl CondExpSampler {
    /// Standard case: frozen `]0, s]`, fresh `]s, t]`.
    pub fn standard(
        path: &GaussianGridPath,
        emb: &Embedding,
        s: f64,
        t: f64,
        f: &HSOperator,
        n_samples: u64,
        root_seed: u64,
    ) -> Result<Self> {
        ordered(s, t)?;
        check_embedding(path, emb)?;
        let frozen = path.brownian_increment(0.0, s)?;
        let a = path.index_of(s)?;
        let b = path.index_of(t)?;
        Self::build(path, emb, f, frozen, a, b, n_samples, root_seed)
    }

    /// Reversed case: frozen `]t, T]`, fresh `]s, t]`; the estimator is
    /// `π̃_s` averaged over the fresh cells.
    pub fn reversed(
        path: &GaussianGridPath,
        emb: &Embedding,
        s: f64,
        t: f64,
        f: &HSOperator,
        n_samples: u64,
        root_seed: u64,
    ) -> Result<Self> {
        ordered(s, t)?;
        check_embedding(path, emb)?;
        let (_, end) = path.window();
        let frozen = path.brownian_increment(t, end)?;
        let a = path.index_of(s)?;
        let b = path.index_of(t)?;
        Self::build(path, emb, f, frozen, a, b, n_samples, root_seed)
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        path: &GaussianGridPath,
        emb: &Embedding,
        f: &HSOperator,
        frozen: vec::Vec<f64>,
        a: i64,
        b: i64,
        n_samples: u64,
        root_seed: u64,
    ) -> Result<Self> {
        if n_samples < 2 {
            return Err(Error::domain("Monte Carlo needs at least 2 resamples"));
        }
        if !crate::space::same_space(emb.space(), f.space()) {
            return Err(Error::SpaceMismatch);
        }
        Ok(CondExpSampler {
            emb: emb.clone(),
            f: f.clone(),
            frozen,
            step: path.config().step,
            first_cell: a,
            cells: (b - a) as usize,
            n_samples,
            root_seed,
        })
    }
}

impl McSampler for CondExpSampler {
    fn samples(&self) -> u64 {
        self.n_samples
    }

    fn space(&self) -> &Arc<FiniteSpace> {
        self.emb.space()
    }

    fn run_range(&self, range: Range<u64>) -> Result<McAccumulator> {
        let n = self.f.n();
        let d = self.emb.dim();
        let mut acc = McAccumulator::new(n * n);
        let mut fresh = vec![0.0; d];
        let mut b = vec![0.0; d];
        for k in range {
            fresh.iter_mut().for_each(|v| *v = 0.0);
            CellStream::new(derive_seed(self.root_seed, k), d, self.step).accumulate(
                self.first_cell,
                self.cells,
                &mut fresh,
            );
            for i in 0..d {
                b[i] = self.frozen[i] + fresh[i];
            }
            let theta = phases_for(&self.emb, &b);
            acc.push(
                (0..n)
                    .flat_map(|x| (0..n).map(move |y| (x, y)))
                    .map(|(x, y)| math::cis(theta[x] - theta[y]) * self.f.get(x, y)),
            );
        }
        Ok(acc)
    }
}

/// Monte Carlo version of `E_s π_t(K_f)`: the increments up to `s` are
/// frozen and those in `]s, t]` redrawn from `derive_seed(root_seed, k)`.
pub fn cond_exp_mc(
    path: &GaussianGridPath,
    emb: &Embedding,
    s: f64,
    t: f64,
    f: &HSOperator,
    n_resamples: u64,
    root_seed: u64,
) -> Result<MCEstimate> {
    CondExpSampler::standard(path, emb, s, t, f, n_resamples, root_seed)?.run_sequential()
}

/// `π̃_r(z)`: kernel `e^{i√2 W(1_{]r,T]} ⊗ (α_x−α_y))} z(x,y)`, where `T` is the
/// right end of the path window.
pub fn pi_reversed<'a>(path: &'a GaussianGridPath, emb: &Embedding, r: f64, z: &HSOperator) -> Result<PathOperator<'a>> {
    if !(r >= 0.0) {
        return Err(Error::domain("π̃_r is defined for r ≥ 0"));
    }
    check_embedding(path, emb)?;
    let (_, end) = path.window();
    if r > end {
        return Err(Error::Ordering { s: r, t: end });
    }
    let b = path.brownian_increment(r, end)?;
    Ok(PathOperator {
        path,
        kernel: phase_conjugate(emb, &b, z)?.into_kernel(),
    })
}

/// `E[π̃_s(K_f) | F̃_t]` in closed form: kernel
/// `e^{i√2 W(1_{]t,T]} ⊗ (α_x−α_y))} e^{−(t−s)ψ(x,y)} f(x,y)`.
pub fn cond_exp_reversed_exact<'a>(
    path: &'a GaussianGridPath,
    emb: &Embedding,
    s: f64,
    t: f64,
    f: &HSOperator,
) -> Result<PathOperator<'a>> {
    ordered(s, t)?;
    check_embedding(path, emb)?;
    path.index_of(s)?;
    let (_, end) = path.window();
    let b = path.brownian_increment(t, end)?;
    let theta = phases_for(emb, &b);
    let kernel = f
        .map_kernel(|x, y, v| {
            math::cis(theta[x] - theta[y]) * math::exp(-(t - s) * emb.squared_distance(x, y)) * v
        })
        .into_kernel();
    Ok(PathOperator { path, kernel })
}

/// Monte Carlo settings for the verifiers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McCheck {
    pub n_samples: u64,
    pub root_seed: u64,
    pub sigma_gate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovReport {
    pub s: f64,
    pub t: f64,
    /// Largest entrywise gap between the two sides of the identity.
    pub exact_deviation: f64,
    pub mc: Option<GateSummary>,
}

/// Checks `E_s π_t = π_s T_{t−s}` on the path, exactly and optionally by
/// Monte Carlo.
pub fn verify_standard(
    sg: &SchurSemigroup,
    path: &GaussianGridPath,
    s: f64,
    t: f64,
    f: &HSOperator,
    mc: Option<McCheck>,
) -> Result<MarkovReport> {
    let lhs = cond_exp_exact(path, sg.embedding(), s, t, f)?;
    let rhs = pi_t(path, sg.embedding(), s, &sg.apply(t - s, f)?)?;
    let exact_deviation = lhs.kernel.max_abs_diff(&rhs.kernel);
    let mc = match mc {
        Some(c) => {
            let est = cond_exp_mc(path, sg.embedding(), s, t, f, c.n_samples, c.root_seed)?;
            Some(sigma_gate(&est, &lhs.operator(), c.sigma_gate))
        }
        None => None,
    };
    Ok(MarkovReport {
        s,
        t,
        exact_deviation,
        mc,
    })
}

/// Checks `E[π̃_s(·) | F̃_t] = π̃_t T_{t−s}` for `0 ≤ s ≤ t ≤ T`.
pub fn verify_reversed(
    sg: &SchurSemigroup,
    path: &GaussianGridPath,
    s: f64,
    t: f64,
    f: &HSOperator,
    mc: Option<McCheck>,
) -> Result<MarkovReport> {
    let lhs = cond_exp_reversed_exact(path, sg.embedding(), s, t, f)?;
    let rhs = pi_reversed(path, sg.embedding(), t, &sg.apply(t - s, f)?)?;
    let exact_deviation = lhs.kernel.max_abs_diff(&rhs.kernel);
    let mc = match mc {
        Some(c) => {
            let est = CondExpSampler::reversed(path, sg.embedding(), s, t, f, c.n_samples, c.root_seed)?
                .run_sequential()?;
            Some(sigma_gate(&est, &lhs.operator(), c.sigma_gate))
        }
        None => None,
    };
    Ok(MarkovReport {
        s,
        t,
        exact_deviation,
        mc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{resample_after, resample_window, sample_path, PathConfig};
    use crate::operators::{compose, schatten_norm, trace};
    use crate::{CMatrix, C64};

    fn setup() -> (SchurSemigroup, HSOperator, GaussianGridPath) {
        let sp = FiniteSpace::new(vec![1.0, 2.0, 0.5]).unwrap();
        let emb = Embedding::from_rows(sp.clone(), &[vec![0.1, 0.0], vec![-0.6, 0.7], vec![0.4, 0.4]]).unwrap();
        let f = HSOperator::new(Kernel::from_fn(sp, |x, y| C64::new((x * 3 + y) as f64 - 2.0, 0.5 * x as f64)));
        let path = sample_path(&PathConfig::new(0.125, 2.0, 2, 23).unwrap()).unwrap();
        (SchurSemigroup::new(emb), f, path)
    }

    #[test]
    fn pi_t_basics() {
        let (sg, f, path) = setup();
        assert_eq!(pi_t(&path, sg.embedding(), 0.0, &f).unwrap().operator(), f);
        let p = pi_t(&path, sg.embedding(), 1.0, &f).unwrap().operator();
        assert!((trace(&p) - trace(&f)).norm() < 1e-14);
        assert!((schatten_norm(&p, 1.0).unwrap() - schatten_norm(&f, 1.0).unwrap()).abs() < 1e-12);
        let id = HSOperator::identity(f.space().clone());
        assert_eq!(pi_t(&path, sg.embedding(), 1.0, &id).unwrap().operator(), id);
        assert!(pi_t(&path, sg.embedding(), -0.5, &f).is_err());
    }

    #[test]
    fn pi_t_is_a_homomorphism() {
        let (sg, f, path) = setup();
        let g = crate::operators::adjoint(&f);
        let emb = sg.embedding();
        let lhs = pi_t(&path, emb, 1.5, &compose(&f, &g).unwrap()).unwrap().operator();
        let rhs = compose(
            &pi_t(&path, emb, 1.5, &f).unwrap().operator(),
            &pi_t(&path, emb, 1.5, &g).unwrap().operator(),
        )
        .unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn cond_exp_edge_cases() {
        let (sg, f, path) = setup();
        let at_t = cond_exp_exact(&path, sg.embedding(), 0.75, 0.75, &f).unwrap();
        assert!(at_t.operator().max_abs_diff(&pi_t(&path, sg.embedding(), 0.75, &f).unwrap().operator()) < 1e-15);
        let from0 = cond_exp_exact(&path, sg.embedding(), 0.0, 1.0, &f).unwrap();
        assert!(from0.operator().max_abs_diff(&crate::dilation::dilate_exact(&sg, 1.0, &f).unwrap()) < 1e-15);
        assert!(matches!(cond_exp_exact(&path, sg.embedding(), 1.0, 0.5, &f), Err(Error::Ordering { .. })));
        assert!(cond_exp_exact(&path, sg.embedding(), 0.1, 0.5, &f).is_err());
    }

    #[test]
    fn tower_property() {
        let (sg, f, path) = setup();
        for (r, s, t) in [(0.0, 0.5, 1.0), (0.25, 0.25, 1.5), (0.5, 1.0, 2.0)] {
            let inner = sg.apply(t - s, &f).unwrap();
            let lhs = cond_exp_exact(&path, sg.embedding(), r, s, &inner).unwrap();
            let rhs = cond_exp_exact(&path, sg.embedding(), r, t, &f).unwrap();
            assert!(lhs.kernel.max_abs_diff(&rhs.kernel) < 1e-12);
        }
    }

    #[test]
    fn mc_matches_resampled_paths() {
        let (sg, f, path) = setup();
        let est = cond_exp_mc(&path, sg.embedding(), 0.5, 1.25, &f, 4, 77).unwrap();
        let mut sum = CMatrix::zeros(3, 3);
        for k in 0..4 {
            let q = resample_after(&path, 0.5, derive_seed(77, k)).unwrap();
            sum += pi_t(&q, sg.embedding(), 1.25, &f).unwrap().kernel.values();
        }
        assert!((sum / C64::new(4.0, 0.0) - est.mean.kernel().values()).camax() < 1e-13);

        let est = CondExpSampler::reversed(&path, sg.embedding(), 0.5, 1.25, &f, 4, 77)
            .unwrap()
            .run_sequential()
            .unwrap();
        let mut sum = CMatrix::zeros(3, 3);
        for k in 0..4 {
            let q = resample_window(&path, 0.5, 1.25, derive_seed(77, k)).unwrap();
            sum += pi_reversed(&q, sg.embedding(), 0.5, &f).unwrap().kernel.values();
        }
        assert!((sum / C64::new(4.0, 0.0) - est.mean.kernel().values()).camax() < 1e-13);
    }

    #[test]
    fn mc_at_equal_times_has_no_spread() {
        let (sg, f, path) = setup();
        let est = cond_exp_mc(&path, sg.embedding(), 1.0, 1.0, &f, 8, 1).unwrap();
        assert!(est.stderr.iter().all(|s| *s == 0.0));
        assert!(est.mean.max_abs_diff(&pi_t(&path, sg.embedding(), 1.0, &f).unwrap().operator()) < 1e-15);
    }

    #[test]
    fn verifiers_hold_exactly() {
        let (sg, f, path) = setup();
        assert_eq!(verify_standard(&sg, &path, 0.0, 0.0, &f, None).unwrap().exact_deviation, 0.0);
        for (s, t) in [(0.25, 1.0), (0.5, 2.0), (1.0, 1.0)] {
            assert!(verify_standard(&sg, &path, s, t, &f, None).unwrap().exact_deviation <= 1e-12);
            assert!(verify_reversed(&sg, &path, s, t, &f, None).unwrap().exact_deviation <= 1e-12);
        }
        let flat = SchurSemigroup::new(Embedding::from_rows(f.space().clone(), &vec![vec![1.0, 1.0]; 3]).unwrap());
        assert_eq!(verify_reversed(&flat, &path, 0.25, 1.5, &f, None).unwrap().exact_deviation, 0.0);
        assert!(verify_reversed(&sg, &path, 0.5, 0.25, &f, None).is_err());
    }

    #[test]
    fn constant_embedding_mc_is_exact() {
        let (_, f, path) = setup();
        let flat = Embedding::from_rows(f.space().clone(), &vec![vec![1.0, 1.0]; 3]).unwrap();
        let est = cond_exp_mc(&path, &flat, 0.25, 1.0, &f, 16, 5).unwrap();
        assert_eq!(est.mean, f);
    }
}
