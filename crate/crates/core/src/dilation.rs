//! The dilation `T_t = E U_t J`.
//!
//! On a sample path `ω`, `V_t(ω)` is multiplication by
//! `k_{t,ω}(x) = e^{i√2 W_t(α_x)(ω)}` and `𝒰_t` conjugates by it, which on
//! kernels reads `f(x,y) ↦ e^{i√2 W_t(α_x − α_y)} f(x,y)`. The group is
//! `U_t = 𝒰_t S_t` with `S_t` the time shift of the path. `J` embeds a
//! deterministic operator as a constant family, so it has no representation
//! of its own here.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::gaussian::{char_exact, derive_seed, dot, shift, CellStream, GaussianGridPath, PathConfig};
use crate::kernels::Kernel;
use crate::math::{self, SQRT_2};
use crate::mc::{McAccumulator, McSampler, MCEstimate};
use crate::operators::HSOperator;
use crate::semigroup::SchurSemigroup;
use crate::space::{Embedding, FiniteSpace};
use crate::{Error, Result, C64};

/// Multiplication by `e^{iθ_x}` on `L²(X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalUnitary {
    space: Arc<FiniteSpace>,
    phases: Vec<f64>,
}

impl DiagonalUnitary {
    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn entries(&self) -> Vec<C64> {
        self.phases.iter().map(|p| math::cis(*p)).collect()
    }

    /// `V K_f V*`, whose kernel is `e^{i(θ_x − θ_y)} f(x,y)`.
    pub fn conjugate(&self, f: &HSOperator) -> Result<HSOperator> {
        if !crate::space::same_space(&self.space, f.space()) {
            return Err(Error::SpaceMismatch);
        }
        Ok(f.map_kernel(|x, y, v| math::cis(self.phases[x] - self.phases[y]) * v))
    }
}

pub(crate) fn check_embedding(path: &GaussianGridPath, emb: &Embedding) -> Result<()> {
    if path.dim() == emb.dim() {
        Ok(())
    } else {
        Err(Error::Dimension {
            expected: emb.dim(),
            found: path.dim(),
        })
    }
}

/// `θ_x = √2 ⟨α_x, b⟩` for a Brownian vector `b`.
pub(crate) fn phases_for(emb: &Embedding, brownian: &[f64]) -> Vec<f64> {
    (0..emb.space().n())
        .map(|x| SQRT_2 * dot(&emb.point(x), brownian))
        .collect()
}

/// `V_t(ω)` with phases `√2 W_t(α_x)`; negative `t` uses `W_t = −W(1_{]t,0]} ⊗ ·)`.
pub fn v_t(path: &GaussianGridPath, emb: &Embedding, t: f64) -> Result<DiagonalUnitary> {
    check_embedding(path, emb)?;
    let b = path.brownian_at(t)?;
    Ok(DiagonalUnitary {
        space: emb.space().clone(),
        phases: phases_for(emb, &b),
    })
}

/// `𝒰_t(K_f) = V_t K_f V_t*` on the given path.
pub fn conjugate(path: &GaussianGridPath, emb: &Embedding, t: f64, f: &HSOperator) -> Result<HSOperator> {
    v_t(path, emb, t)?.conjugate(f)
}

/// `E U_t J (K_f)`, evaluated with the Gaussian characteristic function:
/// kernel `E[e^{i√2 W_t(α_x−α_y)}] f(x,y)`.
pub fn dilate_exact(sg: &SchurSemigroup, t: f64, f: &HSOperator) -> Result<HSOperator> {
    if !(t >= 0.0) {
        return Err(Error::domain("dilation time must be ≥ 0"));
    }
    let emb = sg.embedding();
    let mut out = Vec::with_capacity(f.n() * f.n());
    for x in 0..f.n() {
        for y in 0..f.n() {
            out.push(char_exact(0.0, t, &emb.difference(x, y), SQRT_2)?);
        }
    }
    let n = f.n();
    let symbol = Kernel::from_fn(emb.space().clone(), |x, y| out[x * n + y]);
    crate::operators::schur_apply(&symbol, f)
}

/// Averages `𝒰_t(K_f)` over independent paths; path `k` is the path sampled
/// from `derive_seed(root_seed, k)`.
#[derive(Debug, Clone)]
pub struct DilationSampler {
    emb: Embedding,
    f: HSOperator,
    step: f64,
    cells: usize,
    n_samples: u64,
    root_seed: u64,
}

impl DilationSampler {
    pub fn new(
        sg: &SchurSemigroup,
        t: f64,
        f: &HSOperator,
        grid: &PathConfig,
        n_samples: u64,
        root_seed: u64,
    ) -> Result<Self> {
        if n_samples < 2 {
            return Err(Error::domain("Monte Carlo needs at least 2 samples"));
        }
        if !(t >= 0.0) {
            return Err(Error::domain("dilation time must be ≥ 0"));
        }
        grid.validate()?;
        let emb = sg.embedding().clone();
        if grid.dim != emb.dim() {
            return Err(Error::Dimension {
                expected: emb.dim(),
                found: grid.dim,
            });
        }
        if !crate::space::same_space(emb.space(), f.space()) {
            return Err(Error::SpaceMismatch);
        }
        let cells = grid.index_of(t)? as usize;
        Ok(DilationSampler {
            emb,
            f: f.clone(),
            step: grid.step,
            cells,
            n_samples,
            root_seed,
        })
    }
}

impl McSampler for DilationSampler {
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
        let mut b = vec![0.0; d];
        for k in range {
            b.iter_mut().for_each(|v| *v = 0.0);
            CellStream::new(derive_seed(self.root_seed, k), d, self.step).accumulate(0, self.cells, &mut b);
            let theta = phases_for(&self.emb, &b);
            acc.push(
                (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).map(|(x, y)| {
                    math::cis(theta[x] - theta[y]) * self.f.get(x, y)
                }),
            );
        }
        Ok(acc)
    }
}

/// Monte Carlo estimate of `E U_t J (K_f)` over `n_samples` paths.
pub fn dilate_mc(
    sg: &SchurSemigroup,
    t: f64,
    f: &HSOperator,
    grid: &PathConfig,
    n_samples: u64,
    root_seed: u64,
) -> Result<MCEstimate> {
    DilationSampler::new(sg, t, f, grid, n_samples, root_seed)?.run_sequential()
}

/// Compares `U_{t'} U_t (1 ⊗ K_f)` with `U_{t+t'} (1 ⊗ K_f)` on one path and
/// returns the largest entrywise deviation.
///
/// The left side conjugates by `V_{t'}` the kernel produced by `𝒰_t` on the
/// path shifted by `t'`, whose phase is `√2 W(1_{[t', t+t']} ⊗ (α_x − α_y))`
/// with the orientation conventions for negative times.
pub fn group_law_check(
    path: &GaussianGridPath,
    emb: &Embedding,
    t: f64,
    t_prime: f64,
    f: &HSOperator,
) -> Result<f64> {
    let shifted = shift(path, t_prime)?;
    let inner = conjugate(&shifted, emb, t, f)?;
    let left = conjugate(path, emb, t_prime, &inner)?;
    let right = conjugate(path, emb, t + t_prime, f)?;
    Ok(left.max_abs_diff(&right))
}
