//! Grid-discretized two-sided `H`-cylindrical Brownian motion.
//!
//! Time is cut into cells `]cΔ, (c+1)Δ]`, `c ∈ Z`. The increment of the
//! `i`-th coordinate Brownian motion over cell `c` is a pure function of
//! `(seed, c, i)`: every cell owns a fixed window of a ChaCha8 keystream, and
//! each normal variate consumes exactly two 64-bit words (Box–Muller). Any
//! sub-range of a path can therefore be regenerated without sampling the rest,
//! and paths with different horizons but equal seeds agree where they overlap.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::math;
use crate::{Error, Result, C64};

/// One standard normal variate from exactly two `u64` draws.
pub(crate) fn standard_normal<R: RngCore>(rng: &mut R) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    // u1 ∈ (0, 1], u2 ∈ [0, 1)
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * SCALE;
    let u2 = (rng.next_u64() >> 11) as f64 * SCALE;
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * math::PI * u2)
}

/// SplitMix64 finalizer; used to derive per-path seeds from a root seed.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut z = root ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const CELL_OFFSET: i128 = 1 << 40;
const WORDS_PER_NORMAL: u128 = 4;

/// Counter-based source of cell increments for one seed.
pub(crate) struct CellStream {
    rng: ChaCha8Rng,
    dim: usize,
    sigma: f64,
}

impl CellStream {
    pub(crate) fn new(seed: u64, dim: usize, step: f64) -> Self {
        CellStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            dim,
            sigma: math::sqrt(step),
        }
    }

    fn seek(&mut self, cell: i64) {
        let slot = (cell as i128 + CELL_OFFSET) as u128;
        self.rng.set_word_pos(slot * self.dim as u128 * WORDS_PER_NORMAL);
    }

    /// Writes the increments of cells `first..first+count`, row-major.
    pub(crate) fn fill(&mut self, first: i64, count: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), count * self.dim);
        self.seek(first);
        for v in out.iter_mut() {
            *v = self.sigma * standard_normal(&mut self.rng);
        }
    }

    /// Adds the coordinate sums of cells `first..first+count` into `acc`.
    pub(crate) fn accumulate(&mut self, first: i64, count: usize, acc: &mut [f64]) {
        debug_assert_eq!(acc.len(), self.dim);
        if count == 0 {
            return;
        }
        self.seek(first);
        for _ in 0..count {
            for a in acc.iter_mut() {
                *a += self.sigma * standard_normal(&mut self.rng);
            }
        }
    }
}

/// Discretization parameters of a sampled path on `[−T, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathConfig {
    pub step: f64,
    pub horizon: f64,
    pub dim: usize,
    pub seed: u64,
}

impl PathConfig {
    pub fn new(step: f64, horizon: f64, dim: usize, seed: u64) -> Result<Self> {
        let cfg = PathConfig { step, horizon, dim, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::domain("grid step must be positive"));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::domain("horizon must be positive"));
        }
        if self.dim == 0 {
            return Err(Error::domain("path dimension must be at least 1"));
        }
        grid_index(self.horizon, self.step).ok_or(Error::Alignment {
            time: self.horizon,
            step: self.step,
            lo: 0.0,
            hi: f64::INFINITY,
        })?;
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        PathConfig { seed, ..*self }
    }

    /// Number of cells on one side of the origin, `T/Δ`.
    pub fn half_cells(&self) -> i64 {
        grid_index(self.horizon, self.step).unwrap_or(0)
    }

    /// Grid index of `t`, if `t` is aligned and inside `[−T, T]`.
    pub fn index_of(&self, t: f64) -> Result<i64> {
        let half = self.half_cells();
        match grid_index(t, self.step) {
            Some(k) if k.abs() <= half => Ok(k),
            _ => Err(Error::Alignment {
                time: t,
                step: self.step,
                lo: -self.horizon,
                hi: self.horizon,
            }),
        }
    }
}

/// `t/Δ` when it is an integer up to floating-point noise.
pub(crate) fn grid_index(t: f64, step: f64) -> Option<i64> {
    if !t.is_finite() {
        return None;
    }
    let q = t / step;
    let k = math::round(q);
    if (q - k).abs() <= 1e-9 * k.abs().max(1.0) && k.abs() < 1e15 {
        Some(k as i64)
    } else {
        None
    }
}

/// One sample of the grid-discretized Brownian motion.
///
/// Stores the increments of the cells `first_cell..first_cell + cells`;
/// freshly sampled paths cover `[−T, T]`, shifted paths a translated window.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianGridPath {
    config: PathConfig,
    first_cell: i64,
    increments: Vec<f64>,
}

/// Samples the increments on `[−T, T]` from `cfg.seed`.
pub fn sample_path(cfg: &PathConfig) -> Result<GaussianGridPath> {
    cfg.validate()?;
    let half = cfg.half_cells();
    let cells = (2 * half) as usize;
    let mut increments = vec![0.0; cells * cfg.dim];
    CellStream::new(cfg.seed, cfg.dim, cfg.step).fill(-half, cells, &mut increments);
    Ok(GaussianGridPath {
        config: *cfg,
        first_cell: -half,
        increments,
    })
}

impl GaussianGridPath {
    pub fn config(&self) -> &PathConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn cells(&self) -> usize {
        self.increments.len() / self.config.dim
    }

    /// Time window `[lo, hi]` covered by the stored increments.
    pub fn window(&self) -> (f64, f64) {
        let lo = self.first_cell as f64 * self.config.step;
        (lo, lo + self.cells() as f64 * self.config.step)
    }

    /// Increment of cell `c` (cell `]cΔ,(c+1)Δ]`).
    pub fn increment(&self, cell: i64) -> Option<&[f64]> {
        let k = usize::try_from(cell - self.first_cell).ok()?;
        let d = self.config.dim;
        self.increments.get(k * d..(k + 1) * d)
    }

    /// Grid index of a time inside the stored window.
    pub fn index_of(&self, t: f64) -> Result<i64> {
        let (lo, hi) = self.window();
        let err = || Error::Alignment {
            time: t,
            step: self.config.step,
            lo,
            hi,
        };
        let k = grid_index(t, self.config.step).ok_or_else(err)?;
        if k < self.first_cell || k > self.first_cell + self.cells() as i64 {
            return Err(err());
        }
        Ok(k)
    }

    /// Coordinate sums of the increments over cells `a..b` (grid indices).
    fn sums(&self, a: i64, b: i64) -> Vec<f64> {
        let d = self.config.dim;
        let mut acc = vec![0.0; d];
        let lo = (a - self.first_cell) as usize;
        let hi = (b - self.first_cell) as usize;
        for row in self.increments[lo * d..hi * d].chunks_exact(d) {
            for (s, v) in acc.iter_mut().zip(row) {
                *s += v;
            }
        }
        acc
    }

    /// `B(t) − B(s)` for `s ≤ t`: the coordinate Brownian increments over `]s,t]`.
    pub fn brownian_increment(&self, s: f64, t: f64) -> Result<Vec<f64>> {
        if s > t {
            return Err(Error::Ordering { s, t });
        }
        let a = self.index_of(s)?;
        let b = self.index_of(t)?;
        Ok(self.sums(a, b))
    }

    /// `W(1_{]s,t]} ⊗ h)` for `s ≤ t`.
    pub fn w_interval(&self, s: f64, t: f64, h: &[f64]) -> Result<f64> {
        check_dim(h, self.config.dim)?;
        let sums = self.brownian_increment(s, t)?;
        Ok(dot(&sums, h))
    }

    /// Oriented version: `W(1_{]a,b]} ⊗ h)` if `a ≤ b`, else `−W(1_{]b,a]} ⊗ h)`.
    pub fn w_signed(&self, a: f64, b: f64, h: &[f64]) -> Result<f64> {
        if a <= b {
            self.w_interval(a, b, h)
        } else {
            Ok(-self.w_interval(b, a, h)?)
        }
    }

    /// `W_t(h)`, with `W_t(h) = −W(1_{]t,0]} ⊗ h)` for negative `t`.
    pub fn w_t(&self, t: f64, h: &[f64]) -> Result<f64> {
        self.w_signed(0.0, t, h)
    }

    /// The oriented Brownian vector `B(t) − B(0)`, valid for either sign of `t`.
    pub(crate) fn brownian_at(&self, t: f64) -> Result<Vec<f64>> {
        self.brownian_between(0.0, t)
    }

    /// Oriented `B(b) − B(a)`.
    pub(crate) fn brownian_between(&self, a: f64, b: f64) -> Result<Vec<f64>> {
        if a <= b {
            self.brownian_increment(a, b)
        } else {
            let mut v = self.brownian_increment(b, a)?;
            v.iter_mut().for_each(|x| *x = -*x);
            Ok(v)
        }
    }
}

/// Re-indexes the increments so that the result at `]s, s']` reads the
/// original at `]s+t, s'+t]`. The shift must keep the origin inside the
/// window, so `|t|` may not exceed the horizon.
pub fn shift(path: &GaussianGridPath, t: f64) -> Result<GaussianGridPath> {
    let k = path.config.index_of(t)?;
    Ok(GaussianGridPath {
        config: path.config,
        first_cell: path.first_cell - k,
        increments: path.increments.clone(),
    })
}

/// Keeps the increments of cells inside `]−∞, s]` and `]t, ∞[`, and redraws
/// those inside `]s, t]` from `seed`.
pub fn resample_window(path: &GaussianGridPath, s: f64, t: f64, seed: u64) -> Result<GaussianGridPath> {
    if s > t {
        return Err(Error::Ordering { s, t });
    }
    let a = path.index_of(s)?;
    let b = path.index_of(t)?;
    let mut out = path.clone();
    let d = path.config.dim;
    let lo = (a - path.first_cell) as usize;
    let hi = (b - path.first_cell) as usize;
    CellStream::new(seed, d, path.config.step).fill(a, hi - lo, &mut out.increments[lo * d..hi * d]);
    Ok(out)
}

/// Freezes the increments up to `s` and redraws everything after it.
pub fn resample_after(path: &GaussianGridPath, s: f64, seed: u64) -> Result<GaussianGridPath> {
    if s < 0.0 {
        return Err(Error::domain("resample_after needs s ≥ 0"));
    }
    let (_, hi) = path.window();
    resample_window(path, s, hi, seed)
}

/// `E[e^{i·scale·W(1_{]s,t]} ⊗ h)}] = exp(−scale²(t−s)‖h‖²/2)`.
pub fn char_exact(s: f64, t: f64, h: &[f64], scale: f64) -> Result<C64> {
    if s > t {
        return Err(Error::Ordering { s, t });
    }
    let norm2: f64 = h.iter().map(|v| v * v).sum();
    Ok(C64::new(math::exp(-scale * scale * (t - s) * norm2 / 2.0), 0.0))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dim(h: &[f64], dim: usize) -> Result<()> {
    if h.len() == dim {
        Ok(())
    } else {
        Err(Error::Dimension {
            expected: dim,
            found: h.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(seed: u64) -> PathConfig {
        PathConfig::new(1.0 / 64.0, 2.0, 3, seed).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(PathConfig::new(0.25, 1.1, 1, 0).is_err());
        assert!(PathConfig::new(0.0, 1.0, 1, 0).is_err());
        assert!(PathConfig::new(0.25, 1.0, 0, 0).is_err());
        let c = PathConfig::new(0.25, 2.0, 1, 0).unwrap();
        assert_eq!(c.half_cells(), 8);
        assert!(c.index_of(0.3).is_err());
        assert!(c.index_of(2.25).is_err());
        assert_eq!(c.index_of(-0.5).unwrap(), -2);
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(sample_path(&cfg(7)).unwrap(), sample_path(&cfg(7)).unwrap());
        assert_ne!(sample_path(&cfg(7)).unwrap(), sample_path(&cfg(8)).unwrap());
    }

    #[test]
    fn overlapping_horizons_agree() {
        let short = sample_path(&PathConfig::new(0.25, 1.0, 2, 5).unwrap()).unwrap();
        let long = sample_path(&PathConfig::new(0.25, 3.0, 2, 5).unwrap()).unwrap();
        for c in -4..4 {
            assert_eq!(short.increment(c), long.increment(c));
        }
    }

    #[test]
    fn interval_identities() {
        let p = sample_path(&cfg(1)).unwrap();
        let h = [0.3, -1.2, 0.5];
        assert_eq!(p.w_interval(0.5, 0.5, &h).unwrap(), 0.0);
        let (s, t, u) = (-0.75, 0.25, 1.5);
        let split = p.w_interval(s, t, &h).unwrap() + p.w_interval(t, u, &h).unwrap();
        assert!((split - p.w_interval(s, u, &h).unwrap()).abs() < 1e-12);
        let h2: Vec<f64> = h.iter().map(|v| 2.0 * v).collect();
        assert_eq!(p.w_interval(s, u, &h2).unwrap(), 2.0 * p.w_interval(s, u, &h).unwrap());
        assert_eq!(p.w_t(-0.5, &h).unwrap(), -p.w_interval(-0.5, 0.0, &h).unwrap());
        assert!(p.w_interval(0.0, 0.3, &h).is_err());
        assert!(p.w_interval(0.0, 2.5, &h).is_err());
        assert!(matches!(p.w_interval(1.0, 0.0, &h), Err(Error::Ordering { .. })));
        assert!(matches!(p.w_interval(0.0, 1.0, &h[..2]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn shift_reindexes() {
        let p = sample_path(&cfg(3)).unwrap();
        assert_eq!(shift(&p, 0.0).unwrap(), p);
        let a = shift(&shift(&p, 0.5).unwrap(), -0.25).unwrap();
        assert_eq!(a, shift(&p, 0.25).unwrap());
        let q = shift(&p, 0.75).unwrap();
        let h = [1.0, 0.5, -0.25];
        for (s, s2) in [(-1.0, 0.5), (0.0, 1.25), (-2.75, -2.0)] {
            assert_eq!(q.w_interval(s, s2, &h).unwrap(), p.w_interval(s + 0.75, s2 + 0.75, &h).unwrap());
        }
        assert!(q.w_interval(1.0, 1.5, &h).is_err());
        assert!(shift(&p, 2.5).is_err());
        assert!(shift(&p, 0.3).is_err());
    }

    #[test]
    fn resample_freezes_prefix() {
        let p = sample_path(&cfg(4)).unwrap();
        let q = resample_after(&p, 0.5, 99).unwrap();
        let h = [1.0, 1.0, 1.0];
        assert_eq!(p.w_interval(-2.0, 0.5, &h).unwrap(), q.w_interval(-2.0, 0.5, &h).unwrap());
        assert_ne!(p.w_interval(0.5, 1.0, &h).unwrap(), q.w_interval(0.5, 1.0, &h).unwrap());
        assert_eq!(resample_after(&p, 2.0, 99).unwrap(), p);
        assert!(resample_after(&p, -0.5, 1).is_err());
        assert!(resample_after(&p, 0.3, 1).is_err());
    }

    #[test]
    fn resampled_cells_match_fresh_path_with_that_seed() {
        let p = sample_path(&cfg(4)).unwrap();
        let fresh = sample_path(&cfg(99)).unwrap();
        let q = resample_after(&p, 0.5, 99).unwrap();
        for c in 32..128 {
            assert_eq!(q.increment(c), fresh.increment(c));
        }
    }

    #[test]
    fn accumulate_matches_fill() {
        let p = sample_path(&cfg(11)).unwrap();
        let mut acc = vec![0.0; 3];
        CellStream::new(11, 3, 1.0 / 64.0).accumulate(0, 40, &mut acc);
        let direct = p.brownian_increment(0.0, 40.0 / 64.0).unwrap();
        for (a, b) in acc.iter().zip(&direct) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn char_exact_values() {
        assert_eq!(char_exact(0.3, 0.3, &[1.0, 2.0], 1.7).unwrap().re, 1.0);
        let v = char_exact(0.0, 1.0, &[1.0], math::SQRT_2).unwrap();
        assert!((v.re - (-1.0f64).exp()).abs() < 1e-15);
        // scale 1 with the substitution t ↦ τ: E e^{iτW(h)} = e^{−τ²‖h‖²/2}
        let tau = 0.7;
        let h = [0.6, 0.8];
        let scaled: Vec<f64> = h.iter().map(|v| v * tau).collect();
        let v = char_exact(0.0, 1.0, &scaled, 1.0).unwrap();
        assert!((v.re - (-tau * tau / 2.0f64).exp()).abs() < 1e-15);
        assert!(char_exact(1.0, 0.0, &h, 1.0).is_err());
    }
}
