//! Monte Carlo estimates of kernel-valued random variables.
//!
//! Samples are processed in fixed chunks of [`MC_CHUNK`] paths. Each chunk is
//! reduced with Welford's update and chunks are merged in index order, so the
//! result does not depend on how chunks are scheduled across workers.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::kernels::Kernel;
use crate::math;
use crate::operators::HSOperator;
use crate::space::FiniteSpace;
use crate::{CMatrix, RMatrix, Result, C64};

pub const MC_CHUNK: u64 = 4096;

/// Empirical mean of a kernel-valued estimator with entrywise standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct MCEstimate {
    pub mean: HSOperator,
    /// Root-sum-square of the real and imaginary standard errors.
    pub stderr: RMatrix,
    pub samples: u64,
}

/// Streaming mean/variance of the real and imaginary parts of each entry.
#[derive(Debug, Clone, PartialEq)]
pub struct McAccumulator {
    count: u64,
    mean: Vec<C64>,
    m2_re: Vec<f64>,
    m2_im: Vec<f64>,
}

impl McAccumulator {
    pub fn new(entries: usize) -> Self {
        McAccumulator {
            count: 0,
            mean: vec![C64::new(0.0, 0.0); entries],
            m2_re: vec![0.0; entries],
            m2_im: vec![0.0; entries],
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn push(&mut self, sample: impl IntoIterator<Item = C64>) {
        self.count += 1;
        let k = self.count as f64;
        for (i, z) in sample.into_iter().enumerate() {
            let d = z - self.mean[i];
            self.mean[i] += d / k;
            let d2 = z - self.mean[i];
            self.m2_re[i] += d.re * d2.re;
            self.m2_im[i] += d.im * d2.im;
        }
    }

    /// Chan et al. pairwise merge. Constant streams stay exact.
    pub fn merge(&mut self, other: &McAccumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            self.mean[i] += d * (nb / n);
            self.m2_re[i] += other.m2_re[i] + d.re * d.re * na * nb / n;
            self.m2_im[i] += other.m2_im[i] + d.im * d.im * na * nb / n;
        }
        self.count += other.count;
    }

    /// Mean and standard errors as an `n × n` estimate (row-major entries).
    pub fn finish(&self, space: Arc<FiniteSpace>) -> Result<MCEstimate> {
        let n = space.n();
        let mean = CMatrix::from_fn(n, n, |x, y| self.mean[x * n + y]);
        let denom = (self.count.max(2) - 1) as f64 * self.count.max(1) as f64;
        let stderr = RMatrix::from_fn(n, n, |x, y| {
            let i = x * n + y;
            math::sqrt((self.m2_re[i] + self.m2_im[i]) / denom)
        });
        Ok(MCEstimate {
            mean: HSOperator::new(Kernel::new(space, mean)?),
            stderr,
            samples: self.count,
        })
    }
}

/// A Monte Carlo estimator split into independent, deterministic chunks.
pub trait McSampler {
    fn samples(&self) -> u64;

    fn space(&self) -> &Arc<FiniteSpace>;

    /// Accumulates the samples with indices in `range`.
    fn run_range(&self, range: Range<u64>) -> Result<McAccumulator>;

    fn n_chunks(&self) -> usize {
        self.samples().div_ceil(MC_CHUNK) as usize
    }

    fn chunk(&self, index: usize) -> Result<McAccumulator> {
        let lo = index as u64 * MC_CHUNK;
        let hi = (lo + MC_CHUNK).min(self.samples());
        self.run_range(lo..hi)
    }

    /// Merges chunk results in index order.
    fn finish(&self, chunks: Vec<McAccumulator>) -> Result<MCEstimate> {
        let n = self.space().n();
        let mut total = McAccumulator::new(n * n);
        for c in &chunks {
            total.merge(c);
        }
        total.finish(self.space().clone())
    }

    fn run_sequential(&self) -> Result<MCEstimate> {
        let chunks = (0..self.n_chunks())
            .map(|i| self.chunk(i))
            .collect::<Result<Vec<_>>>()?;
        self.finish(chunks)
    }
}

/// Entrywise comparison of an estimate with a closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateSummary {
    pub entries: usize,
    pub passed: usize,
    pub max_abs_error: f64,
    /// Largest `|mean − exact| / stderr`; entries with zero spread count as 0
    /// when they agree to 1e−14 and as infinity otherwise.
    pub max_sigma_ratio: f64,
}

impl GateSummary {
    pub fn pass_fraction(&self) -> f64 {
        if self.entries == 0 {
            1.0
        } else {
            self.passed as f64 / self.entries as f64
        }
    }

    pub fn accumulate(&mut self, other: &GateSummary) {
        self.entries += other.entries;
        self.passed += other.passed;
        self.max_abs_error = self.max_abs_error.max(other.max_abs_error);
        self.max_sigma_ratio = self.max_sigma_ratio.max(other.max_sigma_ratio);
    }

    pub fn empty() -> Self {
        GateSummary {
            entries: 0,
            passed: 0,
            max_abs_error: 0.0,
            max_sigma_ratio: 0.0,
        }
    }
}

const ZERO_SPREAD_SLACK: f64 = 1e-14;

/// Counts entries with `|mean − exact| ≤ sigma_gate · stderr`.
pub fn sigma_gate(estimate: &MCEstimate, exact: &HSOperator, sigma_gate: f64) -> GateSummary {
    let mut summary = GateSummary::empty();
    let n = exact.n();
    for x in 0..n {
        for y in 0..n {
            let err = (estimate.mean.get(x, y) - exact.get(x, y)).norm();
            let se = estimate.stderr[(x, y)];
            let ratio = if se > 0.0 {
                err / se
            } else if err <= ZERO_SPREAD_SLACK * (1.0 + exact.get(x, y).norm()) {
                0.0
            } else {
                f64::INFINITY
            };
            summary.entries += 1;
            if ratio <= sigma_gate {
                summary.passed += 1;
            }
            summary.max_abs_error = summary.max_abs_error.max(err);
            summary.max_sigma_ratio = summary.max_sigma_ratio.max(ratio);
        }
    }
    summary
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_matches_two_pass() {
        let data = [1.0, 4.0, -2.0, 3.5, 0.25, 7.0];
        let mut acc = McAccumulator::new(1);
        for v in data {
            acc.push([C64::new(v, -v)]);
        }
        let mean = data.iter().sum::<f64>() / 6.0;
        let var = data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 5.0;
        let est = acc.finish(FiniteSpace::uniform(1).unwrap()).unwrap();
        assert!((est.mean.get(0, 0).re - mean).abs() < 1e-14);
        assert!((est.stderr[(0, 0)] - math::sqrt(2.0 * var / 6.0)).abs() < 1e-14);
    }

    #[test]
    fn merge_matches_single_stream() {
        let data: Vec<f64> = (0..37).map(|k| ((k * 7919) % 101) as f64 / 13.0).collect();
        let mut whole = McAccumulator::new(1);
        let mut a = McAccumulator::new(1);
        let mut b = McAccumulator::new(1);
        for (i, v) in data.iter().enumerate() {
            whole.push([C64::new(*v, 0.0)]);
            if i < 20 { a.push([C64::new(*v, 0.0)]) } else { b.push([C64::new(*v, 0.0)]) }
        }
        a.merge(&b);
        assert_eq!(a.count(), whole.count());
        assert!((a.mean[0] - whole.mean[0]).norm() < 1e-13);
        assert!((a.m2_re[0] - whole.m2_re[0]).abs() < 1e-11);
    }

    #[test]
    fn constant_stream_is_exact() {
        let mut a = McAccumulator::new(1);
        for _ in 0..1000 {
            a.push([C64::new(0.1, 0.3)]);
        }
        let mut b = a.clone();
        b.merge(&a);
        assert_eq!(b.mean[0], C64::new(0.1, 0.3));
        assert_eq!(b.m2_re[0], 0.0);
    }
}
