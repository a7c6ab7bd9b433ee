//! Reproducible random, lattice and clustered space descriptors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::descriptor::{EmbeddingDescriptor, SpaceDescriptor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Style {
    /// i.i.d. standard normal points.
    Random,
    /// The first `n` points of the integer lattice in lexicographic order.
    Grid,
    /// Two Gaussian blobs around `±2 e_1`.
    Clustered,
}

pub fn generate(n: usize, d: usize, seed: u64, style: Style) -> anyhow::Result<SpaceDescriptor> {
    if n == 0 || d == 0 {
        anyhow::bail!("n and d must be at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let points: Vec<Vec<f64>> = match style {
        Style::Random => (0..n).map(|_| (0..d).map(|_| normal()).collect()).collect(),
        Style::Grid => {
            let side = (1..).find(|s: &usize| s.checked_pow(d as u32).is_none_or(|v| v >= n)).unwrap();
            (0..n)
                .map(|k| {
                    let mut rest = k;
                    let mut p = vec![0.0; d];
                    for c in (0..d).rev() {
                        p[c] = (rest % side) as f64;
                        rest /= side;
                    }
                    p
                })
                .collect()
        }
        Style::Clustered => (0..n)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                (0..d)
                    .map(|c| if c == 0 { 2.0 * sign } else { 0.0 } + 0.3 * normal())
                    .collect()
            })
            .collect(),
    };
    Ok(SpaceDescriptor {
        weights: vec![1.0; n],
        labels: None,
        embedding: EmbeddingDescriptor { dim: d, points },
    })
}
