#![allow(dead_code)]

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schur_dilation::{Embedding, FiniteSpace, HSOperator, Kernel, SchurSemigroup, C64};
use std::sync::Arc;

pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }

    pub fn index(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }

    pub fn space(&mut self, n: usize) -> Arc<FiniteSpace> {
        FiniteSpace::new((0..n).map(|_| self.uniform(0.2, 2.0)).collect()).unwrap()
    }

    pub fn embedding(&mut self, n: usize, d: usize, scale: f64) -> Embedding {
        let sp = self.space(n);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| self.uniform(-scale, scale)).collect())
            .collect();
        Embedding::from_rows(sp, &rows).unwrap()
    }

    pub fn semigroup(&mut self, n: usize, d: usize) -> SchurSemigroup {
        SchurSemigroup::new(self.embedding(n, d, 1.0))
    }

    pub fn operator(&mut self, space: &Arc<FiniteSpace>) -> HSOperator {
        HSOperator::new(Kernel::from_fn(space.clone(), |_, _| {
            C64::new(self.uniform(-1.0, 1.0), self.uniform(-1.0, 1.0))
        }))
    }
}
