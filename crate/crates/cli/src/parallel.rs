//! Sequential or rayon-parallel execution of Monte Carlo samplers.
//!
//! Both modes evaluate the same fixed chunks and merge them in index order,
//! so their results are bitwise identical.

use rayon::prelude::*;
use schur_dilation::mc::{MCEstimate, McSampler};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    #[default]
    Sequential,
    Parallel,
}

impl Exec {
    pub fn run<S: McSampler + Sync>(self, sampler: &S) -> schur_dilation::Result<MCEstimate> {
        match self {
            Exec::Sequential => sampler.run_sequential(),
            Exec::Parallel => {
                let chunks = (0..sampler.n_chunks())
                    .into_par_iter()
                    .map(|i| sampler.chunk(i))
                    .collect::<schur_dilation::Result<Vec<_>>>()?;
                sampler.finish(chunks)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use schur_dilation::dilation::DilationSampler;
    use schur_dilation::gaussian::PathConfig;
    use schur_dilation::{Embedding, FiniteSpace, HSOperator, Kernel, SchurSemigroup, C64};

    #[test]
    fn parallel_equals_sequential() {
        let sp = FiniteSpace::new(vec![1.0, 0.5, 2.0]).unwrap();
        let emb = Embedding::from_rows(sp.clone(), &[vec![0.0], vec![0.7], vec![-0.4]]).unwrap();
        let f = HSOperator::new(Kernel::from_fn(sp, |x, y| C64::new(x as f64, y as f64)));
        let grid = PathConfig::new(0.125, 1.0, 1, 0).unwrap();
        let s = DilationSampler::new(&SchurSemigroup::new(emb), 1.0, &f, &grid, 10_000, 3).unwrap();
        assert_eq!(Exec::Sequential.run(&s).unwrap(), Exec::Parallel.run(&s).unwrap());
    }
}
