//! The semigroup `T_t` of Schur multipliers with symbols `e^{−t‖α_x−α_y‖²}`.

use alloc::format;
use alloc::vec::Vec;

use crate::kernels::Kernel;
use crate::math;
use crate::operators::{schur_apply, HSOperator};
use crate::space::{psi_from_embedding, Embedding};
use crate::{Error, Result, C64};

/// Semigroup generated by an embedding; caches `ψ(x,y) = ‖α_x − α_y‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurSemigroup {
    embedding: Embedding,
    psi: Kernel,
}

impl SchurSemigroup {
    pub fn new(embedding: Embedding) -> Self {
        let psi = psi_from_embedding(&embedding);
        SchurSemigroup { embedding, psi }
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    /// Real part of `ψ(x,y)`.
    pub fn psi_at(&self, x: usize, y: usize) -> f64 {
        self.psi.get(x, y).re
    }

    /// Symbol `φ_t = e^{−tψ}` of `T_t`; always recomputed from `ψ`.
    pub fn symbol_at(&self, t: f64) -> Result<Kernel> {
        check_time(t)?;
        Ok(self.psi.map(|z| C64::new(math::exp(-t * z.re), 0.0)))
    }

    /// `T_t(K_f)`.
    pub fn apply(&self, t: f64, f: &HSOperator) -> Result<HSOperator> {
        schur_apply(&self.symbol_at(t)?, f)
    }

    /// Symbol `ψ` of the generator `A`, where `T_t = e^{−tA}`.
    pub fn generator_symbol(&self) -> &Kernel {
        &self.psi
    }

    /// Smallest nonzero entry of `ψ`, if any.
    pub fn min_positive_psi(&self) -> Option<f64> {
        self.psi
            .values()
            .iter()
            .map(|z| z.re)
            .filter(|v| *v > 0.0)
            .min_by(f64::total_cmp)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("semigroup time must be finite and ≥ 0, got {t}")))
    }
}

/// Recovers `ψ` from samples `(t, φ_t)` via `ψ̂ = −log(φ_t)/t`.
///
/// Samples at `t = 0` carry no information and are skipped. Every sample must
/// be real and strictly positive; the per-sample estimates must agree within
/// `tol` and their mean is returned.
pub fn recover_generator(symbols: &[(f64, Kernel)], tol: f64) -> Result<Kernel> {
    let informative: Vec<&(f64, Kernel)> = symbols.iter().filter(|(t, _)| *t > 0.0).collect();
    let Some((_, first)) = informative.first().copied() else {
        return Err(Error::domain("need at least one symbol sampled at t > 0"));
    };
    let mut estimates = Vec::with_capacity(informative.len());
    for (t, phi) in informative.iter().map(|s| (s.0, &s.1)) {
        if !t.is_finite() {
            return Err(Error::domain("sample times must be finite"));
        }
        phi.check_space(first)?;
        if let Some(bad) = phi.values().iter().find(|z| !(z.re > 0.0) || z.im.abs() > tol) {
            return Err(Error::domain(format!(
                "symbol entry {bad} is not strictly positive; the real logarithm is undefined"
            )));
        }
        estimates.push(phi.map(|z| C64::new(-math::ln(z.re) / t, 0.0)));
    }
    let count = estimates.len() as f64;
    let mean = estimates[0].map_indexed(|x, y, _| {
        estimates.iter().map(|e| e.get(x, y)).sum::<C64>() / count
    });
    let max_deviation = estimates
        .iter()
        .map(|e| e.max_abs_diff(&mean))
        .fold(0.0, f64::max);
    if max_deviation > tol {
        return Err(Error::Inconsistent {
            max_deviation,
            tolerance: tol,
        });
    }
    Ok(mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::FiniteSpace;
    use alloc::vec;

    fn line() -> SchurSemigroup {
        let sp = FiniteSpace::uniform(2).unwrap();
        SchurSemigroup::new(Embedding::from_rows(sp, &[vec![0.0], vec![1.0]]).unwrap())
    }

    #[test]
    fn symbol_examples() {
        let sg = line();
        let s0 = sg.symbol_at(0.0).unwrap();
        assert!(s0.values().iter().all(|z| *z == C64::new(1.0, 0.0)));
        let half = sg.symbol_at(core::f64::consts::LN_2).unwrap();
        assert!((half.get(0, 1).re - 0.5).abs() < 1e-15);
        let one = sg.symbol_at(1.0).unwrap();
        assert!((one.get(0, 1).re - 0.367879441171442).abs() < 1e-12);
        assert_eq!(one.get(1, 1).re, 1.0);
        assert!(sg.symbol_at(-0.1).is_err());
        assert!(sg.symbol_at(f64::NAN).is_err());
    }

    #[test]
    fn apply_limits() {
        let sg = line();
        let f = HSOperator::new(Kernel::from_real_fn(sg.embedding().space().clone(), |x, y| {
            (1 + x + 2 * y) as f64
        }));
        assert_eq!(sg.apply(0.0, &f).unwrap(), f);
        let late = sg.apply(1e3, &f).unwrap();
        assert_eq!(late.get(0, 0), f.get(0, 0));
        assert_eq!(late.get(1, 1), f.get(1, 1));
        assert_eq!(late.get(0, 1).re, 0.0);
    }

    #[test]
    fn generator_examples() {
        let sp = FiniteSpace::uniform(3).unwrap();
        let flat = SchurSemigroup::new(Embedding::from_rows(sp, &[vec![1.0], vec![1.0], vec![1.0]]).unwrap());
        assert_eq!(flat.generator_symbol().max_abs(), 0.0);
        assert_eq!(line().generator_symbol().get(0, 1).re, 1.0);
        assert_eq!(flat.min_positive_psi(), None);
    }

    #[test]
    fn recover_examples() {
        let sg = line();
        let samples: Vec<(f64, Kernel)> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&t| (t, sg.symbol_at(t).unwrap()))
            .collect();
        let psi = recover_generator(&samples, 1e-10).unwrap();
        assert!(psi.max_abs_diff(sg.generator_symbol()) < 1e-12);

        let ones = Kernel::constant(sg.embedding().space().clone(), C64::new(1.0, 0.0));
        let flat = recover_generator(&[(0.3, ones.clone()), (3.0, ones.clone())], 1e-12).unwrap();
        assert_eq!(flat.max_abs(), 0.0);

        let mixed = vec![(1.0, sg.symbol_at(1.0).unwrap()), (2.0, ones.clone())];
        assert!(matches!(recover_generator(&mixed, 1e-6), Err(Error::Inconsistent { .. })));

        let neg = ones.map(|_| C64::new(-0.5, 0.0));
        assert!(matches!(recover_generator(&[(1.0, neg)], 1e-6), Err(Error::Domain(_))));
        assert!(recover_generator(&[(0.0, ones)], 1e-6).is_err());
    }
}
