//! The verification suites behind `verify`; each suite yields one record.

use anyhow::{Context, Result};
use schur_dilation::calculus::{bmo_norms, contour_error, hcalc_bound_check};
use schur_dilation::dilation::{dilate_exact, group_law_check, DilationSampler};
use schur_dilation::gaussian::{derive_seed, sample_path, GaussianGridPath};
use schur_dilation::kernels::{embed_ndk, is_negative_definite, is_positive_definite, schoenberg_check};
use schur_dilation::markov::{
    cond_exp_exact, cond_exp_reversed_exact, verify_reversed, verify_standard, CondExpSampler,
};
use schur_dilation::mc::{sigma_gate, GateSummary};
use schur_dilation::operators::{adjoint, schatten_norm, schur_apply};
use schur_dilation::partition::{
    compress_symbol, e_alpha_symbol, phi_alpha_map, psi_alpha_map, refinement_convergence, Partition,
};
use schur_dilation::space::psi_from_embedding;
use schur_dilation::{CMatrix, Embedding, HSOperator, Kernel, SchurSemigroup, C64};

use crate::config::{MarkovMode, RunConfig, Suite};
use crate::descriptor::kernel_from_json;
use crate::parallel::Exec;
use crate::report::Record;

/// Tolerance for definiteness decisions and the embedding roundtrip.
pub const KERNEL_TOL: f64 = 1e-10;

/// Seed offsets for the single reference paths, kept apart from the
/// per-sample seeds `derive_seed(root, k)` with small `k`.
const MARKOV_PATH: u64 = u64::MAX;
const GROUP_PATH: u64 = u64::MAX - 1;

/// A validated configuration with its space, semigroup and test operator.
pub struct Checks {
    pub cfg: RunConfig,
    pub emb: Embedding,
    pub sg: SchurSemigroup,
    pub f: HSOperator,
    pub exec: Exec,
}

/// Deterministic default test operator.
pub fn default_operator(emb: &Embedding) -> HSOperator {
    HSOperator::new(Kernel::from_fn(emb.space().clone(), |x, y| {
        let (a, b) = (x as f64, y as f64);
        C64::new((1.0 + a + 2.0 * b).cos(), (a - 0.5 * b).sin())
    }))
}

impl Checks {
    pub fn new(cfg: RunConfig, exec: Exec) -> Result<Self> {
        cfg.validate()?;
        let emb = cfg.embedding()?;
        let f = match &cfg.operator {
            Some(rows) => HSOperator::new(kernel_from_json(emb.space(), rows).context("operator")?),
            None => default_operator(&emb),
        };
        Ok(Checks {
            sg: SchurSemigroup::new(emb.clone()),
            cfg,
            emb,
            f,
            exec,
        })
    }

    fn path(&self, which: u64) -> Result<GaussianGridPath> {
        let seed = derive_seed(self.cfg.mc.root_seed, which);
        Ok(sample_path(&self.cfg.path_config(self.emb.dim(), seed)?)?)
    }

    fn base(&self, suite: Suite, metric_name: &str, metric: f64, threshold: f64, pass: bool) -> Record {
        let g = &self.cfg.grid;
        Record::new(suite.name(), metric, threshold, pass)
            .with("metric_name", metric_name)
            .with("n_atoms", self.emb.space().n())
            .with("dim", self.emb.dim())
            .with("step", g.step)
            .with("horizon", g.horizon)
    }

    pub fn run(&self, suite: Suite) -> Result<Vec<Record>> {
        suite
            .expand()
            .into_iter()
            .map(|s| self.run_one(s).with_context(|| format!("{} suite", s.name())))
            .collect()
    }

    fn run_one(&self, suite: Suite) -> Result<Record> {
        match suite {
            Suite::Dilation => self.dilation(),
            Suite::Markov => self.markov(),
            Suite::Group => self.group(),
            Suite::Schoenberg => self.schoenberg(),
            Suite::Partition => self.partition(),
            Suite::Calculus => self.calculus(),
            Suite::Bmo => self.bmo(),
            Suite::All => unreachable!("expanded above"),
        }
    }

    fn dilation(&self) -> Result<Record> {
        let tol = &self.cfg.tolerances;
        let mc = &self.cfg.mc;
        let grid = self.cfg.path_config(self.emb.dim(), 0)?;
        let mut exact_dev: f64 = 0.0;
        let mut gate = GateSummary::empty();
        for &t in &self.cfg.grid.t_values {
            let exact = dilate_exact(&self.sg, t, &self.f)?;
            exact_dev = exact_dev.max(exact.max_abs_diff(&self.sg.apply(t, &self.f)?));
            let sampler = DilationSampler::new(&self.sg, t, &self.f, &grid, mc.samples, mc.root_seed)?;
            let est = self.exec.run(&sampler)?;
            gate.accumulate(&sigma_gate(&est, &exact, tol.sigma_gate));
        }
        let frac = gate.pass_fraction();
        let pass = exact_dev <= tol.exact && frac >= tol.pass_fraction;
        Ok(self
            .base(Suite::Dilation, "mc_pass_fraction", frac, tol.pass_fraction, pass)
            .with("t", &self.cfg.grid.t_values)
            .with("n_samples", mc.samples)
            .with("root_seed", mc.root_seed)
            .with("sigma_gate", tol.sigma_gate)
            .with("max_abs_error", gate.max_abs_error)
            .with("max_sigma_ratio", gate.max_sigma_ratio)
            .with("max_exact_deviation", exact_dev)
            .with("exact_tolerance", tol.exact))
    }

    fn markov(&self) -> Result<Record> {
        let tol = &self.cfg.tolerances;
        let mc = &self.cfg.mc;
        let path = self.path(MARKOV_PATH)?;
        let ts = &self.cfg.grid.t_values;
        let mut exact_dev: f64 = 0.0;
        let mut gate = GateSummary::empty();
        let mut pairs = Vec::new();
        for &s in ts {
            for &t in ts.iter().filter(|t| **t >= s) {
                pairs.push((s, t));
                let (dev, sampler, exact) = match self.cfg.mode {
                    MarkovMode::Standard => (
                        verify_standard(&self.sg, &path, s, t, &self.f, None)?.exact_deviation,
                        CondExpSampler::standard(&path, &self.emb, s, t, &self.f, mc.samples, mc.root_seed)?,
                        cond_exp_exact(&path, &self.emb, s, t, &self.f)?.operator(),
                    ),
                    MarkovMode::Reversed => (
                        verify_reversed(&self.sg, &path, s, t, &self.f, None)?.exact_deviation,
                        CondExpSampler::reversed(&path, &self.emb, s, t, &self.f, mc.samples, mc.root_seed)?,
                        cond_exp_reversed_exact(&path, &self.emb, s, t, &self.f)?.operator(),
                    ),
                };
                exact_dev = exact_dev.max(dev);
                let est = self.exec.run(&sampler)?;
                gate.accumulate(&sigma_gate(&est, &exact, tol.sigma_gate));
            }
        }
        let frac = gate.pass_fraction();
        let pass = exact_dev <= tol.exact && frac >= tol.pass_fraction;
        Ok(self
            .base(Suite::Markov, "max_exact_deviation", exact_dev, tol.exact, pass)
            .with("mode", self.cfg.mode)
            .with("pairs", &pairs)
            .with("path_seed", derive_seed(mc.root_seed, MARKOV_PATH))
            .with("n_samples", mc.samples)
            .with("root_seed", mc.root_seed)
            .with("sigma_gate", tol.sigma_gate)
            .with("mc_pass_fraction", frac)
            .with("mc_pass_threshold", tol.pass_fraction)
            .with("max_abs_error", gate.max_abs_error)
            .with("max_sigma_ratio", gate.max_sigma_ratio))
    }

    fn group(&self) -> Result<Record> {
        let tol = self.cfg.tolerances.exact;
        let horizon = self.cfg.grid.horizon;
        let path = self.path(GROUP_PATH)?;
        let mut times: Vec<f64> = self.cfg.grid.t_values.iter().flat_map(|t| [-*t, *t]).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let mut worst: f64 = 0.0;
        let mut pairs = Vec::new();
        for &t in &times {
            for &tp in &times {
                if (t + tp).abs() > horizon {
                    continue;
                }
                pairs.push((t, tp));
                worst = worst.max(group_law_check(&path, &self.emb, t, tp, &self.f)?);
            }
        }
        Ok(self
            .base(Suite::Group, "max_deviation", worst, tol, worst <= tol)
            .with("pairs", &pairs)
            .with("path_seed", derive_seed(self.cfg.mc.root_seed, GROUP_PATH)))
    }

    fn schoenberg(&self) -> Result<Record> {
        let psi = self.sg.generator_symbol();
        let grid: Vec<f64> = (-6..=6).map(|k| 10f64.powf(k as f64 / 2.0)).collect();
        let nd = is_negative_definite(psi, KERNEL_TOL);
        let sch = schoenberg_check(psi, &grid, KERNEL_TOL);
        let back = embed_ndk(psi, 0, KERNEL_TOL)?;
        let roundtrip = psi_from_embedding(&back).max_abs_diff(psi);
        let agree = nd.verdict == sch.all_positive();
        let pass = agree && nd.verdict && roundtrip <= KERNEL_TOL;
        Ok(self
            .base(Suite::Schoenberg, "embedding_roundtrip_error", roundtrip, KERNEL_TOL, pass)
            .with("t_grid", &grid)
            .with("negative_definite", nd.verdict)
            .with("all_exponentials_positive", sch.all_positive())
            .with("min_eigenvalue_nd", nd.min_eigenvalue)
            .with("recovered_dim", back.dim()))
    }

    fn partition(&self) -> Result<Record> {
        let tol = self.cfg.tolerances.exact;
        let sp = self.emb.space().clone();
        let n = sp.n();
        let t = *self.cfg.grid.t_values.last().expect("validated nonempty");
        let phi = self.sg.symbol_at(t)?;
        let mut sizes = vec![n];
        while *sizes.last().unwrap() > 1 {
            let s = sizes.last().unwrap().div_ceil(2);
            sizes.push(s);
        }
        let chain = sizes
            .iter()
            .map(|&s| Partition::contiguous(sp.clone(), s))
            .collect::<schur_dilation::Result<Vec<_>>>()?;
        let rep = refinement_convergence(&phi, &chain, &[phi.map(|v| v.conj())])?;
        let mut compression: f64 = 0.0;
        let mut psd = true;
        for part in &chain {
            let m = part.n_blocks();
            let small = CMatrix::from_fn(m, m, |i, j| C64::new((i + 2 * j) as f64 * 0.3, i as f64 - j as f64));
            let lhs = psi_alpha_map(part, &schur_apply(&phi, &phi_alpha_map(part, &small)?)?)?;
            let rhs = compress_symbol(&phi, part)?.component_mul(&small);
            compression = compression.max((lhs - rhs).camax());
            psd &= is_positive_definite(&e_alpha_symbol(&phi, part)?, KERNEL_TOL).verdict;
        }
        let pass = compression <= tol && psd && rep.passed();
        Ok(self
            .base(Suite::Partition, "compression_deviation", compression, tol, pass)
            .with("t", t)
            .with("block_sizes", &sizes)
            .with("e_alpha_psd", psd)
            .with("pairing_errors", &rep.pairing_errors)
            .with("projection_errors", &rep.projection_errors)
            .with("monotone", rep.pairing_monotone && rep.projection_monotone)
            .with("reaches_zero", rep.reaches_zero))
    }

    fn calculus(&self) -> Result<Record> {
        let tol = self.cfg.tolerances.calculus;
        let f = self.cfg.sector_function()?;
        let q = self.cfg.quadrature()?;
        let err = contour_error(&self.sg, &f, &q)?;
        let s2 = hcalc_bound_check(&self.sg, &f, &q, 2.0, 0, 0)?.s2_ratio;
        Ok(self
            .base(Suite::Calculus, "max_err_vs_oracle", err, tol, err <= tol && s2 <= 1.0)
            .with("function", f.name())
            .with("theta", q.theta)
            .with("nodes", q.nodes)
            .with("L", q.truncation)
            .with("s2_ratio", s2))
    }

    fn bmo(&self) -> Result<Record> {
        let ts = &self.cfg.grid.t_values;
        let b = bmo_norms(&self.sg, &self.f, ts)?;
        let swapped = bmo_norms(&self.sg, &adjoint(&self.f), ts)?;
        let op = schatten_norm(&self.f, f64::INFINITY)?;
        let ratio = if op > 0.0 { b.bmo / op } else { 0.0 };
        let symmetric = b.col == swapped.row && b.row == swapped.col;
        Ok(self
            .base(Suite::Bmo, "bmo_over_operator_norm", ratio, 2.0, ratio <= 2.0 && symmetric)
            .with("t_grid", ts)
            .with("col", b.col)
            .with("row", b.row)
            .with("bmo", b.bmo)
            .with("operator_norm", op)
            .with("swap_symmetric", symmetric))
    }
}
