//! Finite partitions of the space and the associated compression maps.
//!
//! For a partition `α = (A_1, …, A_m)` with masses `M_k = μ(A_k)`:
//! `P_α` averages a function over blocks, `J_α` embeds `ℓ²_m` isometrically,
//! `Ψ_α` compresses an operator to an `m × m` matrix and `Φ_α` lifts one back.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::operators::{compose, schatten_norm, HSOperator};
use crate::space::{same_space, FiniteSpace};
use crate::{CMatrix, Error, Kernel, Result, C64};

/// Disjoint nonempty blocks covering `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    space: Arc<FiniteSpace>,
    blocks: Vec<Vec<usize>>,
    block_masses: Vec<f64>,
    block_of: Vec<usize>,
}

impl Partition {
    pub fn new(space: Arc<FiniteSpace>, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n = space.n();
        let mut block_of = vec![usize::MAX; n];
        for (k, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidSpace(alloc::format!("block {k} is empty")));
            }
            for &x in block {
                if x >= n {
                    return Err(Error::InvalidSpace(alloc::format!("index {x} out of range for {n} atoms")));
                }
                if block_of[x] != usize::MAX {
                    return Err(Error::InvalidSpace(alloc::format!("index {x} appears in two blocks")));
                }
                block_of[x] = k;
            }
        }
        if let Some(x) = block_of.iter().position(|&k| k == usize::MAX) {
            return Err(Error::InvalidSpace(alloc::format!("index {x} is not covered")));
        }
        let block_masses = blocks
            .iter()
            .map(|b| b.iter().map(|&x| space.weight(x)).sum())
            .collect();
        Ok(Partition {
            space,
            blocks,
            block_masses,
            block_of,
        })
    }

    /// The finest partition, one atom per block.
    pub fn singletons(space: Arc<FiniteSpace>) -> Self {
        let blocks = (0..space.n()).map(|x| vec![x]).collect();
        Partition::new(space, blocks).expect("singletons form a partition")
    }

    /// The trivial partition with a single block.
    pub fn single_block(space: Arc<FiniteSpace>) -> Self {
        let blocks = vec![(0..space.n()).collect()];
        Partition::new(space, blocks).expect("one block covers the space")
    }

    /// Consecutive runs of `size` atoms (the last block may be shorter).
    pub fn contiguous(space: Arc<FiniteSpace>, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::domain("block size must be positive"));
        }
        let idx: Vec<usize> = (0..space.n()).collect();
        let blocks = idx.chunks(size).map(<[usize]>::to_vec).collect();
        Partition::new(space, blocks)
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_masses(&self) -> &[f64] {
        &self.block_masses
    }

    /// Index of the block containing atom `x`.
    pub fn block_of(&self, x: usize) -> usize {
        self.block_of[x]
    }

    /// True if every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        same_space(&self.space, &coarser.space)
            && self
                .blocks
                .iter()
                .all(|b| b.iter().all(|&x| coarser.block_of[x] == coarser.block_of[b[0]]))
    }

    fn check_space(&self, other: &Arc<FiniteSpace>) -> Result<()> {
        if same_space(&self.space, other) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    fn check_small(&self, len: usize) -> Result<()> {
        if len == self.n_blocks() {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: self.n_blocks(),
                found: len,
            })
        }
    }
}

/// `P_α ξ`: component `k` is `μ(A_k)^{−1/2} Σ_{x∈A_k} ξ_x μ_x`.
pub fn p_alpha(part: &Partition, xi: &[C64]) -> Result<Vec<C64>> {
    part.space.check_len(xi.len())?;
    let mut out = vec![C64::new(0.0, 0.0); part.n_blocks()];
    for (x, v) in xi.iter().enumerate() {
        out[part.block_of[x]] += v * part.space.weight(x);
    }
    for (o, m) in out.iter_mut().zip(&part.block_masses) {
        *o /= math::sqrt(*m);
    }
    Ok(out)
}

/// `J_α c`: equal to `c_k / √μ(A_k)` on `A_k`.
pub fn j_alpha(part: &Partition, c: &[C64]) -> Result<Vec<C64>> {
    part.check_small(c.len())?;
    Ok((0..part.space.n())
        .map(|x| {
            let k = part.block_of[x];
            c[k] / math::sqrt(part.block_masses[k])
        })
        .collect())
}

/// `Ψ_α(z)`: entry `(i,j)` is `(μ(A_i)μ(A_j))^{−1/2} Σ_{x∈A_i} (K_z 1_{A_j})(x) μ_x`.
pub fn psi_alpha_map(part: &Partition, z: &HSOperator) -> Result<CMatrix> {
    part.check_space(z.space())?;
    let m = part.n_blocks();
    let mut out = CMatrix::zeros(m, m);
    let w = part.space.weights();
    for x in 0..z.n() {
        for y in 0..z.n() {
            out[(part.block_of[x], part.block_of[y])] += z.get(x, y) * (w[x] * w[y]);
        }
    }
    for i in 0..m {
        for j in 0..m {
            out[(i, j)] /= math::sqrt(part.block_masses[i] * part.block_masses[j]);
        }
    }
    Ok(out)
}

/// `Φ_α(m)`: kernel `m_ij / √(μ(A_i)μ(A_j))` on `A_i × A_j`.
pub fn phi_alpha_map(part: &Partition, m: &CMatrix) -> Result<HSOperator> {
    part.check_small(m.nrows())?;
    part.check_small(m.ncols())?;
    let mass = &part.block_masses;
    Ok(HSOperator::new(Kernel::from_fn(part.space.clone(), |x, y| {
        let (i, j) = (part.block_of[x], part.block_of[y]);
        m[(i, j)] / math::sqrt(mass[i] * mass[j])
    })))
}

/// The compressed symbol `φ_α(i,j) = (μ(A_i)μ(A_j))^{−1} Σ_{A_i×A_j} φ μ⊗μ`,
/// so that `Ψ_α M_φ Φ_α` is the Schur multiplier by `φ_α`.
pub fn compress_symbol(phi: &Kernel, part: &Partition) -> Result<CMatrix> {
    part.check_space(phi.space())?;
    let m = part.n_blocks();
    let mut out = CMatrix::zeros(m, m);
    let w = part.space.weights();
    // Relative weights keep singleton blocks exact.
    let rel: Vec<f64> = (0..phi.n())
        .map(|x| w[x] / part.block_masses[part.block_of[x]])
        .collect();
    for x in 0..phi.n() {
        for y in 0..phi.n() {
            out[(part.block_of[x], part.block_of[y])] += phi.get(x, y) * (rel[x] * rel[y]);
        }
    }
    Ok(out)
}

/// The block-constant lift `E_α(φ)(x,y) = φ_α(i,j)` for `x ∈ A_i`, `y ∈ A_j`.
pub fn e_alpha_symbol(phi: &Kernel, part: &Partition) -> Result<Kernel> {
    let small = compress_symbol(phi, part)?;
    Ok(Kernel::from_fn(part.space.clone(), |x, y| {
        small[(part.block_of[x], part.block_of[y])]
    }))
}

/// Errors along a refinement chain, one entry per partition.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementReport {
    /// Largest `|⟨E_α(φ) − φ, probe⟩|` over the probes.
    pub pairing_errors: Vec<f64>,
    /// Largest `‖Φ_α(I) K_probe − K_probe‖₂` over the probes.
    pub projection_errors: Vec<f64>,
    pub pairing_monotone: bool,
    pub projection_monotone: bool,
    /// Both errors vanish (within slack) at the last partition.
    pub reaches_zero: bool,
}

impl RefinementReport {
    pub fn passed(&self) -> bool {
        self.pairing_monotone && self.projection_monotone && self.reaches_zero
    }
}

/// Slack for the monotonicity and terminal-zero checks.
pub const REFINEMENT_SLACK: f64 = 1e-12;

/// Weighted pairing `Σ f(x,y) g(x,y) μ_x μ_y`.
fn weighted_pairing(f: &Kernel, g: &Kernel) -> C64 {
    let w = f.space().weights();
    let mut acc = C64::new(0.0, 0.0);
    for x in 0..f.n() {
        for y in 0..f.n() {
            acc += f.get(x, y) * g.get(x, y) * (w[x] * w[y]);
        }
    }
    acc
}

/// Tracks `E_α(φ) → φ` and `Φ_α(I) → I` along a nested chain of partitions.
pub fn refinement_convergence(phi: &Kernel, chain: &[Partition], probes: &[Kernel]) -> Result<RefinementReport> {
    for pair in chain.windows(2) {
        if !pair[1].refines(&pair[0]) {
            return Err(Error::precondition("partition chain is not nested"));
        }
    }
    for part in chain {
        part.check_space(phi.space())?;
    }
    for p in probes {
        phi.check_space(p)?;
    }
    let mut pairing_errors = Vec::with_capacity(chain.len());
    let mut projection_errors = Vec::with_capacity(chain.len());
    for part in chain {
        let diff = e_alpha_symbol(phi, part)?.map_indexed(|x, y, v| v - phi.get(x, y));
        let proj = phi_alpha_map(part, &CMatrix::identity(part.n_blocks(), part.n_blocks()))?;
        let mut pe: f64 = 0.0;
        let mut qe: f64 = 0.0;
        for probe in probes {
            pe = pe.max(weighted_pairing(&diff, probe).norm());
            let k = HSOperator::new(probe.clone());
            let moved = compose(&proj, &k)?;
            let resid = HSOperator::new(moved.kernel().map_indexed(|x, y, v| v - k.get(x, y)));
            qe = qe.max(schatten_norm(&resid, 2.0)?);
        }
        pairing_errors.push(pe);
        projection_errors.push(qe);
    }
    let monotone = |v: &[f64]| v.windows(2).all(|w| w[1] <= w[0] + REFINEMENT_SLACK);
    let reaches_zero = match (pairing_errors.last(), projection_errors.last()) {
        (Some(a), Some(b)) => *a <= REFINEMENT_SLACK && *b <= REFINEMENT_SLACK,
        _ => true,
    };
    Ok(RefinementReport {
        pairing_monotone: monotone(&pairing_errors),
        projection_monotone: monotone(&projection_errors),
        reaches_zero,
        pairing_errors,
        projection_errors,
    })
}

/// Describes a partition as `{0,1}{2}…` for diagnostics.
pub fn describe(part: &Partition) -> String {
    let mut s = String::new();
    for b in &part.blocks {
        s.push('{');
        for (i, x) in b.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&alloc::format!("{x}"));
        }
        s.push('}');
    }
    s
}
