//! Functional calculus of the generator `A` (the Schur multiplier by `ψ`).
//!
//! Everything is represented by symbols: the resolvent `(λ−A)^{−1}` is the
//! multiplier by `1/(λ−ψ)`, and `f(A)` by `f∘ψ`. The contour route evaluates
//! the Cauchy integral over the boundary of a sector with the trapezoid rule
//! in the log-radius variable and is checked against the entrywise oracle.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::gaussian::standard_normal;
use crate::math::{self, PI};
use crate::operators::{adjoint, compose, schatten_norm, schur_apply, HSOperator};
use crate::semigroup::SchurSemigroup;
use crate::{Error, Kernel, Result, C64};

type Evaluator = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

/// A bounded analytic function on the sector `|arg z| < theta_max` with
/// `|f(z)| ≤ c |z|^s / (1+|z|)^{2s}`.
#[derive(Clone)]
pub struct SectorFunction {
    name: String,
    evaluator: Evaluator,
    theta_max: f64,
    decay: (f64, f64),
}

impl fmt::Debug for SectorFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SectorFunction")
            .field("name", &self.name)
            .field("theta_max", &self.theta_max)
            .field("decay", &self.decay)
            .finish()
    }
}

/// Names accepted by [`SectorFunction::builtin`].
pub const BUILTIN_FUNCTIONS: [&str; 3] = ["z/(1+z)^2", "e^{-z}-e^{-2z}", "z^{1/2}/(1+z)"];

// Sample points used to spot-check the decay bound: rays up to 7/8 of the
// analyticity angle, radii 1e-8..1e8.
fn decay_samples(theta_max: f64) -> impl Iterator<Item = C64> {
    let reach = 0.875 * theta_max;
    (-8..=8).flat_map(move |j| {
        let arg = reach * j as f64 / 8.0;
        (-64..=64).map(move |k| C64::from_polar(math::powf(10.0, k as f64 / 8.0), arg))
    })
}

fn decay_ratio(f: &Evaluator, s: f64, z: C64) -> f64 {
    let r = z.norm();
    f(z).norm() * math::powf(1.0 + r, 2.0 * s) / math::powf(r, s)
}

impl SectorFunction {
    /// Builds a sector function and spot-checks the stated decay bound.
    pub fn new(
        name: impl Into<String>,
        evaluator: impl Fn(C64) -> C64 + Send + Sync + 'static,
        theta_max: f64,
        s: f64,
        c: f64,
    ) -> Result<Self> {
        let evaluator: Evaluator = Arc::new(evaluator);
        if !(theta_max > 0.0 && theta_max <= PI) {
            return Err(Error::domain("sector angle must lie in (0, π]"));
        }
        if !(s > 0.0 && c > 0.0) {
            return Err(Error::domain("decay constants must be positive"));
        }
        for z in decay_samples(theta_max) {
            let ratio = decay_ratio(&evaluator, s, z);
            if !(ratio <= c) {
                return Err(Error::precondition(alloc::format!(
                    "decay bound fails at z = {z}: ratio {ratio:e} exceeds c = {c:e}"
                )));
            }
        }
        Ok(SectorFunction {
            name: name.into(),
            evaluator,
            theta_max,
            decay: (s, c),
        })
    }

    /// Like [`SectorFunction::new`], with `c` fitted to the sampled maximum.
    pub fn fitted(
        name: impl Into<String>,
        evaluator: impl Fn(C64) -> C64 + Send + Sync + 'static,
        theta_max: f64,
        s: f64,
    ) -> Result<Self> {
        let evaluator: Evaluator = Arc::new(evaluator);
        let mut c: f64 = 0.0;
        for z in decay_samples(theta_max) {
            let ratio = decay_ratio(&evaluator, s, z);
            if !ratio.is_finite() {
                return Err(Error::precondition("function is unbounded on the sector"));
            }
            c = c.max(ratio);
        }
        let ev = evaluator.clone();
        Self::new(name, move |z| ev(z), theta_max, s, 1.05 * c.max(f64::MIN_POSITIVE))
    }

    /// One of [`BUILTIN_FUNCTIONS`].
    pub fn builtin(name: &str) -> Result<Self> {
        let one = C64::new(1.0, 0.0);
        match name {
            "z/(1+z)^2" => Self::fitted(name, move |z| z / ((one + z) * (one + z)), PI, 1.0),
            "e^{-z}-e^{-2z}" => Self::fitted(name, |z| (-z).exp() - (-2.0 * z).exp(), PI / 2.0, 1.0),
            "z^{1/2}/(1+z)" => Self::fitted(name, move |z| z.sqrt() / (one + z), PI, 0.5),
            _ => Err(Error::domain(alloc::format!(
                "unknown function {name:?}; expected one of {BUILTIN_FUNCTIONS:?} or a rational spec"
            ))),
        }
    }

    /// The rational function `num(z)/den(z)`, coefficients in ascending order.
    ///
    /// The analyticity angle is the smallest argument of a pole, and the decay
    /// exponent is the smaller of the zero order at the origin and the degree gap.
    pub fn rational(num: &[f64], den: &[f64]) -> Result<Self> {
        let num = trim(num);
        let den = trim(den);
        if den.is_empty() {
            return Err(Error::domain("denominator is zero"));
        }
        if num.is_empty() {
            return Err(Error::domain("numerator is zero"));
        }
        if den[0] == 0.0 {
            return Err(Error::precondition("pole at the origin"));
        }
        let zero_order = num.iter().position(|v| *v != 0.0).unwrap_or(0);
        let gap = den.len() as i64 - num.len() as i64;
        let s = (zero_order as i64).min(gap);
        if s <= 0 {
            return Err(Error::precondition(
                "rational function must vanish at 0 and at ∞ to be in the decaying class",
            ));
        }
        let mut theta_max = PI;
        for root in poly_roots(&den) {
            theta_max = theta_max.min(root.arg().abs());
        }
        if theta_max <= 1e-12 {
            return Err(Error::precondition("pole on the positive real axis"));
        }
        let name = alloc::format!("rational:{}/{}", join(&num), join(&den));
        let (n2, d2) = (num.clone(), den.clone());
        Self::fitted(name, move |z| horner(&n2, z) / horner(&d2, z), theta_max, s as f64)
    }

    /// Parses a builtin name or `rational:<num>/<den>` with comma-separated
    /// ascending coefficients, e.g. `rational:0,1/1,2,1`.
    pub fn parse(spec: &str) -> Result<Self> {
        match spec.strip_prefix("rational:") {
            Some(rest) => {
                let (a, b) = rest
                    .split_once('/')
                    .ok_or_else(|| Error::domain("rational spec needs <num>/<den>"))?;
                Self::rational(&parse_coeffs(a)?, &parse_coeffs(b)?)
            }
            None => Self::builtin(spec),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    /// `(s, c)` of the decay bound.
    pub fn decay(&self) -> (f64, f64) {
        self.decay
    }

    pub fn eval(&self, z: C64) -> C64 {
        (self.evaluator)(z)
    }
}

fn trim(c: &[f64]) -> Vec<f64> {
    let len = c.iter().rposition(|v| *v != 0.0).map_or(0, |k| k + 1);
    c[..len].to_vec()
}

fn join(c: &[f64]) -> String {
    c.iter().map(|v| alloc::format!("{v}")).collect::<Vec<_>>().join(",")
}

fn parse_coeffs(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::domain(alloc::format!("bad coefficient {t:?}")))
        })
        .collect()
}

fn horner(c: &[f64], z: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, v| acc * z + v)
}

/// Roots from the eigenvalues of the companion matrix.
fn poly_roots(c: &[f64]) -> Vec<C64> {
    let deg = c.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[deg];
    let companion = DMatrix::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -c[deg - 1 - j] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    companion.complex_eigenvalues().iter().copied().collect()
}

/// Contour `λ = e^{u ± iθ}`, `u ∈ [−L, L]`, with `nodes` trapezoid nodes per ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourQuadrature {
    pub theta: f64,
    pub nodes: usize,
    pub truncation: f64,
}

impl Default for ContourQuadrature {
    fn default() -> Self {
        ContourQuadrature {
            theta: 0.75 * PI,
            nodes: 400,
            truncation: 30.0,
        }
    }
}

impl ContourQuadrature {
    pub fn new(theta: f64, nodes: usize, truncation: f64) -> Result<Self> {
        let q = ContourQuadrature {
            theta,
            nodes,
            truncation,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < PI) {
            return Err(Error::domain("contour angle must lie in (0, π)"));
        }
        if self.nodes < 2 {
            return Err(Error::domain("contour needs at least 2 nodes per ray"));
        }
        if !(self.truncation > 0.0 && self.truncation.is_finite()) {
            return Err(Error::domain("truncation must be positive"));
        }
        Ok(())
    }

    /// Nodes `u_k` and trapezoid weights.
    fn rule(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 2.0 * self.truncation / (self.nodes - 1) as f64;
        (0..self.nodes).map(move |k| {
            let w = if k == 0 || k + 1 == self.nodes { h / 2.0 } else { h };
            (-self.truncation + k as f64 * h, w)
        })
    }
}

const SPECTRAL_GAP: f64 = 1e-12;

/// Symbol of `(λ − A)^{−1}`: `1/(λ − ψ(x,y))`.
pub fn resolvent(sg: &SchurSemigroup, lambda: C64) -> Result<Kernel> {
    let psi = sg.generator_symbol();
    let mut closest = f64::INFINITY;
    for v in psi.values().iter() {
        closest = closest.min((lambda - v).norm());
    }
    if closest < SPECTRAL_GAP {
        return Err(Error::Singular {
            what: "resolvent",
            at: lambda,
            distance: closest,
            hint: "λ lies on the spectrum of the generator",
        });
    }
    Ok(psi.map(|v| (lambda - v).inv()))
}

/// Symbol of `f(A)`: `f(ψ(x,y))`, and 0 where `ψ(x,y) = 0`.
pub fn hinfty_oracle(sg: &SchurSemigroup, f: &SectorFunction) -> Kernel {
    sg.generator_symbol().map(|v| {
        if v.re == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            f.eval(v)
        }
    })
}

fn check_angle(f: &SectorFunction, theta: f64) -> Result<()> {
    if theta < f.theta_max {
        Ok(())
    } else {
        Err(Error::precondition(alloc::format!(
            "contour angle {theta} is not below the analyticity angle {} of {}",
            f.theta_max, f.name
        )))
    }
}

/// Symbol of `f(A)` from the Cauchy integral
/// `(1/2πi) ∮ f(λ) (λ − ψ)^{−1} dλ` over the two rays `e^{u ∓ iθ}`,
/// oriented to enclose the positive axis.
pub fn hinfty_contour(sg: &SchurSemigroup, f: &SectorFunction, quad: &ContourQuadrature) -> Result<Kernel> {
    quad.validate()?;
    check_angle(f, quad.theta)?;
    let nodes: Vec<(C64, C64, C64, C64, f64)> = quad
        .rule()
        .map(|(u, w)| {
            let lo = C64::from_polar(math::exp(u), -quad.theta);
            let hi = lo.conj();
            (lo, f.eval(lo), hi, f.eval(hi), w)
        })
        .collect();
    let psi = sg.generator_symbol();
    let n = psi.n();
    let mut out = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            let p = psi.get(x, y);
            let mut acc = C64::new(0.0, 0.0);
            for &(lo, flo, hi, fhi, w) in &nodes {
                for (lam, fl, sign) in [(lo, flo, 1.0), (hi, fhi, -1.0)] {
                    let gap = (lam - p).norm();
                    if gap < 1e-10 * lam.norm() {
                        return Err(Error::Singular {
                            what: "contour node",
                            at: lam,
                            distance: gap,
                            hint: "choose a different contour angle",
                        });
                    }
                    acc += fl * lam / (lam - p) * (sign * w);
                }
            }
            out.push(acc / C64::new(0.0, 2.0 * PI));
        }
    }
    Ok(Kernel::from_fn(psi.space().clone(), |x, y| out[x * n + y]))
}

/// Largest entrywise gap between the contour and oracle symbols.
pub fn contour_error(sg: &SchurSemigroup, f: &SectorFunction, quad: &ContourQuadrature) -> Result<f64> {
    Ok(hinfty_contour(sg, f, quad)?.max_abs_diff(&hinfty_oracle(sg, f)))
}

/// Empirical size of the calculus constant on `S^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HcalcReport {
    pub p: f64,
    pub trials: usize,
    /// `‖f‖_∞` sampled on a log-polar grid of the sector.
    pub sup_norm: f64,
    /// `max |f(ψ)|`, the exact multiplier norm on `S²`.
    pub symbol_max: f64,
    /// `max_g ‖f(A) g‖_p` over random `g` with `‖g‖_p = 1`.
    pub max_output: f64,
    /// `max_output / sup_norm`: an empirical lower bound, not a proven bound.
    pub empirical_ratio: f64,
    /// `symbol_max / sup_norm`.
    pub s2_ratio: f64,
}

fn sector_sup(sg: &SchurSemigroup, f: &SectorFunction, quad: &ContourQuadrature) -> f64 {
    let mut sup: f64 = 0.0;
    for j in -16..=16 {
        let arg = quad.theta * j as f64 / 16.0;
        for k in 0..=2000 {
            let u = -quad.truncation + 2.0 * quad.truncation * k as f64 / 2000.0;
            sup = sup.max(f.eval(C64::from_polar(math::exp(u), arg)).norm());
        }
    }
    for v in sg.generator_symbol().values().iter() {
        if v.re > 0.0 {
            sup = sup.max(f.eval(*v).norm());
        }
    }
    sup
}

/// Applies the multiplier `f(A)` to random unit-norm operators in `S^p`.
pub fn hcalc_bound_check(
    sg: &SchurSemigroup,
    f: &SectorFunction,
    quad: &ContourQuadrature,
    p: f64,
    n_trials: usize,
    seed: u64,
) -> Result<HcalcReport> {
    if !(p >= 1.0) {
        return Err(Error::domain("p must lie in [1, ∞]"));
    }
    quad.validate()?;
    check_angle(f, quad.theta)?;
    let symbol = hinfty_oracle(sg, f);
    let sup_norm = sector_sup(sg, f, quad);
    let symbol_max = symbol.max_abs();
    let space = symbol.space().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_output: f64 = 0.0;
    for _ in 0..n_trials {
        let g = HSOperator::new(Kernel::from_fn(space.clone(), |_, _| {
            C64::new(standard_normal(&mut rng), standard_normal(&mut rng))
        }));
        let norm = schatten_norm(&g, p)?;
        if norm == 0.0 {
            continue;
        }
        let g = HSOperator::new(g.kernel().map(|v| v / norm));
        max_output = max_output.max(schatten_norm(&schur_apply(&symbol, &g)?, p)?);
    }
    let ratio = |a: f64| if sup_norm > 0.0 { a / sup_norm } else { 0.0 };
    Ok(HcalcReport {
        p,
        trials: n_trials,
        sup_norm,
        symbol_max,
        max_output,
        empirical_ratio: ratio(max_output),
        s2_ratio: ratio(symbol_max),
    })
}

/// Column, row and combined BMO norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BmoNorms {
    pub col: f64,
    pub row: f64,
    pub bmo: f64,
}

/// The `t → ∞` limit of `T_t`: keeps the entries where `ψ = 0`.
fn limit_projection(sg: &SchurSemigroup, x: &HSOperator) -> HSOperator {
    x.map_kernel(|i, j, v| if sg.psi_at(i, j) == 0.0 { v } else { C64::new(0.0, 0.0) })
}

fn bmo_col(sg: &SchurSemigroup, x: &HSOperator, t_grid: &[f64]) -> Result<f64> {
    let term = |y: HSOperator, tt: &dyn Fn(&HSOperator) -> Result<HSOperator>| -> Result<f64> {
        let sq = compose(&adjoint(&y), &y)?;
        Ok(math::sqrt(schatten_norm(&tt(&sq)?, f64::INFINITY)?))
    };
    let mut best: f64 = 0.0;
    for &t in t_grid {
        let tx = sg.apply(t, x)?;
        let y = HSOperator::new(x.kernel().map_indexed(|i, j, v| v - tx.get(i, j)));
        best = best.max(term(y, &|z| sg.apply(t, z))?);
    }
    best = best.max(term(m0_project(sg, x), &|z| Ok(limit_projection(sg, z)))?);
    Ok(best)
}

/// `sup_t ‖T_t(|x − T_t x|²)‖^{1/2}` over the grid and `t → ∞`, for `x` and `x*`.
pub fn bmo_norms(sg: &SchurSemigroup, x: &HSOperator, t_grid: &[f64]) -> Result<BmoNorms> {
    if t_grid.is_empty() {
        return Err(Error::domain("time grid is empty"));
    }
    if t_grid.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::domain("time grid must be nonnegative"));
    }
    let col = bmo_col(sg, x, t_grid)?;
    let row = bmo_col(sg, &adjoint(x), t_grid)?;
    Ok(BmoNorms {
        col,
        row,
        bmo: col.max(row),
    })
}

/// Removes the `T_t`-invariant part: zeroes every entry with `ψ = 0`.
pub fn m0_project(sg: &SchurSemigroup, x: &HSOperator) -> HSOperator {
    x.map_kernel(|i, j, v| if sg.psi_at(i, j) == 0.0 { C64::new(0.0, 0.0) } else { v })
}

/// Data on the `S^p` norm against `BMO` and `S¹`; no bound is asserted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationReport {
    pub p: f64,
    pub schatten_p: f64,
    pub bmo: f64,
    pub schatten_1: f64,
    /// `‖x‖_p / (p · bmo^{1−1/p} · ‖x‖_1^{1/p})`, 0 when the denominator vanishes.
    pub ratio: f64,
}

pub fn interpolation_report(sg: &SchurSemigroup, x: &HSOperator, p: f64, t_grid: &[f64]) -> Result<InterpolationReport> {
    if !(p > 1.0 && p < f64::INFINITY) {
        return Err(Error::domain("p must lie in (1, ∞)"));
    }
    let x = m0_project(sg, x);
    let schatten_p = schatten_norm(&x, p)?;
    let schatten_1 = schatten_norm(&x, 1.0)?;
    let bmo = bmo_norms(sg, &x, t_grid)?.bmo;
    let denom = p * math::powf(bmo, 1.0 - 1.0 / p) * math::powf(schatten_1, 1.0 / p);
    Ok(InterpolationReport {
        p,
        schatten_p,
        bmo,
        schatten_1,
        ratio: if denom > 0.0 { schatten_p / denom } else { 0.0 },
    })
}

/// Short label for reports.
pub fn describe(f: &SectorFunction) -> String {
    f.name.to_string()
}
