//! Finite weighted measure spaces and point embeddings into `R^d`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::kernels::Kernel;
use crate::{Error, RMatrix, Result, C64};

/// A finite set of atoms `0..n` carrying strictly positive masses `μ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace {
    weights: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl FiniteSpace {
    pub fn new(weights: Vec<f64>) -> Result<Arc<Self>> {
        Self::build(weights, None)
    }

    pub fn with_labels(weights: Vec<f64>, labels: Vec<String>) -> Result<Arc<Self>> {
        if labels.len() != weights.len() {
            return Err(Error::Dimension {
                expected: weights.len(),
                found: labels.len(),
            });
        }
        Self::build(weights, Some(labels))
    }

    /// `n` atoms of unit mass.
    pub fn uniform(n: usize) -> Result<Arc<Self>> {
        Self::new(alloc::vec![1.0; n])
    }

    fn build(weights: Vec<f64>, labels: Option<Vec<String>>) -> Result<Arc<Self>> {
        if weights.is_empty() {
            return Err(Error::InvalidSpace("a space needs at least one atom".into()));
        }
        if let Some((k, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::InvalidSpace(format!(
                "atom {k} has weight {w}; weights must be finite and strictly positive"
            )));
        }
        Ok(Arc::new(FiniteSpace { weights, labels }))
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len == self.n() {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: self.n(),
                found: len,
            })
        }
    }
}

/// Two space handles describe the same space.
pub(crate) fn same_space(a: &Arc<FiniteSpace>, b: &Arc<FiniteSpace>) -> bool {
    Arc::ptr_eq(a, b) || a.weights == b.weights
}

/// The map `x ↦ α_x ∈ R^d`; row `x` of `points` is `α_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    space: Arc<FiniteSpace>,
    points: RMatrix,
}

impl Embedding {
    pub fn new(space: Arc<FiniteSpace>, points: RMatrix) -> Result<Self> {
        space.check_len(points.nrows())?;
        if points.ncols() == 0 {
            return Err(Error::domain("embedding dimension must be at least 1"));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("embedding coordinates must be finite"));
        }
        Ok(Embedding { space, points })
    }

    /// Builds an embedding from one row per atom.
    pub fn from_rows(space: Arc<FiniteSpace>, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                found: bad.len(),
            });
        }
        let points = RMatrix::from_fn(rows.len(), dim, |r, c| rows[r][c]);
        Self::new(space, points)
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &RMatrix {
        &self.points
    }

    /// `α_x` as an owned vector.
    pub fn point(&self, x: usize) -> Vec<f64> {
        self.points.row(x).iter().copied().collect()
    }

    /// `α_x − α_y`.
    pub fn difference(&self, x: usize, y: usize) -> Vec<f64> {
        self.points
            .row(x)
            .iter()
            .zip(self.points.row(y).iter())
            .map(|(a, b)| a - b)
            .collect()
    }

    pub(crate) fn squared_distance(&self, x: usize, y: usize) -> f64 {
        self.points
            .row(x)
            .iter()
            .zip(self.points.row(y).iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

/// `Σ_k μ_k conj(ξ_k) η_k`, the inner product of `L²(X)`.
pub fn weighted_inner(xi: &[C64], eta: &[C64], sp: &FiniteSpace) -> Result<C64> {
    sp.check_len(xi.len())?;
    sp.check_len(eta.len())?;
    Ok(xi
        .iter()
        .zip(eta)
        .zip(sp.weights())
        .map(|((a, b), w)| a.conj() * b * *w)
        .sum())
}

/// `ψ(x,y) = ‖α_x − α_y‖²`.
pub fn psi_from_embedding(emb: &Embedding) -> Kernel {
    Kernel::from_real_fn(emb.space().clone(), |x, y| emb.squared_distance(x, y))
}

/// `φ(x,y) = ⟨α_x, α_y⟩`.
pub fn gram_from_embedding(emb: &Embedding) -> Kernel {
    let p = emb.points();
    Kernel::from_real_fn(emb.space().clone(), |x, y| p.row(x).dot(&p.row(y)))
}
