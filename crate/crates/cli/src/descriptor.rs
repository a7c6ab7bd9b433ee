//! JSON file formats for spaces, kernels, operators, partitions and path grids.

use std::sync::Arc;

use anyhow::{bail, Context, Result};
use schur_dilation::gaussian::PathConfig;
use schur_dilation::partition::Partition;
use schur_dilation::{Embedding, FiniteSpace, HSOperator, Kernel, RMatrix, C64};
use serde::{Deserialize, Serialize};

/// `{"weights": [...], "labels": [...], "embedding": {"dim": d, "points": [[...], ...]}}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDescriptor {
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub embedding: EmbeddingDescriptor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingDescriptor {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
}

impl SpaceDescriptor {
    pub fn build(&self) -> Result<Embedding> {
        let space = match &self.labels {
            Some(l) => FiniteSpace::with_labels(self.weights.clone(), l.clone()),
            None => FiniteSpace::new(self.weights.clone()),
        }
        .context("weights")?;
        if self.embedding.points.len() != space.n() {
            bail!(
                "embedding.points: {} points for {} weights",
                self.embedding.points.len(),
                space.n()
            );
        }
        if self.embedding.dim == 0 {
            bail!("embedding.dim: must be at least 1");
        }
        for (k, p) in self.embedding.points.iter().enumerate() {
            if p.len() != self.embedding.dim {
                bail!("embedding.points[{k}]: {} coordinates, expected {}", p.len(), self.embedding.dim);
            }
        }
        Ok(Embedding::from_rows(space, &self.embedding.points)?)
    }

    pub fn from_embedding(emb: &Embedding) -> Self {
        let sp = emb.space();
        SpaceDescriptor {
            weights: sp.weights().to_vec(),
            labels: sp.labels().map(<[String]>::to_vec),
            embedding: EmbeddingDescriptor {
                dim: emb.dim(),
                points: (0..sp.n()).map(|x| emb.point(x)).collect(),
            },
        }
    }
}

/// A kernel entry: a plain number or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Entry> for C64 {
    fn from(e: Entry) -> C64 {
        match e {
            Entry::Real(r) => C64::new(r, 0.0),
            Entry::Complex([re, im]) => C64::new(re, im),
        }
    }
}

/// Kernels as `n × n` arrays of `[re, im]` pairs.
pub fn kernel_to_json(k: &Kernel) -> Vec<Vec<Entry>> {
    (0..k.n())
        .map(|x| {
            (0..k.n())
                .map(|y| {
                    let v = k.get(x, y);
                    Entry::Complex([v.re, v.im])
                })
                .collect()
        })
        .collect()
}

pub fn kernel_from_json(space: &Arc<FiniteSpace>, rows: &[Vec<Entry>]) -> Result<Kernel> {
    let n = space.n();
    if rows.len() != n {
        bail!("kernel: {} rows for {n} atoms", rows.len());
    }
    for (k, r) in rows.iter().enumerate() {
        if r.len() != n {
            bail!("kernel[{k}]: {} entries for {n} atoms", r.len());
        }
    }
    Ok(Kernel::from_fn(space.clone(), |x, y| rows[x][y].into()))
}

/// `{"space": ..., "kernel": [[...]]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDescriptor {
    pub space: SpaceDescriptor,
    pub kernel: Vec<Vec<Entry>>,
}

impl OperatorDescriptor {
    pub fn build(&self) -> Result<(Embedding, HSOperator)> {
        let emb = self.space.build().context("space")?;
        let k = kernel_from_json(emb.space(), &self.kernel)?;
        Ok((emb, HSOperator::new(k)))
    }

    pub fn from_operator(emb: &Embedding, f: &HSOperator) -> Self {
        OperatorDescriptor {
            space: SpaceDescriptor::from_embedding(emb),
            kernel: kernel_to_json(f.kernel()),
        }
    }
}

/// `{"blocks": [[indices], ...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionDescriptor {
    pub blocks: Vec<Vec<usize>>,
}

impl PartitionDescriptor {
    pub fn build(&self, space: &Arc<FiniteSpace>) -> Result<Partition> {
        Ok(Partition::new(space.clone(), self.blocks.clone())?)
    }

    pub fn from_partition(p: &Partition) -> Self {
        PartitionDescriptor {
            blocks: p.blocks().to_vec(),
        }
    }
}

/// `{"step": Δ, "horizon": T, "dim": d, "seed": s}`; paths themselves are
/// regenerated from the seed, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfigDescriptor {
    pub step: f64,
    pub horizon: f64,
    pub dim: usize,
    pub seed: u64,
}

impl PathConfigDescriptor {
    pub fn build(&self) -> Result<PathConfig> {
        Ok(PathConfig::new(self.step, self.horizon, self.dim, self.seed)?)
    }
}

impl From<&PathConfig> for PathConfigDescriptor {
    fn from(c: &PathConfig) -> Self {
        PathConfigDescriptor {
            step: c.step,
            horizon: c.horizon,
            dim: c.dim,
            seed: c.seed,
        }
    }
}

/// `{"t": ..., "symbol": [[...]]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolRecord {
    pub t: f64,
    pub symbol: Vec<Vec<Entry>>,
}

impl SymbolRecord {
    pub fn from_kernel(t: f64, k: &Kernel) -> Self {
        SymbolRecord {
            t,
            symbol: kernel_to_json(k),
        }
    }
}

/// Real part of a kernel as a dense matrix, for reports.
pub fn real_part(k: &Kernel) -> RMatrix {
    k.values().map(|v| v.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_roundtrip() {
        let text = r#"{"weights": [1.0, 2.0], "labels": ["a", "b"], "embedding": {"dim": 1, "points": [[0.0], [1.5]]}}"#;
        let d: SpaceDescriptor = serde_json::from_str(text).unwrap();
        let emb = d.build().unwrap();
        assert_eq!(emb.space().weights(), &[1.0, 2.0]);
        assert_eq!(SpaceDescriptor::from_embedding(&emb), d);
    }

    #[test]
    fn space_errors_name_the_field() {
        let bad = SpaceDescriptor {
            weights: vec![1.0, 1.0],
            labels: None,
            embedding: EmbeddingDescriptor {
                dim: 2,
                points: vec![vec![0.0, 1.0], vec![1.0]],
            },
        };
        assert!(format!("{:#}", bad.build().unwrap_err()).contains("embedding.points[1]"));
        let text = r#"{"weights": [1.0, -1.0], "embedding": {"dim": 1, "points": [[0.0], [1.0]]}}"#;
        let d: SpaceDescriptor = serde_json::from_str(text).unwrap();
        assert!(format!("{:#}", d.build().unwrap_err()).contains("weights"));
    }

    #[test]
    fn kernel_entries_accept_numbers_and_pairs() {
        let sp = FiniteSpace::uniform(2).unwrap();
        let rows: Vec<Vec<Entry>> = serde_json::from_str("[[1, [0, 2]], [[3, -1], 4.5]]").unwrap();
        let k = kernel_from_json(&sp, &rows).unwrap();
        assert_eq!(k.get(0, 1), C64::new(0.0, 2.0));
        assert_eq!(k.get(1, 1), C64::new(4.5, 0.0));
        let back = kernel_from_json(&sp, &kernel_to_json(&k)).unwrap();
        assert_eq!(back, k);
        assert!(kernel_from_json(&sp, &rows[..1]).is_err());
    }

    #[test]
    fn operator_and_partition_roundtrip() {
        let text = r#"{"space": {"weights": [1, 1, 2], "embedding": {"dim": 1, "points": [[0], [1], [2]]}},
                       "kernel": [[1, 0, 0], [0, 1, 0], [0, 0, [0.5, 0.5]]]}"#;
        let d: OperatorDescriptor = serde_json::from_str(text).unwrap();
        let (emb, f) = d.build().unwrap();
        assert_eq!(f.get(2, 2), C64::new(0.5, 0.5));
        let again = OperatorDescriptor::from_operator(&emb, &f);
        assert_eq!(again.build().unwrap().1, f);

        let p: PartitionDescriptor = serde_json::from_str(r#"{"blocks": [[0, 2], [1]]}"#).unwrap();
        let part = p.build(emb.space()).unwrap();
        assert_eq!(PartitionDescriptor::from_partition(&part), p);
        let overlap: PartitionDescriptor = serde_json::from_str(r#"{"blocks": [[0, 1], [1, 2]]}"#).unwrap();
        assert!(overlap.build(emb.space()).is_err());
    }

    #[test]
    fn path_config_roundtrip() {
        let d: PathConfigDescriptor = serde_json::from_str(r#"{"step": 0.25, "horizon": 2, "dim": 3, "seed": 9}"#).unwrap();
        let c = d.build().unwrap();
        assert_eq!(PathConfigDescriptor::from(&c), d);
        let bad = PathConfigDescriptor { step: 0.3, ..d };
        assert!(bad.build().is_err());
    }
}
