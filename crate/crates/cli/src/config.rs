//! Run configuration: which checks to run, on what space, with which settings.

use std::fmt;
use std::path::{Path, PathBuf};

use schur_dilation::calculus::{ContourQuadrature, SectorFunction};
use schur_dilation::gaussian::PathConfig;
use schur_dilation::Embedding;
use serde::{Deserialize, Serialize};

use crate::descriptor::{Entry, SpaceDescriptor};

/// Invalid configuration, located by its field path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Dilation,
    Markov,
    Group,
    Schoenberg,
    Partition,
    Calculus,
    Bmo,
    All,
}

impl Suite {
    pub const EACH: [Suite; 7] = [
        Suite::Dilation,
        Suite::Markov,
        Suite::Group,
        Suite::Schoenberg,
        Suite::Partition,
        Suite::Calculus,
        Suite::Bmo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Dilation => "dilation",
            Suite::Markov => "markov",
            Suite::Group => "group",
            Suite::Schoenberg => "schoenberg",
            Suite::Partition => "partition",
            Suite::Calculus => "calculus",
            Suite::Bmo => "bmo",
            Suite::All => "all",
        }
    }

    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => Suite::EACH.to_vec(),
            s => vec![s],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MarkovMode {
    Standard,
    Reversed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// The space is given inline or as a path to a descriptor file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceSource {
    Inline(SpaceDescriptor),
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSettings {
    pub samples: u64,
    pub root_seed: u64,
}

impl Default for McSettings {
    fn default() -> Self {
        McSettings {
            samples: 100_000,
            root_seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSettings {
    pub step: f64,
    pub horizon: f64,
    pub t_values: Vec<f64>,
}

impl Default for GridSettings {
    fn default() -> Self {
        GridSettings {
            step: 1.0 / 64.0,
            horizon: 2.0,
            t_values: vec![0.0, 0.25, 1.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub exact: f64,
    pub sigma_gate: f64,
    pub pass_fraction: f64,
    pub calculus: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            exact: 1e-12,
            sigma_gate: 4.0,
            pass_fraction: 0.99,
            calculus: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSettings {
    pub format: Format,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

impl Default for OutputSettings {
    fn default() -> Self {
        OutputSettings {
            format: Format::Json,
            path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalculusSettings {
    pub function: String,
    pub theta: f64,
    pub nodes: usize,
    pub truncation: f64,
}

impl Default for CalculusSettings {
    fn default() -> Self {
        let q = ContourQuadrature::default();
        CalculusSettings {
            function: "z/(1+z)^2".into(),
            theta: q.theta,
            nodes: q.nodes,
            truncation: q.truncation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub space: SpaceSource,
    #[serde(default = "default_suite")]
    pub suite: Suite,
    #[serde(default = "default_mode")]
    pub mode: MarkovMode,
    #[serde(default)]
    pub mc: McSettings,
    #[serde(default)]
    pub grid: GridSettings,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSettings,
    #[serde(default)]
    pub calculus: CalculusSettings,
    /// Test operator kernel; a fixed deterministic kernel is used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<Vec<Vec<Entry>>>,
}

fn default_suite() -> Suite {
    Suite::All
}

fn default_mode() -> MarkovMode {
    MarkovMode::Standard
}

impl RunConfig {
    pub fn new(space: SpaceDescriptor) -> Self {
        RunConfig {
            space: SpaceSource::Inline(space),
            suite: Suite::All,
            mode: MarkovMode::Standard,
            mc: McSettings::default(),
            grid: GridSettings::default(),
            tolerances: Tolerances::default(),
            output: OutputSettings::default(),
            calculus: CalculusSettings::default(),
            operator: None,
        }
    }

    /// Reads a config file; a relative space path is resolved against the
    /// config's directory.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        if let SpaceSource::File(p) = &cfg.space {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.space = SpaceSource::File(dir.join(p));
                }
            }
        }
        Ok(cfg)
    }

    pub fn embedding(&self) -> anyhow::Result<Embedding> {
        let desc = match &self.space {
            SpaceSource::Inline(d) => d.clone(),
            SpaceSource::File(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| ConfigError::new("space", format!("{}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| ConfigError::new("space", format!("{}: {e}", p.display())))?
            }
        };
        desc.build().map_err(|e| ConfigError::new("space", format!("{e:#}")).into())
    }

    pub fn path_config(&self, dim: usize, seed: u64) -> Result<PathConfig, ConfigError> {
        PathConfig::new(self.grid.step, self.grid.horizon, dim, seed)
            .map_err(|e| ConfigError::new("grid", e.to_string()))
    }

    pub fn quadrature(&self) -> Result<ContourQuadrature, ConfigError> {
        let c = &self.calculus;
        ContourQuadrature::new(c.theta, c.nodes, c.truncation).map_err(|e| ConfigError::new("calculus", e.to_string()))
    }

    pub fn sector_function(&self) -> Result<SectorFunction, ConfigError> {
        SectorFunction::parse(&self.calculus.function).map_err(|e| ConfigError::new("calculus.function", e.to_string()))
    }

    /// Structural checks that do not need the space.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.grid;
        if !(g.step > 0.0 && g.step.is_finite()) {
            return Err(ConfigError::new("grid.step", "must be positive"));
        }
        let probe = PathConfig::new(g.step, g.horizon, 1, 0).map_err(|e| ConfigError::new("grid.horizon", e.to_string()))?;
        if g.t_values.is_empty() {
            return Err(ConfigError::new("grid.t_values", "must not be empty"));
        }
        for (k, &t) in g.t_values.iter().enumerate() {
            let field = format!("grid.t_values[{k}]");
            if !(t >= 0.0) {
                return Err(ConfigError::new(field, format!("{t} is negative")));
            }
            if t > g.horizon {
                return Err(ConfigError::new(field, format!("{t} exceeds the horizon {}", g.horizon)));
            }
            probe
                .index_of(t)
                .map_err(|_| ConfigError::new(field, format!("{t} is not aligned to the grid step {}", g.step)))?;
        }
        let tol = &self.tolerances;
        if !(tol.pass_fraction > 0.0 && tol.pass_fraction <= 1.0) {
            return Err(ConfigError::new("tolerances.pass_fraction", "must lie in (0, 1]"));
        }
        if !(tol.exact >= 0.0) {
            return Err(ConfigError::new("tolerances.exact", "must be nonnegative"));
        }
        if !(tol.sigma_gate > 0.0) {
            return Err(ConfigError::new("tolerances.sigma_gate", "must be positive"));
        }
        if !(tol.calculus > 0.0) {
            return Err(ConfigError::new("tolerances.calculus", "must be positive"));
        }
        self.quadrature()?;
        Ok(())
    }
}
