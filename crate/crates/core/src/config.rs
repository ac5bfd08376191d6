//! JSON experiment configurations.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::lattice::Geometry;
use crate::linalg::{C64, ONE, ZERO};
use crate::protocol::{ProtocolFamily, RowSector};

fn default_up() -> [C64; 2] {
    [ONE, ZERO]
}

fn default_radius() -> u64 {
    5
}

fn default_nk_1d() -> usize {
    1024
}

fn default_nk_2d() -> usize {
    64
}

fn default_range() -> [f64; 2] {
    [-PI, PI]
}

fn default_window() -> f64 {
    1e-6
}

fn default_len() -> usize {
    60
}

fn default_bins() -> usize {
    400
}

fn default_k_samples() -> usize {
    crate::analytics::DEFAULT_ASYMPTOTIC_K
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Walk1dConfig {
    pub family: ProtocolFamily,
    pub steps: usize,
    /// Defaults to a ring of `2 * steps + 1` sites.
    #[serde(default)]
    pub geometry: Option<Geometry>,
    #[serde(default)]
    pub start: i64,
    #[serde(default = "default_up")]
    pub spinor: [C64; 2],
    #[serde(default = "default_radius")]
    pub window_radius: u64,
    /// Regression bounds on the window probability after the last step.
    #[serde(default)]
    pub expect_window_above: Option<f64>,
    #[serde(default)]
    pub expect_window_below: Option<f64>,
}

/// Split-step winding-number diagram on an inclusive `n1 x n2` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phase1dConfig {
    #[serde(default = "default_range")]
    pub theta1: [f64; 2],
    #[serde(default = "default_range")]
    pub theta2: [f64; 2],
    pub n1: usize,
    pub n2: usize,
    #[serde(default = "default_nk_1d")]
    pub nk: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family2d {
    SixOp,
    Simple,
}

impl Family2d {
    pub fn build(self, theta1: f64, theta2: f64) -> ProtocolFamily {
        match self {
            Family2d::SixOp => ProtocolFamily::six_op(theta1, theta2),
            Family2d::Simple => ProtocolFamily::simple_2d(theta1, theta2),
        }
    }
}

/// Chern-number diagram on an inclusive `n1 x n2` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phase2dConfig {
    pub family: Family2d,
    #[serde(default = "default_range")]
    pub theta1: [f64; 2],
    #[serde(default = "default_range")]
    pub theta2: [f64; 2],
    pub n1: usize,
    pub n2: usize,
    #[serde(default = "default_nk_2d")]
    pub nk: usize,
}

/// Strip spectrum: periodic in `x` (momentum `kx`), `ly` rows in `y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge2dConfig {
    pub family: ProtocolFamily,
    pub ly: usize,
    pub nkx: usize,
    #[serde(default = "default_range")]
    pub kx_range: [f64; 2],
    #[serde(default = "default_sector")]
    pub sector: RowSector,
    #[serde(default)]
    pub interfaces: Option<Vec<f64>>,
}

fn default_sector() -> RowSector {
    RowSector::All
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundStateConfig {
    pub theta: f64,
    pub phi: f64,
    #[serde(default = "default_len")]
    pub len: usize,
    /// Eigenphase window used to pick numerical in-gap states.
    #[serde(default = "default_window")]
    pub window: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticConfig {
    pub family: ProtocolFamily,
    #[serde(default = "default_up")]
    pub spinor: [C64; 2],
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_k_samples")]
    pub k_samples: usize,
    /// Also evolve this many steps and histogram `x / N`.
    #[serde(default)]
    pub empirical_steps: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub family: ProtocolFamily,
    pub geometry: Geometry,
    #[serde(default = "default_window")]
    pub window: f64,
    /// Restrict bound-state charges to `lo <= x <= hi`.
    #[serde(default)]
    pub region: Option<(i64, i64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum Experiment {
    Walk1d(Walk1dConfig),
    Phase1d(Phase1dConfig),
    Phase2d(Phase2dConfig),
    Edge2d(Edge2dConfig),
    Boundstate(BoundStateConfig),
    Asymptotic(AsymptoticConfig),
    Spectrum(SpectrumConfig),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Walk1d(_) => "walk1d",
            Experiment::Phase1d(_) => "phase1d",
            Experiment::Phase2d(_) => "phase2d",
            Experiment::Edge2d(_) => "edge2d",
            Experiment::Boundstate(_) => "boundstate",
            Experiment::Asymptotic(_) => "asymptotic",
            Experiment::Spectrum(_) => "spectrum",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub paper_figure: Option<String>,
    #[serde(flatten)]
    pub experiment: Experiment,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| WalkError::InvalidConfig(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| WalkError::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
