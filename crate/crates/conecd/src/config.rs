//! Experiment configuration files.

use std::fmt;
use std::path::{Path, PathBuf};

use conecd_core::cones::ConeKind;
use conecd_core::metric_space::ManifoldDescriptor;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Validate,
    Ot,
    CdCheck,
    Counterexample,
    RicciTable,
    HessCheck,
    Spectral,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Validate => "validate",
            Task::Ot => "ot",
            Task::CdCheck => "cd-check",
            Task::Counterexample => "counterexample",
            Task::RicciTable => "ricci-table",
            Task::HessCheck => "hess-check",
            Task::Spectral => "spectral",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand when present.
    #[serde(default)]
    pub task: Option<Task>,
    #[serde(default)]
    pub base: Option<ManifoldDescriptor>,
    #[serde(default)]
    pub cone: Option<ConeConfig>,
    #[serde(default)]
    pub params: TaskParams,
    #[serde(default)]
    pub seed: u64,
    /// Output directory, overridden by `--out`.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeConfig {
    pub kind: ConeKind,
    /// Dimension parameter `N` of the cone measure `S_κ(r)^N dr ⊗ m`.
    pub n: f64,
    pub radial_cells: usize,
    /// Radial extent for cones without a north pole.
    #[serde(default)]
    pub r_max: Option<f64>,
    #[serde(default)]
    pub allow_wide_base: bool,
}

/// Density of a measure with respect to the cell weights, up to normalisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum DensitySpec {
    Uniform,
    Dirac { index: usize },
    /// Reference measure restricted to the listed cells.
    Cells { indices: Vec<usize> },
    /// Explicit masses, normalised on load.
    Masses { values: Vec<f64> },
    /// `constant + Σ coefficients[k]·coords[k]` in the label coordinates.
    Affine { constant: f64, coefficients: Vec<f64> },
    /// `constant + x·(r cos φ) + y·(r sin φ)`, reading `φ` as the first and
    /// `r` as the last label coordinate; apexes sit at the origin.
    Planar { constant: f64, x: f64, y: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskParams {
    /// Curvature bound `K`.
    #[serde(default)]
    pub k: Option<f64>,
    /// Dimension bound `N`.
    #[serde(default)]
    pub n: Option<f64>,
    /// Explicit `N′` values for the entropy sweep.
    #[serde(default)]
    pub n_primes: Option<Vec<f64>>,
    #[serde(default)]
    pub times: Option<Vec<f64>>,
    /// Dyadic refinement levels of the interpolation.
    #[serde(default)]
    pub levels: Option<u32>,
    #[serde(default)]
    pub source: Option<DensitySpec>,
    #[serde(default)]
    pub target: Option<DensitySpec>,
    /// Also solve at doubled resolution and use five times the fine deficit
    /// as tolerance.
    #[serde(default)]
    pub calibrate: bool,
    /// Largest cycle length for the cyclic-monotonicity audit.
    #[serde(default)]
    pub cycle_length: Option<usize>,
    /// Shell thicknesses for the counterexample.
    #[serde(default)]
    pub eps: Option<Vec<f64>>,
    /// Arc length `R` for the counterexample.
    #[serde(default, rename = "R")]
    pub big_r: Option<f64>,
    /// Cone radius for the curvature table or a single Ricci evaluation.
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub fine_cells: Option<usize>,
    #[serde(default)]
    pub bulk_cells: Option<usize>,
    #[serde(default)]
    pub draws: Option<usize>,
    /// Finite-difference step.
    #[serde(default)]
    pub step: Option<f64>,
    /// Kernel bandwidth; defaults to 2.5 × the largest nearest-neighbour
    /// distance.
    #[serde(default)]
    pub bandwidth: Option<f64>,
    #[serde(default)]
    pub test_functions: Option<usize>,
    /// Relative slack on the Poincaré bound.
    #[serde(default)]
    pub slack: Option<f64>,
    /// Relative slack on `λ₁ ≥ N + 1`.
    #[serde(default)]
    pub gap_slack: Option<f64>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// SHA-256 of the canonical JSON form of the parsed config.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(&serde_json::to_value(self).expect("config serialises")).expect("value serialises");
        hex::encode(Sha256::digest(canonical))
    }

    pub fn check_task(&self, task: Task) -> CliResult<()> {
        match self.task {
            Some(t) if t != task => Err(CliError::Config(format!("config is for task {t}, not {task}"))),
            _ => Ok(()),
        }
    }

    pub fn require_base(&self) -> CliResult<&ManifoldDescriptor> {
        self.base.as_ref().ok_or_else(|| CliError::Config("this task needs a `base` descriptor".into()))
    }
}

/// The same descriptor at twice the resolution.
pub fn refine(desc: &ManifoldDescriptor) -> ManifoldDescriptor {
    match desc {
        ManifoldDescriptor::Circle { radius, resolution } => ManifoldDescriptor::circle(*radius, 2 * resolution),
        ManifoldDescriptor::Sphere { dim, radius, resolution } => ManifoldDescriptor::sphere(*dim, *radius, 2 * resolution),
        ManifoldDescriptor::Interval { length, resolution } => ManifoldDescriptor::interval(*length, 2 * resolution),
        ManifoldDescriptor::Product { factors } => ManifoldDescriptor::product(factors.iter().map(refine).collect()),
    }
}
