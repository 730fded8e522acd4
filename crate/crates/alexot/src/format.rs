//! JSON problem, solution and density files.

use std::path::Path;

use alexot_core::dmae::DmaeProblem;
use alexot_core::energy::OtProblem;
use alexot_core::{Density, GridDensity, Point2, Polygon, SolverConfig, TargetMeasure};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Targets within this relative distance of the domain mass are rescaled;
/// others are rejected.
pub const TARGET_RESCALE_TOL: f64 = 1e-6;

/// Grid density file: `nx * ny` node values, row-major, over the box
/// `[x0, x1] x [y0, y1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFile {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub values: Vec<f64>,
}

impl GridFile {
    pub fn to_density(&self) -> Result<GridDensity> {
        Ok(GridDensity::new(
            self.nx,
            self.ny,
            Point2::new(self.x0, self.y0),
            Point2::new(self.x1, self.y1),
            self.values.clone(),
        )?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SigmaSpec {
    Uniform {
        value: f64,
    },
    /// `a x + b y + c`
    Affine {
        a: f64,
        b: f64,
        c: f64,
    },
    Grid(GridFile),
    /// A grid density file, relative to the problem file.
    GridFile {
        path: String,
    },
}

impl Default for SigmaSpec {
    fn default() -> Self {
        SigmaSpec::Uniform { value: 1.0 }
    }
}

impl SigmaSpec {
    pub fn to_density(&self, base: Option<&Path>) -> Result<Density> {
        Ok(match self {
            SigmaSpec::Uniform { value } => Density::Uniform(*value),
            SigmaSpec::Affine { a, b, c } => Density::Affine { a: *a, b: *b, c: *c },
            SigmaSpec::Grid(g) => Density::Grid(g.to_density()?),
            SigmaSpec::GridFile { path } => {
                let full = base.map_or_else(|| Path::new(path).to_path_buf(), |b| b.join(path));
                let grid: GridFile = read_json(&full)?;
                Density::Grid(grid.to_density()?)
            }
        })
    }
}

/// Optional solver overrides carried by a problem file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularization: Option<f64>,
}

impl SolverOverrides {
    pub fn apply(&self, mut c: SolverConfig) -> SolverConfig {
        if let Some(v) = self.tol {
            c.tol = v;
        }
        if let Some(v) = self.max_iters {
            c.max_iters = v;
        }
        if let Some(v) = self.min_step {
            c.min_step = v;
        }
        if let Some(v) = self.regularization {
            c.regularization = v;
        }
        c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Ot,
    Dmae,
}

/// A transport problem (`sites` as `[x, y, A]`) or a Dirichlet problem
/// (`boundary` as `[x, y, g]`, `interior` as `[x, y, A]`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    /// Inferred from the blocks present when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ProblemKind>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub omega: Vec<[f64; 2]>,
    #[serde(default)]
    pub sigma: SigmaSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sites: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boundary: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub interior: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverOverrides>,
}

/// A validated problem of either kind.
#[derive(Clone, Debug)]
pub enum Problem {
    Ot(OtProblem),
    Dmae(DmaeProblem),
}

fn point(p: &[f64]) -> Point2 {
    Point2::new(p[0], p[1])
}

impl ProblemFile {
    pub fn kind(&self) -> ProblemKind {
        match &self.kind {
            Some(k) => k.clone(),
            None if !self.boundary.is_empty() || !self.interior.is_empty() => ProblemKind::Dmae,
            None => ProblemKind::Ot,
        }
    }

    pub fn config(&self) -> SolverConfig {
        self.solver.unwrap_or_default().apply(SolverConfig::default())
    }

    /// Builds the problem; `base` resolves relative density file paths.
    pub fn to_problem(&self, base: Option<&Path>) -> Result<Problem> {
        match self.kind() {
            ProblemKind::Ot => {
                if self.omega.len() < 3 {
                    return Err(CliError::Invalid("omega needs at least three vertices".into()));
                }
                let omega = Polygon::new(self.omega.iter().map(|p| point(p)).collect())?;
                let sigma = self.sigma.to_density(base)?;
                sigma.validate_on(&omega)?;
                let mass = sigma.mass(&omega);
                let points = self.sites.iter().map(|s| point(s)).collect();
                let raw = TargetMeasure::new(self.sites.iter().map(|s| s[2]).collect())?;
                let gap = (raw.sum() - mass).abs() / mass;
                if gap >= TARGET_RESCALE_TOL {
                    return Err(CliError::Invalid(format!(
                        "targets sum to {} but the domain carries mass {mass}",
                        raw.sum()
                    )));
                }
                Ok(Problem::Ot(OtProblem::new(
                    points,
                    omega,
                    sigma,
                    raw.normalized_to(mass),
                )?))
            }
            ProblemKind::Dmae => Ok(Problem::Dmae(DmaeProblem::new(
                self.boundary.iter().map(|b| point(b)).collect(),
                self.boundary.iter().map(|b| b[2]).collect(),
                self.interior.iter().map(|p| point(p)).collect(),
                self.interior.iter().map(|p| p[2]).collect(),
            )?)),
        }
    }
}

/// Solution of a transport problem; the problem travels with it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OtSolutionFile {
    pub heights: Vec<f64>,
    pub measures: Vec<f64>,
    /// Targets after rescaling to the domain mass.
    pub targets: Vec<f64>,
    /// `max_i |measures_i - targets_i|`.
    pub residual: f64,
    pub iterations: usize,
    /// Quadratic transport cost of the power-cell map.
    pub cost: f64,
    pub converged: bool,
    pub problem: ProblemFile,
}

/// Solution of a Dirichlet problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DmaeSolutionFile {
    pub heights: Vec<f64>,
    /// `[x, y, w]` for every vertex of the dual subdivision.
    pub dual_vertices: Vec<[f64; 3]>,
    /// Faces of the subdivision as indices into `dual_vertices`.
    pub cells: Vec<Vec<usize>>,
    pub areas: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub problem: ProblemFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SolutionFile {
    Dmae(DmaeSolutionFile),
    Ot(OtSolutionFile),
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Invalid(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
