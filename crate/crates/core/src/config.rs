//! Experiment configuration files.
//!
//! The format is TOML: flat keys plus a few sections. Functions are named
//! families with parameter lists; polynomial coefficients are ascending
//! powers of `x`.
//!
//! ```toml
//! seed = 42
//! trials = 2000
//! degree = 0              # r, 0..=4
//! alpha = 2.0             # optional (default 2)
//! gram_threshold = 0.9    # optional
//!
//! [problem]
//! bound_a = 2.0
//! noise_shape = "rademacher"          # or "uniform"
//! target = { breakpoints = [0.0, 1.0], pieces = [[0.0]] }
//! noise_level = { family = "constant", value = 1.0 }
//! #   { family = "piecewise_constant", breakpoints = [...], values = [...] }
//! #   { family = "polynomial", coefficients = [...] }
//! design_density = { family = "uniform" }
//! #   { family = "piecewise_constant", breakpoints = [...], values = [...] }
//! #   { family = "polynomial", coefficients = [c0, c1, c2] }
//!
//! [partition]
//! family = "equal_width"              # or "breakpoints", breakpoints = [...]
//!
//! [regime]
//! kind = "mid"                        # "small" (a_plus only) or "none"
//! a_minus = 0.25
//! a_plus = 2.0
//!
//! [[cells]]
//! n = 10000
//! dimension = 64
//!
//! [grid]                              # optional: adds every (n, D) pair
//! n = [512, 1024]
//! dimension = [32]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::DEFAULT_GRAM_THRESHOLD;
use crate::experiment::{ExperimentConfig, GridCell, PartitionFamily, Regime};
use crate::problem::{
    DensityFamily, DesignDensity, NoiseFamily, NoiseLevel, NoiseShape, PiecewisePolynomial, RegressionProblem,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: u64,
    pub trials: usize,
    pub degree: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_gram_threshold")]
    pub gram_threshold: f64,
    pub problem: ProblemSection,
    #[serde(default)]
    pub partition: PartitionSection,
    #[serde(default)]
    pub regime: RegimeSection,
    #[serde(default)]
    pub cells: Vec<CellSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
}

fn default_alpha() -> f64 {
    2.0
}

fn default_gram_threshold() -> f64 {
    DEFAULT_GRAM_THRESHOLD
}

fn unit_interval() -> Vec<f64> {
    vec![0.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub bound_a: f64,
    pub noise_shape: NoiseShapeName,
    pub target: TargetSection,
    pub noise_level: NoiseSection,
    pub design_density: DensitySection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseShapeName {
    Rademacher,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    #[serde(default = "unit_interval")]
    pub breakpoints: Vec<f64>,
    pub pieces: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSection {
    Constant { value: f64 },
    PiecewiseConstant { breakpoints: Vec<f64>, values: Vec<f64> },
    Polynomial { coefficients: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySection {
    Uniform,
    PiecewiseConstant { breakpoints: Vec<f64>, values: Vec<f64> },
    Polynomial { coefficients: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PartitionSection {
    #[default]
    EqualWidth,
    Breakpoints { breakpoints: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegimeSection {
    #[default]
    None,
    Mid { a_minus: f64, a_plus: f64 },
    Small { a_plus: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSection {
    pub n: usize,
    pub dimension: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: Vec<usize>,
    pub dimension: Vec<usize>,
}

fn in_field<T>(field: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{field}: {msg}")),
        other => other,
    })
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn build_problem(&self) -> Result<RegressionProblem<f64>> {
        let p = &self.problem;
        let target = in_field(
            "problem.target",
            PiecewisePolynomial::new(p.target.breakpoints.clone(), p.target.pieces.clone()),
        )?;
        let noise = in_field(
            "problem.noise_level",
            NoiseLevel::new(match &p.noise_level {
                NoiseSection::Constant { value } => NoiseFamily::Constant(*value),
                NoiseSection::PiecewiseConstant { breakpoints, values } => NoiseFamily::PiecewiseConstant {
                    breakpoints: breakpoints.clone(),
                    values: values.clone(),
                },
                NoiseSection::Polynomial { coefficients } => NoiseFamily::Polynomial(coefficients.clone()),
            }),
        )?;
        let density = in_field(
            "problem.design_density",
            DesignDensity::new(match &p.design_density {
                DensitySection::Uniform => DensityFamily::Uniform,
                DensitySection::PiecewiseConstant { breakpoints, values } => DensityFamily::PiecewiseConstant {
                    breakpoints: breakpoints.clone(),
                    values: values.clone(),
                },
                DensitySection::Polynomial { coefficients } => DensityFamily::Polynomial(coefficients.clone()),
            }),
        )?;
        let shape = match p.noise_shape {
            NoiseShapeName::Rademacher => NoiseShape::Rademacher,
            NoiseShapeName::Uniform => NoiseShape::Uniform,
        };
        in_field("problem", RegressionProblem::new(target, noise, density, shape, p.bound_a))
    }

    pub fn grid_cells(&self) -> Vec<GridCell> {
        let mut cells: Vec<GridCell> = self
            .cells
            .iter()
            .map(|c| GridCell { n: c.n, dimension: c.dimension })
            .collect();
        if let Some(g) = &self.grid {
            for &d in &g.dimension {
                for &n in &g.n {
                    cells.push(GridCell { n, dimension: d });
                }
            }
        }
        cells
    }

    /// Builds and validates the experiment, evaluating every regime guard.
    pub fn build(&self) -> Result<ExperimentConfig> {
        let config = ExperimentConfig {
            problem: self.build_problem()?,
            partition: match &self.partition {
                PartitionSection::EqualWidth => PartitionFamily::EqualWidth,
                PartitionSection::Breakpoints { breakpoints } => PartitionFamily::Breakpoints(breakpoints.clone()),
            },
            degree: self.degree,
            cells: self.grid_cells(),
            trials: self.trials,
            alpha: self.alpha,
            seed: self.seed,
            regime: match self.regime {
                RegimeSection::None => Regime::Unrestricted,
                RegimeSection::Mid { a_minus, a_plus } => Regime::Mid { a_minus, a_plus },
                RegimeSection::Small { a_plus } => Regime::Small { a_plus },
            },
            gram_threshold: self.gram_threshold,
        };
        config.validate()?;
        Ok(config)
    }
}

pub fn read_config_file(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ConfigFile::from_toml(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    read_config_file(path)?.build()
}
