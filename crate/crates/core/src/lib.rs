//! Least-squares estimation on histogram and piecewise-polynomial models
//! under bounded heteroscedastic random-design regression on `[0, 1]`.
//!
//! The numerical core (quadrature, bases, estimators, risks) is generic over
//! the [`Scalar`] type; the experiment engine and CLI run in `f64`, and the
//! aliases below name the `f64` instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod basis;
pub mod cli;
pub mod config;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod output;
pub mod partition;
pub mod poly;
pub mod problem;
pub mod quadrature;
pub mod risk;
pub mod scalar;

pub use basis::{
    build_histogram_basis, build_poly_basis, gram_residual, orthonormality_tol, unit_envelope,
    OrthonormalBasis, MAX_DEGREE, ORTHONORMALITY_TOL,
};
pub use config::{parse_config, ConfigFile};
pub use error::{Error, Result};
pub use estimator::{
    empirical_risk, fit_least_squares, project_target, sup_norm_distance, FitResult, ModelContext,
    DEFAULT_GRAM_THRESHOLD,
};
pub use experiment::{
    check_first_order, check_small_models, check_sup_norm_rate, run_experiment, trial_seed, CellComplexity,
    CellSummary, ExperimentConfig, ExperimentResult, GridCell, PartitionFamily, Regime, TrialRecord,
    COVERAGE_LADDER,
};
pub use output::{emit_outputs, load_run, write_summaries, RunManifest};
pub use partition::{regularity_report, Partition, RegularityReport};
pub use problem::{
    sample_dataset, Dataset, DensityFamily, DesignDensity, NoiseFamily, NoiseLevel, NoiseShape,
    PiecewisePolynomial, RegressionProblem,
};
pub use quadrature::Quadrature;
pub use risk::{
    centering_residual, chi_diagnostic, complexity_k1m, contrast_parts, empirical_excess_risk,
    histogram_closed_form, true_excess_risk, ComplexityReport, RiskRecord,
};
pub use scalar::Scalar;

pub type Problem = RegressionProblem<f64>;
pub type Sample = Dataset<f64>;
pub type Basis = OrthonormalBasis<f64>;
pub type Fit = FitResult<f64>;
pub type Model = ModelContext<f64>;
pub type Risk = RiskRecord<f64>;
pub type Complexity = ComplexityReport<f64>;
