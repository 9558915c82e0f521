//! Monte-Carlo engine: repeated trials over a grid of `(n, D)` cells, with
//! summaries and checks of the first-order, small-model and sup-norm
//! behaviour of the estimator.
//!
//! Quantiles use linear interpolation between order statistics: for sorted
//! `x_0 <= ... <= x_{N-1}` and level `p`, with `h = (N - 1) p`, the quantile is
//! `x_floor(h) + (h - floor(h)) (x_floor(h)+1 - x_floor(h))`.

use rayon::prelude::*;

use crate::basis::{build_histogram_basis, build_poly_basis, MAX_DEGREE};
use crate::error::{Error, Result};
use crate::estimator::ModelContext;
use crate::partition::Partition;
use crate::problem::RegressionProblem;
use crate::risk::{bias, complexity_k1m, risk_record};

/// Relative deviations at which coverage `|risk / target - 1| <= e` is reported.
pub const COVERAGE_LADDER: [f64; 4] = [0.5, 0.3, 0.2, 0.1];

/// Minimum number of non-degenerate trials per cell for first-order checks.
pub const MIN_NONDEGENERATE: usize = 100;

/// Band around zero for the small-model growth slope.
pub const SMALL_MODEL_SLOPE_TOL: f64 = 0.15;

#[derive(Debug, Clone, PartialEq)]
pub enum PartitionFamily {
    /// `D / (r + 1)` cells of equal width.
    EqualWidth,
    /// A fixed partition; every grid cell must then have `D = (r + 1)(|P|)`.
    Breakpoints(Vec<f64>),
}

/// Dimension regime each `(n, D)` cell must satisfy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    Unrestricted,
    /// `A- (ln n)^2 <= D <= A+ n / (ln n)^2`.
    Mid { a_minus: f64, a_plus: f64 },
    /// `1 <= D <= A+ n / (ln n)^2`.
    Small { a_plus: f64 },
}

impl Regime {
    fn violation(&self, n: usize, d: usize) -> Option<String> {
        let ln2 = (n as f64).ln().powi(2);
        let upper = |a_plus: f64| a_plus * n as f64 / ln2;
        match *self {
            Regime::Unrestricted => None,
            Regime::Mid { a_minus, a_plus } => {
                let lower = a_minus * ln2;
                let upper = upper(a_plus);
                (!(lower <= d as f64 && d as f64 <= upper)).then(|| {
                    format!(
                        "(n={n}, D={d}) violates the mid-regime bound A- (ln n)^2 <= D <= A+ n/(ln n)^2, \
                         i.e. {lower:.4} <= D <= {upper:.4}"
                    )
                })
            }
            Regime::Small { a_plus } => {
                let upper = upper(a_plus);
                (!(1.0 <= d as f64 && d as f64 <= upper)).then(|| {
                    format!(
                        "(n={n}, D={d}) violates the small-model bound 1 <= D <= A+ n/(ln n)^2, i.e. D <= {upper:.4}"
                    )
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridCell {
    pub n: usize,
    pub dimension: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: RegressionProblem<f64>,
    pub partition: PartitionFamily,
    pub degree: usize,
    pub cells: Vec<GridCell>,
    pub trials: usize,
    /// Confidence parameter; carried for reporting.
    pub alpha: f64,
    pub seed: u64,
    pub regime: Regime,
    pub gram_threshold: f64,
}

impl ExperimentConfig {
    /// Checks degree, dimensions and every regime guard, reporting all
    /// offending cells at once.
    pub fn validate(&self) -> Result<()> {
        if self.degree > MAX_DEGREE {
            return Err(Error::config(format!(
                "degree {} exceeds the supported maximum {MAX_DEGREE}",
                self.degree
            )));
        }
        if self.trials == 0 {
            return Err(Error::config("trials must be positive"));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.gram_threshold > 0.0) {
            return Err(Error::config("gram_threshold must be positive"));
        }
        let block = self.degree + 1;
        let mut problems = Vec::new();
        for cell in &self.cells {
            if cell.n == 0 {
                problems.push(format!("(n=0, D={}): n must be positive", cell.dimension));
            }
            if cell.dimension == 0 || cell.dimension % block != 0 {
                problems.push(format!(
                    "(n={}, D={}): D must be a positive multiple of r + 1 = {block}",
                    cell.n, cell.dimension
                ));
            }
            if let PartitionFamily::Breakpoints(b) = &self.partition {
                let d = block * b.len().saturating_sub(1);
                if cell.dimension != d {
                    problems.push(format!(
                        "(n={}, D={}): the fixed partition gives D = {d}",
                        cell.n, cell.dimension
                    ));
                }
            }
            if cell.n > 1 {
                problems.extend(self.regime.violation(cell.n, cell.dimension));
            }
        }
        if let PartitionFamily::Breakpoints(b) = &self.partition {
            Partition::new(b.clone())?;
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    fn partition_for(&self, dimension: usize) -> Result<Partition<f64>> {
        match &self.partition {
            PartitionFamily::EqualWidth => Ok(Partition::equal_width(dimension / (self.degree + 1))),
            PartitionFamily::Breakpoints(b) => Partition::new(b.clone()),
        }
    }
}

/// One Monte-Carlo trial, as written to the per-trial CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    pub n: usize,
    pub dimension: usize,
    pub degree: usize,
    pub trial: usize,
    pub true_excess: f64,
    pub empirical_excess: f64,
    pub sup_dist: f64,
    pub chi: f64,
    pub degenerate: bool,
}

impl TrialRecord {
    /// `true_excess / empirical_excess`.
    pub fn ratio(&self) -> f64 {
        self.true_excess / self.empirical_excess
    }
}

/// Model-level quantities of a grid cell, independent of the sampled data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellComplexity {
    pub n: usize,
    pub dimension: usize,
    pub degree: usize,
    pub k1m_sq: f64,
    /// `(D / 4n) K_{1,M}^2`.
    pub target: f64,
    /// Conditional-moment value for histograms, NaN otherwise.
    pub closed_form: f64,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub n: usize,
    pub dimension: usize,
    pub degree: usize,
    pub trials: usize,
    pub degenerate: usize,
    pub k1m_sq: f64,
    pub target: f64,
    pub mean_true: f64,
    pub mean_emp: f64,
    pub se_emp: f64,
    /// Quartiles (0.25, 0.5, 0.75) of `true_excess / target`.
    pub true_quartiles: [f64; 3],
    /// Quartiles of `empirical_excess / target`.
    pub emp_quartiles: [f64; 3],
    pub median_ratio: f64,
    pub mean_ratio: f64,
    pub mean_sup: f64,
    pub q99_sup: f64,
    /// Over all trials: `chi_M` does not depend on the fit.
    pub mean_chi_sq: f64,
    pub se_chi_sq: f64,
    /// `(D / n) K_{1,M}^2`.
    pub chi_sq_expected: f64,
    pub coverage_true: [f64; 4],
    pub coverage_emp: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub complexity: CellComplexity,
    pub records: Vec<TrialRecord>,
    pub summary: CellSummary,
}

impl CellResult {
    pub fn nondegenerate(&self) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(|r| !r.degenerate)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub cells: Vec<CellResult>,
    /// Sup-norm rate fit across the grid, when at least three distinct
    /// abscissae are available.
    pub sup_rate: Option<RateReport>,
}

impl ExperimentResult {
    /// Rebuilds summaries from stored per-cell quantities and trial records.
    pub fn from_records(cells: Vec<(CellComplexity, Vec<TrialRecord>)>) -> Self {
        let cells: Vec<CellResult> = cells
            .into_iter()
            .map(|(complexity, records)| CellResult {
                summary: summarize(&complexity, &records),
                complexity,
                records,
            })
            .collect();
        let mut result = Self { cells, sup_rate: None };
        result.sup_rate = check_sup_norm_rate(&result).ok();
        result
    }

    pub fn cell(&self, n: usize, dimension: usize) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.complexity.n == n && c.complexity.dimension == dimension)
    }
}

/// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `t` in cell `(n, D)`.
pub fn trial_seed(seed: u64, n: usize, dimension: usize, trial: usize) -> u64 {
    [n as u64, dimension as u64, trial as u64]
        .into_iter()
        .fold(splitmix64(seed), |h, v| splitmix64(h ^ splitmix64(v)))
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let mut cells = Vec::with_capacity(config.cells.len());
    for cell in &config.cells {
        let partition = config.partition_for(cell.dimension)?;
        let basis = if config.degree == 0 {
            build_histogram_basis(&partition, &config.problem)?
        } else {
            build_poly_basis(&partition, &config.problem, config.degree)?
        };
        let ctx = ModelContext::new(config.problem.clone(), basis).with_gram_threshold(config.gram_threshold);
        let report = complexity_k1m(&ctx.problem, &ctx.basis, &ctx.projection, cell.n);
        let bias_value = bias(&ctx.problem, &ctx.basis, &ctx.projection);
        let complexity = CellComplexity {
            n: cell.n,
            dimension: cell.dimension,
            degree: config.degree,
            k1m_sq: report.k1m_sq,
            target: report.ideal_first_order,
            closed_form: report.closed_form_histogram.unwrap_or(f64::NAN),
            bias: bias_value,
        };
        let records: Vec<TrialRecord> = (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let data = ctx.problem.sample(cell.n, trial_seed(config.seed, cell.n, cell.dimension, t));
                let (_, risk) = risk_record(&ctx, &data, bias_value);
                TrialRecord {
                    n: cell.n,
                    dimension: cell.dimension,
                    degree: config.degree,
                    trial: t,
                    true_excess: risk.true_excess,
                    empirical_excess: risk.empirical_excess,
                    sup_dist: risk.sup_dist,
                    chi: risk.chi,
                    degenerate: risk.degenerate,
                }
            })
            .collect();
        cells.push((complexity, records));
    }
    Ok(ExperimentResult::from_records(cells))
}

/// Linear-interpolation quantile of sorted data; NaN when empty.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        len => {
            let h = (len - 1) as f64 * p;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(len - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

pub fn quantile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Standard error of the mean (sample standard deviation over `sqrt(N)`).
pub fn standard_error(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

fn coverage(ratios: &[f64]) -> [f64; 4] {
    COVERAGE_LADDER.map(|e| {
        if ratios.is_empty() {
            f64::NAN
        } else {
            ratios.iter().filter(|r| (*r - 1.0).abs() <= e).count() as f64 / ratios.len() as f64
        }
    })
}

fn quartiles(values: &[f64]) -> [f64; 3] {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    [0.25, 0.5, 0.75].map(|p| quantile_sorted(&v, p))
}

pub fn summarize(complexity: &CellComplexity, records: &[TrialRecord]) -> CellSummary {
    let good: Vec<&TrialRecord> = records.iter().filter(|r| !r.degenerate).collect();
    let trues: Vec<f64> = good.iter().map(|r| r.true_excess).collect();
    let emps: Vec<f64> = good.iter().map(|r| r.empirical_excess).collect();
    let true_rel: Vec<f64> = trues.iter().map(|v| v / complexity.target).collect();
    let emp_rel: Vec<f64> = emps.iter().map(|v| v / complexity.target).collect();
    let ratios: Vec<f64> = good.iter().map(|r| r.ratio()).collect();
    let sups: Vec<f64> = good.iter().map(|r| r.sup_dist).collect();
    let chi_sq: Vec<f64> = records.iter().map(|r| r.chi * r.chi).collect();
    CellSummary {
        n: complexity.n,
        dimension: complexity.dimension,
        degree: complexity.degree,
        trials: records.len(),
        degenerate: records.len() - good.len(),
        k1m_sq: complexity.k1m_sq,
        target: complexity.target,
        mean_true: mean(&trues),
        mean_emp: mean(&emps),
        se_emp: standard_error(&emps),
        true_quartiles: quartiles(&true_rel),
        emp_quartiles: quartiles(&emp_rel),
        median_ratio: quantile(&ratios, 0.5),
        mean_ratio: mean(&ratios),
        mean_sup: mean(&sups),
        q99_sup: quantile(&sups, 0.99),
        mean_chi_sq: mean(&chi_sq),
        se_chi_sq: standard_error(&chi_sq),
        chi_sq_expected: complexity.dimension as f64 * complexity.k1m_sq / complexity.n as f64,
        coverage_true: coverage(&true_rel),
        coverage_emp: coverage(&emp_rel),
    }
}

/// Ordinary least squares `y = intercept + slope x`; `None` with fewer than
/// two distinct abscissae.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let mx = mean(xs);
    let my = mean(ys);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if xs.len() < 2 || !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}

fn distinct_count(xs: &[f64]) -> usize {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellBounds {
    pub n: usize,
    pub dimension: usize,
    pub degree: usize,
    pub nondegenerate: usize,
    pub coverage_true: [f64; 4],
    pub coverage_emp: [f64; 4],
    pub median_ratio: f64,
    pub mean_ratio: f64,
    /// 0.9-quantile of `|true_excess / target - 1|`.
    pub deviation_q90: f64,
    /// `max{(ln n / D)^{1/4}, (D ln n / n)^{1/4}}`.
    pub rate_proxy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub cells: Vec<CellBounds>,
    /// Slope of `ln(deviation_q90)` against `ln(rate_proxy)` across cells.
    pub deviation_slope: Option<f64>,
}

pub fn check_first_order(result: &ExperimentResult) -> Result<BoundsReport> {
    let mut cells = Vec::with_capacity(result.cells.len());
    for cell in &result.cells {
        let c = &cell.complexity;
        let s = &cell.summary;
        let good = s.trials - s.degenerate;
        if good < MIN_NONDEGENERATE {
            return Err(Error::InsufficientData(format!(
                "cell (n={}, D={}) has {good} non-degenerate trials, at least {MIN_NONDEGENERATE} are needed",
                c.n, c.dimension
            )));
        }
        let deviations: Vec<f64> = cell
            .nondegenerate()
            .map(|r| (r.true_excess / c.target - 1.0).abs())
            .collect();
        let ln_n = (c.n as f64).ln();
        let d = c.dimension as f64;
        cells.push(CellBounds {
            n: c.n,
            dimension: c.dimension,
            degree: c.degree,
            nondegenerate: good,
            coverage_true: s.coverage_true,
            coverage_emp: s.coverage_emp,
            median_ratio: s.median_ratio,
            mean_ratio: s.mean_ratio,
            deviation_q90: quantile(&deviations, 0.9),
            rate_proxy: (ln_n / d).powf(0.25).max((d * ln_n / c.n as f64).powf(0.25)),
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = cells
        .iter()
        .filter(|c| c.deviation_q90 > 0.0)
        .map(|c| (c.rate_proxy.ln(), c.deviation_q90.ln()))
        .unzip();
    Ok(BoundsReport {
        deviation_slope: fit_line(&xs, &ys).map(|(_, s)| s),
        cells,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint {
    pub n: usize,
    pub dimension: usize,
    pub degree: usize,
    /// `ln sqrt(D ln n / n)`.
    pub log_abscissa: f64,
    /// `ln` of the 0.99-quantile of `||s_n - s_M||_inf`.
    pub log_q99: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub rho: f64,
    pub kappa: f64,
    pub points: Vec<RatePoint>,
}

/// Fits `ln q99(sup_dist) = kappa + rho ln sqrt(D ln n / n)` across cells.
pub fn check_sup_norm_rate(result: &ExperimentResult) -> Result<RateReport> {
    let points: Vec<RatePoint> = result
        .cells
        .iter()
        .filter(|c| c.summary.q99_sup > 0.0 && c.complexity.n > 1)
        .map(|c| {
            let n = c.complexity.n as f64;
            let d = c.complexity.dimension as f64;
            RatePoint {
                n: c.complexity.n,
                dimension: c.complexity.dimension,
                degree: c.complexity.degree,
                log_abscissa: (d * n.ln() / n).sqrt().ln(),
                log_q99: c.summary.q99_sup.ln(),
            }
        })
        .collect();
    let xs: Vec<f64> = points.iter().map(|p| p.log_abscissa).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.log_q99).collect();
    if distinct_count(&xs) < 3 {
        return Err(Error::DegenerateRegression(format!(
            "sup-norm rate fit needs at least 3 distinct values of sqrt(D ln n / n), got {}",
            distinct_count(&xs)
        )));
    }
    let (kappa, rho) = fit_line(&xs, &ys).expect("distinct abscissae");
    Ok(RateReport { rho, kappa, points })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmallModelCell {
    pub n: usize,
    pub dimension: usize,
    /// `max_t n true_excess / max(D, ln n)` over non-degenerate trials.
    pub max_true_scaled: f64,
    pub max_emp_scaled: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSlope {
    pub dimension: usize,
    /// Slope of `ln(max_true_scaled)` against `ln n`.
    pub slope_true: f64,
    pub slope_emp: f64,
}

impl GrowthSlope {
    pub fn bounded(&self) -> bool {
        self.slope_true.abs() <= SMALL_MODEL_SLOPE_TOL && self.slope_emp.abs() <= SMALL_MODEL_SLOPE_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmallModelReport {
    pub cells: Vec<SmallModelCell>,
    /// One entry per dimension observed at two or more sample sizes.
    pub slopes: Vec<GrowthSlope>,
}

impl SmallModelReport {
    pub fn slope_for(&self, dimension: usize) -> Option<&GrowthSlope> {
        self.slopes.iter().find(|s| s.dimension == dimension)
    }
}

pub fn check_small_models(result: &ExperimentResult) -> SmallModelReport {
    let cells: Vec<SmallModelCell> = result
        .cells
        .iter()
        .map(|c| {
            let n = c.complexity.n as f64;
            let scale = n / (c.complexity.dimension as f64).max(n.ln());
            let (mt, me) = c.nondegenerate().fold((f64::NAN, f64::NAN), |(mt, me), r| {
                (mt.max(r.true_excess * scale), me.max(r.empirical_excess * scale))
            });
            SmallModelCell {
                n: c.complexity.n,
                dimension: c.complexity.dimension,
                max_true_scaled: mt,
                max_emp_scaled: me,
            }
        })
        .collect();
    let mut dims: Vec<usize> = cells.iter().map(|c| c.dimension).collect();
    dims.sort_unstable();
    dims.dedup();
    let slopes = dims
        .into_iter()
        .filter_map(|d| {
            let group: Vec<&SmallModelCell> = cells
                .iter()
                .filter(|c| c.dimension == d && c.max_true_scaled > 0.0 && c.max_emp_scaled > 0.0)
                .collect();
            let xs: Vec<f64> = group.iter().map(|c| (c.n as f64).ln()).collect();
            let yt: Vec<f64> = group.iter().map(|c| c.max_true_scaled.ln()).collect();
            let ye: Vec<f64> = group.iter().map(|c| c.max_emp_scaled.ln()).collect();
            Some(GrowthSlope {
                dimension: d,
                slope_true: fit_line(&xs, &yt)?.1,
                slope_emp: fit_line(&xs, &ye)?.1,
            })
        })
        .collect();
    SmallModelReport { cells, slopes }
}
