//! Contrast decomposition, true and empirical excess risks, the normalized
//! complexity `K_{1,M}` and the fluctuation diagnostic `chi_M`.

use crate::basis::{unit_envelope, OrthonormalBasis};
use crate::estimator::{sup_norm_distance, FitResult, ModelContext};
use crate::partition::regularity_report;
use crate::problem::{Dataset, RegressionProblem};
use crate::quadrature::Quadrature;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskRecord<T> {
    /// `P(K s_n - K s_M)`.
    pub true_excess: T,
    /// `P_n(K s_M - K s_n)`.
    pub empirical_excess: T,
    /// `P(K s_M - K s*) = ||s_M - s*||_2^2`.
    pub bias: T,
    pub sup_dist: T,
    pub chi: T,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport<T> {
    pub k1m_sq: T,
    /// `Var(psi_{1,M} phi_k)` for each basis function.
    pub per_basis_terms: Vec<T>,
    /// Conditional-moment formula for histograms (`r = 0` only).
    pub closed_form_histogram: Option<T>,
    /// `(D / 4n) K_{1,M}^2`.
    pub ideal_first_order: T,
    pub dimension: usize,
}

impl<T: Scalar> ComplexityReport<T> {
    /// `C_M = (D / 4) K_{1,M}^2`.
    pub fn complexity(&self) -> T {
        T::from_usize_lossy(self.dimension) * self.k1m_sq / T::lit(4.0)
    }

    /// `(D / 4n) K_{1,M}^2` at another sample size.
    pub fn first_order_at(&self, n: usize) -> T {
        self.complexity() / T::from_usize_lossy(n)
    }
}

/// Linear and quadratic parts of `K s_n - K s_M` at `z = (x, y)`:
/// `psi_{1,M}(z) (s_n - s_M)(x)` and `(s_n - s_M)(x)^2`, with
/// `psi_{1,M}(z) = -2 (y - s_M(x))`.
pub fn contrast_parts<T: Scalar>(basis: &OrthonormalBasis<T>, fit: &FitResult<T>, x: T, y: T) -> (T, T) {
    let s_m = basis.eval_combination(&fit.coeff_projection, x);
    let s_n = basis.eval_combination(&fit.coeff_estimator, x);
    let diff = s_n - s_m;
    let psi1 = -(y - s_m) * T::lit(2.0);
    (psi1 * diff, diff * diff)
}

/// `sum_k (beta^(n)_k - beta_M,k)^2 = ||s_n - s_M||_2^2`.
pub fn true_excess_risk<T: Scalar>(fit: &FitResult<T>) -> T {
    fit.coeff_estimator
        .iter()
        .zip(&fit.coeff_projection)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum()
}

/// `(1/n) sum_i [(y_i - s_M(x_i))^2 - (y_i - s_n(x_i))^2]`.
pub fn empirical_excess_risk<T: Scalar>(dataset: &Dataset<T>, fit: &FitResult<T>, basis: &OrthonormalBasis<T>) -> T {
    if dataset.is_empty() {
        return T::zero();
    }
    let total: T = dataset
        .points
        .iter()
        .map(|&(x, y)| {
            let rm = y - basis.eval_combination(&fit.coeff_projection, x);
            let rn = y - basis.eval_combination(&fit.coeff_estimator, x);
            rm * rm - rn * rn
        })
        .sum();
    total / T::from_usize_lossy(dataset.n())
}

/// `||s_M - s*||_2^2` by quadrature.
pub fn bias<T: Scalar>(problem: &RegressionProblem<T>, basis: &OrthonormalBasis<T>, projection: &[T]) -> T {
    let quad = Quadrature::for_problem(basis.partition(), problem, basis.degree());
    quad.integrate(|x| {
        let d = basis.eval_combination(projection, x) - problem.target_at(x);
        d * d * problem.density_at(x)
    })
}

/// `||s_beta - s_M||_2^2` by quadrature, independent of orthonormality.
pub fn l2_distance_sq<T: Scalar>(
    problem: &RegressionProblem<T>,
    basis: &OrthonormalBasis<T>,
    a: &[T],
    b: &[T],
) -> T {
    let quad = Quadrature::for_problem(basis.partition(), problem, basis.degree());
    quad.integrate(|x| {
        let d = basis.eval_combination(a, x) - basis.eval_combination(b, x);
        d * d * problem.density_at(x)
    })
}

/// `K_{1,M}^2 = 4 int [sigma^2 + (s_M - s*)^2] Psi_M^2 f`, with the
/// per-function variances `4 int [sigma^2 + (s_M - s*)^2] phi_k^2 f` (the
/// centering `P(psi_{1,M} phi_k) = 0` makes these the variances).
pub fn complexity_k1m<T: Scalar>(
    problem: &RegressionProblem<T>,
    basis: &OrthonormalBasis<T>,
    projection: &[T],
    n: usize,
) -> ComplexityReport<T> {
    let quad = Quadrature::for_problem(basis.partition(), problem, basis.degree());
    let p = basis.block_size();
    let four = T::lit(4.0);
    let mut per_basis_terms = vec![T::zero(); basis.dimension()];
    let mut vals = vec![T::zero(); p];
    for cell in 0..basis.partition().len() {
        for &(x, w) in quad.cell_rule(cell) {
            basis.eval_block_into(cell, x, &mut vals);
            let sigma = problem.sigma_at(x);
            let gap = basis.eval_combination(projection, x) - problem.target_at(x);
            let weight = w * four * (sigma * sigma + gap * gap) * problem.density_at(x);
            for (t, &v) in per_basis_terms[cell * p..(cell + 1) * p].iter_mut().zip(&vals) {
                *t = *t + weight * v * v;
            }
        }
    }
    // Same integrand through the unit envelope, accumulated separately.
    let dim = T::from_usize_lossy(basis.dimension());
    let k1m_sq = quad.integrate(|x| {
        let sigma = problem.sigma_at(x);
        let gap = basis.eval_combination(projection, x) - problem.target_at(x);
        let env = unit_envelope(basis, x);
        four * (sigma * sigma + gap * gap) * env * env * problem.density_at(x)
    });
    let closed_form_histogram = (basis.degree() == 0).then(|| histogram_closed_form(problem, basis));
    ComplexityReport {
        ideal_first_order: dim * k1m_sq / (four * T::from_usize_lossy(n.max(1))),
        k1m_sq,
        per_basis_terms,
        closed_form_histogram,
        dimension: basis.dimension(),
    }
}

/// `4 (1/|P|) sum_I (E[sigma^2 | X in I] + V[s*(X) | X in I])`, from
/// conditional moments only (no basis functions). Reduces to
/// `4 (sigma^2 + (1/|P|) sum_I V[E[Y|X] | X in I])` when homoscedastic.
pub fn histogram_closed_form<T: Scalar>(problem: &RegressionProblem<T>, basis: &OrthonormalBasis<T>) -> T {
    let partition = basis.partition();
    let quad = Quadrature::for_problem(partition, problem, 0);
    let masses = regularity_report(partition, problem).cell_masses;
    let total: T = (0..partition.len())
        .map(|cell| {
            let mass = masses[cell];
            let mean_s = quad.integrate_cell(cell, |x| problem.target_at(x) * problem.density_at(x)) / mass;
            let var_s = quad.integrate_cell(cell, |x| {
                let d = problem.target_at(x) - mean_s;
                d * d * problem.density_at(x)
            }) / mass;
            let mean_sigma_sq = quad.integrate_cell(cell, |x| {
                let s = problem.sigma_at(x);
                s * s * problem.density_at(x)
            }) / mass;
            mean_sigma_sq + var_s
        })
        .sum();
    T::lit(4.0) * total / T::from_usize_lossy(partition.len())
}

/// `max_k |P(psi_{1,M} phi_k)|`, using `E[psi_{1,M} | X] = -2 (s* - s_M)`.
pub fn centering_residual<T: Scalar>(problem: &RegressionProblem<T>, basis: &OrthonormalBasis<T>, projection: &[T]) -> T {
    let quad = Quadrature::for_problem(basis.partition(), problem, basis.degree());
    let p = basis.block_size();
    let mut vals = vec![T::zero(); p];
    let mut worst = T::zero();
    for cell in 0..basis.partition().len() {
        let mut acc = vec![T::zero(); p];
        for &(x, w) in quad.cell_rule(cell) {
            basis.eval_block_into(cell, x, &mut vals);
            let psi = -T::lit(2.0) * (problem.target_at(x) - basis.eval_combination(projection, x));
            for (a, &v) in acc.iter_mut().zip(&vals) {
                *a = *a + w * psi * v * problem.density_at(x);
            }
        }
        worst = acc.into_iter().fold(worst, |m, a| m.max(a.abs()));
    }
    worst
}

/// `chi_M = sqrt(sum_k [(P_n - P)(psi_{1,M} phi_k)]^2)`. The `P` term vanishes,
/// leaving `(1/n) sum_i -2 (y_i - s_M(x_i)) phi_k(x_i)`.
pub fn chi_diagnostic<T: Scalar>(dataset: &Dataset<T>, basis: &OrthonormalBasis<T>, projection: &[T]) -> T {
    if dataset.is_empty() {
        return T::zero();
    }
    let p = basis.block_size();
    let mut sums = vec![T::zero(); basis.dimension()];
    let mut vals = vec![T::zero(); p];
    for &(x, y) in &dataset.points {
        let cell = basis.partition().cell_of(x);
        basis.eval_block_into(cell, x, &mut vals);
        let psi = -T::lit(2.0) * (y - basis.eval_combination(projection, x));
        for (s, &v) in sums[cell * p..(cell + 1) * p].iter_mut().zip(&vals) {
            *s = *s + psi * v;
        }
    }
    let n = T::from_usize_lossy(dataset.n());
    sums.into_iter().map(|s| (s / n) * (s / n)).sum::<T>().sqrt()
}

/// Empirical excess risk and `chi_M` in one pass over the data, evaluating
/// each point's basis block once.
fn data_statistics<T: Scalar>(dataset: &Dataset<T>, basis: &OrthonormalBasis<T>, fit: &FitResult<T>) -> (T, T) {
    if dataset.is_empty() {
        return (T::zero(), T::zero());
    }
    let p = basis.block_size();
    let mut sums = vec![T::zero(); basis.dimension()];
    let mut vals = vec![T::zero(); p];
    let mut excess = T::zero();
    for &(x, y) in &dataset.points {
        let cell = basis.partition().cell_of(x);
        basis.eval_block_into(cell, x, &mut vals);
        let range = cell * p..(cell + 1) * p;
        let dot = |beta: &[T]| vals.iter().zip(&beta[range.clone()]).map(|(&v, &b)| v * b).sum::<T>();
        let rm = y - dot(&fit.coeff_projection);
        let rn = y - dot(&fit.coeff_estimator);
        excess = excess + (rm * rm - rn * rn);
        let psi = -T::lit(2.0) * rm;
        for (s, &v) in sums[range.clone()].iter_mut().zip(&vals) {
            *s = *s + psi * v;
        }
    }
    let n = T::from_usize_lossy(dataset.n());
    let chi = sums.into_iter().map(|s| (s / n) * (s / n)).sum::<T>().sqrt();
    (excess / n, chi)
}

/// Fits one dataset and computes its full risk record.
pub fn risk_record<T: Scalar>(ctx: &ModelContext<T>, dataset: &Dataset<T>, bias_value: T) -> (FitResult<T>, RiskRecord<T>) {
    let fit = ctx.fit(dataset);
    let (empirical_excess, chi) = data_statistics(dataset, &ctx.basis, &fit);
    let record = RiskRecord {
        true_excess: true_excess_risk(&fit),
        empirical_excess,
        bias: bias_value,
        sup_dist: sup_norm_distance(&fit, &ctx.basis),
        chi,
        degenerate: fit.degenerate,
    };
    (fit, record)
}
