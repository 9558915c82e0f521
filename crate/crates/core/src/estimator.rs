//! The `L2(P^X)` projection `s_M` of the target and the least-squares
//! estimator `s_n`, both in basis coordinates.

use crate::basis::{cholesky, OrthonormalBasis};
use crate::poly;
use crate::problem::{Dataset, RegressionProblem};
use crate::quadrature::Quadrature;
use crate::scalar::Scalar;

/// Threshold on `||L_{n,D}||` (max absolute row sum) above which a fit is
/// flagged degenerate.
pub const DEFAULT_GRAM_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T> {
    /// `beta_M`, coordinates of `s_M`.
    pub coeff_projection: Vec<T>,
    /// `beta^(n)`, coordinates of `s_n`.
    pub coeff_estimator: Vec<T>,
    pub degenerate: bool,
    /// Cells holding no sample point; their coefficients are imputed from
    /// the projection.
    pub empty_cells: Vec<usize>,
    /// Cells whose empirical Gram block could not be factorized; imputed too.
    pub singular_cells: Vec<usize>,
    /// `||L_{n,D}||`, max absolute row sum of `(P_n - P)(phi_j phi_k)`.
    pub cond_estimate: T,
}

/// `beta_M[k] = int s* phi_k f`.
pub fn project_target<T: Scalar>(
    problem: &RegressionProblem<T>,
    basis: &OrthonormalBasis<T>,
) -> Vec<T> {
    let quad = Quadrature::for_problem(basis.partition(), problem, basis.degree());
    let p = basis.block_size();
    let mut beta = vec![T::zero(); basis.dimension()];
    let mut vals = vec![T::zero(); p];
    for cell in 0..basis.partition().len() {
        for &(x, w) in quad.cell_rule(cell) {
            basis.eval_block_into(cell, x, &mut vals);
            let wsf = w * problem.target_at(x) * problem.density_at(x);
            for (b, &v) in beta[cell * p..(cell + 1) * p].iter_mut().zip(&vals) {
                *b = *b + wsf * v;
            }
        }
    }
    beta
}

/// Solves `(Id + L_{n,D}) beta = X_{y,n}` cell by cell, where
/// `(L_{n,D})_{jk} = (P_n - P)(phi_j phi_k)` and `X_{y,n}[k] = P_n(y phi_k)`.
///
/// Empty cells, cells with a singular empirical Gram block, and fits with
/// `||L_{n,D}|| > gram_threshold` are flagged degenerate; coefficients of the
/// first two kinds are copied from `projection`.
pub fn fit_least_squares<T: Scalar>(
    dataset: &Dataset<T>,
    basis: &OrthonormalBasis<T>,
    projection: &[T],
    gram_threshold: T,
) -> FitResult<T> {
    assert_eq!(projection.len(), basis.dimension());
    let cells = basis.partition().len();
    let p = basis.block_size();
    let mut gram = vec![T::zero(); cells * p * p];
    let mut rhs = vec![T::zero(); cells * p];
    let mut counts = vec![0usize; cells];
    let mut vals = vec![T::zero(); p];
    for &(x, y) in &dataset.points {
        let cell = basis.partition().cell_of(x);
        counts[cell] += 1;
        basis.eval_block_into(cell, x, &mut vals);
        let g = &mut gram[cell * p * p..(cell + 1) * p * p];
        for j in 0..p {
            rhs[cell * p + j] = rhs[cell * p + j] + y * vals[j];
            for k in 0..p {
                g[j * p + k] = g[j * p + k] + vals[j] * vals[k];
            }
        }
    }
    let n = T::from_usize_lossy(dataset.n().max(1));
    gram.iter_mut().for_each(|g| *g = *g / n);
    rhs.iter_mut().for_each(|r| *r = *r / n);

    let mut cond = T::zero();
    for cell in 0..cells {
        for j in 0..p {
            let row: T = (0..p)
                .map(|k| {
                    let delta = if j == k { T::one() } else { T::zero() };
                    (gram[cell * p * p + j * p + k] - delta).abs()
                })
                .sum();
            cond = cond.max(row);
        }
    }

    let mut coeff = projection.to_vec();
    let mut empty_cells = Vec::new();
    let mut singular_cells = Vec::new();
    for cell in 0..cells {
        if counts[cell] == 0 {
            empty_cells.push(cell);
            continue;
        }
        let block: Vec<Vec<T>> = (0..p)
            .map(|j| gram[cell * p * p + j * p..cell * p * p + (j + 1) * p].to_vec())
            .collect();
        match solve_spd(&block, &rhs[cell * p..(cell + 1) * p]) {
            Some(sol) => coeff[cell * p..(cell + 1) * p].copy_from_slice(&sol),
            None => singular_cells.push(cell),
        }
    }
    let degenerate = !empty_cells.is_empty() || !singular_cells.is_empty() || cond > gram_threshold;
    FitResult {
        coeff_projection: projection.to_vec(),
        coeff_estimator: coeff,
        degenerate,
        empty_cells,
        singular_cells,
        cond_estimate: cond,
    }
}

fn solve_spd<T: Scalar>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let l = cholesky(a)?;
    let n = b.len();
    let mut z = vec![T::zero(); n];
    for i in 0..n {
        let s: T = (0..i).map(|k| l[i][k] * z[k]).sum();
        z[i] = (b[i] - s) / l[i][i];
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let s: T = (i + 1..n).map(|k| l[k][i] * x[k]).sum();
        x[i] = (z[i] - s) / l[i][i];
    }
    Some(x)
}

/// `||s_n - s_M||_inf`, from per-cell polynomial extrema.
pub fn sup_norm_distance<T: Scalar>(fit: &FitResult<T>, basis: &OrthonormalBasis<T>) -> T {
    let diff: Vec<T> = fit
        .coeff_estimator
        .iter()
        .zip(&fit.coeff_projection)
        .map(|(&a, &b)| a - b)
        .collect();
    basis.sup_norm_of(&diff)
}

/// `P_n(K s_beta) = (1/n) sum_i (y_i - s_beta(x_i))^2`.
pub fn empirical_risk<T: Scalar>(dataset: &Dataset<T>, basis: &OrthonormalBasis<T>, beta: &[T]) -> T {
    if dataset.is_empty() {
        return T::zero();
    }
    let total: T = dataset
        .points
        .iter()
        .map(|&(x, y)| {
            let r = y - basis.eval_combination(beta, x);
            r * r
        })
        .sum();
    total / T::from_usize_lossy(dataset.n())
}

/// A problem, a basis of the model and the projection coordinates, ready to
/// fit datasets drawn from the problem.
#[derive(Debug, Clone)]
pub struct ModelContext<T> {
    pub problem: RegressionProblem<T>,
    pub basis: OrthonormalBasis<T>,
    pub projection: Vec<T>,
    pub gram_threshold: T,
}

impl<T: Scalar> ModelContext<T> {
    pub fn new(problem: RegressionProblem<T>, basis: OrthonormalBasis<T>) -> Self {
        let projection = project_target(&problem, &basis);
        Self {
            problem,
            basis,
            projection,
            gram_threshold: T::lit(DEFAULT_GRAM_THRESHOLD),
        }
    }

    pub fn with_gram_threshold(mut self, threshold: T) -> Self {
        self.gram_threshold = threshold;
        self
    }

    pub fn fit(&self, dataset: &Dataset<T>) -> FitResult<T> {
        fit_least_squares(dataset, &self.basis, &self.projection, self.gram_threshold)
    }

    pub fn projection_at(&self, x: T) -> T {
        self.basis.eval_combination(&self.projection, x)
    }

    /// `max_k |int (s* - s_M) phi_k f|`.
    pub fn orthogonality_residual(&self) -> T {
        let quad = Quadrature::for_problem(self.basis.partition(), &self.problem, self.basis.degree());
        let p = self.basis.block_size();
        let mut worst = T::zero();
        let mut vals = vec![T::zero(); p];
        for cell in 0..self.basis.partition().len() {
            let mut acc = vec![T::zero(); p];
            for &(x, w) in quad.cell_rule(cell) {
                self.basis.eval_block_into(cell, x, &mut vals);
                let r = w * (self.problem.target_at(x) - self.projection_at(x)) * self.problem.density_at(x);
                for (a, &v) in acc.iter_mut().zip(&vals) {
                    *a = *a + r * v;
                }
            }
            worst = acc.into_iter().fold(worst, |m, a| m.max(a.abs()));
        }
        worst
    }
}

/// Local polynomial of `s_beta` on `cell` evaluated at global `x`; used by
/// tests that compare reconstructed functions pointwise.
pub fn reconstruct<T: Scalar>(basis: &OrthonormalBasis<T>, beta: &[T], x: T) -> T {
    let cell = basis.partition().cell_of(x);
    let p = basis.block_size();
    let c = basis.cell_polynomial(cell, &beta[cell * p..(cell + 1) * p]);
    poly::eval(&c, basis.local_coord(cell, x))
}
