//! Gauss–Legendre rules and composite quadrature over a partition refined at
//! the problem's own breakpoints, so integrands stay polynomial on every
//! subinterval whenever `s*`, `sigma` and `f` are piecewise polynomial.

use crate::partition::Partition;
use crate::problem::RegressionProblem;
use crate::scalar::Scalar;

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[-1, 1]`,
/// computed in `f64` by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be positive");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule: for each partition cell, the mapped nodes and weights of
/// every subinterval between consecutive refinement points.
#[derive(Debug, Clone)]
pub struct Quadrature<T> {
    order: usize,
    cells: Vec<Vec<(T, T)>>,
}

impl<T: Scalar> Quadrature<T> {
    pub fn new(partition: &Partition<T>, refinement: &[T], order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        let half = T::lit(0.5);
        let cells = (0..partition.len())
            .map(|k| {
                let (lo, hi) = partition.bounds(k);
                let mut cuts = vec![lo];
                cuts.extend(refinement.iter().copied().filter(|&t| t > lo && t < hi));
                cuts.push(hi);
                let mut rule = Vec::with_capacity((cuts.len() - 1) * order);
                for w in cuts.windows(2) {
                    let mid = (w[0] + w[1]) * half;
                    let rad = (w[1] - w[0]) * half;
                    for (&u, &wt) in nodes.iter().zip(&weights) {
                        rule.push((mid + rad * T::lit(u), rad * T::lit(wt)));
                    }
                }
                rule
            })
            .collect();
        Self { order, cells }
    }

    /// Rule exact for every integrand used with a degree-`degree` model on
    /// `problem`: the order covers `(sigma^2 + (s_M - s*)^2) phi^2 f` and is
    /// never below `degree + 4`.
    pub fn for_problem(
        partition: &Partition<T>,
        problem: &RegressionProblem<T>,
        degree: usize,
    ) -> Self {
        Self::new(partition, &problem.breakpoints(), Self::order_for(problem, degree))
    }

    pub fn order_for(problem: &RegressionProblem<T>, degree: usize) -> usize {
        let sigma_sq = 2 * problem.noise_level().function().max_degree();
        let bias_sq = 2 * degree.max(problem.target().max_degree());
        let density = problem.design_density().function().max_degree();
        let integrand = sigma_sq.max(bias_sq) + 2 * degree + density;
        (degree + 4).max(integrand / 2 + 1)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cell_rule(&self, cell: usize) -> &[(T, T)] {
        &self.cells[cell]
    }

    pub fn integrate_cell(&self, cell: usize, mut f: impl FnMut(T) -> T) -> T {
        self.cells[cell]
            .iter()
            .fold(T::zero(), |acc, &(x, w)| acc + w * f(x))
    }

    pub fn integrate(&self, mut f: impl FnMut(T) -> T) -> T {
        (0..self.cells.len())
            .map(|k| self.integrate_cell(k, &mut f))
            .sum()
    }
}
