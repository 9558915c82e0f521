//! Interval partitions of `[0, 1]` and their regularity constants with
//! respect to the design law and to Lebesgue measure.

use crate::error::Result;
use crate::problem::{locate, validate_breakpoints, RegressionProblem};
use crate::quadrature::Quadrature;
use crate::scalar::Scalar;

/// Cells `[t_k, t_{k+1})`, the last one closed at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition<T> {
    breakpoints: Vec<T>,
}

impl<T: Scalar> Partition<T> {
    pub fn new(breakpoints: Vec<T>) -> Result<Self> {
        validate_breakpoints(&breakpoints)?;
        Ok(Self { breakpoints })
    }

    /// `cells` intervals of width `1 / cells`.
    pub fn equal_width(cells: usize) -> Self {
        assert!(cells >= 1, "a partition has at least one cell");
        let m = T::from_usize_lossy(cells);
        let mut breakpoints: Vec<T> = (0..cells)
            .map(|k| T::from_usize_lossy(k) / m)
            .collect();
        breakpoints.push(T::one());
        Self { breakpoints }
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_of(&self, x: T) -> usize {
        locate(&self.breakpoints, x)
    }

    pub fn bounds(&self, cell: usize) -> (T, T) {
        (self.breakpoints[cell], self.breakpoints[cell + 1])
    }

    pub fn length(&self, cell: usize) -> T {
        self.breakpoints[cell + 1] - self.breakpoints[cell]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport<T> {
    /// `sqrt(|P| min_I P^X(I))`.
    pub lower_const_p: T,
    /// `sqrt(|P| min_I Leb(I))`.
    pub lower_const_leb: T,
    /// `|P| max_I P^X(I)`.
    pub upper_const_p: T,
    pub cell_masses: Vec<T>,
}

pub fn regularity_report<T: Scalar>(
    partition: &Partition<T>,
    problem: &RegressionProblem<T>,
) -> RegularityReport<T> {
    let quad = Quadrature::for_problem(partition, problem, 0);
    let cell_masses: Vec<T> = (0..partition.len())
        .map(|k| quad.integrate_cell(k, |x| problem.density_at(x)))
        .collect();
    let m = T::from_usize_lossy(partition.len());
    let min_mass = cell_masses.iter().copied().fold(T::infinity(), T::min);
    let max_mass = cell_masses.iter().copied().fold(T::zero(), T::max);
    let min_len = (0..partition.len())
        .map(|k| partition.length(k))
        .fold(T::infinity(), T::min);
    RegularityReport {
        lower_const_p: (m * min_mass).sqrt(),
        lower_const_leb: (m * min_len).sqrt(),
        upper_const_p: m * max_mass,
        cell_masses,
    }
}
