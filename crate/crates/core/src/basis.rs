//! Localized orthonormal bases of histogram and piecewise-polynomial models
//! in `L2(P^X)`.
//!
//! Every basis function lives on a single cell. On cell `I = [a, b)` the
//! functions are stored as polynomials in the local coordinate
//! `u = (2x - a - b) / (b - a)`, which spans the same space as the monomials
//! `1, x, ..., x^r` while keeping the monomial Gram matrix well conditioned
//! on thin cells.

use crate::error::{Error, Result};
use crate::partition::{regularity_report, Partition};
use crate::poly;
use crate::problem::RegressionProblem;
use crate::quadrature::Quadrature;
use crate::scalar::Scalar;

/// Absolute tolerance on Gram residuals for `f64`.
pub const ORTHONORMALITY_TOL: f64 = 1e-8;

/// Highest supported polynomial degree per cell.
pub const MAX_DEGREE: usize = 4;

/// Orthonormality tolerance at the working precision of `T`.
pub fn orthonormality_tol<T: Scalar>() -> T {
    T::lit(ORTHONORMALITY_TOL).max(T::epsilon() * T::lit(1000.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis<T> {
    partition: Partition<T>,
    degree: usize,
    /// `blocks[cell][j]`: local-coordinate coefficients of `phi_{cell, j}`.
    blocks: Vec<Vec<Vec<T>>>,
    localization_const: T,
    sup_norms: Vec<T>,
}

impl<T: Scalar> OrthonormalBasis<T> {
    /// Assembles a basis from per-cell coefficient blocks and measures its
    /// sup-norms and localization constant. No orthonormality check is made;
    /// see [`gram_residual`].
    pub fn from_blocks(partition: Partition<T>, degree: usize, blocks: Vec<Vec<Vec<T>>>) -> Self {
        assert_eq!(blocks.len(), partition.len(), "one block per cell");
        assert!(
            blocks.iter().all(|b| b.len() == degree + 1 && b.iter().all(|c| c.len() <= degree + 1)),
            "each block holds degree + 1 polynomials of degree <= degree"
        );
        let sup_norms = blocks
            .iter()
            .flatten()
            .map(|c| poly::sup_abs_on(c, -T::one(), T::one()))
            .collect();
        let dim = T::from_usize_lossy(partition.len() * (degree + 1));
        let localization_const = blocks
            .iter()
            .map(|b| block_abs_sum_sup(b))
            .fold(T::zero(), T::max)
            / dim.sqrt();
        Self {
            partition,
            degree,
            blocks,
            localization_const,
            sup_norms,
        }
    }

    pub fn partition(&self) -> &Partition<T> {
        &self.partition
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dimension(&self) -> usize {
        self.partition.len() * (self.degree + 1)
    }

    /// Functions per cell, `r + 1`.
    pub fn block_size(&self) -> usize {
        self.degree + 1
    }

    pub fn block(&self, cell: usize) -> &[Vec<T>] {
        &self.blocks[cell]
    }

    /// Measured `r_M(phi)`: the smallest constant with
    /// `||sum beta_k phi_k||_inf <= r_M sqrt(D) |beta|_inf` for every `beta`.
    pub fn localization_const(&self) -> T {
        self.localization_const
    }

    pub fn sup_norms(&self) -> &[T] {
        &self.sup_norms
    }

    /// `max_{I, j} ||phi_{I,j}||_inf sqrt(Leb(I))`, the quantity bounded
    /// uniformly over partitions for a fixed degree and density floor.
    pub fn max_scaled_sup_norm(&self) -> T {
        let p = self.block_size();
        (0..self.partition.len())
            .flat_map(|cell| {
                let len = self.partition.length(cell).sqrt();
                self.sup_norms[cell * p..(cell + 1) * p]
                    .iter()
                    .map(move |&s| s * len)
            })
            .fold(T::zero(), T::max)
    }

    pub fn local_coord(&self, cell: usize, x: T) -> T {
        let (lo, hi) = self.partition.bounds(cell);
        (x + x - lo - hi) / (hi - lo)
    }

    /// Writes `phi_{cell, j}(x)` for `j = 0..=r` into `out`, treating `x` as a
    /// point of `cell`.
    pub fn eval_block_into(&self, cell: usize, x: T, out: &mut [T]) {
        let u = self.local_coord(cell, x);
        for (o, c) in out.iter_mut().zip(&self.blocks[cell]) {
            *o = poly::eval(c, u);
        }
    }

    /// `phi_k(x)`; zero off the function's cell.
    pub fn eval(&self, k: usize, x: T) -> T {
        let cell = k / self.block_size();
        if self.partition.cell_of(x) != cell {
            return T::zero();
        }
        poly::eval(&self.blocks[cell][k % self.block_size()], self.local_coord(cell, x))
    }

    /// `sum_k beta_k phi_k(x)`.
    pub fn eval_combination(&self, beta: &[T], x: T) -> T {
        let cell = self.partition.cell_of(x);
        let p = self.block_size();
        let u = self.local_coord(cell, x);
        self.blocks[cell]
            .iter()
            .zip(&beta[cell * p..(cell + 1) * p])
            .map(|(c, &b)| b * poly::eval(c, u))
            .sum()
    }

    /// Local-coordinate polynomial of `sum_j beta_j phi_{cell, j}`.
    pub fn cell_polynomial(&self, cell: usize, beta_block: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.block_size()];
        for (c, &b) in self.blocks[cell].iter().zip(beta_block) {
            for (o, &ci) in out.iter_mut().zip(c) {
                *o = *o + b * ci;
            }
        }
        out
    }

    /// `||sum_k beta_k phi_k||_inf`, exact for degree <= 4.
    pub fn sup_norm_of(&self, beta: &[T]) -> T {
        let p = self.block_size();
        (0..self.partition.len())
            .map(|cell| {
                let c = self.cell_polynomial(cell, &beta[cell * p..(cell + 1) * p]);
                poly::sup_abs_on(&c, -T::one(), T::one())
            })
            .fold(T::zero(), T::max)
    }

    /// Replaces the block of `cell` by `rotation * block` (rows of `rotation`
    /// give the new functions as combinations of the old ones).
    pub fn rotate_block(&self, cell: usize, rotation: &[Vec<T>]) -> Self {
        let mut blocks = self.blocks.clone();
        blocks[cell] = rotation
            .iter()
            .map(|row| self.cell_polynomial(cell, row))
            .collect();
        Self::from_blocks(self.partition.clone(), self.degree, blocks)
    }

    /// Multiplies function `k` by `factor`.
    pub fn scale_function(&self, k: usize, factor: T) -> Self {
        let mut blocks = self.blocks.clone();
        let p = self.block_size();
        for c in &mut blocks[k / p][k % p] {
            *c = *c * factor;
        }
        Self::from_blocks(self.partition.clone(), self.degree, blocks)
    }
}

/// `sup_u sum_j |p_j(u)|`, as the largest sup-norm over sign patterns.
fn block_abs_sum_sup<T: Scalar>(block: &[Vec<T>]) -> T {
    let len = block.iter().map(Vec::len).max().unwrap_or(0);
    (0u32..1 << block.len())
        .map(|mask| {
            let mut c = vec![T::zero(); len];
            for (j, p) in block.iter().enumerate() {
                let sign = if mask >> j & 1 == 1 { -T::one() } else { T::one() };
                for (o, &pi) in c.iter_mut().zip(p) {
                    *o = *o + sign * pi;
                }
            }
            poly::sup_abs_on(&c, -T::one(), T::one())
        })
        .fold(T::zero(), T::max)
}

/// `phi_I = P^X(I)^{-1/2} 1_I`.
pub fn build_histogram_basis<T: Scalar>(
    partition: &Partition<T>,
    problem: &RegressionProblem<T>,
) -> Result<OrthonormalBasis<T>> {
    let report = regularity_report(partition, problem);
    if let Some(cell) = report.cell_masses.iter().position(|&m| !(m > T::zero())) {
        return Err(Error::DegeneratePartition { cell });
    }
    let blocks = report
        .cell_masses
        .iter()
        .map(|&m| vec![vec![T::one() / m.sqrt()]])
        .collect();
    let mut basis = OrthonormalBasis::from_blocks(partition.clone(), 0, blocks);
    basis.localization_const = T::one() / report.lower_const_p;
    Ok(basis)
}

/// Per cell, orthonormalizes `1, u, ..., u^r` for `<g, h> = int_I g h f`
/// through a Cholesky factorization of the weighted monomial Gram matrix.
/// Leading coefficients come out positive.
pub fn build_poly_basis<T: Scalar>(
    partition: &Partition<T>,
    problem: &RegressionProblem<T>,
    degree: usize,
) -> Result<OrthonormalBasis<T>> {
    if degree > MAX_DEGREE {
        return Err(Error::config(format!(
            "polynomial degree {degree} exceeds the supported maximum {MAX_DEGREE}"
        )));
    }
    if !(problem.design_density().c_min() > T::zero()) {
        return Err(Error::config("design density must be bounded below by c_min > 0"));
    }
    let quad = Quadrature::for_problem(partition, problem, degree);
    let p = degree + 1;
    let tol = orthonormality_tol::<T>();
    let mut blocks = Vec::with_capacity(partition.len());
    for cell in 0..partition.len() {
        let (lo, hi) = partition.bounds(cell);
        let mut gram = vec![vec![T::zero(); p]; p];
        for &(x, w) in quad.cell_rule(cell) {
            let u = (x + x - lo - hi) / (hi - lo);
            let wf = w * problem.density_at(x);
            let mut powers = vec![T::one(); 2 * p - 1];
            for k in 1..powers.len() {
                powers[k] = powers[k - 1] * u;
            }
            for (i, row) in gram.iter_mut().enumerate() {
                for (j, g) in row.iter_mut().enumerate() {
                    *g = *g + wf * powers[i + j];
                }
            }
        }
        let chol = cholesky(&gram).ok_or_else(|| Error::Conditioning {
            cell,
            degree,
            detail: format!("monomial Gram matrix not positive definite on [{lo}, {hi})"),
        })?;
        let block = lower_triangular_inverse(&chol);
        let residual = block_gram_residual(&block, &quad, cell, partition, problem);
        if !(residual < tol) {
            return Err(Error::Conditioning {
                cell,
                degree,
                detail: format!("Gram residual {residual} after orthonormalization exceeds {tol}"),
            });
        }
        blocks.push(block);
    }
    Ok(OrthonormalBasis::from_blocks(partition.clone(), degree, blocks))
}

/// Lower Cholesky factor; `None` if a pivot is not clearly positive.
pub(crate) fn cholesky<T: Scalar>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let mut l = vec![vec![T::zero(); n]; n];
    let rel = T::epsilon().sqrt();
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d = d - l[j][k] * l[j][k];
        }
        if !(d > rel * a[j][j].abs()) || !(a[j][j] > T::zero()) {
            return None;
        }
        let ljj = d.sqrt();
        l[j][j] = ljj;
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s = s - l[i][k] * l[j][k];
            }
            l[i][j] = s / ljj;
        }
    }
    Some(l)
}

/// Inverse of a lower-triangular matrix, by forward substitution.
fn lower_triangular_inverse<T: Scalar>(l: &[Vec<T>]) -> Vec<Vec<T>> {
    let n = l.len();
    let mut inv = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        inv[i][i] = T::one() / l[i][i];
        for j in 0..i {
            let mut s = T::zero();
            for k in j..i {
                s = s + l[i][k] * inv[k][j];
            }
            inv[i][j] = -s / l[i][i];
        }
    }
    inv
}

fn block_gram_residual<T: Scalar>(
    block: &[Vec<T>],
    quad: &Quadrature<T>,
    cell: usize,
    partition: &Partition<T>,
    problem: &RegressionProblem<T>,
) -> T {
    let (lo, hi) = partition.bounds(cell);
    let p = block.len();
    let mut gram = vec![vec![T::zero(); p]; p];
    let mut vals = vec![T::zero(); p];
    for &(x, w) in quad.cell_rule(cell) {
        let u = (x + x - lo - hi) / (hi - lo);
        for (v, c) in vals.iter_mut().zip(block) {
            *v = poly::eval(c, u);
        }
        let wf = w * problem.density_at(x);
        for i in 0..p {
            for j in 0..p {
                gram[i][j] = gram[i][j] + wf * vals[i] * vals[j];
            }
        }
    }
    let mut worst = T::zero();
    for (i, row) in gram.iter().enumerate() {
        for (j, &g) in row.iter().enumerate() {
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max((g - target).abs());
        }
    }
    worst
}

/// `Psi_M(x) = sqrt((1/D) sum_k phi_k(x)^2)`.
pub fn unit_envelope<T: Scalar>(basis: &OrthonormalBasis<T>, x: T) -> T {
    let cell = basis.partition().cell_of(x);
    let mut vals = vec![T::zero(); basis.block_size()];
    basis.eval_block_into(cell, x, &mut vals);
    let sq: T = vals.iter().map(|&v| v * v).sum();
    (sq / T::from_usize_lossy(basis.dimension())).sqrt()
}

/// `max_{j,k} |<phi_j, phi_k>_{P^X} - delta_jk|` by quadrature. Functions on
/// distinct cells have disjoint supports, so only diagonal blocks are formed.
pub fn gram_residual<T: Scalar>(basis: &OrthonormalBasis<T>, problem: &RegressionProblem<T>) -> T {
    let quad = Quadrature::for_problem(basis.partition(), problem, basis.degree());
    (0..basis.partition().len())
        .map(|cell| block_gram_residual(basis.block(cell), &quad, cell, basis.partition(), problem))
        .fold(T::zero(), T::max)
}
