//! Ground-truth random-design regression problems on `[0, 1]` and seeded
//! sampling of i.i.d. datasets `Y = s*(X) + sigma(X) eps`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::poly;
use crate::scalar::Scalar;

/// Grid resolution used to validate pointwise bounds of non-polynomial pieces.
const CHECK_GRID: usize = 4096;

/// Tolerance on `int_0^1 f = 1`.
pub const DENSITY_MASS_TOL: f64 = 1e-9;

/// A function on `[0, 1]` that is polynomial on each piece `[t_k, t_{k+1})`.
/// Coefficients are ascending powers of the global variable `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolynomial<T> {
    breakpoints: Vec<T>,
    pieces: Vec<Vec<T>>,
}

impl<T: Scalar> PiecewisePolynomial<T> {
    pub fn new(breakpoints: Vec<T>, pieces: Vec<Vec<T>>) -> Result<Self> {
        validate_breakpoints(&breakpoints)?;
        if pieces.len() + 1 != breakpoints.len() {
            return Err(Error::config(format!(
                "{} breakpoints describe {} pieces, but {} coefficient lists were given",
                breakpoints.len(),
                breakpoints.len() - 1,
                pieces.len()
            )));
        }
        if pieces.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::config("non-finite polynomial coefficient"));
        }
        Ok(Self { breakpoints, pieces })
    }

    pub fn constant(value: T) -> Self {
        Self::polynomial(vec![value])
    }

    /// One polynomial on all of `[0, 1]`.
    pub fn polynomial(coeffs: Vec<T>) -> Self {
        Self {
            breakpoints: vec![T::zero(), T::one()],
            pieces: vec![coeffs],
        }
    }

    /// Piecewise-constant function with the given values per piece.
    pub fn step(breakpoints: Vec<T>, values: Vec<T>) -> Result<Self> {
        Self::new(breakpoints, values.into_iter().map(|v| vec![v]).collect())
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Vec<T>] {
        &self.pieces
    }

    pub fn max_degree(&self) -> usize {
        self.pieces
            .iter()
            .map(|p| p.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
    }

    pub fn piece_index(&self, x: T) -> usize {
        locate(&self.breakpoints, x)
    }

    pub fn eval(&self, x: T) -> T {
        poly::eval(&self.pieces[self.piece_index(x)], x)
    }

    /// `(min, max)` over `[0, 1]`.
    pub fn range(&self) -> (T, T) {
        self.pieces
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(p, w)| poly::range_on(p, w[0], w[1]))
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), (a, b)| {
                (lo.min(a), hi.max(b))
            })
    }

    pub fn sup_abs(&self) -> T {
        let (lo, hi) = self.range();
        lo.abs().max(hi.abs())
    }

    pub fn integral(&self) -> T {
        self.pieces
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(p, w)| poly::integrate(p, w[0], w[1]))
            .sum()
    }
}

/// Index `k` with `t_k <= x < t_{k+1}`, the last cell closed at its right end.
pub(crate) fn locate<T: Scalar>(breakpoints: &[T], x: T) -> usize {
    let cells = breakpoints.len() - 1;
    breakpoints
        .partition_point(|&t| t <= x)
        .saturating_sub(1)
        .min(cells - 1)
}

pub(crate) fn validate_breakpoints<T: Scalar>(breakpoints: &[T]) -> Result<()> {
    if breakpoints.len() < 2 {
        return Err(Error::config("at least two breakpoints (0 and 1) are required"));
    }
    if breakpoints[0] != T::zero() || *breakpoints.last().unwrap() != T::one() {
        return Err(Error::config(format!(
            "breakpoints must start at 0 and end at 1, got {} .. {}",
            breakpoints[0],
            breakpoints.last().unwrap()
        )));
    }
    if let Some(w) = breakpoints.windows(2).find(|w| !(w[0] < w[1])) {
        return Err(Error::config(format!(
            "breakpoints must be strictly increasing ({} >= {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Named families for the noise level `sigma(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseFamily<T> {
    Constant(T),
    PiecewiseConstant { breakpoints: Vec<T>, values: Vec<T> },
    Polynomial(Vec<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseLevel<T> {
    family: NoiseFamily<T>,
    function: PiecewisePolynomial<T>,
    min: T,
    max: T,
}

impl<T: Scalar> NoiseLevel<T> {
    pub fn new(family: NoiseFamily<T>) -> Result<Self> {
        let function = match &family {
            NoiseFamily::Constant(v) => PiecewisePolynomial::constant(*v),
            NoiseFamily::PiecewiseConstant {
                breakpoints,
                values,
            } => PiecewisePolynomial::step(breakpoints.clone(), values.clone())?,
            NoiseFamily::Polynomial(c) => PiecewisePolynomial::polynomial(c.clone()),
        };
        let (min, max) = checked_range(&function);
        if !(min >= T::zero()) {
            return Err(Error::config(format!(
                "noise level must be nonnegative on [0, 1], minimum found {min}"
            )));
        }
        Ok(Self {
            family,
            function,
            min,
            max,
        })
    }

    pub fn constant(value: T) -> Result<Self> {
        Self::new(NoiseFamily::Constant(value))
    }

    pub fn family(&self) -> &NoiseFamily<T> {
        &self.family
    }

    pub fn function(&self) -> &PiecewisePolynomial<T> {
        &self.function
    }

    pub fn eval(&self, x: T) -> T {
        self.function.eval(x)
    }

    pub fn sigma_min(&self) -> T {
        self.min
    }

    pub fn sigma_max(&self) -> T {
        self.max
    }
}

/// Named families for the design density `f` of `P^X`.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityFamily<T> {
    Uniform,
    PiecewiseConstant { breakpoints: Vec<T>, values: Vec<T> },
    /// Degree at most two, so the CDF inverts in closed form.
    Polynomial(Vec<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignDensity<T> {
    family: DensityFamily<T>,
    function: PiecewisePolynomial<T>,
    /// CDF value at each breakpoint of `function`.
    cumulative: Vec<T>,
    c_min: T,
    c_max: T,
}

impl<T: Scalar> DesignDensity<T> {
    pub fn new(family: DensityFamily<T>) -> Result<Self> {
        let function = match &family {
            DensityFamily::Uniform => PiecewisePolynomial::constant(T::one()),
            DensityFamily::PiecewiseConstant {
                breakpoints,
                values,
            } => PiecewisePolynomial::step(breakpoints.clone(), values.clone())?,
            DensityFamily::Polynomial(c) => {
                if c.is_empty() || c.len() > 3 {
                    return Err(Error::config(format!(
                        "polynomial design density must have degree 0, 1 or 2 (got {} coefficients)",
                        c.len()
                    )));
                }
                PiecewisePolynomial::polynomial(c.clone())
            }
        };
        let (c_min, c_max) = checked_range(&function);
        if !(c_min > T::zero()) {
            return Err(Error::config(format!(
                "design density must be bounded below by c_min > 0 on [0, 1], minimum found {c_min}"
            )));
        }
        let mass = function.integral();
        if !((mass - T::one()).abs() <= T::lit(DENSITY_MASS_TOL)) {
            return Err(Error::config(format!(
                "design density must integrate to 1, got {mass}"
            )));
        }
        let mut cumulative = Vec::with_capacity(function.breakpoints().len());
        cumulative.push(T::zero());
        let mut acc = T::zero();
        for (p, w) in function.pieces().iter().zip(function.breakpoints().windows(2)) {
            acc = acc + poly::integrate(p, w[0], w[1]);
            cumulative.push(acc);
        }
        Ok(Self {
            family,
            function,
            cumulative,
            c_min,
            c_max,
        })
    }

    pub fn uniform() -> Self {
        Self::new(DensityFamily::Uniform).expect("uniform density is valid")
    }

    pub fn family(&self) -> &DensityFamily<T> {
        &self.family
    }

    pub fn function(&self) -> &PiecewisePolynomial<T> {
        &self.function
    }

    pub fn eval(&self, x: T) -> T {
        self.function.eval(x)
    }

    pub fn c_min(&self) -> T {
        self.c_min
    }

    pub fn c_max(&self) -> T {
        self.c_max
    }

    pub fn cdf(&self, x: T) -> T {
        let k = self.function.piece_index(x);
        let lo = self.function.breakpoints()[k];
        self.cumulative[k] + poly::integrate(&self.function.pieces()[k], lo, x)
    }

    /// Inverse CDF; the result is kept in `[0, 1)`.
    pub fn quantile(&self, u: T) -> T {
        let bps = self.function.breakpoints();
        let total = *self.cumulative.last().unwrap();
        let u = u * total;
        let k = locate(&self.cumulative, u);
        let (lo, hi) = (bps[k], bps[k + 1]);
        let piece = &self.function.pieces()[k];
        let target = u - self.cumulative[k];
        let x = if piece.len() == 1 {
            lo + target / piece[0]
        } else {
            // Newton's method on the increasing function int_lo^x f - target,
            // kept inside a shrinking bracket.
            let (mut a, mut b) = (lo, hi);
            let mut x = lo + (hi - lo) * target / (self.cumulative[k + 1] - self.cumulative[k]);
            for _ in 0..60 {
                let g = poly::integrate(piece, lo, x) - target;
                if g > T::zero() {
                    b = x;
                } else {
                    a = x;
                }
                let step = g / poly::eval(piece, x);
                if step.abs() <= T::epsilon() * T::lit(4.0) * x.abs().max(T::one()) {
                    break;
                }
                let next = x - step;
                x = if next > a && next < b { next } else { (a + b) / T::lit(2.0) };
            }
            x
        };
        half_open(x.max(lo).min(hi))
    }
}

/// Largest value strictly below one when `x` reaches one.
fn half_open<T: Scalar>(x: T) -> T {
    if x >= T::one() {
        T::one() - T::epsilon() / T::lit(2.0)
    } else {
        x.max(T::zero())
    }
}

/// `(min, max)` of a piecewise polynomial, also scanning a fine grid so
/// high-degree pieces are not trusted to the candidate-point search alone.
fn checked_range<T: Scalar>(f: &PiecewisePolynomial<T>) -> (T, T) {
    let (mut lo, mut hi) = f.range();
    for k in 0..=CHECK_GRID {
        let v = f.eval(T::from_usize_lossy(k) / T::from_usize_lossy(CHECK_GRID));
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Distribution of the standardized noise `eps` (mean 0, variance 1, bounded).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseShape {
    /// Uniform on `{-1, +1}`.
    Rademacher,
    /// Uniform on `[-sqrt 3, sqrt 3]`.
    Uniform,
}

impl NoiseShape {
    pub fn support_radius<T: Scalar>(self) -> T {
        match self {
            NoiseShape::Rademacher => T::one(),
            NoiseShape::Uniform => T::lit(3.0).sqrt(),
        }
    }

    fn draw<T: Scalar, R: Rng>(self, rng: &mut R) -> T {
        match self {
            NoiseShape::Rademacher => {
                if rng.gen::<bool>() {
                    T::one()
                } else {
                    -T::one()
                }
            }
            NoiseShape::Uniform => {
                let u: f64 = rng.gen();
                T::lit(3f64.sqrt() * (2.0 * u - 1.0))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionProblem<T> {
    target: PiecewisePolynomial<T>,
    noise_level: NoiseLevel<T>,
    design_density: DesignDensity<T>,
    noise_shape: NoiseShape,
    bound_a: T,
}

impl<T: Scalar> RegressionProblem<T> {
    /// Validates that `|Y| <= A` holds almost surely.
    pub fn new(
        target: PiecewisePolynomial<T>,
        noise_level: NoiseLevel<T>,
        design_density: DesignDensity<T>,
        noise_shape: NoiseShape,
        bound_a: T,
    ) -> Result<Self> {
        if !(bound_a > T::zero()) || !bound_a.is_finite() {
            return Err(Error::config(format!("bound A must be positive, got {bound_a}")));
        }
        let (lo, hi) = checked_range(&target);
        let envelope = lo.abs().max(hi.abs())
            + noise_level.sigma_max() * noise_shape.support_radius::<T>();
        if envelope > bound_a * (T::one() + T::lit(1e-12)) {
            return Err(Error::config(format!(
                "sup|s*| + sigma_max * radius(eps) = {envelope} exceeds bound A = {bound_a}"
            )));
        }
        Ok(Self {
            target,
            noise_level,
            design_density,
            noise_shape,
            bound_a,
        })
    }

    pub fn target(&self) -> &PiecewisePolynomial<T> {
        &self.target
    }

    pub fn noise_level(&self) -> &NoiseLevel<T> {
        &self.noise_level
    }

    pub fn design_density(&self) -> &DesignDensity<T> {
        &self.design_density
    }

    pub fn noise_shape(&self) -> NoiseShape {
        self.noise_shape
    }

    pub fn bound_a(&self) -> T {
        self.bound_a
    }

    pub fn target_at(&self, x: T) -> T {
        self.target.eval(x)
    }

    pub fn sigma_at(&self, x: T) -> T {
        self.noise_level.eval(x)
    }

    pub fn density_at(&self, x: T) -> T {
        self.design_density.eval(x)
    }

    /// Every breakpoint at which one of `s*`, `sigma` or `f` may change
    /// polynomial piece, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<T> {
        let mut all: Vec<T> = self
            .target
            .breakpoints()
            .iter()
            .chain(self.noise_level.function().breakpoints())
            .chain(self.design_density.function().breakpoints())
            .copied()
            .collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        all.dedup();
        all
    }

    /// Draws `n` observations; deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Dataset<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..n)
            .map(|_| {
                let u: f64 = rng.gen();
                let x = self.design_density.quantile(T::lit(u));
                let eps: T = self.noise_shape.draw(&mut rng);
                (x, self.target_at(x) + self.sigma_at(x) * eps)
            })
            .collect();
        Dataset { points, seed }
    }
}

pub fn sample_dataset<T: Scalar>(problem: &RegressionProblem<T>, n: usize, seed: u64) -> Dataset<T> {
    problem.sample(n, seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub points: Vec<(T, T)>,
    pub seed: u64,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(points: Vec<(T, T)>) -> Self {
        Self { points, seed: 0 }
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
