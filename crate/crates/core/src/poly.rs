//! Dense univariate polynomials in ascending-power coefficient form, with
//! closed-form real roots up to degree three and exact sup-norms up to
//! degree four.

use crate::scalar::Scalar;

/// Evaluates `c[0] + c[1] x + ... + c[d] x^d` by Horner's rule.
pub fn eval<T: Scalar>(coeffs: &[T], x: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
}

pub fn derivative<T: Scalar>(coeffs: &[T]) -> Vec<T> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * T::from_usize_lossy(k))
        .collect()
}

/// Drops leading coefficients that are negligible relative to the largest one.
fn trimmed<T: Scalar>(coeffs: &[T]) -> &[T] {
    let scale = coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()));
    if scale == T::zero() {
        return &coeffs[..0];
    }
    let tiny = scale * T::epsilon() * T::lit(16.0);
    let mut len = coeffs.len();
    while len > 0 && coeffs[len - 1].abs() <= tiny {
        len -= 1;
    }
    &coeffs[..len]
}

/// Real roots of a polynomial of effective degree at most three, unsorted and
/// possibly with repeats. Returns `None` for higher degrees. The zero
/// polynomial and nonzero constants have no roots reported.
pub fn real_roots<T: Scalar>(coeffs: &[T]) -> Option<Vec<T>> {
    let c = trimmed(coeffs);
    let roots = match c.len() {
        0 | 1 => Vec::new(),
        2 => vec![-c[0] / c[1]],
        3 => quadratic_roots(c[2], c[1], c[0]),
        4 => cubic_roots(c[3], c[2], c[1], c[0]),
        _ => return None,
    };
    Some(roots.into_iter().map(|r| polish(c, r)).collect())
}

fn quadratic_roots<T: Scalar>(a: T, b: T, c: T) -> Vec<T> {
    let two = T::lit(2.0);
    let disc = b * b - T::lit(4.0) * a * c;
    if disc < T::zero() {
        // A slightly negative discriminant from rounding still marks a double
        // root worth testing as an extremum candidate.
        if disc > -(T::epsilon() * T::lit(64.0)) * (b * b).max((a * c).abs()) {
            return vec![-b / (two * a)];
        }
        return Vec::new();
    }
    let sq = disc.sqrt();
    let q = if b >= T::zero() {
        -(b + sq) / two
    } else {
        -(b - sq) / two
    };
    if q == T::zero() {
        return vec![T::zero(), T::zero()];
    }
    vec![q / a, c / q]
}

fn cubic_roots<T: Scalar>(a: T, b: T, c: T, d: T) -> Vec<T> {
    let three = T::lit(3.0);
    let (bb, cc, dd) = (b / a, c / a, d / a);
    let shift = bb / three;
    let p = cc - bb * bb / three;
    let q = T::lit(2.0) * bb * bb * bb / T::lit(27.0) - bb * cc / three + dd;
    let half_q = q / T::lit(2.0);
    let third_p = p / three;
    let disc = half_q * half_q + third_p * third_p * third_p;

    if disc > T::zero() {
        let sq = disc.sqrt();
        let t = (-half_q + sq).cbrt() + (-half_q - sq).cbrt();
        return vec![t - shift];
    }
    if p == T::zero() {
        return vec![-shift];
    }
    // Three real roots (trigonometric form); p < 0 here.
    let r = T::lit(2.0) * (-third_p).sqrt();
    let arg = (three * q / (T::lit(2.0) * p) * (-three / p).sqrt())
        .max(-T::one())
        .min(T::one());
    let phi = arg.acos() / three;
    let step = T::lit(2.0 * std::f64::consts::PI / 3.0);
    (0..3)
        .map(|k| r * (phi - step * T::from_usize_lossy(k)).cos() - shift)
        .collect()
}

/// A few Newton steps, kept only while they reduce the residual.
fn polish<T: Scalar>(coeffs: &[T], mut x: T) -> T {
    let d = derivative(coeffs);
    let mut fx = eval(coeffs, x).abs();
    for _ in 0..4 {
        let slope = eval(&d, x);
        if slope == T::zero() || !slope.is_finite() {
            break;
        }
        let next = x - eval(coeffs, x) / slope;
        let fnext = eval(coeffs, next).abs();
        if !(fnext < fx) {
            break;
        }
        x = next;
        fx = fnext;
    }
    x
}

/// Minimum and maximum of `p` over `[lo, hi]`.
///
/// Exact (up to rounding) when the degree is at most four: extrema sit at an
/// endpoint or a critical point, and critical points come from the
/// closed-form cubic. A uniform grid is scanned either way; for higher
/// degrees the grid alone is used and the range is an inner approximation.
pub fn range_on<T: Scalar>(coeffs: &[T], lo: T, hi: T) -> (T, T) {
    let c = trimmed(coeffs);
    if c.is_empty() {
        return (T::zero(), T::zero());
    }
    let grid = if c.len() <= 5 { 8 } else { 2048 };
    let width = hi - lo;
    let (mut min, mut max) = (T::infinity(), T::neg_infinity());
    let mut visit = |x: T| {
        let v = eval(c, x);
        min = min.min(v);
        max = max.max(v);
    };
    visit(lo);
    visit(hi);
    for k in 1..grid {
        visit(lo + width * T::from_usize_lossy(k) / T::from_usize_lossy(grid));
    }
    if let Some(crit) = real_roots(&derivative(c)) {
        for x in crit {
            if x > lo && x < hi {
                visit(x);
            }
        }
    }
    (min, max)
}

/// `max_{x in [lo, hi]} |p(x)|`, with the same exactness as [`range_on`].
pub fn sup_abs_on<T: Scalar>(coeffs: &[T], lo: T, hi: T) -> T {
    let (min, max) = range_on(coeffs, lo, hi);
    min.abs().max(max.abs())
}

/// `int_lo^hi p(x) dx` from the antiderivative.
pub fn integrate<T: Scalar>(coeffs: &[T], lo: T, hi: T) -> T {
    let primitive = |x: T| {
        coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(T::zero(), |acc, (k, &c)| (acc + c / T::from_usize_lossy(k + 1)) * x)
    };
    primitive(hi) - primitive(lo)
}

/// Antiderivative vanishing at zero.
pub fn antiderivative<T: Scalar>(coeffs: &[T]) -> Vec<T> {
    std::iter::once(T::zero())
        .chain(
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c / T::from_usize_lossy(k + 1)),
        )
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn horner_matches_direct_sum() {
        let c = [1.0, -2.0, 0.5, 3.0];
        let x = 0.7_f64;
        let direct = 1.0 - 2.0 * x + 0.5 * x * x + 3.0 * x * x * x;
        assert!((eval(&c, x) - direct).abs() < 1e-15);
    }

    #[test]
    fn cubic_with_three_real_roots() {
        // (x - 1)(x + 0.5)(x - 0.25)
        let c = [0.125, -0.375, -0.75, 1.0];
        let r = sorted(real_roots(&c).unwrap());
        for (got, want) in r.iter().zip([-0.5, 0.25, 1.0]) {
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
    }

    #[test]
    fn cubic_with_one_real_root() {
        // (x - 2)(x^2 + 1)
        let c = [-2.0f64, 1.0, -2.0, 1.0];
        let r = real_roots(&c).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn degenerate_leading_coefficients_fall_back() {
        let r = real_roots(&[-1.0, 2.0, 0.0, 0.0]).unwrap();
        assert_eq!(r, vec![0.5]);
        assert!(real_roots(&[3.0_f64]).unwrap().is_empty());
        assert!(real_roots(&[0.0_f64, 0.0]).unwrap().is_empty());
        assert!(real_roots(&[1.0_f64, 0.0, 0.0, 0.0, 1.0]).is_none());
    }

    #[test]
    fn double_root_of_quadratic() {
        let r = real_roots(&[1.0f64, -2.0, 1.0]).unwrap();
        assert!(r.iter().all(|x| (x - 1.0).abs() < 1e-7));
    }

    #[test]
    fn sup_of_linear_is_at_endpoint() {
        // sqrt(3) (2x - 1) * 0.1 on [0, 1]
        let s3 = 3f64.sqrt();
        let c = [-0.1 * s3, 0.2 * s3];
        assert!((sup_abs_on(&c, 0.0, 1.0) - 0.1 * s3).abs() < 1e-15);
    }

    #[test]
    fn sup_of_quartic_uses_interior_critical_point() {
        // 1 - 4 (x - 0.3)^2 peaks at 1 inside; the endpoint -1 dominates.
        let c = [1.0 - 4.0 * 0.09, 8.0 * 0.3, -4.0];
        let want = (1.0 - 4.0 * 1.69_f64).abs();
        assert!((sup_abs_on(&c, -1.0, 1.0) - want).abs() < 1e-14);
        assert!((range_on(&c, -0.5, 0.9).1 - 1.0).abs() < 1e-14);
        // Chebyshev T4 reaches 1 only at interior critical points on [-0.9, 0.9].
        let t4 = [1.0f64, 0.0, -8.0, 0.0, 8.0];
        assert!((sup_abs_on(&t4, -0.9, 0.9) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn integral_of_quadratic() {
        let c = [1.0f64, 2.0, 3.0];
        assert!((integrate(&c, 0.0, 1.0) - 3.0).abs() < 1e-15);
        assert!((integrate(&c, 0.5, 1.0) - (0.5 + 0.75 + 0.875)).abs() < 1e-15);
    }

    #[test]
    fn cubic_roots_in_f32() {
        let c = [0.125_f32, -0.375, -0.75, 1.0];
        let r = real_roots(&c).unwrap();
        assert_eq!(r.len(), 3);
        for x in r {
            assert!(eval(&c, x).abs() < 1e-5);
        }
    }
}
