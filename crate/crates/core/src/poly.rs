//! Dense univariate polynomials with guaranteed real-root isolation.
//!
//! Roots are found by recursive critical-point isolation: the real roots of
//! the derivative split the axis into intervals of monotonicity, and each
//! interval with a sign change is bisected to machine precision. This finds
//! every real root (including even-multiplicity touch points) of the small,
//! well-scaled polynomials that arise here without an eigenvalue solver.

use crate::scalar::Real;

/// Polynomial with coefficients in ascending degree order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Real> Polynomial<T> {
    /// Build from ascending coefficients `c0 + c1 x + c2 x^2 + ...`;
    /// trailing exact zeros are trimmed.
    pub fn new(coeffs: Vec<T>) -> Self {
        let mut coeffs = coeffs;
        while coeffs.last().is_some_and(|c| *c == T::zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    /// Polynomial `a[0] x + a[1] x^2 + ...` (no constant term).
    pub fn from_degree_one_coeffs(a: &[T]) -> Self {
        let mut coeffs = Vec::with_capacity(a.len() + 1);
        coeffs.push(T::zero());
        coeffs.extend_from_slice(a);
        Polynomial::new(coeffs)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Lowest nonzero term as `(degree, coefficient)`.
    pub fn lowest_term(&self) -> Option<(usize, T)> {
        self.coeffs
            .iter()
            .enumerate()
            .find(|(_, c)| **c != T::zero())
            .map(|(i, c)| (i, *c))
    }

    /// Highest nonzero term as `(degree, coefficient)`.
    pub fn leading_term(&self) -> Option<(usize, T)> {
        self.coeffs.last().map(|c| (self.coeffs.len() - 1, *c))
    }

    pub fn eval(&self, x: T) -> T {
        let mut acc = T::zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Polynomial<T> {
        if self.coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| c * T::of_usize(i))
            .collect();
        Polynomial::new(coeffs)
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Polynomial<T> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(T::zero());
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs.push(c / T::of_usize(i + 1));
        }
        Polynomial::new(coeffs)
    }

    pub fn scale(&self, t: T) -> Polynomial<T> {
        Polynomial::new(self.coeffs.iter().map(|&c| c * t).collect())
    }

    /// Sum of absolute coefficient values.
    pub fn coeff_abs_sum(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |s, c| s + c.abs())
    }

    /// All real roots in ascending order, deduplicated.
    ///
    /// The zero polynomial has no well-defined roots and returns an empty
    /// list; callers treat that case separately.
    pub fn real_roots(&self) -> Vec<T> {
        let Some((low, _)) = self.lowest_term() else {
            return Vec::new();
        };
        // Factor out x^low so the recursion only sees a nonzero constant term.
        let reduced: Vec<T> = self.coeffs[low..].to_vec();
        let mut roots = roots_of(&reduced);
        if low > 0 {
            roots.push(T::zero());
        }
        roots.sort_by(|a, b| a.partial_cmp(b).expect("roots are finite"));
        dedup_sorted(&mut roots);
        roots
    }
}

fn dedup_sorted<T: Real>(roots: &mut Vec<T>) {
    let tol = T::cst(1e-12);
    roots.dedup_by(|a, b| {
        let scale = T::one().max(a.abs()).max(b.abs());
        (*a - *b).abs() <= tol * scale
    });
}

/// Roots of a polynomial given by ascending coefficients with c0 != 0
/// (or degree <= 2, where the closed forms handle every case).
fn roots_of<T: Real>(coeffs: &[T]) -> Vec<T> {
    let deg = coeffs.len().saturating_sub(1);
    match deg {
        0 => Vec::new(),
        1 => vec![-coeffs[0] / coeffs[1]],
        2 => quadratic_roots(coeffs[0], coeffs[1], coeffs[2]),
        _ => {
            let poly = Polynomial::new(coeffs.to_vec());
            let deriv = poly.derivative();
            let crits = deriv.real_roots();
            let bound = cauchy_bound(coeffs);

            let mut points = Vec::with_capacity(crits.len() + 2);
            points.push(-bound);
            for &c in &crits {
                if c > -bound && c < bound {
                    points.push(c);
                }
            }
            points.push(bound);

            let mut roots = Vec::new();
            // Touch roots: critical points where the value vanishes to
            // rounding error.
            for &c in &crits {
                if is_negligible(&poly, c) {
                    roots.push(c);
                }
            }
            for w in points.windows(2) {
                let (a, b) = (w[0], w[1]);
                let (fa, fb) = (poly.eval(a), poly.eval(b));
                if fa == T::zero() {
                    roots.push(a);
                } else if fa * fb < T::zero() {
                    roots.push(bisect(&poly, a, b, fa));
                }
            }
            let last = *points.last().unwrap();
            if poly.eval(last) == T::zero() {
                roots.push(last);
            }
            roots
        }
    }
}

/// Numerically stable quadratic formula.
fn quadratic_roots<T: Real>(c0: T, c1: T, c2: T) -> Vec<T> {
    let disc = c1 * c1 - T::cst(4.0) * c2 * c0;
    if disc < T::zero() {
        return Vec::new();
    }
    if disc == T::zero() {
        return vec![-c1 / (T::cst(2.0) * c2)];
    }
    let sq = disc.sqrt();
    let q = if c1 >= T::zero() {
        -(c1 + sq) / T::cst(2.0)
    } else {
        -(c1 - sq) / T::cst(2.0)
    };
    vec![q / c2, c0 / q]
}

/// Cauchy root bound: all roots lie in [-M, M].
fn cauchy_bound<T: Real>(coeffs: &[T]) -> T {
    let lead = coeffs.last().unwrap().abs();
    let max_ratio = coeffs[..coeffs.len() - 1]
        .iter()
        .fold(T::zero(), |m, c| m.max(c.abs() / lead));
    T::one() + max_ratio
}

fn is_negligible<T: Real>(poly: &Polynomial<T>, x: T) -> bool {
    let mut scale = T::zero();
    let mut xp = T::one();
    for &c in poly.coeffs() {
        scale += (c * xp).abs();
        xp *= x;
    }
    poly.eval(x).abs() <= T::epsilon() * T::cst(64.0) * (scale + T::one())
}

fn bisect<T: Real>(poly: &Polynomial<T>, mut a: T, mut b: T, fa: T) -> T {
    let mut sign_a = fa > T::zero();
    for _ in 0..200 {
        let mid = (a + b) * T::cst(0.5);
        if mid <= a || mid >= b {
            break;
        }
        let fm = poly.eval(mid);
        if fm == T::zero() {
            return mid;
        }
        if (fm > T::zero()) == sign_a {
            a = mid;
            sign_a = fm > T::zero();
        } else {
            b = mid;
        }
    }
    (a + b) * T::cst(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn from_roots(roots: &[f64]) -> Polynomial<f64> {
        let mut coeffs = vec![1.0];
        for &r in roots {
            let mut next = vec![0.0; coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * r;
            }
            coeffs = next;
        }
        Polynomial::new(coeffs)
    }

    #[test]
    fn eval_and_calculus() {
        let p = Polynomial::new(vec![1.0, -2.0, 0.0, 3.0]); // 1 - 2x + 3x^3
        assert_eq!(p.eval(2.0), 1.0 - 4.0 + 24.0);
        assert_eq!(p.derivative().coeffs(), &[-2.0, 0.0, 9.0]);
        assert_eq!(p.antiderivative().coeffs(), &[0.0, 1.0, -1.0, 0.0, 0.75]);
        assert_eq!(p.lowest_term(), Some((0, 1.0)));
        assert_eq!(p.leading_term(), Some((3, 3.0)));
    }

    #[test]
    fn degree_one_coeffs_skip_constant() {
        let p = Polynomial::from_degree_one_coeffs(&[1.0, 1.0, -1.0]);
        assert_eq!(p.eval(0.0), 0.0);
        assert_eq!(p.eval(1.0), 1.0);
        assert_eq!(p.eval(2.0), 2.0 + 4.0 - 8.0);
    }

    #[test]
    fn linear_and_quadratic_roots() {
        assert_eq!(Polynomial::new(vec![-3.0, 1.5]).real_roots(), vec![2.0]);
        let r = Polynomial::new(vec![2.0f64, -3.0, 1.0]).real_roots();
        assert!((r[0] - 1.0).abs() < 1e-14 && (r[1] - 2.0).abs() < 1e-14);
        assert!(Polynomial::new(vec![1.0, 0.0, 1.0]).real_roots().is_empty());
    }

    #[test]
    fn cubic_with_known_roots() {
        let p = from_roots(&[-2.0, 0.5, 3.0]);
        let roots = p.real_roots();
        assert_eq!(roots.len(), 3);
        for (r, want) in roots.iter().zip([-2.0, 0.5, 3.0]) {
            assert!((r - want).abs() < 1e-12, "{r} vs {want}");
        }
    }

    #[test]
    fn double_root_is_found() {
        // (x-1)^2 (x+3)
        let p = from_roots(&[1.0, 1.0, -3.0]);
        let roots = p.real_roots();
        assert_eq!(roots.len(), 2);
        assert!((roots[0] + 3.0).abs() < 1e-10);
        assert!((roots[1] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn monomial_factor_gives_origin_root() {
        // x^3 (x - 2)
        let p = Polynomial::new(vec![0.0, 0.0, 0.0, -2.0, 1.0]);
        let roots = p.real_roots();
        assert_eq!(roots, vec![0.0, 2.0]);
    }

    #[test]
    fn zero_polynomial_has_no_roots() {
        assert!(Polynomial::<f64>::zero().real_roots().is_empty());
    }

    proptest! {
        #[test]
        fn recovers_well_separated_roots(
            r1 in -5.0f64..-2.5,
            r2 in -1.0f64..1.0,
            r3 in 2.5f64..5.0,
            r4 in 6.0f64..9.0,
            lead in prop::sample::select(vec![-2.0, 1.0, 3.0]),
        ) {
            let p = from_roots(&[r1, r2, r3, r4]).scale(lead);
            let roots = p.real_roots();
            prop_assert_eq!(roots.len(), 4);
            for (got, want) in roots.iter().zip([r1, r2, r3, r4]) {
                prop_assert!((got - want).abs() < 1e-9 * (1.0 + want.abs()));
            }
        }

        #[test]
        fn roots_actually_vanish(coeffs in prop::collection::vec(-3.0f64..3.0, 3..8)) {
            let p = Polynomial::new(coeffs);
            for r in p.real_roots() {
                let scale: f64 = p
                    .coeffs()
                    .iter()
                    .enumerate()
                    .map(|(i, c)| (c * r.powi(i as i32)).abs())
                    .sum();
                prop_assert!(p.eval(r).abs() <= 1e-9 * (1.0 + scale));
            }
        }
    }
}
