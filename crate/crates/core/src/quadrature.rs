//! Quadrature: Gauss-Legendre rules, conical product rules on simplices,
//! and an adaptive integrator for one-dimensional antiderivatives.
//!
//! The simplex rules are built from tensorized Gauss-Legendre points through
//! the collapsed-coordinate (Duffy) map, which keeps them exact for any
//! requested total polynomial degree without hard-coded point tables.

use crate::scalar::Real;
use crate::{Error, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1);
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = T::of_usize(n);
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let theta = T::PI() * (T::of_usize(i) + T::cst(0.75)) / (nf + T::cst(0.5));
        let mut x = theta.cos();
        let mut dp = T::zero();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() <= T::epsilon() * T::cst(4.0) * (T::one() + x.abs()) {
                let (p2, d2) = legendre_with_derivative(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        let w = T::cst(2.0) / ((T::one() - x * x) * dp * dp);
        nodes[i] = -x.abs();
        nodes[n - 1 - i] = x.abs();
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    (nodes, weights)
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (p0, T::zero());
    }
    for k in 2..=n {
        let kf = T::of_usize(k);
        let p2 = ((T::cst(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = T::of_usize(n) * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Quadrature rule on the reference simplex
/// `{x_i >= 0, sum x_i <= 1}` in 2 or 3 dimensions.
///
/// Weights sum to the reference measure (1/2 for the triangle, 1/6 for the
/// tetrahedron); `points` stores reference coordinates with stride `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexRule<T> {
    pub dim: usize,
    pub degree: usize,
    pub points: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> SimplexRule<T> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, q: usize) -> &[T] {
        &self.points[q * self.dim..(q + 1) * self.dim]
    }
}

/// Build a simplex rule exact for polynomials of the given total degree.
pub fn simplex_rule<T: Real>(dim: usize, degree: usize) -> SimplexRule<T> {
    assert!(dim == 2 || dim == 3, "simplex rules exist for dim 2 and 3");
    let half = T::cst(0.5);
    // The Duffy map raises the coordinate degree by (dim - axis - 1), so the
    // first axis needs the most points.
    let n_for = |extra: usize| {
        let needed = degree + extra + 1;
        needed / 2 + 1
    };
    if dim == 2 {
        let (xs, ws) = gauss_legendre::<T>(n_for(1));
        let (xt, wt) = gauss_legendre::<T>(n_for(0));
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (&s, &wsi) in xs.iter().zip(&ws) {
            let s01 = (s + T::one()) * half;
            for (&t, &wti) in xt.iter().zip(&wt) {
                let t01 = (t + T::one()) * half;
                let x = s01;
                let y = t01 * (T::one() - s01);
                points.push(x);
                points.push(y);
                weights.push(wsi * half * wti * half * (T::one() - s01));
            }
        }
        SimplexRule {
            dim,
            degree,
            points,
            weights,
        }
    } else {
        let (xs, ws) = gauss_legendre::<T>(n_for(2));
        let (xt, wt) = gauss_legendre::<T>(n_for(1));
        let (xu, wu) = gauss_legendre::<T>(n_for(0));
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (&s, &wsi) in xs.iter().zip(&ws) {
            let s01 = (s + T::one()) * half;
            for (&t, &wti) in xt.iter().zip(&wt) {
                let t01 = (t + T::one()) * half;
                for (&u, &wui) in xu.iter().zip(&wu) {
                    let u01 = (u + T::one()) * half;
                    let x = s01;
                    let y = t01 * (T::one() - s01);
                    let z = u01 * (T::one() - s01) * (T::one() - t01);
                    points.push(x);
                    points.push(y);
                    points.push(z);
                    let jac = (T::one() - s01) * (T::one() - s01) * (T::one() - t01);
                    weights.push(wsi * half * wti * half * wui * half * jac);
                }
            }
        }
        SimplexRule {
            dim,
            degree,
            points,
            weights,
        }
    }
}

/// Adaptive integral of `f` over `[a, b]` to the requested relative
/// tolerance, using an embedded 7/15-point Gauss pair on each panel.
pub fn adaptive_integral<T: Real>(
    f: &dyn Fn(T) -> T,
    a: T,
    b: T,
    rel_tol: T,
) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let (n7, w7) = gauss_legendre::<T>(7);
    let (n15, w15) = gauss_legendre::<T>(15);
    let panel = |lo: T, hi: T| -> (T, T) {
        let mid = (lo + hi) * T::cst(0.5);
        let hl = (hi - lo) * T::cst(0.5);
        let coarse: T = n7
            .iter()
            .zip(&w7)
            .map(|(&x, &w)| w * f(mid + hl * x))
            .sum::<T>()
            * hl;
        let fine: T = n15
            .iter()
            .zip(&w15)
            .map(|(&x, &w)| w * f(mid + hl * x))
            .sum::<T>()
            * hl;
        (fine, (fine - coarse).abs())
    };

    let mut total = T::zero();
    let mut err = T::zero();
    // Explicit stack with per-panel depth and a global work budget; once a
    // panel is final its estimate and error are accumulated as-is.
    let mut stack = vec![(a, b, 0u32)];
    let mut budget = 20_000usize;
    let scale_est = {
        let (whole, _) = panel(a, b);
        whole.abs() + T::cst(1e-300)
    };
    while let Some((lo, hi, depth)) = stack.pop() {
        let (fine, e) = panel(lo, hi);
        budget = budget.saturating_sub(1);
        let local_tol = rel_tol * scale_est * ((hi - lo) / (b - a)).abs();
        if e <= local_tol || depth >= 48 || budget == 0 {
            total += fine;
            err += e;
            if budget == 0 {
                for (lo, hi, _) in stack.drain(..) {
                    let (fine, e) = panel(lo, hi);
                    total += fine;
                    err += e;
                }
                break;
            }
        } else {
            let mid = (lo + hi) * T::cst(0.5);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    let achieved = err / (total.abs() + T::cst(1e-300));
    if achieved > rel_tol * T::cst(16.0) {
        return Err(Error::QuadratureNoConvergence {
            achieved: achieved.as_f64(),
            requested: rel_tol.as_f64(),
        });
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product::<f64>().max(1.0)
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in 1..=16 {
            let (xs, ws) = gauss_legendre::<f64>(n);
            for k in 0..=(2 * n - 1) {
                let got: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(k as i32)).sum();
                let want = if k % 2 == 0 {
                    2.0 / (k as f64 + 1.0)
                } else {
                    0.0
                };
                assert!(
                    (got - want).abs() < 2e-13,
                    "n={n} k={k}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn triangle_rule_integrates_monomials() {
        for degree in 1..=9 {
            let rule = simplex_rule::<f64>(2, degree);
            for a in 0..=degree {
                for b in 0..=(degree - a) {
                    let got: f64 = (0..rule.len())
                        .map(|q| {
                            let p = rule.point(q);
                            rule.weights[q] * p[0].powi(a as i32) * p[1].powi(b as i32)
                        })
                        .sum();
                    let want = factorial(a) * factorial(b) / factorial(a + b + 2);
                    assert!(
                        (got - want).abs() < 1e-14 * (1.0 + want),
                        "deg {degree} x^{a} y^{b}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn tet_rule_integrates_monomials() {
        for degree in 1..=7 {
            let rule = simplex_rule::<f64>(3, degree);
            for a in 0..=degree {
                for b in 0..=(degree - a) {
                    for c in 0..=(degree - a - b) {
                        let got: f64 = (0..rule.len())
                            .map(|q| {
                                let p = rule.point(q);
                                rule.weights[q]
                                    * p[0].powi(a as i32)
                                    * p[1].powi(b as i32)
                                    * p[2].powi(c as i32)
                            })
                            .sum();
                        let want =
                            factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3);
                        assert!(
                            (got - want).abs() < 1e-14 * (1.0 + want),
                            "deg {degree} x^{a} y^{b} z^{c}: {got} vs {want}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn rule_weights_sum_to_reference_measure() {
        let tri = simplex_rule::<f64>(2, 4);
        assert!((tri.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
        let tet = simplex_rule::<f64>(3, 4);
        assert!((tet.weights.iter().sum::<f64>() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_matches_closed_forms() {
        let got = adaptive_integral(&|x: f64| x.sin(), 0.0, 3.0, 1e-12).unwrap();
        assert!((got - (1.0 - 3.0f64.cos())).abs() < 1e-11);

        let got = adaptive_integral(&|x: f64| 1.0 / (1.0 + x * x), 0.0, 1.0, 1e-12).unwrap();
        assert!((got - std::f64::consts::FRAC_PI_4).abs() < 1e-12);

        let got = adaptive_integral(&|x: f64| x.abs().sqrt(), 0.0, 4.0, 1e-10).unwrap();
        assert!((got - 16.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn adaptive_zero_width_interval() {
        assert_eq!(
            adaptive_integral(&|x: f64| x.exp(), 2.0, 2.0, 1e-10).unwrap(),
            0.0
        );
    }

    #[test]
    fn adaptive_reports_non_convergence() {
        // Oscillation far below panel resolution at depth cap.
        let f = |x: f64| (1e9 * x).sin();
        let res = adaptive_integral(&f, 0.0, 1000.0, 1e-13);
        match res {
            Err(Error::QuadratureNoConvergence { achieved, .. }) => {
                assert!(achieved > 1e-13);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn generic_scalar_rules_build_for_f32() {
        let rule = simplex_rule::<f32>(2, 4);
        let sum: f32 = rule.weights.iter().sum();
        assert!((sum - 0.5).abs() < 1e-6);
    }
}
