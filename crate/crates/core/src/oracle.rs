//! Independent ground truth: constant weak solutions for constant
//! coefficients, finite-difference gradient certification, and brute-force
//! ratio maximization.
//!
//! These deliberately avoid the production code paths they check: constant
//! solutions come from scalar root finding of the pointwise equation, the
//! gradient check differences the assembled energies, and the ratio search
//! is a plain grid maximum.

use crate::fem::ProblemInstance;
use crate::mesh::DiscreteFunction;
use crate::nonlinearity::NonlinearitySpec;
use crate::poly::Polynomial;
use crate::scalar::Real;
use crate::{Error, Result};

/// Constant solutions `u = s` of the pointwise equation
/// `alpha s |s|^{p-2} = lambda beta P(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantSolutionReport<T> {
    pub roots: Vec<T>,
    pub lambda: T,
    /// Ascending coefficients of the polynomial solved on the `p = 2` path
    /// (`lambda beta P(s) - alpha s`); empty for the bisection path.
    pub polynomial: Vec<T>,
}

/// All real constant solutions, deduplicated at relative `1e-12`.
///
/// `p = 2` reduces to polynomial root finding; general `p` uses sign-change
/// bisection on a bracket grown from the dominant-term balance.
pub fn constant_solutions<T: Real>(
    alpha: T,
    beta: T,
    shape: &Polynomial<T>,
    lambda: T,
    p: T,
) -> Result<ConstantSolutionReport<T>> {
    if alpha <= T::zero() {
        return Err(Error::param("alpha", "must be positive"));
    }
    if beta < T::zero() {
        return Err(Error::param("beta", "must be nonnegative"));
    }
    if lambda <= T::zero() {
        return Err(Error::param("lambda", "must be positive"));
    }
    let two = T::cst(2.0);
    if p == two {
        // lambda beta P(s) - alpha s = 0
        let mut coeffs: Vec<T> = shape.coeffs().iter().map(|&c| lambda * beta * c).collect();
        if coeffs.len() < 2 {
            coeffs.resize(2, T::zero());
        }
        coeffs[1] -= alpha;
        let poly = Polynomial::new(coeffs.clone());
        let mut roots = poly.real_roots();
        verify_roots(alpha, beta, shape, lambda, p, &mut roots);
        return Ok(ConstantSolutionReport {
            roots,
            lambda,
            polynomial: coeffs,
        });
    }

    // h(s) = alpha s |s|^{p-2} - lambda beta P(s): scan for sign changes on
    // a bracket wide enough that one term dominates everything else beyond
    // it, so no root can sit outside.
    let h = |s: T| alpha * s * s.abs().powf(p - two) - lambda * beta * shape.eval(s);
    let degree = shape.degree().unwrap_or(1);
    let lead = shape
        .leading_term()
        .map(|(_, c)| c.abs())
        .unwrap_or(T::zero());
    let abs_sum = shape.coeff_abs_sum();
    let lower_sum = abs_sum - lead;
    let mut bracket = T::one();
    for _ in 0..64 {
        let rp = bracket.powf(p - T::one());
        let rd = bracket.powf(T::of_usize(degree));
        let rd1 = bracket
            .powf(T::of_usize(degree.saturating_sub(1)))
            .max(T::one());
        let poly_dominates = lambda * beta * lead * rd
            > two * (alpha * rp + lambda * beta * lower_sum * rd1);
        let alpha_dominates = alpha * rp > two * lambda * beta * abs_sum * rd.max(T::one());
        if poly_dominates || alpha_dominates || bracket >= T::cst(1e6) {
            break;
        }
        bracket *= two;
    }

    // Uniform samples resolve the typical O(1) root cluster; a symmetric
    // log sweep covers the remainder of a wide bracket.
    let close = bracket.min(T::cst(8.0));
    let samples = 8192usize;
    let step = two * close / T::of_usize(samples);
    let mut grid: Vec<T> = (0..=samples)
        .map(|i| -close + step * T::of_usize(i))
        .collect();
    if bracket > close {
        let lo = close.log10().as_f64();
        let hi = bracket.log10().as_f64();
        let per_decade = 64f64;
        let steps = ((hi - lo) * per_decade).ceil() as usize;
        for i in 0..=steps {
            let v = T::cst(10f64.powf(lo + i as f64 / per_decade));
            grid.push(v);
            grid.push(-v);
        }
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }

    let mut roots = Vec::new();
    let mut prev_s = grid[0];
    let mut prev_h = h(prev_s);
    for &s in &grid[1..] {
        let hs = h(s);
        if hs == T::zero() {
            roots.push(s);
        } else if prev_h * hs < T::zero() {
            let mut lo = prev_s;
            let mut hi = s;
            let mut hlo = prev_h;
            for _ in 0..200 {
                let mid = (lo + hi) * T::cst(0.5);
                if mid <= lo || mid >= hi {
                    break;
                }
                let hm = h(mid);
                if hm == T::zero() {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (hm > T::zero()) == (hlo > T::zero()) {
                    lo = mid;
                    hlo = hm;
                } else {
                    hi = mid;
                }
            }
            roots.push((lo + hi) * T::cst(0.5));
        }
        prev_s = s;
        prev_h = hs;
    }
    if shape.eval(T::zero()) == T::zero() && !roots.iter().any(|r| *r == T::zero()) {
        roots.push(T::zero());
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tol = T::cst(1e-12);
    roots.dedup_by(|a, b| (*a - *b).abs() <= tol * T::one().max(a.abs()).max(b.abs()));
    verify_roots(alpha, beta, shape, lambda, p, &mut roots);
    Ok(ConstantSolutionReport {
        roots,
        lambda,
        polynomial: Vec::new(),
    })
}

/// Drop any candidate whose pointwise defect exceeds `1e-12 * scale`.
fn verify_roots<T: Real>(
    alpha: T,
    beta: T,
    shape: &Polynomial<T>,
    lambda: T,
    p: T,
    roots: &mut Vec<T>,
) {
    let two = T::cst(2.0);
    roots.retain(|&s| {
        let lhs = alpha * s * s.abs().powf(p - two);
        let rhs = lambda * beta * shape.eval(s);
        let scale = lhs.abs() + rhs.abs() + T::one();
        (lhs - rhs).abs() <= T::cst(1e-12) * scale
    });
}

/// Discriminant of the nonzero-root quadratic for the cubic family
/// `P(s) = a s + b s^2 - c s^3` at `p = 2`: the constant-solution count
/// changes from 3 to 1 where this crosses zero.
pub fn cubic_root_discriminant<T: Real>(alpha: T, beta: T, a: T, b: T, c: T, lambda: T) -> T {
    b * b + T::cst(4.0) * c * (a - alpha / (lambda * beta))
}

/// Max relative deviation between the assembled residual and a central
/// difference of the total energy, over all nodal directions.
pub fn fd_gradient_check<T: Real>(
    inst: &ProblemInstance<T>,
    u: &DiscreteFunction<T>,
    h: T,
) -> T {
    let r = inst.residual(u);
    let mut worst = T::zero();
    for i in 0..u.len() {
        let mut up = u.clone();
        up.values_mut()[i] += h;
        let mut dn = u.clone();
        dn.values_mut()[i] -= h;
        let fd = (inst.total_energy(&up) - inst.total_energy(&dn)) / (T::cst(2.0) * h);
        worst = worst.max((fd - r[i]).abs() / (T::one() + r[i].abs()));
    }
    worst
}

/// Grid maximum of `int_Omega F(x, xi) dx / |xi|^p`: a certified lower
/// bound on the true supremum.
pub fn brute_sup_ratio<T: Real>(spec: &NonlinearitySpec<T>, p: T, grid: &[T]) -> T {
    let mut best = T::neg_infinity();
    for &xi in grid {
        if xi == T::zero() {
            continue;
        }
        let Ok(fbar) = spec.integral_big_f(xi) else {
            continue;
        };
        best = best.max(fbar / xi.abs().powf(p));
    }
    best
}

/// Symmetric log grid `+-10^{lo..hi}` with the given resolution.
pub fn symmetric_log_grid<T: Real>(lo_exp: f64, hi_exp: f64, per_decade: usize) -> Vec<T> {
    let steps = ((hi_exp - lo_exp) * per_decade as f64).round() as usize;
    let mut grid = Vec::with_capacity(2 * (steps + 1));
    for i in 0..=steps {
        let e = lo_exp + i as f64 / per_decade as f64;
        let v = T::cst(10f64.powf(e));
        grid.push(v);
        grid.push(-v);
    }
    grid
}
