//! Carathéodory nonlinearities `f(x, xi) = spatial(x) * shape(xi)` with
//! antiderivatives, partial derivatives, and growth-class checks.
//!
//! Polynomial shapes make every closed-form quantity downstream exact.
//! Analytic shapes cover non-polynomial right-hand sides with a declared
//! growth exponent; their antiderivatives use the catalog closed form when
//! one exists and adaptive quadrature otherwise, and downstream quantities
//! derived from them are flagged as sampled.

use std::fmt;
use std::sync::Arc;

use crate::coefficient::CoefficientField;
use crate::poly::Polynomial;
use crate::quadrature::adaptive_integral;
use crate::scalar::Real;
use crate::{Error, Result};

/// Relative tolerance of the adaptive antiderivative quadrature.
pub const ANTIDERIVATIVE_REL_TOL: f64 = 1e-10;

type DynFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Named analytic shapes plus an escape hatch for custom evaluators.
#[derive(Clone)]
pub enum AnalyticForm<T> {
    /// `sin(xi)`
    Sin,
    /// `atan(xi)`
    Atan,
    /// `xi * exp(-xi^2)`, a bounded exponential bump.
    BoundedExp,
    Custom {
        name: String,
        eval: DynFn<T>,
        /// Closed-form antiderivative vanishing at zero, when known.
        antiderivative: Option<DynFn<T>>,
    },
}

impl<T: Real> AnalyticForm<T> {
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "sin" => Some(AnalyticForm::Sin),
            "atan" => Some(AnalyticForm::Atan),
            "bexp" => Some(AnalyticForm::BoundedExp),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            AnalyticForm::Sin => "sin",
            AnalyticForm::Atan => "atan",
            AnalyticForm::BoundedExp => "bexp",
            AnalyticForm::Custom { name, .. } => name,
        }
    }

    fn eval(&self, xi: T) -> T {
        match self {
            AnalyticForm::Sin => xi.sin(),
            AnalyticForm::Atan => xi.atan(),
            AnalyticForm::BoundedExp => xi * (-xi * xi).exp(),
            AnalyticForm::Custom { eval, .. } => eval(xi),
        }
    }

    fn antiderivative_closed(&self, xi: T) -> Option<T> {
        match self {
            // Cancellation-stable equivalents: the naive forms lose all
            // digits near xi = 0, which the log-grid samplers visit.
            AnalyticForm::Sin => {
                let s = (xi * T::cst(0.5)).sin();
                Some(T::cst(2.0) * s * s)
            }
            AnalyticForm::Atan => Some(xi * xi.atan() - (xi * xi).ln_1p() * T::cst(0.5)),
            AnalyticForm::BoundedExp => Some(-(-xi * xi).exp_m1() * T::cst(0.5)),
            AnalyticForm::Custom { antiderivative, .. } => {
                antiderivative.as_ref().map(|a| a(xi))
            }
        }
    }
}

impl<T> fmt::Debug for AnalyticForm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            AnalyticForm::Sin => "sin",
            AnalyticForm::Atan => "atan",
            AnalyticForm::BoundedExp => "bexp",
            AnalyticForm::Custom { name, .. } => name,
        };
        write!(f, "AnalyticForm({name})")
    }
}

/// Polynomial `xi`-dependence with its calculus companions precomputed;
/// assembly evaluates these in tight loops.
#[derive(Debug, Clone)]
pub struct PolynomialShape<T> {
    poly: Polynomial<T>,
    derivative: Polynomial<T>,
    antiderivative: Polynomial<T>,
}

impl<T: Real> PolynomialShape<T> {
    fn new(poly: Polynomial<T>) -> Self {
        PolynomialShape {
            derivative: poly.derivative(),
            antiderivative: poly.antiderivative(),
            poly,
        }
    }
}

/// The `xi`-dependence of a nonlinearity.
#[derive(Debug, Clone)]
pub enum Shape<T> {
    /// `a1 xi + a2 xi^2 + ...` — no constant term, so `f(x, 0) = 0`.
    Polynomial(PolynomialShape<T>),
    /// Analytic form with declared growth `|shape| <= bound (1 + |xi|^growth)`.
    Analytic {
        form: AnalyticForm<T>,
        growth: T,
        bound: T,
    },
}

/// Growth-class verdict for exponent `p` in dimension `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport<T> {
    pub p: T,
    pub n: usize,
    pub q: T,
    /// `(p n - n + p) / (n - p)` for `p < n`, infinite for `p = n`.
    pub q_limit: T,
    pub admissible: bool,
}

/// Nonlinearity `f(x, xi) = spatial(x) * shape(xi)` with antiderivative
/// `F(x, xi)` vanishing at `xi = 0`.
#[derive(Debug, Clone)]
pub struct NonlinearitySpec<T> {
    spatial: CoefficientField<T>,
    shape: Shape<T>,
}

impl<T: Real> NonlinearitySpec<T> {
    /// Polynomial nonlinearity from degree-one-and-up coefficients
    /// `[a1, a2, ...]`.
    pub fn polynomial(spatial: CoefficientField<T>, coeffs: &[T]) -> Self {
        NonlinearitySpec {
            spatial,
            shape: Shape::Polynomial(PolynomialShape::new(
                Polynomial::from_degree_one_coeffs(coeffs),
            )),
        }
    }

    pub fn analytic(spatial: CoefficientField<T>, form: AnalyticForm<T>, growth: T, bound: T) -> Self {
        NonlinearitySpec {
            spatial,
            shape: Shape::Analytic {
                form,
                growth,
                bound,
            },
        }
    }

    pub fn spatial(&self) -> &CoefficientField<T> {
        &self.spatial
    }

    pub fn shape(&self) -> &Shape<T> {
        &self.shape
    }

    pub fn poly(&self) -> Option<&Polynomial<T>> {
        match &self.shape {
            Shape::Polynomial(p) => Some(&p.poly),
            Shape::Analytic { .. } => None,
        }
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self.shape, Shape::Polynomial(_))
    }

    /// Growth exponent: the polynomial degree, or the declared exponent.
    pub fn growth_exponent(&self) -> T {
        match &self.shape {
            // The zero polynomial grows like any positive q; use 1.
            Shape::Polynomial(p) => T::of_usize(p.poly.degree().unwrap_or(1).max(1)),
            Shape::Analytic { growth, .. } => *growth,
        }
    }

    /// `shape(xi)`.
    pub fn shape_value(&self, xi: T) -> T {
        match &self.shape {
            Shape::Polynomial(p) => p.poly.eval(xi),
            Shape::Analytic { form, .. } => form.eval(xi),
        }
    }

    /// Antiderivative of the shape, vanishing at zero.
    pub fn shape_antiderivative(&self, xi: T) -> Result<T> {
        match &self.shape {
            Shape::Polynomial(p) => Ok(p.antiderivative.eval(xi)),
            Shape::Analytic { form, .. } => {
                if let Some(v) = form.antiderivative_closed(xi) {
                    return Ok(v);
                }
                adaptive_integral(
                    &|s| form.eval(s),
                    T::zero(),
                    xi,
                    T::cst(ANTIDERIVATIVE_REL_TOL),
                )
            }
        }
    }

    /// Derivative of the shape: exact for polynomials, central difference
    /// with step `max(1e-6, 1e-6 |xi|)` otherwise.
    pub fn shape_derivative(&self, xi: T) -> T {
        match &self.shape {
            Shape::Polynomial(p) => p.derivative.eval(xi),
            Shape::Analytic { form, .. } => {
                let h = T::cst(1e-6).max(T::cst(1e-6) * xi.abs());
                (form.eval(xi + h) - form.eval(xi - h)) / (T::cst(2.0) * h)
            }
        }
    }

    /// `f(x, xi)`; errors when `x` is outside the domain bounding box.
    pub fn eval_f(&self, x: &[T], xi: T) -> Result<T> {
        Ok(self.spatial.value(x)? * self.shape_value(xi))
    }

    /// `F(x, xi) = int_0^xi f(x, s) ds`.
    pub fn eval_big_f(&self, x: &[T], xi: T) -> Result<T> {
        Ok(self.spatial.value(x)? * self.shape_antiderivative(xi)?)
    }

    /// `d/dxi f(x, xi)`.
    pub fn eval_df(&self, x: &[T], xi: T) -> Result<T> {
        Ok(self.spatial.value(x)? * self.shape_derivative(xi))
    }

    /// `int_Omega F(x, xi) dx`; the spatial factor separates, so this is the
    /// cached spatial integral times the shape antiderivative.
    pub fn integral_big_f(&self, xi: T) -> Result<T> {
        Ok(self.spatial.integral() * self.shape_antiderivative(xi)?)
    }

    /// Membership check in the subcritical growth class for exponent `p` in
    /// dimension `n`: `0 < q < (pn - n + p)/(n - p)` when `p < n`, any
    /// finite positive `q` when `p = n`.
    pub fn check_growth(&self, p: T, n: usize) -> Result<GrowthReport<T>> {
        let nf = T::of_usize(n);
        if p <= T::one() {
            return Err(Error::param("p", "must exceed 1"));
        }
        if p > nf {
            return Err(Error::param("p", "must not exceed the dimension"));
        }
        let q = self.growth_exponent();
        let q_limit = if p < nf {
            (p * nf - nf + p) / (nf - p)
        } else {
            T::infinity()
        };
        let admissible = q > T::zero() && q < q_limit;
        Ok(GrowthReport {
            p,
            n,
            q,
            q_limit,
            admissible,
        })
    }
}
