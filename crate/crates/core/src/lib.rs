//! Numerical toolkit for perturbed Neumann p-Laplacian problems
//!
//! The crate computes the admissible window of forcing parameters for which
//! a variational multiplicity bound applies, discretizes the problem with
//! piecewise-linear finite elements on box domains, and searches for multiple
//! distinct weak solutions with a deflated damped Newton method.
//!
//! ```
//! use trisolve_core::coefficient::CoefficientField;
//! use trisolve_core::fem::ProblemInstance;
//! use trisolve_core::mesh::{build_box_mesh, BoxDomain};
//! use trisolve_core::nonlinearity::NonlinearitySpec;
//! use trisolve_core::solver::{self, SolverConfig};
//! use trisolve_core::thresholds;
//!
//! let domain = BoxDomain::new(vec![1.0f64, 1.0])?;
//! let alpha = CoefficientField::constant(1.0, &domain);
//! let beta = CoefficientField::constant(1.0, &domain);
//! // f(x, u) = u + u^2 - u^3
//! let f = NonlinearitySpec::polynomial(beta, &[1.0, 1.0, -1.0]);
//!
//! let report = thresholds::check_condition1(&f, &alpha, 2.0);
//! assert!(report.condition1);
//! let (lo, hi) = report.interval.unwrap();
//! assert!((lo - 9.0 / 11.0).abs() < 1e-12 && hi == 1.0);
//!
//! // Pick a forcing parameter inside the window and find the solutions.
//! let mesh = build_box_mesh::<f64>(2, &[8, 8], &[1.0, 1.0])?;
//! let inst = ProblemInstance::new(mesh, alpha, 2.0, f, None, 0.9, 0.0, None)?;
//! let cfg = SolverConfig::default();
//! let set = solver::find_solutions(&inst, &cfg, &solver::default_guesses(&inst, &cfg));
//! assert!(set.len() >= 3);
//! # Ok::<(), trisolve_core::Error>(())
//! ```
//!
//! All numerics are generic over the scalar type through [`scalar::Real`]
//! (`f32` or `f64`); the aliases at the crate root fix the common choices.

pub mod coefficient;
pub mod fem;
pub mod json;
pub mod linalg;
pub mod mesh;
pub mod nonlinearity;
pub mod oracle;
pub mod poly;
pub mod quadrature;
pub mod scalar;
pub mod solver;
pub mod thresholds;

pub use scalar::Real;

pub type Mesh64 = mesh::Mesh<f64>;
pub type Mesh32 = mesh::Mesh<f32>;
pub type DiscreteFunction64 = mesh::DiscreteFunction<f64>;
pub type DiscreteFunction32 = mesh::DiscreteFunction<f32>;
pub type BoxDomain64 = mesh::BoxDomain<f64>;
pub type CoefficientField64 = coefficient::CoefficientField<f64>;
pub type NonlinearitySpec64 = nonlinearity::NonlinearitySpec<f64>;
pub type ThresholdReport64 = thresholds::ThresholdReport<f64>;
pub type Prop1Report64 = thresholds::Prop1Report<f64>;
pub type ProblemInstance64 = fem::ProblemInstance<f64>;
pub type SolverConfig64 = solver::SolverConfig<f64>;
pub type SolutionSet64 = solver::SolutionSet<f64>;

/// Errors shared by every module of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("point lies outside the domain bounding box")]
    OutsideDomain,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("adaptive quadrature did not converge: achieved relative error {achieved:e}, requested {requested:e}")]
    QuadratureNoConvergence { achieved: f64, requested: f64 },
    #[error("polynomial root finding failed: {0}")]
    RootFinding(String),
    #[error("singular linear system")]
    SingularSystem,
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
