//! Experiment configuration: a TOML file with `[section]` headers and
//! `key = value` lines, deserialized and validated into core types.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use trisolve_core::coefficient::CoefficientField;
use trisolve_core::fem::ProblemInstance;
use trisolve_core::mesh::{build_box_mesh, BoxDomain, Mesh};
use trisolve_core::nonlinearity::{AnalyticForm, NonlinearitySpec};
use trisolve_core::solver::SolverConfig;

/// A configuration problem: carries the message shown to the user
/// (exit code 1).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn cfg_err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    domain: DomainCfg,
    problem: ProblemCfg,
    #[serde(default)]
    sweep: SweepCfg,
    #[serde(default)]
    solver: SolverCfg,
    #[serde(default)]
    output: OutputCfg,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainCfg {
    dim: usize,
    divisions: Vec<usize>,
    extents: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemCfg {
    p: f64,
    eps: Option<f64>,
    alpha: FieldCfg,
    f: NonlinCfg,
    g: Option<NonlinCfg>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldCfg {
    constant: Option<f64>,
    affine: Option<AffineCfg>,
    sampled: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AffineCfg {
    base: f64,
    slope: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NonlinCfg {
    beta: Option<FieldCfg>,
    poly: Option<Vec<f64>>,
    expr: Option<String>,
    q: Option<f64>,
    #[serde(rename = "C")]
    growth_bound: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SweepCfg {
    lambda_interval: Option<toml::Value>,
    lambda_count: Option<usize>,
    mu_schedule: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct SolverCfg {
    newton_tol: Option<f64>,
    max_iter: Option<usize>,
    deflation_power: Option<f64>,
    deflation_shift: Option<f64>,
    distinct_tol: Option<f64>,
    rng_seed: Option<u64>,
    random_guesses: Option<usize>,
    guess_amplitude: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct OutputCfg {
    dir: Option<String>,
}

/// The requested forcing-parameter interval of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum Interval {
    /// `[gamma + m (delta - gamma), delta - m (delta - gamma)]` with the
    /// default margin; requires a finite window.
    Auto,
    Explicit(f64, f64),
}

/// Margin applied on each side when the interval is `"auto"`.
pub const AUTO_INTERVAL_MARGIN: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct SweepSettings {
    pub interval: Option<Interval>,
    pub lambda_count: usize,
    pub mu_schedule: Vec<f64>,
}

/// Fully validated experiment: mesh, fields, nonlinearities, and knobs.
#[derive(Debug)]
pub struct Experiment {
    pub mesh: Arc<Mesh<f64>>,
    pub domain: BoxDomain<f64>,
    pub alpha: CoefficientField<f64>,
    pub f: NonlinearitySpec<f64>,
    pub g: Option<NonlinearitySpec<f64>>,
    pub p: f64,
    pub eps: Option<f64>,
    pub solver: SolverConfig<f64>,
    pub sweep: SweepSettings,
    pub out_dir: PathBuf,
}

impl Experiment {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let file: FileConfig = toml::from_str(text)
            .map_err(|e| ConfigError(format!("config parse error: {e}")))?;
        Self::build(file)
    }

    fn build(file: FileConfig) -> Result<Self, ConfigError> {
        let d = &file.domain;
        if d.divisions.len() != d.dim || d.extents.len() != d.dim {
            return cfg_err(format!(
                "domain: divisions and extents must each have {} entries",
                d.dim
            ));
        }
        let mesh = build_box_mesh::<f64>(d.dim, &d.divisions, &d.extents)
            .map_err(|e| ConfigError(format!("domain: {e}")))?;
        let mesh = Arc::new(mesh);
        let domain = BoxDomain::new(d.extents.clone())
            .map_err(|e| ConfigError(format!("domain: {e}")))?;

        let alpha = build_field(&file.problem.alpha, "alpha", &domain, &mesh)?;
        let f = build_nonlinearity(&file.problem.f, "f", &domain, &mesh)?;
        let g = file
            .problem
            .g
            .as_ref()
            .map(|g| build_nonlinearity(g, "g", &domain, &mesh))
            .transpose()?;

        if file.problem.p <= 1.0 || file.problem.p > d.dim as f64 {
            return cfg_err(format!(
                "problem.p: requires 1 < p <= dim, got p = {} with dim = {}",
                file.problem.p, d.dim
            ));
        }

        let mut solver = SolverConfig::<f64>::default();
        let s = &file.solver;
        if let Some(v) = s.newton_tol {
            solver.newton_tol = v;
        }
        if let Some(v) = s.max_iter {
            solver.max_iter = v;
        }
        if let Some(v) = s.deflation_power {
            solver.deflation_power = v;
        }
        if let Some(v) = s.deflation_shift {
            solver.deflation_shift = v;
        }
        if let Some(v) = s.distinct_tol {
            solver.distinct_tol = v;
        }
        if let Some(v) = s.rng_seed {
            solver.rng_seed = v;
        }
        if let Some(v) = s.random_guesses {
            solver.random_guesses = v;
        }
        if let Some(v) = s.guess_amplitude {
            solver.guess_amplitude = v;
        }
        solver
            .validate()
            .map_err(|e| ConfigError(format!("solver: {e}")))?;

        let interval = match &file.sweep.lambda_interval {
            None => None,
            Some(toml::Value::String(s)) if s == "auto" => Some(Interval::Auto),
            Some(toml::Value::Array(items)) if items.len() == 2 => {
                let a = items[0].as_float().or_else(|| items[0].as_integer().map(|i| i as f64));
                let b = items[1].as_float().or_else(|| items[1].as_integer().map(|i| i as f64));
                match (a, b) {
                    (Some(a), Some(b)) if a <= b => Some(Interval::Explicit(a, b)),
                    (Some(_), Some(_)) => {
                        return cfg_err("sweep.lambda_interval: requires a <= b");
                    }
                    _ => return cfg_err("sweep.lambda_interval: entries must be numbers"),
                }
            }
            Some(_) => {
                return cfg_err(
                    "sweep.lambda_interval: expected \"auto\" or a two-element array",
                )
            }
        };
        let mu_schedule = file.sweep.mu_schedule.clone().unwrap_or_default();
        if mu_schedule.windows(2).any(|w| w[0] >= w[1]) || mu_schedule.iter().any(|m| *m <= 0.0)
        {
            return cfg_err("sweep.mu_schedule: must be strictly increasing and positive");
        }

        Ok(Experiment {
            mesh,
            domain,
            alpha,
            f,
            g,
            p: file.problem.p,
            eps: file.problem.eps,
            solver,
            sweep: SweepSettings {
                interval,
                lambda_count: file.sweep.lambda_count.unwrap_or(11),
                mu_schedule,
            },
            out_dir: PathBuf::from(file.output.dir.unwrap_or_else(|| "out".to_string())),
        })
    }

    /// Build a problem instance at the given multipliers; the mesh is cloned
    /// per instance so quadrature upgrades stay local.
    pub fn instance(
        &self,
        lambda: f64,
        mu: f64,
    ) -> Result<ProblemInstance<f64>, ConfigError> {
        ProblemInstance::new(
            (*self.mesh).clone(),
            self.alpha.clone(),
            self.p,
            self.f.clone(),
            self.g.clone(),
            lambda,
            mu,
            self.eps,
        )
        .map_err(|e| ConfigError(format!("problem: {e}")))
    }
}

fn build_field(
    cfg: &FieldCfg,
    name: &str,
    domain: &BoxDomain<f64>,
    mesh: &Arc<Mesh<f64>>,
) -> Result<CoefficientField<f64>, ConfigError> {
    let provided =
        cfg.constant.is_some() as u8 + cfg.affine.is_some() as u8 + cfg.sampled.is_some() as u8;
    if provided != 1 {
        return cfg_err(format!(
            "{name}: exactly one of `constant`, `affine`, `sampled` must be set"
        ));
    }
    if let Some(v) = cfg.constant {
        return Ok(CoefficientField::constant(v, domain));
    }
    if let Some(affine) = &cfg.affine {
        return CoefficientField::affine(affine.base, affine.slope.clone(), domain)
            .map_err(|e| ConfigError(format!("{name}: {e}")));
    }
    let values = cfg.sampled.clone().unwrap();
    CoefficientField::sampled(Arc::clone(mesh), values)
        .map_err(|e| ConfigError(format!("{name}: {e}")))
}

fn build_nonlinearity(
    cfg: &NonlinCfg,
    name: &str,
    domain: &BoxDomain<f64>,
    mesh: &Arc<Mesh<f64>>,
) -> Result<NonlinearitySpec<f64>, ConfigError> {
    let spatial = match &cfg.beta {
        Some(field) => build_field(field, &format!("{name}.beta"), domain, mesh)?,
        None => CoefficientField::constant(1.0, domain),
    };
    match (&cfg.poly, &cfg.expr) {
        (Some(poly), None) => {
            if poly.is_empty() {
                return cfg_err(format!("{name}.poly: needs at least one coefficient"));
            }
            Ok(NonlinearitySpec::polynomial(spatial, poly))
        }
        (None, Some(expr)) => {
            let form = AnalyticForm::by_name(expr).ok_or_else(|| {
                ConfigError(format!(
                    "{name}.expr: unknown form `{expr}` (catalog: sin, atan, bexp)"
                ))
            })?;
            let q = cfg.q.ok_or_else(|| {
                ConfigError(format!("{name}: analytic form requires a growth exponent `q`"))
            })?;
            let bound = cfg.growth_bound.ok_or_else(|| {
                ConfigError(format!("{name}: analytic form requires a growth constant `C`"))
            })?;
            if q <= 0.0 || bound <= 0.0 {
                return cfg_err(format!("{name}: q and C must be positive"));
            }
            Ok(NonlinearitySpec::analytic(spatial, form, q, bound))
        }
        (Some(_), Some(_)) => cfg_err(format!(
            "{name}: `poly` and `expr` are mutually exclusive"
        )),
        (None, None) => cfg_err(format!("{name}: needs either `poly` or `expr`")),
    }
}
