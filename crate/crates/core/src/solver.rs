//! Multiple-solution search: damped Newton, deflation against known
//! solutions, multi-start orchestration, and continuation in the
//! perturbation multiplier.
//!
//! Deflation multiplies the residual by `M(u) = prod_k (1/d_k^P + sigma)`
//! with `d_k` the weighted-norm distance to solution `k`. The deflated
//! Newton step follows from the chain-rule Jacobian
//! `M J + F (grad M)^T` through the rank-one (Sherman-Morrison) identity:
//! it is the plain Newton step scaled by `1 / (1 - (grad M . d) / M)`.
//! Deflation only steers the search; certification always uses the raw
//! residual of the undeflated problem.

use crate::fem::ProblemInstance;
use crate::mesh::DiscreteFunction;
use crate::oracle;
use crate::scalar::Real;
use crate::Result;

/// Deterministic PRNG for initial guesses (splitmix64).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[-1, 1]`.
    pub fn next_symmetric<T: Real>(&mut self) -> T {
        let unit = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        T::cst(unit * 2.0 - 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    /// Convergence threshold on the residual sup-norm.
    pub newton_tol: T,
    pub max_iter: usize,
    /// Backtracking factor of the damped line search.
    pub backtrack: T,
    /// Smallest accepted step fraction before the search gives up.
    pub min_step: T,
    pub deflation_power: T,
    pub deflation_shift: T,
    /// Relative weighted-norm distance below which two solutions are
    /// considered identical.
    pub distinct_tol: T,
    pub rng_seed: u64,
    pub random_guesses: usize,
    pub guess_amplitude: T,
    pub collect_trace: bool,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        SolverConfig {
            newton_tol: T::cst(1e-10),
            max_iter: 100,
            backtrack: T::cst(0.5),
            min_step: T::cst((2.0f64).powi(-20)),
            deflation_power: T::cst(2.0),
            deflation_shift: T::one(),
            distinct_tol: T::cst(1e-4),
            rng_seed: 0,
            random_guesses: 16,
            guess_amplitude: T::one(),
            collect_trace: false,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        use crate::Error;
        if !(self.newton_tol > T::zero()) {
            return Err(Error::param("newton_tol", "must be positive"));
        }
        if !(self.distinct_tol > T::zero()) {
            return Err(Error::param("distinct_tol", "must be positive"));
        }
        if !(self.backtrack > T::zero() && self.backtrack < T::one()) {
            return Err(Error::param("backtrack", "must lie in (0, 1)"));
        }
        if !(self.min_step > T::zero()) {
            return Err(Error::param("min_step", "must be positive"));
        }
        if self.deflation_power < T::one() {
            return Err(Error::param("deflation_power", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergeReason {
    /// The linearized system could not be factored.
    SingularSystem,
    /// Iteration budget exhausted.
    Stalled,
    /// No damping factor produced a residual decrease.
    LineSearchFailed,
    /// The iterate sits on a deflated solution.
    ReturnedKnown,
}

impl DivergeReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DivergeReason::SingularSystem => "singular",
            DivergeReason::Stalled => "stalled",
            DivergeReason::LineSearchFailed => "line_search_failed",
            DivergeReason::ReturnedKnown => "returned_known",
        }
    }
}

#[derive(Debug, Clone)]
pub enum NewtonOutcome<T> {
    Converged { u: DiscreteFunction<T>, iters: usize },
    Diverged(DivergeReason),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow<T> {
    pub iter: usize,
    pub residual_norm: T,
    pub step: T,
}

#[derive(Debug, Clone)]
pub struct SolveResult<T> {
    pub outcome: NewtonOutcome<T>,
    pub trace: Vec<TraceRow<T>>,
}

/// One accepted solution with its certificates.
#[derive(Debug, Clone)]
pub struct CertifiedSolution<T> {
    pub u: DiscreteFunction<T>,
    /// Sup-norm of the undeflated residual.
    pub residual_norm: T,
    /// Total energy `phi - lambda J_f - mu J_g`.
    pub energy: T,
    pub wnorm: T,
}

/// Pairwise-distinct certified solutions, ordered by energy.
#[derive(Debug, Clone, Default)]
pub struct SolutionSet<T> {
    solutions: Vec<CertifiedSolution<T>>,
    /// Relative weighted-norm distances `(i, j, d)` for `i < j`.
    pairwise: Vec<(usize, usize, T)>,
}

impl<T: Real> SolutionSet<T> {
    pub fn new() -> Self {
        SolutionSet {
            solutions: Vec::new(),
            pairwise: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn solutions(&self) -> &[CertifiedSolution<T>] {
        &self.solutions
    }

    pub fn pairwise_distances(&self) -> &[(usize, usize, T)] {
        &self.pairwise
    }

    pub fn min_pairwise_distance(&self) -> Option<T> {
        self.pairwise
            .iter()
            .map(|(_, _, d)| *d)
            .fold(None, |acc, d| Some(acc.map_or(d, |m: T| m.min(d))))
    }

    pub fn max_wnorm(&self) -> Option<T> {
        self.solutions
            .iter()
            .map(|s| s.wnorm)
            .fold(None, |acc, w| Some(acc.map_or(w, |m: T| m.max(w))))
    }

    fn members(&self) -> Vec<&DiscreteFunction<T>> {
        self.solutions.iter().map(|s| &s.u).collect()
    }

    /// Scale-free distance `|u - v| / (1 + max(|u|, |v|))` in the weighted
    /// norm.
    pub fn relative_distance(
        inst: &ProblemInstance<T>,
        a: &DiscreteFunction<T>,
        a_norm: T,
        b: &DiscreteFunction<T>,
        b_norm: T,
    ) -> T {
        inst.wnorm_diff(a, b) / (T::one() + a_norm.max(b_norm))
    }

    /// Smallest relative distance from `u` to the set.
    pub fn min_distance_to(&self, inst: &ProblemInstance<T>, u: &DiscreteFunction<T>) -> T {
        let un = inst.wnorm(u);
        self.solutions
            .iter()
            .map(|s| Self::relative_distance(inst, u, un, &s.u, s.wnorm))
            .fold(T::infinity(), |m, d| m.min(d))
    }

    /// Certify and insert; rejects duplicates and residuals above tolerance.
    pub fn try_insert(
        &mut self,
        inst: &ProblemInstance<T>,
        u: DiscreteFunction<T>,
        cfg: &SolverConfig<T>,
    ) -> bool {
        let raw = inst.residual(&u);
        let residual_norm = sup_norm(&raw);
        if residual_norm > cfg.newton_tol {
            return false;
        }
        if self.min_distance_to(inst, &u) <= cfg.distinct_tol {
            return false;
        }
        let wnorm = inst.wnorm(&u);
        let energy = inst.total_energy(&u);
        self.solutions.push(CertifiedSolution {
            u,
            residual_norm,
            energy,
            wnorm,
        });
        true
    }

    /// Order by energy and refresh the distance table.
    pub fn finalize(&mut self, inst: &ProblemInstance<T>) {
        self.solutions.sort_by(|a, b| {
            a.energy
                .partial_cmp(&b.energy)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        self.pairwise.clear();
        for i in 0..self.solutions.len() {
            for j in (i + 1)..self.solutions.len() {
                let d = Self::relative_distance(
                    inst,
                    &self.solutions[i].u,
                    self.solutions[i].wnorm,
                    &self.solutions[j].u,
                    self.solutions[j].wnorm,
                );
                self.pairwise.push((i, j, d));
            }
        }
    }
}

fn sup_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Deflation factor `M(u)` and optionally its gradient.
struct Deflation<T> {
    m: T,
    grad: Option<Vec<T>>,
}

fn deflation_at<T: Real>(
    inst: &ProblemInstance<T>,
    u: &DiscreteFunction<T>,
    knowns: &[&DiscreteFunction<T>],
    cfg: &SolverConfig<T>,
    with_gradient: bool,
) -> Option<Deflation<T>> {
    if knowns.is_empty() {
        return Some(Deflation {
            m: T::one(),
            grad: with_gradient.then(|| vec![T::zero(); u.len()]),
        });
    }
    let p = inst.p();
    let power = cfg.deflation_power;
    let shift = cfg.deflation_shift;
    let mut m = T::one();
    let mut factors = Vec::with_capacity(knowns.len());
    let mut diffs = Vec::with_capacity(knowns.len());
    for k in knowns {
        let v = DiscreteFunction::new(
            u.values()
                .iter()
                .zip(k.values())
                .map(|(a, b)| *a - *b)
                .collect(),
        );
        let d = inst.wnorm(&v);
        if !(d > T::cst(1e-14)) {
            return None;
        }
        let factor = d.powf(-power) + shift;
        m *= factor;
        factors.push((d, factor));
        diffs.push(v);
    }
    let grad = with_gradient.then(|| {
        let mut g = vec![T::zero(); u.len()];
        for ((d, factor), v) in factors.iter().zip(&diffs) {
            // d/du of (d^{-P} + sigma): -P d^{-P-1} * grad d, and
            // grad d = |v|^{1-p} grad_phi(v).
            let coeff = m / *factor * (-power) * d.powf(-power - T::one())
                * d.powf(T::one() - p);
            let gphi = inst.grad_phi(v);
            for (gi, pi) in g.iter_mut().zip(&gphi) {
                *gi += coeff * *pi;
            }
        }
        g
    });
    Some(Deflation { m, grad })
}

fn solve_impl<T: Real>(
    inst: &ProblemInstance<T>,
    knowns: &[&DiscreteFunction<T>],
    u0: &DiscreteFunction<T>,
    cfg: &SolverConfig<T>,
) -> SolveResult<T> {
    let mut trace = Vec::new();
    let deflated = !knowns.is_empty();
    let mut u = u0.clone();
    let mut residual = inst.residual(&u);
    let mut raw_norm = sup_norm(&residual);
    let diverge = |reason, trace| SolveResult {
        outcome: NewtonOutcome::Diverged(reason),
        trace,
    };

    for iter in 0..cfg.max_iter {
        if raw_norm <= cfg.newton_tol {
            if deflated {
                let mut closest = T::infinity();
                let un = inst.wnorm(&u);
                for k in knowns {
                    let d = inst.wnorm_diff(&u, k) / (T::one() + un.max(inst.wnorm(k)));
                    closest = closest.min(d);
                }
                if closest <= cfg.distinct_tol {
                    return diverge(DivergeReason::ReturnedKnown, trace);
                }
            }
            polish(inst, &mut u, &mut residual, &mut raw_norm);
            return SolveResult {
                outcome: NewtonOutcome::Converged { u, iters: iter },
                trace,
            };
        }

        let jac = inst.jacobian(&u);
        let neg_r: Vec<T> = residual.iter().map(|r| -*r).collect();
        let direction = match jac.solve(&neg_r) {
            Ok(d) => d,
            Err(_) => return diverge(DivergeReason::SingularSystem, trace),
        };

        let (step_dir, current_merit) = if deflated {
            let Some(defl) = deflation_at(inst, &u, knowns, cfg, true) else {
                return diverge(DivergeReason::ReturnedKnown, trace);
            };
            let grad = defl.grad.as_ref().unwrap();
            let dot = grad
                .iter()
                .zip(&direction)
                .fold(T::zero(), |acc, (g, d)| acc + *g * *d);
            let denom = T::one() - dot / defl.m;
            if denom.abs() < T::cst(1e-14) || !denom.is_finite() {
                return diverge(DivergeReason::SingularSystem, trace);
            }
            let scaled: Vec<T> = direction.iter().map(|d| *d / denom).collect();
            (scaled, defl.m * raw_norm)
        } else {
            (direction, raw_norm)
        };

        // Backtracking: accept the first step with a strict merit decrease.
        let mut step = T::one();
        let accepted = loop {
            let mut trial = u.clone();
            trial.axpy(step, &step_dir);
            let trial_residual = inst.residual(&trial);
            let trial_raw = sup_norm(&trial_residual);
            let trial_merit = if deflated {
                match deflation_at(inst, &trial, knowns, cfg, false) {
                    Some(defl) => defl.m * trial_raw,
                    None => T::infinity(),
                }
            } else {
                trial_raw
            };
            if trial_merit.is_finite() && trial_merit < current_merit {
                break Some((trial, trial_residual, trial_raw));
            }
            step *= cfg.backtrack;
            if step < cfg.min_step {
                break None;
            }
        };
        let Some((next_u, next_residual, next_raw)) = accepted else {
            return diverge(DivergeReason::LineSearchFailed, trace);
        };
        u = next_u;
        residual = next_residual;
        raw_norm = next_raw;
        if cfg.collect_trace {
            trace.push(TraceRow {
                iter,
                residual_norm: raw_norm,
                step,
            });
        }
    }
    diverge(DivergeReason::Stalled, trace)
}

/// Drive the raw residual toward the floating-point floor with a few full
/// Newton steps; keeps converged solutions well inside the tolerance.
fn polish<T: Real>(
    inst: &ProblemInstance<T>,
    u: &mut DiscreteFunction<T>,
    residual: &mut Vec<T>,
    raw_norm: &mut T,
) {
    for _ in 0..3 {
        if *raw_norm == T::zero() {
            return;
        }
        let jac = inst.jacobian(u);
        let neg_r: Vec<T> = residual.iter().map(|r| -*r).collect();
        let Ok(direction) = jac.solve(&neg_r) else {
            return;
        };
        let mut trial = u.clone();
        trial.axpy(T::one(), &direction);
        let trial_residual = inst.residual(&trial);
        let trial_norm = sup_norm(&trial_residual);
        if trial_norm < *raw_norm {
            *u = trial;
            *residual = trial_residual;
            *raw_norm = trial_norm;
        } else {
            return;
        }
    }
}

/// Damped Newton iteration from one starting point.
pub fn newton_solve<T: Real>(
    inst: &ProblemInstance<T>,
    u0: &DiscreteFunction<T>,
    cfg: &SolverConfig<T>,
) -> SolveResult<T> {
    solve_impl(inst, &[], u0, cfg)
}

/// Newton on the deflated residual: converged results keep a relative
/// distance above `distinct_tol` from every known solution.
pub fn deflated_solve<T: Real>(
    inst: &ProblemInstance<T>,
    known: &SolutionSet<T>,
    u0: &DiscreteFunction<T>,
    cfg: &SolverConfig<T>,
) -> SolveResult<T> {
    solve_impl(inst, &known.members(), u0, cfg)
}

/// Per-attempt record of a multi-start search.
#[derive(Debug, Clone)]
pub struct SearchAttempt<T> {
    pub pass: usize,
    pub guess: usize,
    pub converged: bool,
    pub iters: usize,
    pub reason: Option<DivergeReason>,
    pub accepted: bool,
    pub trace: Vec<TraceRow<T>>,
}

const MAX_SEARCH_PASSES: usize = 8;

/// Greedy multi-start search: solve, accept distinct solutions, deflate,
/// and retry every guess until a full pass adds nothing.
pub fn find_solutions<T: Real>(
    inst: &ProblemInstance<T>,
    cfg: &SolverConfig<T>,
    guesses: &[DiscreteFunction<T>],
) -> SolutionSet<T> {
    find_solutions_traced(inst, cfg, guesses).0
}

pub fn find_solutions_traced<T: Real>(
    inst: &ProblemInstance<T>,
    cfg: &SolverConfig<T>,
    guesses: &[DiscreteFunction<T>],
) -> (SolutionSet<T>, Vec<SearchAttempt<T>>) {
    let mut set = SolutionSet::new();
    let mut log = Vec::new();
    for pass in 0..MAX_SEARCH_PASSES {
        let mut added = false;
        for (gi, guess) in guesses.iter().enumerate() {
            let result = solve_impl(inst, &set.members(), guess, cfg);
            let mut attempt = SearchAttempt {
                pass,
                guess: gi,
                converged: false,
                iters: 0,
                reason: None,
                accepted: false,
                trace: result.trace,
            };
            match result.outcome {
                NewtonOutcome::Converged { u, iters } => {
                    attempt.converged = true;
                    attempt.iters = iters;
                    if set.try_insert(inst, u, cfg) {
                        attempt.accepted = true;
                        added = true;
                    }
                }
                NewtonOutcome::Diverged(reason) => {
                    attempt.reason = Some(reason);
                }
            }
            log.push(attempt);
        }
        if !added {
            break;
        }
    }
    set.finalize(inst);
    (set, log)
}

/// Standard guess family: zero, the constant-solution roots when both
/// coefficients are constant, then seeded random fields.
pub fn default_guesses<T: Real>(
    inst: &ProblemInstance<T>,
    cfg: &SolverConfig<T>,
) -> Vec<DiscreteFunction<T>> {
    let mesh = inst.mesh();
    let mut guesses = vec![DiscreteFunction::zeros(mesh)];
    if inst.lambda() > T::zero() && inst.alpha().is_constant() && inst.f().spatial().is_constant()
    {
        if let Some(poly) = inst.f().poly() {
            if let Ok(report) = oracle::constant_solutions(
                inst.alpha().sup(),
                inst.f().spatial().sup(),
                poly,
                inst.lambda(),
                inst.p(),
            ) {
                for root in report.roots {
                    guesses.push(DiscreteFunction::constant(mesh, root));
                }
            }
        }
    }
    let mut rng = SplitMix64::new(cfg.rng_seed);
    for _ in 0..cfg.random_guesses {
        let values: Vec<T> = (0..mesh.num_vertices())
            .map(|_| rng.next_symmetric::<T>() * cfg.guess_amplitude)
            .collect();
        guesses.push(DiscreteFunction::new(values));
    }
    guesses
}

/// One continuation step: solutions re-solved at a fixed multiplier.
#[derive(Debug, Clone)]
pub struct MuStep<T> {
    pub mu: T,
    pub count: usize,
    pub set: SolutionSet<T>,
}

/// Persistence data of a continuation run.
#[derive(Debug, Clone)]
pub struct ContinuationReport<T> {
    pub steps: Vec<MuStep<T>>,
    /// Largest schedule value up to which every step kept at least three
    /// distinct solutions (prefix rule); zero when the first step fails.
    pub mu_hat: T,
    /// Largest weighted norm over the start set and all steps up to
    /// `mu_hat`.
    pub max_wnorm: T,
}

/// Warm-start continuation along an increasing multiplier schedule.
pub fn continue_in_mu<T: Real>(
    inst: &ProblemInstance<T>,
    start: &SolutionSet<T>,
    schedule: &[T],
    cfg: &SolverConfig<T>,
) -> ContinuationReport<T> {
    let mut steps = Vec::with_capacity(schedule.len());
    let mut carried: Vec<DiscreteFunction<T>> =
        start.solutions().iter().map(|s| s.u.clone()).collect();
    let mut mu_hat = T::zero();
    let mut max_wnorm = start.max_wnorm().unwrap_or(T::zero());
    let mut prefix_ok = true;
    for &mu in schedule {
        let inst_mu = inst.with_mu(mu);
        let mut set = SolutionSet::new();
        for u0 in &carried {
            if let NewtonOutcome::Converged { u, .. } =
                newton_solve(&inst_mu, u0, cfg).outcome
            {
                set.try_insert(&inst_mu, u, cfg);
            }
        }
        set.finalize(&inst_mu);
        let count = set.len();
        if prefix_ok && count >= 3 {
            mu_hat = mu;
            if let Some(w) = set.max_wnorm() {
                max_wnorm = max_wnorm.max(w);
            }
        } else {
            prefix_ok = false;
        }
        carried = set.solutions().iter().map(|s| s.u.clone()).collect();
        steps.push(MuStep { mu, count, set });
    }
    ContinuationReport {
        steps,
        mu_hat,
        max_wnorm,
    }
}
