//! Acceptance suite: one test per criterion, each printing a PASS line and
//! enforcing its stated tolerances and runtime budget.
//!
//! Run with `cargo test -p trisolve-cli --test acceptance -- --nocapture`
//! to see the per-criterion lines.

use std::time::{Duration, Instant};

use trisolve_cli::config::Experiment;
use trisolve_core::coefficient::CoefficientField;
use trisolve_core::fem::{Forcing, ProblemInstance};
use trisolve_core::mesh::{build_box_mesh, BoxDomain, DiscreteFunction};
use trisolve_core::nonlinearity::{AnalyticForm, NonlinearitySpec};
use trisolve_core::oracle;
use trisolve_core::solver::{self, NewtonOutcome, SolverConfig, SplitMix64};
use trisolve_core::thresholds;

const UPPER_ROOT: f64 = 0.872_677_996_249_964_9; // (3 + sqrt 5)/6
const LOWER_ROOT: f64 = 0.127_322_003_750_035_1; // (3 - sqrt 5)/6

fn unit_square() -> BoxDomain<f64> {
    BoxDomain::new(vec![1.0, 1.0]).unwrap()
}

fn base_cubic_spec() -> NonlinearitySpec<f64> {
    NonlinearitySpec::polynomial(
        CoefficientField::constant(1.0, &unit_square()),
        &[1.0, 1.0, -1.0],
    )
}

fn base_instance(divisions: usize, lambda: f64) -> ProblemInstance<f64> {
    let mesh = build_box_mesh::<f64>(2, &[divisions, divisions], &[1.0, 1.0]).unwrap();
    let alpha = CoefficientField::constant(1.0, &unit_square());
    ProblemInstance::new(mesh, alpha, 2.0, base_cubic_spec(), None, lambda, 0.0, None)
        .unwrap()
}

fn report_pass(criterion: u32, label: &str, elapsed: Duration, budget: Duration) {
    println!(
        "ACCEPTANCE {criterion} ({label}): PASS in {:.2?} (budget {:.0?})",
        elapsed, budget
    );
    assert!(
        elapsed <= budget,
        "criterion {criterion} exceeded its runtime budget: {elapsed:.2?} > {budget:.2?}"
    );
}

#[test]
fn acceptance_1_threshold_exactness() {
    let start = Instant::now();
    let alpha = CoefficientField::constant(1.0, &unit_square());
    let report = thresholds::check_condition1(&base_cubic_spec(), &alpha, 2.0);
    assert!(
        (report.gamma - 9.0 / 11.0).abs() <= 1e-10,
        "gamma {}",
        report.gamma
    );
    assert!((report.delta - 1.0).abs() <= 1e-10, "delta {}", report.delta);
    assert!(report.condition1);

    let beta = CoefficientField::constant(1.0, &unit_square());
    let prop1 = thresholds::prop1_thresholds(&alpha, &beta, 1.0, 1.0, 1.0).unwrap();
    assert!(thresholds::consistency_vs_theorem1(&prop1, &report));
    report_pass(
        1,
        "threshold exactness",
        start.elapsed(),
        Duration::from_secs(1),
    );
}

#[test]
fn acceptance_2_condition_equivalence() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(2024);
    let unit = |rng: &mut SplitMix64| (rng.next_symmetric::<f64>() + 1.0) / 2.0;
    for trial in 0..200 {
        let c = (unit(&mut rng) * 5.0).max(1e-3);
        let b = rng.next_symmetric::<f64>() * 5.0;
        let a_floor = -2.0 * b * b / (9.0 * c);
        let a = a_floor + unit(&mut rng) * (5.0 - a_floor);
        let alpha_v = 0.1 + unit(&mut rng) * 4.9;
        let beta_v = 0.1 + unit(&mut rng) * 4.9;

        let alpha = CoefficientField::constant(alpha_v, &unit_square());
        let beta = CoefficientField::constant(beta_v, &unit_square());
        let prop1 = thresholds::prop1_thresholds(&alpha, &beta, a, b, c)
            .unwrap_or_else(|e| panic!("trial {trial}: {e}"));
        let prop1_verdict = prop1.condition8_holds;

        let spec = NonlinearitySpec::polynomial(beta.clone(), &[a, b, -c]);
        let general = thresholds::check_condition1(&spec, &alpha, 2.0);
        assert_eq!(
            prop1_verdict, general.condition1,
            "trial {trial}: a={a} b={b} c={c} alpha={alpha_v} beta={beta_v}\n{prop1:?}\n{general:?}"
        );
    }
    report_pass(
        2,
        "condition equivalence over 200 draws",
        start.elapsed(),
        Duration::from_secs(10),
    );
}

#[test]
fn acceptance_3_multiplicity_verification() {
    let start = Instant::now();
    let inst = base_instance(32, 0.9);
    let cfg = SolverConfig {
        rng_seed: 7,
        ..SolverConfig::default()
    };
    let guesses = solver::default_guesses(&inst, &cfg);
    let set = solver::find_solutions(&inst, &cfg, &guesses);
    assert!(set.len() >= 3, "found {} solutions", set.len());
    for target in [0.0, LOWER_ROOT, UPPER_ROOT] {
        let matched = set.solutions().iter().any(|s| {
            s.u.values()
                .iter()
                .fold(0.0f64, |m, v| m.max((v - target).abs()))
                <= 1e-8
        });
        assert!(matched, "no solution matches the constant {target}");
    }
    for s in set.solutions() {
        assert!(
            s.residual_norm <= 1e-10,
            "residual {} above tolerance",
            s.residual_norm
        );
    }
    report_pass(
        3,
        "multiplicity on 32x32 at lambda 0.9",
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn acceptance_4_sweep_stability() {
    let start = Instant::now();
    let config = r#"
[domain]
dim = 2
divisions = [32, 32]
extents = [1.0, 1.0]

[problem]
p = 2.0
alpha = { constant = 1.0 }
f = { beta = { constant = 1.0 }, poly = [1.0, 1.0, -1.0] }

[sweep]
lambda_interval = [0.85, 0.95]
lambda_count = 11

[solver]
rng_seed = 7
"#;
    let mut exp = Experiment::from_toml_str(config).unwrap();
    let out_dir = std::env::temp_dir().join("trisolve_acceptance_sweep");
    exp.out_dir = out_dir.clone();
    let code = trisolve_cli::cmd_sweep(&exp, false).unwrap();
    assert_eq!(code, 0);

    let report = std::fs::read_to_string(out_dir.join("sweep.json")).unwrap();
    assert!(report.contains("\"pass\": true"), "sweep verdict not PASS");
    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let mut rows = 0;
    let mut max_wnorm = 0.0f64;
    for line in csv.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let count: usize = fields[2].parse().unwrap();
        let wnorm: f64 = fields[3].parse().unwrap();
        assert!(count >= 3, "count {count} < 3 in row {line}");
        max_wnorm = max_wnorm.max(wnorm);
        rows += 1;
    }
    assert_eq!(rows, 11);
    assert!(max_wnorm <= 1.2, "max wnorm {max_wnorm} above bound");
    report_pass(
        4,
        "sweep stability over [0.85, 0.95]",
        start.elapsed(),
        Duration::from_secs(600),
    );
}

#[test]
fn acceptance_5_perturbation_persistence() {
    let start = Instant::now();
    let mesh = build_box_mesh::<f64>(2, &[32, 32], &[1.0, 1.0]).unwrap();
    let alpha = CoefficientField::constant(1.0, &unit_square());
    let g = NonlinearitySpec::analytic(
        CoefficientField::constant(1.0, &unit_square()),
        AnalyticForm::Sin,
        1.0,
        1.0,
    );
    let inst = ProblemInstance::new(
        mesh,
        alpha,
        2.0,
        base_cubic_spec(),
        Some(g),
        0.9,
        0.0,
        None,
    )
    .unwrap();
    let cfg = SolverConfig {
        rng_seed: 7,
        ..SolverConfig::default()
    };
    let set = solver::find_solutions(&inst, &cfg, &solver::default_guesses(&inst, &cfg));
    assert!(set.len() >= 3);

    // 10^-4 .. 10^0, three points per decade.
    let schedule: Vec<f64> = (0..=12).map(|i| 10f64.powf(-4.0 + i as f64 / 3.0)).collect();
    let report = solver::continue_in_mu(&inst, &set, &schedule, &cfg);
    assert!(
        report.mu_hat >= 1e-3,
        "persistence bound mu_hat = {}",
        report.mu_hat
    );
    for step in &report.steps {
        if step.mu <= report.mu_hat {
            assert!(
                step.count >= 3,
                "only {} solutions at mu = {}",
                step.count,
                step.mu
            );
        }
    }
    report_pass(
        5,
        "persistence under sine perturbation",
        start.elapsed(),
        Duration::from_secs(300),
    );
}

#[test]
fn acceptance_6_gradient_certification() {
    let start = Instant::now();
    let cases: Vec<(ProblemInstance<f64>, f64, &str)> = vec![
        (base_instance(8, 0.9), 1e-6, "p = 2, 2D"),
        (
            {
                let mesh = build_box_mesh::<f64>(3, &[4, 4, 4], &[1.0, 1.0, 1.0]).unwrap();
                let domain = BoxDomain::new(vec![1.0, 1.0, 1.0]).unwrap();
                let alpha = CoefficientField::constant(1.0, &domain);
                let beta = CoefficientField::constant(1.0, &domain);
                let f = NonlinearitySpec::polynomial(beta, &[1.0, 1.0, -1.0]);
                ProblemInstance::new(mesh, alpha, 3.0, f, None, 0.9, 0.0, Some(0.0))
                    .unwrap()
            },
            1e-4,
            "p = 3, 3D",
        ),
    ];
    for (inst, tol, label) in &cases {
        let mut rng = SplitMix64::new(6);
        for state in 0..20 {
            let u = DiscreteFunction::new(
                (0..inst.mesh().num_vertices())
                    .map(|_| rng.next_symmetric::<f64>())
                    .collect(),
            );
            let err = oracle::fd_gradient_check(inst, &u, 1e-5);
            assert!(err <= *tol, "{label} state {state}: error {err} > {tol}");
        }
    }
    report_pass(
        6,
        "gradient certification",
        start.elapsed(),
        Duration::from_secs(30),
    );
}

#[test]
fn acceptance_7_deflation_soundness() {
    let start = Instant::now();
    let inst = base_instance(16, 0.9);
    let cfg = SolverConfig {
        rng_seed: 7,
        ..SolverConfig::default()
    };
    let known = solver::find_solutions(&inst, &cfg, &solver::default_guesses(&inst, &cfg));
    assert!(known.len() >= 3);

    let mut rng = SplitMix64::new(1717);
    let mut converged = 0usize;
    for trial in 0..100 {
        let u0 = DiscreteFunction::new(
            (0..inst.mesh().num_vertices())
                .map(|_| rng.next_symmetric::<f64>())
                .collect(),
        );
        let result = solver::deflated_solve(&inst, &known, &u0, &cfg);
        if let NewtonOutcome::Converged { u, .. } = result.outcome {
            converged += 1;
            let dist = known.min_distance_to(&inst, &u);
            assert!(
                dist > cfg.distinct_tol,
                "trial {trial}: returned a deflated solution (distance {dist})"
            );
        }
    }
    println!("deflation soundness: {converged}/100 deflated solves converged elsewhere");
    report_pass(
        7,
        "deflation non-return over 100 trials",
        start.elapsed(),
        Duration::from_secs(120),
    );
}

#[test]
fn acceptance_8_constant_ratio_equality() {
    let start = Instant::now();
    let inst = base_instance(8, 0.9);
    let sup = thresholds::sup_ratio(&base_cubic_spec(), 2.0);
    let alpha_integral = 1.0;
    let want = 2.0 / alpha_integral * sup.value;

    let mut best = f64::NEG_INFINITY;
    let mut s = -2.0f64;
    while s <= 2.0 {
        if s.abs() > 1e-9 {
            let u = DiscreteFunction::constant(inst.mesh(), s);
            best = best.max(inst.j_energy(&u, Forcing::F) / inst.phi_energy(&u));
        }
        s += 1e-3;
    }
    assert!(
        (best - want).abs() <= 1e-6,
        "constant-ratio sup {best} vs {want}"
    );
    report_pass(
        8,
        "constant-function ratio equality",
        start.elapsed(),
        Duration::from_secs(5),
    );
}

#[test]
fn acceptance_9_nonconstant_coefficients() {
    let start = Instant::now();
    let alpha = CoefficientField::affine(1.0, vec![0.5, 0.0], &unit_square()).unwrap();
    assert_eq!(alpha.integral(), 1.25);
    assert_eq!(alpha.inf(), 1.0);

    let report = thresholds::check_condition1(&base_cubic_spec(), &alpha, 2.0);
    assert!((report.gamma - 1.25 * 9.0 / 11.0).abs() <= 1e-12);
    assert!((report.delta - 1.0).abs() <= 1e-12);

    // This coefficient choice leaves the window ]gamma, delta[ empty
    // (gamma > delta); the midpoint of the endpoint pair is still the
    // natural probe point, and the discrete problem is multiplicit there.
    let lambda = 0.5 * (report.gamma + report.delta);
    let mesh = build_box_mesh::<f64>(2, &[32, 32], &[1.0, 1.0]).unwrap();
    let inst = ProblemInstance::new(
        mesh,
        alpha,
        2.0,
        base_cubic_spec(),
        None,
        lambda,
        0.0,
        None,
    )
    .unwrap();
    let cfg = SolverConfig {
        rng_seed: 7,
        ..SolverConfig::default()
    };
    let set = solver::find_solutions(&inst, &cfg, &solver::default_guesses(&inst, &cfg));
    assert!(
        set.len() >= 3,
        "found {} distinct solutions at lambda {lambda}",
        set.len()
    );
    for s in set.solutions() {
        assert!(s.residual_norm <= cfg.newton_tol);
    }
    report_pass(
        9,
        "nonconstant coefficients",
        start.elapsed(),
        Duration::from_secs(120),
    );
}
