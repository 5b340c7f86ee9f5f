//! Cross-module checks: the sampled functional-ratio diagnostics, the
//! oracle-to-assembly exactness bridge, and solver/oracle agreement on the
//! constant-solution count.

use trisolve_core::coefficient::CoefficientField;
use trisolve_core::fem::{Forcing, ProblemInstance};
use trisolve_core::mesh::{build_box_mesh, BoxDomain, DiscreteFunction};
use trisolve_core::nonlinearity::NonlinearitySpec;
use trisolve_core::oracle;
use trisolve_core::poly::Polynomial;
use trisolve_core::solver::{self, SolverConfig, SplitMix64};
use trisolve_core::thresholds;

fn base_instance(divisions: usize, lambda: f64) -> ProblemInstance<f64> {
    let mesh = build_box_mesh::<f64>(2, &[divisions, divisions], &[1.0, 1.0]).unwrap();
    let domain = BoxDomain::new(vec![1.0, 1.0]).unwrap();
    let alpha = CoefficientField::constant(1.0, &domain);
    let beta = CoefficientField::constant(1.0, &domain);
    let f = NonlinearitySpec::polynomial(beta, &[1.0, 1.0, -1.0]);
    ProblemInstance::new(mesh, alpha, 2.0, f, None, lambda, 0.0, None).unwrap()
}

fn base_spec() -> NonlinearitySpec<f64> {
    let domain = BoxDomain::new(vec![1.0, 1.0]).unwrap();
    NonlinearitySpec::polynomial(CoefficientField::constant(1.0, &domain), &[1.0, 1.0, -1.0])
}

/// Restricted to constant functions the discrete ratio J/Phi equals the
/// scalar ratio exactly, so its grid supremum matches `(p / int alpha) S`.
#[test]
fn constant_ratio_sup_matches_threshold_sup() {
    let inst = base_instance(8, 0.9);
    let sup = thresholds::sup_ratio(&base_spec(), 2.0);
    let want = 2.0 / 1.0 * sup.value; // p / int(alpha) * S

    let mut best = f64::NEG_INFINITY;
    let mut s = -2.0f64;
    while s <= 2.0 {
        if s.abs() > 1e-9 {
            let u = DiscreteFunction::constant(inst.mesh(), s);
            let ratio = inst.j_energy(&u, Forcing::F) / inst.phi_energy(&u);
            best = best.max(ratio);
        }
        s += 1e-3;
    }
    assert!(
        (best - want).abs() <= 1e-6,
        "grid sup {best} vs threshold value {want}"
    );
}

/// Sampled one-sided check of the asymptotic ratio bound: for very small and
/// very large states, J/Phi stays below `p max(rho1, rho2, 0)/inf alpha`
/// plus slack. Recorded as a diagnostic; the assertion only guards against
/// NaN and gross violations.
#[test]
fn asymptotic_ratio_diagnostic() {
    let inst = base_instance(8, 0.9);
    let rho1 = thresholds::compute_rho1(&base_spec(), 2.0);
    let rho2 = thresholds::compute_rho2(&base_spec(), 2.0);
    let bound = 2.0 * rho1.max(rho2).max(0.0) / 1.0 + 0.1;

    let mut rng = SplitMix64::new(202);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..100 {
        let target = if k % 2 == 0 { 1e-3 } else { 1e3 };
        let mut u = DiscreteFunction::new(
            (0..inst.mesh().num_vertices())
                .map(|_| rng.next_symmetric::<f64>())
                .collect(),
        );
        let norm = inst.wnorm(&u);
        let scale = target / norm;
        for v in u.values_mut() {
            *v *= scale;
        }
        let ratio = inst.j_energy(&u, Forcing::F) / inst.phi_energy(&u);
        assert!(ratio.is_finite());
        worst = worst.max(ratio);
    }
    println!("asymptotic ratio diagnostic: worst {worst}, bound {bound}");
    assert!(worst <= bound, "worst {worst} exceeded diagnostic bound {bound}");
}

/// Constant-solution roots plugged into the assembled residual vanish to
/// rounding error on any constant-coefficient instance.
#[test]
fn oracle_roots_are_discrete_solutions() {
    let shape = Polynomial::from_degree_one_coeffs(&[1.0, 1.0, -1.0]);
    for (divisions, lambda) in [(8usize, 0.9f64), (12, 0.85), (6, 1.2)] {
        let inst = base_instance(divisions, lambda);
        let report = oracle::constant_solutions(1.0, 1.0, &shape, lambda, 2.0).unwrap();
        assert!(!report.roots.is_empty());
        for &s in &report.roots {
            let u = DiscreteFunction::constant(inst.mesh(), s);
            let sup = inst
                .residual(&u)
                .iter()
                .fold(0.0f64, |m, r| m.max(r.abs()));
            let scale = 1e-11 * (1.0 + (lambda * shape.eval(s)).abs()) * inst.mesh().volume();
            assert!(sup <= scale, "lambda={lambda} s={s}: {sup} > {scale}");
        }
    }
}

/// The brute-force grid supremum never exceeds the exact stationary-point
/// supremum.
#[test]
fn grid_sup_is_lower_bound_on_exact_sup() {
    let mut rng = SplitMix64::new(7);
    let domain = BoxDomain::new(vec![1.0, 1.0]).unwrap();
    for _ in 0..50 {
        let coeffs: Vec<f64> = (0..4)
            .map(|_| 3.0 * rng.next_symmetric::<f64>())
            .collect();
        let mut coeffs = coeffs;
        coeffs[3] = -coeffs[3].abs() - 0.1;
        let spec = NonlinearitySpec::polynomial(
            CoefficientField::constant(1.0, &domain),
            &coeffs,
        );
        let exact = thresholds::sup_ratio(&spec, 2.0).value;
        let grid = oracle::symmetric_log_grid::<f64>(-6.0, 2.0, 64);
        let brute = oracle::brute_sup_ratio(&spec, 2.0, &grid);
        assert!(brute <= exact + 1e-12, "brute {brute} > exact {exact}");
    }
}

/// The discriminant of the nonzero-root quadratic changes sign exactly
/// where the observed solution count crosses between 3 and fewer.
#[test]
fn solution_count_tracks_discriminant_sign() {
    let cfg = SolverConfig::<f64>::default();
    for lambda in [0.75, 0.79, 0.81, 0.9] {
        let disc = oracle::cubic_root_discriminant(1.0, 1.0, 1.0, 1.0, 1.0, lambda);
        let inst = base_instance(10, lambda);
        let guesses = solver::default_guesses(&inst, &cfg);
        let set = solver::find_solutions(&inst, &cfg, &guesses);
        // Count solutions that are numerically constant.
        let constants = set
            .solutions()
            .iter()
            .filter(|s| {
                let v0 = s.u.values()[0];
                s.u.values().iter().all(|v| (v - v0).abs() <= 1e-7)
            })
            .count();
        if disc > 0.0 {
            assert!(constants >= 3, "lambda={lambda}: {constants} constants");
        } else {
            assert!(constants < 3, "lambda={lambda}: {constants} constants");
        }
    }
}

/// A sampled coefficient field holding the nodal values of an affine
/// function assembles identically to the affine field itself: piecewise
/// linear interpolation reproduces affine functions exactly.
#[test]
fn sampled_field_assembles_like_affine() {
    use std::sync::Arc;
    let mesh = build_box_mesh::<f64>(2, &[8, 8], &[1.0, 1.0]).unwrap();
    let domain = BoxDomain::new(vec![1.0, 1.0]).unwrap();
    let affine = CoefficientField::affine(1.0, vec![0.5, -0.25], &domain).unwrap();
    let shared = Arc::new(mesh.clone());
    let nodal: Vec<f64> = (0..shared.num_vertices())
        .map(|i| {
            let v = shared.vertex(i);
            1.0 + 0.5 * v[0] - 0.25 * v[1]
        })
        .collect();
    let sampled = CoefficientField::sampled(Arc::clone(&shared), nodal).unwrap();
    assert!((sampled.integral() - affine.integral()).abs() < 1e-14);

    let f = NonlinearitySpec::polynomial(
        CoefficientField::constant(1.0, &domain),
        &[1.0, 1.0, -1.0],
    );
    let a = ProblemInstance::new(
        mesh.clone(),
        affine,
        2.0,
        f.clone(),
        None,
        0.9,
        0.0,
        None,
    )
    .unwrap();
    let b = ProblemInstance::new(mesh, sampled, 2.0, f, None, 0.9, 0.0, None).unwrap();

    let mut rng = SplitMix64::new(5);
    let u = DiscreteFunction::new(
        (0..a.mesh().num_vertices())
            .map(|_| rng.next_symmetric::<f64>())
            .collect(),
    );
    let ra = a.residual(&u);
    let rb = b.residual(&u);
    for (x, y) in ra.iter().zip(&rb) {
        assert!((x - y).abs() <= 1e-13, "{x} vs {y}");
    }
    assert!((a.phi_energy(&u) - b.phi_energy(&u)).abs() <= 1e-13);
}

/// At an exact constant solution both the residual and its finite
/// difference vanish together, so the relative deviation stays tiny.
#[test]
fn fd_check_at_exact_solution() {
    let inst = base_instance(8, 0.9);
    let s = (3.0 + 5f64.sqrt()) / 6.0;
    let u = DiscreteFunction::constant(inst.mesh(), s);
    let sup = inst
        .residual(&u)
        .iter()
        .fold(0.0f64, |m, r| m.max(r.abs()));
    assert!(sup <= 1e-13);
    let err = oracle::fd_gradient_check(&inst, &u, 1e-5);
    assert!(err <= 1e-6, "fd deviation {err}");
}

/// Three mesh/exponent configurations, twenty random states each.
#[test]
fn fd_gradient_certification() {
    let configs: Vec<(ProblemInstance<f64>, f64)> = vec![
        (base_instance(8, 0.9), 1e-6),
        (
            {
                let mesh = build_box_mesh::<f64>(3, &[4, 4, 4], &[1.0, 1.0, 1.0]).unwrap();
                let domain = BoxDomain::new(vec![1.0, 1.0, 1.0]).unwrap();
                let alpha = CoefficientField::constant(1.0, &domain);
                let beta = CoefficientField::constant(1.0, &domain);
                let f = NonlinearitySpec::polynomial(beta, &[1.0, 1.0, -1.0]);
                ProblemInstance::new(mesh, alpha, 3.0, f, None, 0.9, 0.0, Some(0.0)).unwrap()
            },
            1e-4,
        ),
    ];
    for (inst, tol) in &configs {
        let mut rng = SplitMix64::new(11);
        for _ in 0..20 {
            let u = DiscreteFunction::new(
                (0..inst.mesh().num_vertices())
                    .map(|_| rng.next_symmetric::<f64>())
                    .collect(),
            );
            let err = oracle::fd_gradient_check(inst, &u, 1e-5);
            assert!(err <= *tol, "p={} error {err} > {tol}", inst.p());
        }
    }
}
