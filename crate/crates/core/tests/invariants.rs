use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nash_sharp::ball_eigen::{default_bracket, solve_default, solve_lambda1_on_grid};
use nash_sharp::constants::{compute_constants, corollary_check, threshold, ManifoldModel, NashConstants};
use nash_sharp::extremal_profile::{build_phi, integrate, RadialFunction};
use nash_sharp::nash_functional::{evaluate, sample_family, Family};
use nash_sharp::penalized_minimizer::{
    build_grid, concentration_diagnostics, initial_state, minimize_traced, state_at, InitKind, Trace,
};

fn consts(dim: usize) -> NashConstants {
    compute_constants(dim, &solve_default(dim).unwrap()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn family() -> impl Strategy<Value = Family> {
    prop::sample::select(Family::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quotient_is_homogeneous_dilation_invariant_and_bounded(
        dim in 1usize..=4, fam in family(), seed in any::<u64>(), c in 0.01f64..1e3, s in 0.1f64..10.0,
    ) {
        let k = consts(dim);
        let phi = build_phi(&solve_default(dim).unwrap(), &k, 1.0).unwrap();
        let u = sample_family(fam, dim, &phi, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let base = evaluate(&u, &k).unwrap();
        prop_assert!(rel(evaluate(&u.scaled(c), &k).unwrap().value, base.value) <= 1e-10);
        prop_assert!(rel(evaluate(&u.dilated(s), &k).unwrap().value, base.value) <= 1e-6);
        prop_assert!(base.normalized >= 1.0 - 1e-6);
        let composed = base.gradient_term * base.l1_term.powf(4.0 / dim as f64)
            / base.l2_term.powf(1.0 + 2.0 / dim as f64);
        prop_assert!(rel(composed, base.value) <= 1e-12);
    }

    #[test]
    fn phi_integrals_scale_with_k(dim in 1usize..=4, k in 0.1f64..10.0, power in 1.0f64..3.0) {
        let eig = solve_default(dim).unwrap();
        let c = compute_constants(dim, &eig).unwrap();
        let one = build_phi(&eig, &c, 1.0).unwrap();
        let scaled = build_phi(&eig, &c, k).unwrap();
        prop_assert!(rel(integrate(&scaled, power), k.powf(power) * integrate(&one, power)) <= 1e-10);
        prop_assert!(rel(evaluate(&scaled, &c).unwrap().value, evaluate(&one, &c).unwrap().value) <= 1e-10);
        prop_assert_eq!(*scaled.values.last().unwrap(), 0.0);
    }

    #[test]
    fn radial_function_rejects_nonincreasing_grids(dim in 1usize..=5, n in 5usize..40, dup in 1usize..4) {
        let mut grid: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        grid[dup] = grid[dup - 1];
        prop_assert!(RadialFunction::new(dim, grid, vec![1.0; n]).is_err());
    }

    #[test]
    fn sphere_threshold_scales_with_curvature(dim in 2usize..=6, r in 0.1f64..20.0) {
        let c = consts(dim);
        let unit = threshold(dim, &c, &ManifoldModel::round_sphere(dim, 1.0).unwrap()).unwrap();
        let model = ManifoldModel::round_sphere(dim, r).unwrap();
        prop_assert!(rel(threshold(dim, &c, &model).unwrap(), unit / (r * r)) <= 1e-12);
        let unit_check = corollary_check(&c, &ManifoldModel::round_sphere(dim, 1.0).unwrap()).unwrap();
        prop_assert_eq!(corollary_check(&c, &model).unwrap().verdict, unit_check.verdict);
        prop_assert_eq!(threshold(dim, &c, &ManifoldModel::flat_torus(dim, r).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn grid_operator_invariants(sphere_dim in 1usize..=4, res in 32usize..300, size in 0.3f64..5.0, seed in any::<u64>()) {
        let model = if sphere_dim == 1 {
            ManifoldModel::circle(size).unwrap()
        } else {
            ManifoldModel::round_sphere(sphere_dim, size).unwrap()
        };
        let g = build_grid(&model, res).unwrap();
        prop_assert!(rel(g.weights.iter().sum::<f64>(), model.volume) <= 1e-8);
        prop_assert!(g.weights.iter().all(|w| *w > 0.0));
        let ones = vec![1.0; res];
        prop_assert!(g.laplacian(&ones).iter().all(|x| x.abs() <= 1e-8));
        let a = initial_state(&g, InitKind::Random { seed }).unwrap();
        let b = initial_state(&g, InitKind::Random { seed: seed ^ 0x5555 }).unwrap();
        let ab = g.inner(&g.laplacian(&a), &b);
        let ba = g.inner(&a, &g.laplacian(&b));
        prop_assert!((ab - ba).abs() <= 1e-10 * ab.abs().max(1.0));
        prop_assert!(g.inner(&g.laplacian(&a), &a) >= -1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn minimizer_iterates_stay_on_constraint_and_descend(
        circle in any::<bool>(), seed in any::<u64>(), alpha_frac in 0.05f64..0.5, bump in any::<bool>(),
    ) {
        let (model, dim) = if circle {
            (ManifoldModel::circle(2.0 * PI).unwrap(), 1)
        } else {
            (ManifoldModel::round_sphere(2, 1.0).unwrap(), 2)
        };
        let c = consts(dim);
        let g = build_grid(&model, 96).unwrap();
        let alpha0 = 2.0 * c.inv_a0();
        let alpha = alpha_frac * c.inv_a0();
        let init = if bump {
            initial_state(&g, InitKind::Bump { width: 0.5 }).unwrap()
        } else {
            initial_state(&g, InitKind::Random { seed }).unwrap()
        };
        let mut trace = Trace::default();
        let result = minimize_traced(&g, alpha, alpha0, alpha * c.a0, &init, 300, 1e-8, Some(&mut trace));
        for l2 in &trace.l2 {
            prop_assert!((l2 - 1.0).abs() <= 1e-10);
        }
        for w in trace.objective.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-13 * w[0].abs());
        }
        if let Ok(s) = result {
            prop_assert!(s.u.iter().all(|x| *x >= 0.0));
            let n = dim as f64;
            let k = 4.0 / n * s.mu_alpha + 2.0 * g.dirichlet(&s.u) * s.a_alpha;
            prop_assert!(rel(k, s.k_alpha) <= 1e-10);
            prop_assert!(s.u[s.x_max_index] >= s.u.iter().cloned().fold(0.0, f64::max));
            prop_assert!(s.u[..s.x_max_index].iter().all(|x| *x < s.u[s.x_max_index]));
        }
    }

    #[test]
    fn mass_in_ball_is_a_nondecreasing_fraction(seed in any::<u64>(), mut deltas in prop::collection::vec(0.01f64..20.0, 2..8)) {
        let eig = solve_default(2).unwrap();
        let c = compute_constants(2, &eig).unwrap();
        let g = build_grid(&ManifoldModel::round_sphere(2, 1.0).unwrap(), 64).unwrap();
        let u = initial_state(&g, InitKind::Random { seed }).unwrap();
        let norm = g.inner(&u, &u).sqrt();
        let u: Vec<f64> = u.iter().map(|x| x / norm).collect();
        let s = state_at(u, &g, 0.5, 2.0, 0.04, 0, 1e-8);
        deltas.sort_by(f64::total_cmp);
        deltas.dedup();
        let reference = build_phi(&eig, &c, 1.0 / (1.0 - eig.u_at_1)).unwrap();
        let r = concentration_diagnostics(&s, &g, &reference, &deltas).unwrap();
        prop_assert_eq!(r.a_alpha, s.a_alpha.sqrt());
        let masses: Vec<f64> = deltas.iter().map(|d| r.mass_at(*d).unwrap()).collect();
        let l2: Vec<f64> = deltas.iter().map(|d| r.l2_mass_at(*d).unwrap()).collect();
        for m in masses.iter().chain(&l2) {
            prop_assert!((0.0..=1.0).contains(m));
        }
        prop_assert!(masses.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(l2.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn eigenfunction_has_one_node_for_every_grid() {
    for dim in 1..=8 {
        for grid in [256, 1024, 4096] {
            let eig = solve_lambda1_on_grid(dim, default_bracket(dim), 1e-10, grid).unwrap();
            assert_eq!(eig.sign_changes(), 1);
            assert_eq!(eig.values[0], 1.0);
            assert!(eig.derivative_at_1.abs() < 1e-6);
        }
    }
}

#[test]
fn circle_constant_state_diagnostics() {
    let eig = solve_default(1).unwrap();
    let c = compute_constants(1, &eig).unwrap();
    let length = 2.0 * PI;
    let g = build_grid(&ManifoldModel::circle(length).unwrap(), 128).unwrap();
    let u = vec![length.powf(-0.5); 128];
    let s = state_at(u, &g, 0.1, 0.14, 0.1 * c.a0, 0, 1e-8);
    assert_eq!(s.x_max_index, 0);
    let reference = build_phi(&eig, &c, 0.5).unwrap();
    let r = concentration_diagnostics(&s, &g, &reference, &[0.5, 1.0, 2.0]).unwrap();
    let h = length / 128.0;
    for d in [0.5, 1.0, 2.0] {
        let ball = (2.0 * d * r.a_alpha).min(length);
        assert!((r.mass_at(d).unwrap() - ball / length).abs() <= h / length + 1e-12);
    }
    assert!((r.decay_sup - length.powf(-0.5) * (length / 2.0).sqrt()).abs() < 1e-12);
}
