use num_complex::Complex64;
use pinching_noma::channel::csi_error_with;
use pinching_noma::noma::conservative_order_by_magnitude;
use pinching_noma::pso::project_theta;
use pinching_noma::*;
use proptest::prelude::*;

const L: f64 = 10.0;
const D_MIN: f64 = 0.5;

fn feasible(x: &[f64]) -> bool {
    x.iter().all(|v| (0.0..=L).contains(v)) && x.windows(2).all(|w| w[1] - w[0] >= D_MIN - 1e-12)
}

fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..6).prop_flat_map(|k| {
        (
            prop::collection::vec(1e-3f64..10.0, k),
            prop::collection::vec(0.0f64..1.0, k),
        )
            .prop_map(|(mut h, a)| {
                h.sort_by(f64::total_cmp);
                (h, project_simplex(&a))
            })
    })
}

proptest! {
    #[test]
    fn geometry_projection_feasible_and_idempotent(
        x in prop::collection::vec(-2.0 * L..2.0 * L, 1..12)
    ) {
        let p = project_geometry(&x, L, D_MIN).unwrap();
        prop_assert!(feasible(&p), "{p:?}");
        let q = project_geometry(&p, L, D_MIN).unwrap();
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn geometry_projection_keeps_feasible_input(x in prop::collection::vec(0.0..L, 1..6)) {
        let mut x = x;
        x.sort_by(f64::total_cmp);
        prop_assume!(feasible(&x));
        prop_assert_eq!(project_geometry(&x, L, D_MIN).unwrap(), x);
    }

    #[test]
    fn simplex_projection_feasible_and_idempotent(a in prop::collection::vec(-1.0f64..2.0, 1..8)) {
        let p = project_simplex(&a);
        prop_assert!(p.iter().all(|&v| v >= 0.0));
        prop_assert!(p.iter().sum::<f64>() <= 1.0 + 1e-12);
        let q = project_simplex(&p);
        for (x, y) in p.iter().zip(&q) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn full_projection_feasible(
        x in prop::collection::vec(-2.0 * L..2.0 * L, 5),
        a in prop::collection::vec(-1.0f64..2.0, 3),
    ) {
        let mut theta: Vec<f64> = x.into_iter().chain(a).collect();
        project_theta(&mut theta, 5, L, D_MIN).unwrap();
        prop_assert!(feasible(&theta[..5]));
        prop_assert!(PowerAlloc::new(theta[5..].to_vec()).is_feasible(1e-12));
    }

    #[test]
    fn conservative_never_exceeds_true(
        (h, a) in instance(),
        eps in 0.0f64..0.9,
        eta_i in 0.01f64..2.0,
        eta_r in 0.0f64..2.0,
        noise in 1e-3f64..1.0,
    ) {
        let g = robust_gains(eps, eta_i, eta_r);
        let c = conservative_sinr(&h, &a, &g, 1.0, noise);
        let t = true_sinr(&h, &a, 1.0, noise);
        for (c, t) in c.iter().zip(&t) {
            prop_assert!(*c <= *t * (1.0 + 1e-12), "{c} > {t}");
            prop_assert!(c.is_finite() && *c >= 0.0);
        }
    }

    #[test]
    fn nominal_gains_reproduce_true_sinr((h, a) in instance(), eta_i in 0.01f64..2.0, noise in 1e-3f64..1.0) {
        let c = conservative_sinr(&h, &a, &robust_gains(0.0, eta_i, 0.0), 1.0, noise);
        let t = true_sinr(&h, &a, 1.0, noise);
        for (c, t) in c.iter().zip(&t) {
            prop_assert!((c - t).abs() <= 1e-12 * t.abs());
        }
    }

    #[test]
    fn sinr_monotone_in_power(
        (h, a) in instance(),
        who in 0usize..6,
        bump in 1e-3f64..0.5,
        eps in 0.0f64..0.5,
    ) {
        let k = who % h.len();
        let g = robust_gains(eps, 0.5, 0.2);
        let before = conservative_sinr(&h, &a, &g, 1.0, 0.1);
        let mut raised = a.clone();
        raised[k] += bump;
        let after = conservative_sinr(&h, &raised, &g, 1.0, 0.1);
        for j in 0..h.len() {
            if j == k {
                prop_assert!(after[j] >= before[j]);
            } else {
                prop_assert!(after[j] <= before[j] * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn sinr_scale_invariant((h, a) in instance(), scale in 1e-6f64..1e6, eps in 0.0f64..0.5) {
        let g = robust_gains(eps, 0.5, 0.2);
        let base = conservative_sinr(&h, &a, &g, 1.0, 0.1);
        let scaled_h: Vec<f64> = h.iter().map(|v| v * scale).collect();
        let scaled = conservative_sinr(&scaled_h, &a, &g, 1.0, 0.1 * scale);
        for (x, y) in base.iter().zip(&scaled) {
            prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(1e-300));
        }
    }

    #[test]
    fn sic_decodable_iff_stronger(
        h_k in 1e-3f64..10.0,
        h_j in 1e-3f64..10.0,
        s_k in 1e-3f64..1.0,
        eta in 1e-3f64..1.0,
    ) {
        let alpha = [1.0, s_k];
        let decode = sic_decode_sinr(h_j, 0, &alpha, 1.0, eta);
        let own = true_sinr(&[h_k, h_j], &alpha, 1.0, eta)[0];
        // the two sides are algebraically equal when h_j == h_k; skip round-off ties
        prop_assume!((h_j - h_k).abs() > 1e-12 * h_k);
        prop_assert_eq!(decode >= own, h_j >= h_k);
    }

    #[test]
    fn csi_error_within_bound(
        re in -5.0f64..5.0,
        im in -5.0f64..5.0,
        eps in 0.0f64..0.99,
        rho in 0.0f64..=1.0,
        phi in 0.0f64..std::f64::consts::TAU,
    ) {
        let h = Complex64::new(re, im);
        let h_hat = csi_error_with(h, eps, rho, phi);
        let m = h.norm();
        prop_assert!((h_hat - h).norm() <= eps * m * (1.0 + 1e-12) + 1e-300);
        prop_assert!(h_hat.norm() / (1.0 + eps) <= m * (1.0 + 1e-12));
        prop_assert!(m * (1.0 - eps) <= h_hat.norm() * (1.0 + 1e-12));
    }

    #[test]
    fn certified_order_is_never_reversed(
        a in 1e-3f64..5.0,
        gap in 0.0f64..3.0,
        eps in 0.0f64..0.6,
        phi_a in 0.0f64..std::f64::consts::TAU,
        phi_b in 0.0f64..std::f64::consts::TAU,
    ) {
        let ratio = (1.0 + eps) / (1.0 - eps);
        let b = ratio * a + gap * a;
        let order = conservative_order_by_magnitude(&[a, b], eps);
        prop_assert_eq!(order.violations[0], 0.0);
        // a boundary error |e| = ε|h| in direction φ gives |ĥ| = |h|·|1 + ε e^{jφ}|
        let true_mag = |est: f64, phi: f64| est / (Complex64::new(1.0, 0.0) + Complex64::from_polar(eps, phi)).norm();
        prop_assert!(true_mag(b, phi_b) >= true_mag(a, phi_a) * (1.0 - 1e-12));
    }

    #[test]
    fn scenarios_respect_invariants(seed in any::<u64>(), k in 1usize..8, obstacles in 0usize..6) {
        let config = ConfigF64 { num_users: k, obstacle_count: obstacles, ..Default::default() };
        let s = generate_scenario(&config, seed).unwrap();
        prop_assert_eq!(s.users.len(), k);
        prop_assert_eq!(s.obstacles.len(), obstacles);
        prop_assert!(s.validate(&config).is_ok());
        prop_assert_eq!(generate_scenario(&config, seed).unwrap(), s);
    }

    #[test]
    fn channel_is_lipschitz_in_position(seed in 0u64..200, n in 0usize..5, delta in 1e-7f64..1e-5) {
        let config = ConfigF64::default();
        let scenario = generate_scenario(&config, seed).unwrap();
        let model = LinkModel::new(&config);
        let mut x = vec![0.5, 2.5, 5.0, 7.5, 9.5];
        let base = model.effective_all(&x, &scenario).unwrap();
        x[n] += delta;
        let moved = model.effective_all(&x, &scenario).unwrap();
        // slope bound: phase rate 2π(1/λ + 1/λ_g) times the largest single-link amplitude
        let k0 = 2.0 * std::f64::consts::PI / config.wavelength();
        let kg = 2.0 * std::f64::consts::PI / config.guide_wavelength();
        let amp = config.wavelength() / (4.0 * std::f64::consts::PI * config.pa_height);
        let bound = (k0 + kg + 1.0) * amp * 1.5;
        for (b, m) in base.iter().zip(&moved) {
            prop_assert!((m.norm() - b.norm()).abs() <= bound * delta);
        }
    }

    #[test]
    fn swarm_trace_nondecreasing(seed in any::<u64>(), robust in any::<bool>()) {
        let config = ConfigF64::default();
        let scenario = generate_scenario(&config, seed).unwrap();
        let params = PsoParams { num_particles: 6, max_iters: 15, ..Default::default() };
        let result = optimize(&scenario, &config, &params, seed ^ 0x5a5a, robust).unwrap();
        prop_assert!(result.trace.windows(2).all(|w| w[1] >= w[0]));
        prop_assert_eq!(*result.trace.last().unwrap(), result.best_fitness);
        let theta = &result.best_theta;
        prop_assert!(feasible(&theta[..5]));
        prop_assert!(PowerAlloc::new(theta[5..].to_vec()).is_feasible(1e-12));
    }
}

#[test]
fn robust_and_nominal_agree_without_uncertainty() {
    let config = ConfigF64 {
        csi_eps: 0.0,
        eta_r: 0.0,
        ..Default::default()
    };
    let scenario = generate_scenario(&config, 4).unwrap();
    let robust = pso::Evaluator::new(&scenario, &config, FitnessMode::Robust);
    let nominal = pso::Evaluator::new(&scenario, &config, FitnessMode::Nominal);
    let mut rng = pinching_noma::seeding::stream_rng(4, 0);
    for _ in 0..200 {
        let theta = pso::sample_feasible_theta(&config, &mut rng).unwrap();
        assert_eq!(
            robust.evaluate(&theta).unwrap(),
            nominal.evaluate(&theta).unwrap()
        );
    }
}
