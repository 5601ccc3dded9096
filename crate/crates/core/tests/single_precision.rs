use pinching_noma::experiments::{sweep_epsilon, RunOptions};
use pinching_noma::*;

#[test]
fn f32_pipeline_runs_end_to_end() {
    let config = ConfigF32::default();
    let scenario = generate_scenario(&config, 3).unwrap();
    let params = ParamsF32 {
        num_particles: 8,
        max_iters: 20,
        ..Default::default()
    };
    let result = optimize(&scenario, &config, &params, 9, true).unwrap();
    assert!(result.trace.windows(2).all(|w| w[1] >= w[0]));
    assert!(result.best_min_sinr.is_finite() && result.best_min_sinr > 0.0);
    assert!(PaLayout::new(result.positions().to_vec()).is_feasible(10.0, 0.5, 1e-5));
    assert!(PowerAlloc::new(result.alpha().to_vec()).is_feasible(1e-6));
}

#[test]
fn f32_users_match_f64_users() {
    let wide = generate_scenario(&ConfigF64::default(), 21).unwrap();
    let narrow = generate_scenario(&ConfigF32::default(), 21).unwrap();
    for (a, b) in wide.users.iter().zip(&narrow.users) {
        assert!((a.x as f32 - b.x).abs() <= 1e-5 && (a.y as f32 - b.y).abs() <= 1e-5);
    }
}

#[test]
fn f32_fitness_tracks_f64() {
    let config = ConfigF64::default();
    let scenario = generate_scenario(&config, 5).unwrap();
    let theta = [0.0, 2.5, 5.0, 7.5, 10.0, 0.6, 0.3, 0.1];
    let wide = penalized_fitness(&theta, &scenario, &config).unwrap();

    let config32: ConfigF32 = config.cast();
    let scenario32 = ScenarioF32 {
        users: scenario
            .users
            .iter()
            .map(|u| Point3::new(u.x as f32, u.y as f32, u.z as f32))
            .collect(),
        obstacles: scenario
            .obstacles
            .iter()
            .map(|o| Sphere {
                center: Point3::new(o.center.x as f32, o.center.y as f32, o.center.z as f32),
                radius: o.radius as f32,
            })
            .collect(),
        seed: scenario.seed,
    };
    let theta32: Vec<f32> = theta.iter().map(|&v| v as f32).collect();
    let narrow = penalized_fitness(&theta32, &scenario32, &config32).unwrap();
    // phases of order 2π·r/λ ≈ 3e3 rad lose about 3e-4 rad in single precision
    let rel = (narrow.min_sinr as f64 - wide.min_sinr).abs() / wide.min_sinr;
    assert!(rel < 5e-2, "relative gap {rel}");
}

#[test]
fn f32_sweep_produces_finite_records() {
    let params = ParamsF32 {
        num_particles: 4,
        max_iters: 5,
        ..Default::default()
    };
    let opts = RunOptions {
        realizations: 2,
        ..Default::default()
    };
    let records = sweep_epsilon(&ConfigF32::default(), &params, &[0.0, 0.1], &opts).unwrap();
    assert_eq!(records.len(), 16);
    assert!(records.iter().all(|r| r.min_sinr_linear.is_finite()));
}
