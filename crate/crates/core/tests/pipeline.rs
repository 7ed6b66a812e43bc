use slsid_core::io::{dataset_to_csv_string, read_dataset_csv};
use slsid_core::{
    bcd_solve, consistency_sweep, fit_cluster_params, fixtures, nmse, objective_integer,
    oracle_global, select_order, stationarity_check, Assignment, ConsistencyScenario, Dataset,
    OracleOptions, OrderSelectConfig, Penalty, SlModel, SolverConfig,
};

#[test]
fn csv_round_trip_keeps_exact_fit() {
    for (m, d) in [fixtures::example1(), fixtures::example2()] {
        let back = read_dataset_csv(dataset_to_csv_string(&d).as_bytes()).unwrap();
        assert_eq!(back, d);
        assert_eq!(objective_integer(&back, &m, back.truth().unwrap()).unwrap(), 0.0);
    }
}

#[test]
fn second_cluster_of_example_two() {
    let (_, d) = fixtures::example2();
    let theta = fit_cluster_params(&d, d.truth().unwrap(), 2).unwrap();
    for (a, b) in theta.iter().zip([-2.0, 4.0, 1.0]) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn seven_sample_data_have_two_attractors() {
    let (truth, d) = fixtures::example2_seven();
    let (alt, _) = fixtures::example2_seven_alternate();
    let (mut hit_truth, mut hit_alt) = (false, false);
    for seed in 0..200 {
        let r = bcd_solve(&d, &SolverConfig::new(2).with_seed(seed).with_restarts(1)).unwrap();
        assert!(r.is_monotone());
        if r.objective < 1e-12 {
            assert!(stationarity_check(&d, &r));
            hit_truth |= nmse(&r.model, &truth).unwrap().0 < 1e-18;
            hit_alt |= nmse(&r.model, &alt).unwrap().0 < 1e-18;
        }
    }
    assert!(hit_truth && hit_alt);
}

#[test]
fn single_iteration_is_rarely_stationary() {
    let (_, d) = fixtures::example2();
    let stationary = (0..40)
        .filter(|&seed| {
            let r = bcd_solve(&d, &SolverConfig::new(2).with_seed(seed).with_restarts(1).with_max_iters(1)).unwrap();
            stationarity_check(&d, &r)
        })
        .count();
    assert!(stationary < 40);
}

#[test]
fn least_squares_for_one_subsystem_is_stationary() {
    let d = Dataset::new(
        vec![vec![1.0, 2.0], vec![0.5, -1.0], vec![2.0, 0.1], vec![-1.0, 1.0]],
        vec![0.3, 1.0, -0.4, 2.0],
    )
    .unwrap();
    let r = bcd_solve(&d, &SolverConfig::new(1)).unwrap();
    assert_eq!(r.iterations, 1);
    assert!(stationarity_check(&d, &r));
}

#[test]
fn example_two_one_subsystem_residual_exceeds_penalty() {
    let (_, d) = fixtures::example2();
    let n = d.len() as f64;
    let r = bcd_solve(&d, &SolverConfig::new(1)).unwrap();
    assert!(r.objective / n > n.ln() / n);
    let rep = select_order(
        &d,
        &OrderSelectConfig::new(4).with_penalty(Penalty::Fixed { lambda: n.ln() / n }),
    )
    .unwrap();
    assert_eq!(rep.chosen, 2);
    assert!(rep.candidates[1].fit < 1e-20);
}

#[test]
fn noise_free_sweep_recovers_every_time() {
    let sc = ConsistencyScenario {
        dim: 2,
        subsystems: 2,
        sigma: 0.0,
        range: (-5.0, 5.0),
    };
    let rows = consistency_sweep(&sc, &[60, 200], 6, &OrderSelectConfig::new(3), 1).unwrap();
    for r in rows {
        assert_eq!(r.recovery_rate, 1.0, "{:?}", r.chosen);
    }
}

#[test]
fn appending_a_consistent_sample_keeps_zero_optimum() {
    let (m, d) = fixtures::example1();
    let before = oracle_global(&d, 2, &OracleOptions::default()).unwrap();
    let mut d2 = d.clone();
    d2.push(&[1.0, 2.0], 3.0, Some(1)).unwrap();
    let after = oracle_global(&d2, 2, &OracleOptions::default()).unwrap();
    assert!(after.optimum.abs() < 1e-12);
    assert!(after.nondegenerate().count() <= before.nondegenerate().count());
    assert!(after.contains_params(m.params(), 1e-7));
}

#[test]
fn provided_initialization_is_used_by_the_first_restart() {
    let (_, d) = fixtures::example2();
    let init = Assignment::from_labels(&[1, 1, 1, 1, 1, 2, 2, 2], 2).unwrap();
    let r = bcd_solve(
        &d,
        &SolverConfig::new(2)
            .with_restarts(1)
            .with_init(slsid_core::Init::Provided(init.clone())),
    )
    .unwrap();
    assert_eq!(r.assignment, init);
    assert_eq!(r.iterations, 1);
    let _ = SlModel::new(vec![vec![0.0]]).unwrap();
}
