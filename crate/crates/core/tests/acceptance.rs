//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slsid_core::experiment::{run_cell, ScenarioSpec};
use slsid_core::pe::min_samples_table;
use slsid_core::{
    assign_step, bcd_solve, consistency_sweep, fixtures, min_samples_bako, min_samples_ours,
    min_samples_vidal, nmse, objective_integer, objective_relaxed, oracle_global, pe_report,
    stationarity_check, Assignment, ConsistencyScenario, Dataset, OracleOptions,
    OrderSelectConfig, PartitionVerdict, PeLimits, PeTolerances, Penalty, RelaxedMembership,
    SlModel, SolveReport, SolverConfig,
};

const TABLE1: [[(u64, u64, u64); 7]; 10] = [
    [(1, 1, 1), (2, 4, 2), (3, 9, 3), (4, 16, 4), (5, 25, 5), (6, 36, 6), (7, 49, 7)],
    [(2, 2, 2), (5, 8, 5), (9, 18, 9), (14, 32, 14), (20, 50, 20), (27, 72, 27), (35, 98, 35)],
    [(3, 3, 3), (8, 12, 9), (15, 27, 19), (24, 48, 34), (35, 75, 55), (48, 108, 83), (63, 147, 119)],
    [(4, 4, 4), (11, 16, 14), (21, 36, 34), (34, 64, 69), (50, 100, 125), (69, 144, 209), (91, 196, 329)],
    [(5, 5, 5), (14, 20, 20), (27, 45, 55), (44, 80, 125), (65, 125, 251), (90, 180, 461), (119, 245, 791)],
    [(6, 6, 6), (17, 24, 27), (33, 54, 83), (54, 96, 209), (80, 150, 461), (111, 216, 923), (147, 294, 1715)],
    [(7, 7, 7), (20, 28, 35), (39, 63, 119), (64, 112, 329), (95, 175, 791), (132, 252, 1715), (175, 343, 3431)],
    [(8, 8, 8), (23, 32, 44), (45, 72, 164), (74, 128, 494), (110, 200, 1286), (153, 288, 3002), (203, 392, 6434)],
    [(9, 9, 9), (26, 36, 54), (51, 81, 219), (84, 144, 714), (125, 225, 2001), (174, 324, 5004), (231, 441, 11439)],
    [(10, 10, 10), (29, 40, 65), (57, 90, 285), (94, 160, 1000), (140, 250, 3002), (195, 360, 8007), (259, 490, 19447)],
];

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn descent_ok(data: &Dataset, r: &SolveReport) -> Result<(), String> {
    ensure(r.is_monotone(), || format!("half-step trace increases: {:?}", r.half_steps))?;
    ensure(stationarity_check(data, r), || "returned pair is not a fixed point".into())
}

fn table1() -> Outcome {
    let start = Instant::now();
    let cells = min_samples_table(10, 7).map_err(|e| e.to_string())?;
    ensure(cells.len() == 70, || format!("{} cells", cells.len()))?;
    let mut matched = 0;
    for c in &cells {
        let exp = TABLE1[c.n as usize - 1][c.s as usize - 1];
        let got = (c.ours, c.bako, c.vidal);
        ensure(got == exp, || format!("n={} S={}: {got:?} != {exp:?}", c.n, c.s))?;
        matched += 1;
    }
    let spot = (
        min_samples_ours(10, 10).map_err(|e| e.to_string())?,
        min_samples_bako(10, 10).map_err(|e| e.to_string())?,
        min_samples_vidal(10, 10).map_err(|e| e.to_string())?,
    );
    ensure(spot == (505, 1000, 184_755), || format!("(10,10) -> {spot:?}"))?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("{matched}/70 cells and (10,10) = 505/1000/184755"))
}

fn example2_identification() -> Outcome {
    let start = Instant::now();
    let (truth, data) = fixtures::example2();
    let r = bcd_solve(&data, &SolverConfig::new(2).with_restarts(10)).map_err(|e| e.to_string())?;
    ensure(r.objective < 1e-12, || format!("objective {:e}", r.objective))?;
    let (_, perm) = nmse(&r.model, &truth).map_err(|e| e.to_string())?;
    let mut dev: f64 = 0.0;
    for j in 1..=2 {
        for (a, b) in r.model.param(j).iter().zip(truth.param(perm.map(j))) {
            dev = dev.max((a - b).abs());
        }
    }
    ensure(dev <= 1e-9, || format!("parameter deviation {dev:e}"))?;
    let aligned: Vec<usize> = r.assignment.labels().iter().map(|&l| perm.map(l)).collect();
    ensure(aligned == vec![1, 1, 1, 1, 1, 2, 2, 2], || format!("labels {aligned:?}"))?;
    descent_ok(&data, &r)?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("objective {:.3e}, max deviation {dev:.1e}", r.objective))
}

fn tightness() -> Outcome {
    let start = Instant::now();
    let (truth, data) = fixtures::example2_seven();
    let alt = SlModel::new(vec![vec![-1.4, 2.8, 4.0], vec![-2.0, -2.0, 4.0]]).unwrap();
    let r = oracle_global(&data, 2, &OracleOptions::default()).map_err(|e| e.to_string())?;
    ensure(!r.unique, || "oracle reports a unique solution".into())?;
    ensure(r.optimum.abs() <= 1e-12, || format!("optimum {:e}", r.optimum))?;
    for m in [&truth, &alt] {
        let class = r
            .classes
            .iter()
            .find(|c| c.has_params(m.params(), 1e-7))
            .ok_or_else(|| format!("no optimal class with parameters {:?}", m.params()))?;
        ensure(class.objective.abs() <= 1e-12, || format!("class objective {:e}", class.objective))?;
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("{} optimal classes, both parameter sets present", r.classes.len()))
}

fn example1_pipeline() -> Outcome {
    let start = Instant::now();
    let (truth, data) = fixtures::example1();
    let z = data.truth().unwrap().clone();
    let pe = pe_report(&data, &truth, &z, &PeTolerances::default(), &PeLimits::default())
        .map_err(|e| e.to_string())?;
    ensure(matches!(pe.cond3_partition, PartitionVerdict::Violated { .. }), || {
        format!("partition verdict {:?}", pe.cond3_partition)
    })?;
    let r = oracle_global(&data, 2, &OracleOptions::default()).map_err(|e| e.to_string())?;
    let nondeg = r.nondegenerate().count();
    ensure(nondeg >= 2, || format!("{nondeg} non-degenerate classes"))?;
    for p in [vec![vec![1.0, 1.0], vec![-2.0, 4.0]], vec![vec![-0.5, 1.0], vec![1.0, 5.5]]] {
        ensure(r.nondegenerate().any(|c| c.has_params(&p, 1e-7)), || format!("missing class {p:?}"))?;
    }
    let mut aug = data.clone();
    aug.push(&[1.0, 2.0], 3.0, Some(1)).map_err(|e| e.to_string())?;
    let z5 = aug.truth().unwrap().clone();
    let pe5 = pe_report(&aug, &truth, &z5, &PeTolerances::default(), &PeLimits::default())
        .map_err(|e| e.to_string())?;
    ensure(pe5.certified, || format!("augmented report {pe5:?}"))?;
    let r5 = oracle_global(&aug, 2, &OracleOptions::default()).map_err(|e| e.to_string())?;
    ensure(r5.unique, || format!("augmented oracle classes {:?}", r5.classes))?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("4 samples: violated, {nondeg} classes; 5 samples: certified and unique"))
}

fn random_instance(rng: &mut ChaCha8Rng, n: usize, samples: usize) -> (SlModel, Dataset) {
    let u = |rng: &mut ChaCha8Rng| rng.random_range(-5.0..5.0);
    let model = SlModel::new((0..2).map(|_| (0..n).map(|_| u(rng)).collect()).collect()).unwrap();
    let xs: Vec<Vec<f64>> = (0..samples).map(|_| (0..n).map(|_| u(rng)).collect()).collect();
    let labels: Vec<usize> = (0..samples).map(|_| rng.random_range(1..=2)).collect();
    let a = Assignment::from_labels(&labels, 2).unwrap();
    let data = slsid_core::simulate(&model, &xs, &a, &slsid_core::NoiseSpec::none()).unwrap();
    (model, data)
}

fn pe_implies_unique() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut certified, mut violations) = (0, 0);
    let instances = 200;
    for i in 0..instances {
        let n = 2 + i % 2;
        let samples = rng.random_range(2 * n..=10);
        let (model, data) = random_instance(&mut rng, n, samples);
        let z = data.truth().unwrap().clone();
        let pe = pe_report(&data, &model, &z, &PeTolerances::default(), &PeLimits::default())
            .map_err(|e| e.to_string())?;
        if pe.certified {
            certified += 1;
            let r = oracle_global(&data, 2, &OracleOptions::default()).map_err(|e| e.to_string())?;
            if !r.unique {
                violations += 1;
            }
        }
    }
    ensure(certified >= 20, || format!("only {certified} certified instances"))?;
    ensure(violations == 0, || format!("{violations} certified instances are not unique"))?;
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(format!("{instances} instances, {certified} certified, 0 violations"))
}

fn relaxation_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let instances = 60;
    for _ in 0..instances {
        let s: usize = rng.random_range(2..=3);
        let n: usize = rng.random_range(1..=3);
        let samples: usize = rng.random_range(1..=6);
        let model = SlModel::new((0..s).map(|_| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()).collect()).unwrap();
        let xs: Vec<Vec<f64>> = (0..samples).map(|_| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let ys: Vec<f64> = (0..samples).map(|_| rng.random_range(-3.0..3.0)).collect();
        let data = Dataset::new(xs, ys).unwrap();

        // binary minimum over all S^N assignments for these parameters
        let mut best = f64::INFINITY;
        let total = s.pow(samples as u32);
        for mut code in 0..total {
            let labels: Vec<usize> = (0..samples).map(|_| { let l = code % s + 1; code /= s; l }).collect();
            let a = Assignment::from_labels(&labels, s).unwrap();
            let v = objective_integer(&data, &model, &a).unwrap();
            let w = RelaxedMembership::from_assignment(&a);
            let rv = objective_relaxed(&data, &model, &w).unwrap();
            ensure(rv == v, || format!("relaxed {rv} != integer {v} at binary point"))?;
            best = best.min(v);
        }
        let closed = assign_step(&data, &model).map_err(|e| e.to_string())?;
        let w = RelaxedMembership::from_assignment(&closed);
        ensure(w.to_assignment().as_ref() == Some(&closed), || "closed-form minimizer not binary".into())?;
        let cv = objective_relaxed(&data, &model, &w).unwrap();
        ensure(cv == best, || format!("closed-form value {cv} vs binary minimum {best}"))?;
        for _ in 0..100 {
            let cols: Vec<Vec<f64>> = (0..samples)
                .map(|_| {
                    let raw: Vec<f64> = (0..s).map(|_| rng.random_range(0.0..1.0)).collect();
                    let t: f64 = raw.iter().sum();
                    raw.iter().map(|v| v / t).collect()
                })
                .collect();
            let weights: Vec<Vec<f64>> = (0..s).map(|j| cols.iter().map(|c| c[j]).collect()).collect();
            let w = match RelaxedMembership::new(weights) {
                Ok(w) => w,
                Err(_) => continue,
            };
            let fv = objective_relaxed(&data, &model, &w).unwrap();
            ensure(fv >= best - 1e-12 * best.abs().max(1.0), || format!("fractional {fv} < binary minimum {best}"))?;
        }
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("{instances} instances x 100 fractional memberships"))
}

fn descent_invariant() -> Outcome {
    let mut runs = 0;
    let mut check = |data: &Dataset, cfg: &SolverConfig| -> Result<(), String> {
        let r = bcd_solve(data, cfg).map_err(|e| e.to_string())?;
        descent_ok(data, &r)?;
        runs += 1;
        Ok(())
    };
    for seed in 0..20 {
        check(&fixtures::example2().1, &SolverConfig::new(2).with_seed(seed))?;
        check(&fixtures::example2_seven().1, &SolverConfig::new(2).with_seed(seed).with_restarts(3))?;
        check(&fixtures::example1_augmented().1, &SolverConfig::new(2).with_seed(seed).with_restarts(2))?;
    }
    for seed in 0..30u64 {
        let noise = slsid_core::NoiseSpec::gaussian(0.1, seed + 100).unwrap();
        let (s, n) = (2 + (seed % 2) as usize, 2 + (seed % 3) as usize);
        let (_, data) = slsid_core::generate_random_scenario(n, s, 300, (-5.0, 5.0), &noise, seed).unwrap();
        check(&data, &SolverConfig::new(s).with_seed(seed).with_restarts(4))?;
        check(&data, &SolverConfig::new(s + 1).with_seed(seed).with_restarts(2))?;
    }
    Ok(format!("{runs} solver runs monotone and stationary"))
}

fn table4_desk() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    for (n, s, samples) in [(2, 2, 500), (3, 2, 1000), (2, 3, 1000)] {
        let spec = ScenarioSpec { sigma: 0.1, repetitions: 20, restarts: 10, seed: 11, ..ScenarioSpec::new(n, s, samples) };
        let (sum, _) = run_cell(&spec).map_err(|e| e.to_string())?;
        parts.push(format!("({n},{s},{samples}): NMSE median {:.2e}, CE median {:.2}%, NRFTP {}", sum.nmse_median, sum.ce_median, sum.nrftp));
        ensure(sum.failures == 0, || format!("{} failed repetitions", sum.failures))?;
        ensure(sum.nmse_median < 1e-4 && sum.ce_median < 2.0, || parts.last().unwrap().clone())?;
    }
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(parts.join("; "))
}

fn order_consistency() -> Outcome {
    let start = Instant::now();
    let scenario = ConsistencyScenario { dim: 2, subsystems: 2, sigma: 0.1, range: (-5.0, 5.0) };
    let cfg = OrderSelectConfig::new(4).with_penalty(Penalty::NoiseScaled { c: 1.0 });
    let rows = consistency_sweep(&scenario, &[200, 1000, 2000, 5000], 20, &cfg, 3).map_err(|e| e.to_string())?;
    let rate = |n: usize| rows.iter().find(|r| r.samples == n).unwrap().recovery_rate;
    let mut summary = rows
        .iter()
        .map(|r| format!("N={}: {:.2} {:?}", r.samples, r.recovery_rate, r.chosen))
        .collect::<Vec<_>>()
        .join("; ");
    // fit terms of one N = 2000 draw, for diagnosis
    let noise = slsid_core::NoiseSpec::gaussian(0.1, 5).unwrap();
    let (_, data) = slsid_core::generate_random_scenario(2, 2, 2000, (-5.0, 5.0), &noise, 6).unwrap();
    let rep = slsid_core::select_order(&data, &cfg).map_err(|e| e.to_string())?;
    let fits: Vec<String> = rep.candidates.iter().map(|c| format!("{:.3e}", c.fit)).collect();
    summary += &format!("; N=2000 fit terms by S' = [{}], lambda = {:.3e}", fits.join(", "), rep.lambda);
    ensure(rate(2000) >= 0.8, || summary.clone())?;
    ensure(rate(200) <= rate(1000) && rate(1000) <= rate(5000), || summary.clone())?;
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(summary)
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("sample-count table", table1),
        ("example 2 identification", example2_identification),
        ("seven-sample tightness", tightness),
        ("example 1 pipeline", example1_pipeline),
        ("certified implies unique", pe_implies_unique),
        ("relaxation equivalence", relaxation_equivalence),
        ("descent invariant", descent_invariant),
        ("desk-scale benchmark", table4_desk),
        ("order-selection consistency", order_consistency),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(msg) => println!("PASS {name} ({:.2?}): {msg}", t.elapsed()),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name} ({:.2?}): {msg}", t.elapsed());
            }
        }
    }
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
