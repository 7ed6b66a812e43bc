//! Estimation of the number of subsystems by penalized least squares.
//!
//! Candidate counts `S' = 1..=S_bar` are fitted in increasing order and
//! scored by `(1/N) * objective + lambda_N * S'`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bcd::{bcd_solve, Init, SolveReport, SolverConfig};
use crate::error::{Error, Result};
use crate::model::{Assignment, Dataset, NoiseSpec};
use crate::objective::residual_sq;
use crate::simulate::{derive_seed, generate_random_scenario};

/// Criteria closer than this are treated as equal; the smaller count wins.
pub const CRITERION_TIE_TOL: f64 = 1e-12;
/// Lower bound on the noise estimate, relative to the mean squared output.
pub const NOISE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Penalty {
    /// `c * sigma2_hat * ln(N) / N`, with `sigma2_hat` the mean squared residual of the `S_bar` fit.
    NoiseScaled { c: f64 },
    /// `c * ln(N) / N`.
    LogN { c: f64 },
    Fixed { lambda: f64 },
}

impl Default for Penalty {
    fn default() -> Self {
        Penalty::NoiseScaled { c: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderSelectConfig {
    pub s_bar: usize,
    pub penalty: Penalty,
    /// Solver settings shared by all candidates; the subsystem count is overridden.
    pub solver: SolverConfig,
    /// Seed candidate `S' + 1` with the `S'` solution after splitting one cluster.
    pub warm_start: bool,
}

impl OrderSelectConfig {
    pub fn new(s_bar: usize) -> Self {
        Self {
            s_bar,
            penalty: Penalty::default(),
            solver: SolverConfig::new(1),
            warm_start: true,
        }
    }

    pub fn with_penalty(mut self, penalty: Penalty) -> Self {
        self.penalty = penalty;
        self
    }

    pub fn with_solver(mut self, solver: SolverConfig) -> Self {
        self.solver = solver;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub subsystems: usize,
    /// `(1/N) * objective`.
    pub fit: f64,
    /// `lambda_N * S'`.
    pub penalty: f64,
    pub criterion: f64,
    /// Every restart left a cluster rank-deficient; excluded from the choice.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderSelectReport {
    pub chosen: usize,
    pub lambda: f64,
    pub sigma2_hat: f64,
    pub candidates: Vec<CandidateScore>,
    pub solution: SolveReport,
}

/// Split the cluster with the largest residual sum by residual sign, giving
/// one half the new label `s`.
fn split_worst_cluster(data: &Dataset, report: &SolveReport) -> Assignment {
    let a = &report.assignment;
    let s = a.subsystems();
    let resid: Vec<f64> = (0..data.len())
        .map(|k| data.output(k) - crate::linalg::dot(data.row(k), report.model.param(a.label(k))))
        .collect();
    let mut cost = vec![0.0; s];
    for k in 0..data.len() {
        cost[a.label(k) - 1] += resid[k] * resid[k];
    }
    let sizes = a.sizes();
    let target = (0..s)
        .filter(|&c| sizes[c] >= 2)
        .max_by(|&i, &j| cost[i].total_cmp(&cost[j]).then(j.cmp(&i)))
        .expect("some cluster has two members when N > S");
    let members = a.members(target + 1);
    let mut moved: Vec<usize> = members.iter().copied().filter(|&k| resid[k] > 0.0).collect();
    if moved.is_empty() || moved.len() == members.len() {
        let worst = members
            .iter()
            .copied()
            .max_by(|&i, &j| {
                residual_sq(data, i, report.model.param(target + 1))
                    .total_cmp(&residual_sq(data, j, report.model.param(target + 1)))
            })
            .expect("nonempty cluster");
        moved = vec![worst];
    }
    let mut labels = a.labels();
    for k in moved {
        labels[k] = s + 1;
    }
    Assignment::from_labels(&labels, s + 1).expect("labels within range")
}

/// Fit every candidate count and pick the penalized minimizer.
pub fn select_order(data: &Dataset, cfg: &OrderSelectConfig) -> Result<OrderSelectReport> {
    if cfg.s_bar == 0 {
        return Err(Error::InvalidArgument("S_bar must be >= 1".into()));
    }
    if data.len() < cfg.s_bar {
        return Err(Error::TooFewSamples {
            needed: cfg.s_bar,
            got: data.len(),
        });
    }
    let mut fits: Vec<Option<SolveReport>> = Vec::with_capacity(cfg.s_bar);
    for sp in 1..=cfg.s_bar {
        let mut solver = cfg.solver.clone();
        solver.subsystems = sp;
        solver.init = match fits.iter().rev().flatten().next() {
            Some(prev) if cfg.warm_start && prev.assignment.subsystems() + 1 == sp => {
                Init::Provided(split_worst_cluster(data, prev))
            }
            _ => Init::RandomLabels,
        };
        match bcd_solve(data, &solver) {
            Ok(r) => fits.push(Some(r)),
            Err(Error::AllRestartsDegenerate(_)) if sp > 1 => fits.push(None),
            Err(e) => return Err(e),
        }
    }

    let n = data.len() as f64;
    let last = fits.iter().rev().flatten().next().expect("the single-system fit exists");
    let mean_y2 = data.outputs().iter().map(|y| y * y).sum::<f64>() / n;
    let sigma2_hat = (last.objective / n).max(NOISE_FLOOR * mean_y2.max(f64::MIN_POSITIVE));
    let lambda = match cfg.penalty {
        Penalty::NoiseScaled { c } => c * sigma2_hat * n.ln() / n,
        Penalty::LogN { c } => c * n.ln() / n,
        Penalty::Fixed { lambda } => lambda,
    };
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "penalty must be positive, got {lambda}"
        )));
    }

    let candidates: Vec<CandidateScore> = fits
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let penalty = lambda * (i + 1) as f64;
            let fit = r.as_ref().map_or(f64::INFINITY, |r| r.objective / n);
            CandidateScore {
                subsystems: i + 1,
                fit,
                penalty,
                criterion: fit + penalty,
                degenerate: r.is_none(),
            }
        })
        .collect();
    let mut best = 0;
    for (i, c) in candidates.iter().enumerate().skip(1) {
        if !c.degenerate && c.criterion < candidates[best].criterion - CRITERION_TIE_TOL {
            best = i;
        }
    }
    Ok(OrderSelectReport {
        chosen: best + 1,
        lambda,
        sigma2_hat,
        candidates,
        solution: fits.swap_remove(best).expect("chosen candidate is non-degenerate"),
    })
}

/// Random scenario family used by [`consistency_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyScenario {
    pub dim: usize,
    pub subsystems: usize,
    pub sigma: f64,
    pub range: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub samples: usize,
    pub trials: usize,
    pub recovered: usize,
    pub recovery_rate: f64,
    /// Chosen count per trial.
    pub chosen: Vec<usize>,
}

/// Empirical probability of selecting the true count, per sample size.
/// Trial `t` at sample size `N` uses seeds derived from `(seed, N, t)`.
pub fn consistency_sweep(
    scenario: &ConsistencyScenario,
    sample_sizes: &[usize],
    trials: usize,
    cfg: &OrderSelectConfig,
    seed: u64,
) -> Result<Vec<ConsistencyRow>> {
    if cfg.s_bar < scenario.subsystems {
        return Err(Error::AssumptionViolated(format!(
            "upper bound S_bar = {} is below the true count {}",
            cfg.s_bar, scenario.subsystems
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    sample_sizes
        .iter()
        .map(|&n_samples| {
            let chosen = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let base = derive_seed(seed, &[n_samples as u64, t as u64]);
                    let noise = NoiseSpec::gaussian(scenario.sigma, derive_seed(base, &[1]))?;
                    let (_, data) = generate_random_scenario(
                        scenario.dim,
                        scenario.subsystems,
                        n_samples,
                        scenario.range,
                        &noise,
                        base,
                    )?;
                    let mut c = cfg.clone();
                    c.solver.seed = derive_seed(base, &[2]);
                    Ok(select_order(&data, &c)?.chosen)
                })
                .collect::<Result<Vec<usize>>>()?;
            let recovered = chosen.iter().filter(|&&c| c == scenario.subsystems).count();
            Ok(ConsistencyRow {
                samples: n_samples,
                trials,
                recovered,
                recovery_rate: recovered as f64 / trials as f64,
                chosen,
            })
        })
        .collect()
}
