//! Block-coordinate descent on the penalty-relaxed identification problem.
//!
//! Each iteration fits every cluster by least squares (parameter block) and
//! then reassigns every sample to its best-fitting subsystem (membership
//! block). The membership update of the relaxed problem has a binary closed
//! form, so memberships stay binary throughout and the relaxed objective
//! coincides with the integer one at every iterate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{GramAccumulator, DEFAULT_RANK_TOL};
use crate::model::{Assignment, Dataset, SlModel};
use crate::objective::{integer_unchecked, residual_sq};

/// Slack allowed when checking that half-step objectives never increase.
/// Least-squares refits of an already optimal cluster may differ in the last bits.
pub const DESCENT_SLACK: f64 = 1e-12;

/// Squared residuals closer than `TIE_TOL * (1 + y^2 + |x|.|theta|^2)` are tied.
pub const TIE_TOL: f64 = 1e-24;

#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    RandomLabels,
    /// Restart 0 starts from these labels; any further restarts are random.
    Provided(Assignment),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub subsystems: usize,
    pub max_iters: usize,
    /// Stop when an iteration lowers the objective by less than this.
    pub obj_tol: f64,
    pub restarts: usize,
    pub seed: u64,
    pub init: Init,
    pub rank_tol: f64,
    /// Keep per-iteration parameters and labels in the report.
    pub record_history: bool,
}

impl SolverConfig {
    pub fn new(subsystems: usize) -> Self {
        Self {
            subsystems,
            max_iters: 100,
            obj_tol: 1e-12,
            restarts: 10,
            seed: 0,
            init: Init::RandomLabels,
            rank_tol: DEFAULT_RANK_TOL,
            record_history: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn with_history(mut self, on: bool) -> Self {
        self.record_history = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.subsystems == 0 {
            return Err(Error::InvalidArgument("S must be >= 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be >= 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be >= 1".into()));
        }
        if !(self.obj_tol >= 0.0) {
            return Err(Error::InvalidArgument("obj_tol must be >= 0".into()));
        }
        if let Init::Provided(a) = &self.init {
            if a.subsystems() != self.subsystems {
                return Err(Error::InvalidArgument(format!(
                    "initial assignment has {} subsystems, config has {}",
                    a.subsystems(),
                    self.subsystems
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    AssignmentFixed,
    ObjectiveTolerance,
    MaxIterations,
}

/// One row of the iteration table. Row 0 holds only the initial labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub params: Option<Vec<Vec<f64>>>,
    pub labels: Vec<usize>,
    pub objective: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub model: SlModel,
    pub assignment: Assignment,
    /// Integer objective of (`model`, `assignment`).
    pub objective: f64,
    /// Objective after each membership update.
    pub trace: Vec<f64>,
    /// Objective after every half-step: parameter update, membership update, ...
    pub half_steps: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub stop: StopReason,
    pub restart_index: usize,
    pub degenerate_restarts: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<IterationRecord>,
}

impl SolveReport {
    /// True iff no half-step raised the objective (up to [`DESCENT_SLACK`] relative).
    pub fn is_monotone(&self) -> bool {
        self.half_steps
            .windows(2)
            .all(|w| w[1] <= w[0] + DESCENT_SLACK * w[0].abs().max(1.0))
    }
}

fn cluster_accumulators(data: &Dataset, labels: &[usize], s: usize) -> Vec<GramAccumulator> {
    let mut accs = vec![GramAccumulator::new(data.dim()); s];
    for (k, &l) in labels.iter().enumerate() {
        accs[l].add(data.row(k), data.output(k));
    }
    accs
}

/// Least-squares parameters of cluster `label` (1-based); minimum-norm when
/// the cluster Gram is singular.
pub fn fit_cluster_params(data: &Dataset, a: &Assignment, label: usize) -> Result<Vec<f64>> {
    if a.len() != data.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} samples",
            a.len(),
            data.len()
        )));
    }
    if label == 0 || label > a.subsystems() {
        return Err(Error::InvalidArgument(format!("no subsystem {label}")));
    }
    let mut acc = GramAccumulator::new(data.dim());
    for k in 0..data.len() {
        if a.label(k) == label {
            acc.add(data.row(k), data.output(k));
        }
    }
    if acc.count == 0 {
        return Err(Error::EmptyCluster(label));
    }
    Ok(acc.solve(DEFAULT_RANK_TOL).theta)
}

/// Best-fitting subsystem per sample; ties go to the smallest label.
/// Residuals within rounding of the minimum (see [`TIE_TOL`]) count as ties.
pub fn assign_step(data: &Dataset, model: &SlModel) -> Result<Assignment> {
    if data.dim() != model.dim() {
        return Err(Error::DimensionMismatch(format!(
            "data dimension {} vs model dimension {}",
            data.dim(),
            model.dim()
        )));
    }
    Ok(assign_inner(data, model.params()).0)
}

fn assign_inner(data: &Dataset, params: &[Vec<f64>]) -> (Assignment, f64) {
    let mut labels = Vec::with_capacity(data.len());
    let mut total = 0.0;
    let mut resid = vec![0.0; params.len()];
    for k in 0..data.len() {
        let (x, y) = (data.row(k), data.output(k));
        let mut scale = 1.0 + y * y;
        for (r, theta) in resid.iter_mut().zip(params) {
            *r = residual_sq(data, k, theta);
            let mag: f64 = x.iter().zip(theta).map(|(a, b)| (a * b).abs()).sum();
            scale = scale.max(1.0 + y * y + mag * mag);
        }
        let min = resid.iter().copied().fold(f64::INFINITY, f64::min);
        let s = resid
            .iter()
            .position(|&r| r <= min + TIE_TOL * scale)
            .expect("at least one subsystem");
        labels.push(s);
        total += resid[s];
    }
    (Assignment::from_indices(labels, params.len()), total)
}

struct RestartOutcome {
    report: Option<SolveReport>,
}

fn random_labels(rng: &mut ChaCha8Rng, samples: usize, s: usize) -> Vec<usize> {
    (0..samples).map(|_| rng.random_range(0..s)).collect()
}

/// Give each empty cluster a random sample taken from a cluster with at least two members.
fn fill_empty_randomly(labels: &mut [usize], s: usize, rng: &mut ChaCha8Rng) {
    loop {
        let mut sizes = vec![0usize; s];
        for &l in labels.iter() {
            sizes[l] += 1;
        }
        let Some(empty) = sizes.iter().position(|&c| c == 0) else {
            return;
        };
        let donors: Vec<usize> = (0..labels.len()).filter(|&k| sizes[labels[k]] > 1).collect();
        let k = donors[rng.random_range(0..donors.len())];
        labels[k] = empty;
    }
}

/// Move the worst-fitting sample into each empty cluster. Returns false if a
/// cluster needs reseeding a second time.
fn reseed_empty(
    data: &Dataset,
    params: &[Vec<f64>],
    labels: &mut [usize],
    reseeded: &mut [bool],
) -> bool {
    let s = params.len();
    loop {
        let mut sizes = vec![0usize; s];
        for &l in labels.iter() {
            sizes[l] += 1;
        }
        let Some(empty) = sizes.iter().position(|&c| c == 0) else {
            return true;
        };
        if reseeded[empty] {
            return false;
        }
        reseeded[empty] = true;
        let mut worst: Option<(usize, f64)> = None;
        for k in 0..labels.len() {
            if sizes[labels[k]] < 2 {
                continue;
            }
            let r = residual_sq(data, k, &params[labels[k]]);
            if worst.is_none_or(|(_, w)| r > w) {
                worst = Some((k, r));
            }
        }
        match worst {
            Some((k, _)) => labels[k] = empty,
            None => return false,
        }
    }
}

fn run_restart(data: &Dataset, cfg: &SolverConfig, restart: usize, init: Vec<usize>) -> RestartOutcome {
    let s = cfg.subsystems;
    let mut labels = init;
    let mut params: Vec<Vec<f64>> = vec![vec![0.0; data.dim()]; s];
    let mut reseeded = vec![false; s];
    let mut trace = Vec::new();
    let mut half_steps = Vec::new();
    let mut history = Vec::new();
    if cfg.record_history {
        history.push(IterationRecord {
            iteration: 0,
            params: None,
            labels: labels.iter().map(|l| l + 1).collect(),
            objective: None,
        });
    }
    let mut prev_obj = f64::INFINITY;
    let mut stop = StopReason::MaxIterations;
    let mut iterations = 0;

    for it in 1..=cfg.max_iters {
        iterations = it;
        let accs = cluster_accumulators(data, &labels, s);
        for (p, acc) in params.iter_mut().zip(&accs) {
            *p = acc.solve(cfg.rank_tol).theta;
        }
        let current = Assignment::from_indices(labels.clone(), s);
        let model = SlModel::new(params.clone()).expect("params share dimension");
        half_steps.push(integer_unchecked(data, &model, &current));

        let (next, obj) = assign_inner(data, &params);
        half_steps.push(obj);
        trace.push(obj);
        if cfg.record_history {
            history.push(IterationRecord {
                iteration: it,
                params: Some(params.clone()),
                labels: next.labels(),
                objective: Some(obj),
            });
        }
        let unchanged = next.indices() == labels.as_slice();
        let decrease = prev_obj - obj;
        prev_obj = obj;
        labels = next.indices().to_vec();

        if next.sizes().contains(&0) {
            if !reseed_empty(data, &params, &mut labels, &mut reseeded) {
                return RestartOutcome { report: None };
            }
            continue;
        }
        if unchanged {
            stop = StopReason::AssignmentFixed;
            break;
        }
        if decrease < cfg.obj_tol {
            stop = StopReason::ObjectiveTolerance;
            break;
        }
    }

    let model = SlModel::new(params).expect("params share dimension");
    let assignment = Assignment::from_indices(labels, s);
    let objective = integer_unchecked(data, &model, &assignment);
    RestartOutcome {
        report: Some(SolveReport {
            model,
            assignment,
            objective,
            trace,
            half_steps,
            iterations,
            converged: stop != StopReason::MaxIterations,
            stop,
            restart_index: restart,
            degenerate_restarts: 0,
            history,
        }),
    }
}

/// Multi-restart block-coordinate descent. Returns the lowest-objective restart
/// (ties to the lower restart index).
pub fn bcd_solve(data: &Dataset, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    if data.len() < cfg.subsystems {
        return Err(Error::TooFewSamples {
            needed: cfg.subsystems,
            got: data.len(),
        });
    }
    if let Init::Provided(a) = &cfg.init {
        if a.len() != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "initial assignment has {} labels for {} samples",
                a.len(),
                data.len()
            )));
        }
    }
    let outcomes: Vec<RestartOutcome> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(r as u64);
            let mut init = match (&cfg.init, r) {
                (Init::Provided(a), 0) => a.indices().to_vec(),
                _ => random_labels(&mut rng, data.len(), cfg.subsystems),
            };
            fill_empty_randomly(&mut init, cfg.subsystems, &mut rng);
            run_restart(data, cfg, r, init)
        })
        .collect();
    let degenerate = outcomes.iter().filter(|o| o.report.is_none()).count();
    let mut best: Option<SolveReport> = None;
    for rep in outcomes.into_iter().filter_map(|o| o.report) {
        if best.as_ref().is_none_or(|b| rep.objective < b.objective) {
            best = Some(rep);
        }
    }
    let mut best = best.ok_or(Error::AllRestartsDegenerate(cfg.restarts))?;
    best.degenerate_restarts = degenerate;
    Ok(best)
}

/// True iff one more parameter update followed by one membership update
/// reproduces the reported pair.
pub fn stationarity_check(data: &Dataset, report: &SolveReport) -> bool {
    let a = &report.assignment;
    if a.len() != data.len() || report.model.dim() != data.dim() {
        return false;
    }
    let s = a.subsystems();
    if a.sizes().contains(&0) {
        return false;
    }
    let accs = cluster_accumulators(data, a.indices(), s);
    let params: Vec<Vec<f64>> = accs.iter().map(|acc| acc.solve(DEFAULT_RANK_TOL).theta).collect();
    let same_params = params.iter().zip(report.model.params()).all(|(p, q)| {
        p.iter()
            .zip(q)
            .all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + y.abs()))
    });
    same_params && assign_inner(data, &params).0 == *a
}
