//! Monte Carlo benchmark cells and reproduction targets.

mod config;
mod repro;

pub use config::ExperimentConfig;
pub use repro::{repro, ReproCheck, ReproReport, ReproTarget, TABLE1_EXPECTED};

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bcd::{bcd_solve, SolverConfig};
use crate::error::{Error, Result};
use crate::metrics::{classification_error, nmse};
use crate::model::NoiseSpec;
use crate::simulate::{derive_seed, generate_random_scenario};

/// One benchmark cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub n: usize,
    #[serde(rename = "S")]
    pub s: usize,
    #[serde(rename = "N")]
    pub samples: usize,
    pub sigma: f64,
    pub repetitions: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub range: (f64, f64),
    /// NMSE below this counts as finding the true parameters.
    pub nmse_success: f64,
}

impl ScenarioSpec {
    pub fn new(n: usize, s: usize, samples: usize) -> Self {
        Self {
            n,
            s,
            samples,
            sigma: 0.1,
            repetitions: 20,
            restarts: 10,
            max_iters: 100,
            seed: 0,
            range: (-5.0, 5.0),
            nmse_success: 1e-4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::InvalidArgument("repetitions must be >= 1".into()));
        }
        if !(self.nmse_success > 0.0) {
            return Err(Error::InvalidArgument("NMSE threshold must be positive".into()));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::InvalidArgument("sigma must be >= 0".into()));
        }
        Ok(())
    }
}

/// Outcome of one repetition. Solver failures keep the row with `error` set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionRow {
    pub n: usize,
    #[serde(rename = "N")]
    pub samples: usize,
    #[serde(rename = "S")]
    pub s: usize,
    pub repetition: usize,
    pub seed: u64,
    pub time: f64,
    /// Percent.
    pub ce: f64,
    pub nmse: f64,
    pub objective: f64,
    pub success: bool,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub n: usize,
    #[serde(rename = "N")]
    pub samples: usize,
    #[serde(rename = "S")]
    pub s: usize,
    pub time_mean: f64,
    pub time_std: f64,
    pub ce_mean: f64,
    pub ce_std: f64,
    pub nmse_mean: f64,
    pub nmse_std: f64,
    pub nrftp: usize,
    pub ce_median: f64,
    pub nmse_median: f64,
    pub repetitions: usize,
    pub failures: usize,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64;
    (m, var.sqrt())
}

pub fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

fn run_repetition(spec: &ScenarioSpec, rep: usize) -> RepetitionRow {
    let seed = derive_seed(spec.seed, &[spec.n as u64, spec.s as u64, spec.samples as u64, rep as u64]);
    let mut row = RepetitionRow {
        n: spec.n,
        samples: spec.samples,
        s: spec.s,
        repetition: rep,
        seed,
        time: f64::NAN,
        ce: f64::NAN,
        nmse: f64::NAN,
        objective: f64::NAN,
        success: false,
        error: String::new(),
    };
    let outcome = (|| -> Result<()> {
        let noise = NoiseSpec::gaussian(spec.sigma, derive_seed(seed, &[1]))?;
        let (truth, data) = generate_random_scenario(spec.n, spec.s, spec.samples, spec.range, &noise, seed)?;
        let cfg = SolverConfig::new(spec.s)
            .with_restarts(spec.restarts)
            .with_max_iters(spec.max_iters)
            .with_seed(derive_seed(seed, &[2]));
        let start = Instant::now();
        let report = bcd_solve(&data, &cfg)?;
        row.time = start.elapsed().as_secs_f64();
        let (e, perm) = nmse(&report.model, &truth)?;
        let z = data.truth().expect("simulated data carry labels");
        row.nmse = e;
        row.ce = 100.0 * classification_error(&report.assignment, z, &perm)?;
        row.objective = report.objective;
        row.success = e < spec.nmse_success;
        Ok(())
    })();
    if let Err(e) = outcome {
        row.error = e.to_string();
    }
    row
}

/// Run every repetition of a cell; rows come back in repetition order.
pub fn run_cell(spec: &ScenarioSpec) -> Result<(SweepResult, Vec<RepetitionRow>)> {
    spec.validate()?;
    let rows: Vec<RepetitionRow> = (0..spec.repetitions)
        .into_par_iter()
        .map(|r| run_repetition(spec, r))
        .collect();
    Ok((summarize(spec, &rows), rows))
}

pub fn summarize(spec: &ScenarioSpec, rows: &[RepetitionRow]) -> SweepResult {
    let ok: Vec<&RepetitionRow> = rows.iter().filter(|r| r.error.is_empty()).collect();
    let pick = |f: fn(&RepetitionRow) -> f64| ok.iter().map(|r| f(r)).collect::<Vec<f64>>();
    let (time, ce, nm) = (pick(|r| r.time), pick(|r| r.ce), pick(|r| r.nmse));
    let (time_mean, time_std) = mean_std(&time);
    let (ce_mean, ce_std) = mean_std(&ce);
    let (nmse_mean, nmse_std) = mean_std(&nm);
    SweepResult {
        n: spec.n,
        samples: spec.samples,
        s: spec.s,
        time_mean,
        time_std,
        ce_mean,
        ce_std,
        nmse_mean,
        nmse_std,
        nrftp: ok.iter().filter(|r| r.success).count(),
        ce_median: median(&ce),
        nmse_median: median(&nm),
        repetitions: rows.len(),
        failures: rows.len() - ok.len(),
    }
}

/// Run a grid of cells in order.
pub fn run_grid(specs: &[ScenarioSpec]) -> Result<(Vec<SweepResult>, Vec<RepetitionRow>)> {
    if specs.is_empty() {
        return Err(Error::InvalidArgument("empty benchmark grid".into()));
    }
    let mut summaries = Vec::with_capacity(specs.len());
    let mut raw = Vec::new();
    for spec in specs {
        let (s, rows) = run_cell(spec)?;
        summaries.push(s);
        raw.extend(rows);
    }
    Ok((summaries, raw))
}

/// Serialize rows as CSV with a header taken from the field names.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}
