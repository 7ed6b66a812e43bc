//! Exhaustive global minimization of the integer problem on small instances.
//!
//! All `S^N` assignments are visited in modular Gray-code order, so each step
//! moves a single sample between two clusters and only those two clusters are
//! refitted. Candidates near the running minimum are re-evaluated from scratch
//! before being grouped into solution classes (assignments up to relabeling).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{GramAccumulator, DEFAULT_RANK_TOL};
use crate::model::{Assignment, Dataset};
use crate::objective::residual_sq;

pub const DEFAULT_ENUMERATION_LIMIT: u128 = 2_000_000;
const CHUNK: u128 = 1 << 13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    /// Absolute slack for membership in the optimal set.
    pub optimum_tol: f64,
    /// Entrywise tolerance when comparing parameter sets.
    pub param_tol: f64,
    pub rank_tol: f64,
    /// Largest number of assignments the oracle will enumerate.
    pub limit: u128,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            optimum_tol: 1e-9,
            param_tol: 1e-7,
            rank_tol: DEFAULT_RANK_TOL,
            limit: DEFAULT_ENUMERATION_LIMIT,
        }
    }
}

/// An optimal assignment up to relabeling, with its least-squares parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionClass {
    /// First-occurrence labeling of the class.
    pub assignment: Assignment,
    /// Parameters indexed by the labels of `assignment`.
    pub params: Vec<Vec<f64>>,
    pub objective: f64,
    /// Some cluster is empty or has a singular Gram, so its parameters are not determined.
    pub degenerate: bool,
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

fn sorted(params: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut p = params.to_vec();
    p.sort_by(|a, b| lex_cmp(a, b));
    p
}

/// Equality of parameter sets after sorting, entrywise within `tol`.
pub fn same_parameter_set(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    a.len() == b.len()
        && sorted(a)
            .iter()
            .zip(&sorted(b))
            .all(|(p, q)| p.len() == q.len() && p.iter().zip(q).all(|(x, y)| (x - y).abs() <= tol))
}

impl SolutionClass {
    pub fn sorted_params(&self) -> Vec<Vec<f64>> {
        sorted(&self.params)
    }

    pub fn has_params(&self, params: &[Vec<f64>], tol: f64) -> bool {
        same_parameter_set(&self.params, params, tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub optimum: f64,
    pub classes: Vec<SolutionClass>,
    /// Exactly one non-degenerate optimal class and no degenerate one.
    pub unique: bool,
    pub enumerated: u128,
}

impl OracleResult {
    pub fn nondegenerate(&self) -> impl Iterator<Item = &SolutionClass> {
        self.classes.iter().filter(|c| !c.degenerate)
    }

    pub fn contains_params(&self, params: &[Vec<f64>], tol: f64) -> bool {
        self.classes.iter().any(|c| c.has_params(params, tol))
    }
}

/// Number of assignments, or `None` on overflow.
pub fn assignment_count(samples: usize, subsystems: usize) -> Option<u128> {
    (subsystems as u128).checked_pow(u32::try_from(samples).ok()?)
}

fn is_canonical(labels: &[usize]) -> bool {
    let mut next = 0;
    for &l in labels {
        if l > next {
            return false;
        }
        if l == next {
            next += 1;
        }
    }
    true
}

/// Exact from-scratch evaluation of one assignment.
fn evaluate(data: &Dataset, labels: &[usize], s: usize, rank_tol: f64) -> (f64, Vec<Vec<f64>>, bool) {
    let mut accs = vec![GramAccumulator::new(data.dim()); s];
    for (k, &l) in labels.iter().enumerate() {
        accs[l].add(data.row(k), data.output(k));
    }
    let mut degenerate = false;
    let params: Vec<Vec<f64>> = accs
        .iter()
        .map(|acc| {
            let ls = acc.solve(rank_tol);
            degenerate |= acc.count == 0 || ls.rank_deficient;
            ls.theta
        })
        .collect();
    let obj = labels
        .iter()
        .enumerate()
        .map(|(k, &l)| residual_sq(data, k, &params[l]))
        .sum();
    (obj, params, degenerate)
}

struct Scan<'a> {
    data: &'a Dataset,
    s: usize,
    rank_tol: f64,
    gray: Vec<usize>,
    accs: Vec<GramAccumulator>,
    cluster_obj: Vec<f64>,
}

impl<'a> Scan<'a> {
    fn start(data: &'a Dataset, s: usize, rank_tol: f64, index: u128) -> Self {
        let n = data.len();
        let mut digits = vec![0usize; n + 1];
        let mut rest = index;
        for d in digits.iter_mut().take(n) {
            *d = (rest % s as u128) as usize;
            rest /= s as u128;
        }
        let gray: Vec<usize> = (0..n).map(|j| (digits[j] + s - digits[j + 1]) % s).collect();
        let mut accs = vec![GramAccumulator::new(data.dim()); s];
        for (k, &l) in gray.iter().enumerate() {
            accs[l].add(data.row(k), data.output(k));
        }
        let mut scan = Self {
            data,
            s,
            rank_tol,
            gray,
            accs,
            cluster_obj: vec![0.0; s],
        };
        for c in 0..s {
            scan.refit(c);
        }
        scan
    }

    fn refit(&mut self, c: usize) {
        let theta = self.accs[c].solve(self.rank_tol).theta;
        self.cluster_obj[c] = self
            .gray
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == c)
            .map(|(k, _)| residual_sq(self.data, k, &theta))
            .sum();
    }

    fn objective(&self) -> f64 {
        self.cluster_obj.iter().sum()
    }

    /// Advance from `index` to `index + 1`.
    fn step(&mut self, index: u128) {
        let s = self.s as u128;
        let mut t = 0;
        let mut i = index;
        while i % s == s - 1 {
            i /= s;
            t += 1;
        }
        let from = self.gray[t];
        let to = (from + 1) % self.s;
        let (x, y) = (self.data.row(t), self.data.output(t));
        self.accs[from].remove(x, y);
        self.accs[to].add(x, y);
        self.gray[t] = to;
        self.refit(from);
        self.refit(to);
    }
}

fn screen_margin(best: f64, opts: &OracleOptions) -> f64 {
    10.0 * opts.optimum_tol + 1e-7 * best.abs()
}

/// Global optimum of the integer problem with `s` subsystems and every
/// optimal solution class.
pub fn oracle_global(data: &Dataset, s: usize, opts: &OracleOptions) -> Result<OracleResult> {
    if s == 0 {
        return Err(Error::InvalidArgument("S must be >= 1".into()));
    }
    let total = assignment_count(data.len(), s).unwrap_or(u128::MAX);
    if total > opts.limit {
        return Err(Error::EnumerationLimit {
            needed: total,
            limit: opts.limit,
        });
    }
    let chunks = total.div_ceil(CHUNK);
    let per_chunk: Vec<(f64, Vec<(f64, Vec<usize>)>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(total);
            let mut scan = Scan::start(data, s, opts.rank_tol, lo);
            let mut best = f64::INFINITY;
            let mut cands: Vec<(f64, Vec<usize>)> = Vec::new();
            for i in lo..hi {
                if i > lo {
                    scan.step(i - 1);
                }
                let obj = scan.objective();
                if obj <= best + screen_margin(best.min(obj), opts) && is_canonical(&scan.gray) {
                    if obj < best {
                        best = obj;
                        let m = screen_margin(best, opts);
                        cands.retain(|(v, _)| *v <= best + m);
                    }
                    cands.push((obj, scan.gray.clone()));
                }
            }
            (best, cands)
        })
        .collect();

    let best = per_chunk.iter().map(|(b, _)| *b).fold(f64::INFINITY, f64::min);
    let margin = screen_margin(best, opts);
    let mut exact: Vec<(f64, Vec<usize>, Vec<Vec<f64>>, bool)> = per_chunk
        .into_iter()
        .flat_map(|(_, c)| c)
        .filter(|(v, _)| *v <= best + margin)
        .map(|(_, labels)| {
            let (obj, params, degenerate) = evaluate(data, &labels, s, opts.rank_tol);
            (obj, labels, params, degenerate)
        })
        .collect();
    let optimum = exact.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
    exact.retain(|e| e.0 <= optimum + opts.optimum_tol);
    exact.sort_by(|a, b| a.1.cmp(&b.1));

    let classes: Vec<SolutionClass> = exact
        .into_iter()
        .map(|(objective, labels, params, degenerate)| SolutionClass {
            assignment: Assignment::from_indices(labels, s),
            params,
            objective,
            degenerate,
        })
        .collect();
    let nondegenerate = classes.iter().filter(|c| !c.degenerate).count();
    let unique = nondegenerate == 1 && nondegenerate == classes.len();
    Ok(OracleResult {
        optimum,
        classes,
        unique,
        enumerated: total,
    })
}

/// Uniqueness of the optimal solution up to subsystem relabeling.
pub fn oracle_unique(data: &Dataset, s: usize, opts: &OracleOptions) -> Result<bool> {
    Ok(oracle_global(data, s, opts)?.unique)
}
