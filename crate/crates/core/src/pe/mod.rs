//! Persistence-of-excitation analysis for labeled switched-system data.
//!
//! Three checks are combined: pairwise-distinct parameters, no regressor on
//! a separating hyperplane `x . (theta_i - theta_j) = 0`, and the sequential
//! partition certificate. Together they certify that the noise-free
//! identification problem has a unique solution up to relabeling.

pub mod counts;
pub mod partition;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dist_sq, dot, gram_of_rows, is_nonsingular, norm_sq, DEFAULT_RANK_TOL};
use crate::metrics::next_permutation;
use crate::model::{Assignment, Dataset, SlModel};
use partition::{all_blocks_singular, find_singular_partition, SearchOutcome};

pub use counts::{
    min_samples_bako, min_samples_ours, min_samples_table, min_samples_vidal, sample_counts,
    CountCell, SampleCounts,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeTolerances {
    /// Relative eigenvalue threshold for Gram nonsingularity.
    pub rank: f64,
    /// Absolute threshold on `||theta_i - theta_j||`.
    pub distinct: f64,
    /// Relative threshold on `|x . (theta_i - theta_j)|`.
    pub separation: f64,
}

impl Default for PeTolerances {
    fn default() -> Self {
        Self {
            rank: DEFAULT_RANK_TOL,
            distinct: 1e-9,
            separation: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeLimits {
    /// Largest cluster whose partitions are enumerated.
    pub max_block_size: usize,
    /// Largest total number of n-subsets examined by the genericity check.
    pub max_subsets: u128,
}

impl Default for PeLimits {
    fn default() -> Self {
        Self {
            max_block_size: 14,
            max_subsets: 1_000_000,
        }
    }
}

/// All parameter vectors pairwise farther apart than `tol`.
pub fn check_distinct_params(model: &SlModel, tol: f64) -> bool {
    let p = model.params();
    (0..p.len()).all(|i| (i + 1..p.len()).all(|j| dist_sq(&p[i], &p[j]).sqrt() > tol))
}

/// A regressor lying (numerically) on a separating hyperplane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparatingViolation {
    pub row: usize,
    /// Subsystem labels, `i < j`.
    pub i: usize,
    pub j: usize,
}

/// `|x_k . (theta_i - theta_j)| > tol ||x_k|| ||theta_i - theta_j||` for all `k`, `i < j`.
pub fn check_no_separating_regressor(
    data: &Dataset,
    model: &SlModel,
    tol: f64,
) -> Result<(bool, Vec<SeparatingViolation>)> {
    if data.dim() != model.dim() {
        return Err(Error::DimensionMismatch(format!(
            "data dimension {} vs model dimension {}",
            data.dim(),
            model.dim()
        )));
    }
    let p = model.params();
    let mut violations = Vec::new();
    for (k, x) in data.rows().enumerate() {
        let xn = norm_sq(x).sqrt();
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                let d: Vec<f64> = p[i].iter().zip(&p[j]).map(|(a, b)| a - b).collect();
                if dot(x, &d).abs() <= tol * xn * norm_sq(&d).sqrt() {
                    violations.push(SeparatingViolation { row: k, i: i + 1, j: j + 1 });
                }
            }
        }
    }
    Ok((violations.is_empty(), violations))
}

fn check_assignment(data: &Dataset, a: &Assignment) -> Result<()> {
    if a.len() != data.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} samples",
            a.len(),
            data.len()
        )));
    }
    Ok(())
}

/// Classical single-system excitation of cluster `label`: nonsingular cluster Gram.
pub fn check_cluster_pe(data: &Dataset, a: &Assignment, label: usize, rank_tol: f64) -> Result<bool> {
    check_assignment(data, a)?;
    if label == 0 || label > a.subsystems() {
        return Err(Error::InvalidArgument(format!("no subsystem {label}")));
    }
    let g = gram_of_rows(a.members(label).iter().map(|&k| data.row(k)), data.dim());
    Ok(is_nonsingular(&g, rank_tol))
}

/// An all-singular partition of one cluster within the given block budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionWitness {
    pub cluster: usize,
    pub budget: usize,
    /// Blocks of row indices.
    pub blocks: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum PartitionVerdict {
    /// `order[s]` is the cluster label examined at stage `s + 1`.
    Certified { order: Vec<usize> },
    /// No ordering works; each witness shows a cluster failing at the smallest budget it fails.
    Violated { witnesses: Vec<PartitionWitness> },
    Undecided { reason: String },
}

impl PartitionVerdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, PartitionVerdict::Certified { .. })
    }
}

#[derive(Debug, Clone)]
enum BudgetVerdict {
    Pass,
    Fail(Vec<Vec<usize>>),
    Undecided,
}

/// Per-cluster verdicts for budgets `1..=s`, using monotonicity in the budget.
fn cluster_budget_table(
    data: &Dataset,
    a: &Assignment,
    rank_tol: f64,
    limits: &PeLimits,
) -> Vec<Vec<BudgetVerdict>> {
    let s = a.subsystems();
    (1..=s)
        .map(|label| {
            let rows = a.members(label);
            let mut out: Vec<BudgetVerdict> = Vec::with_capacity(s);
            for budget in 1..=s {
                let v = match out.last() {
                    Some(BudgetVerdict::Fail(w)) => BudgetVerdict::Fail(w.clone()),
                    Some(BudgetVerdict::Undecided) => {
                        match find_singular_partition(data, &rows, budget, rank_tol, limits.max_block_size) {
                            SearchOutcome::Fail(w) => BudgetVerdict::Fail(w),
                            _ => BudgetVerdict::Undecided,
                        }
                    }
                    _ => match find_singular_partition(data, &rows, budget, rank_tol, limits.max_block_size) {
                        SearchOutcome::Pass => BudgetVerdict::Pass,
                        SearchOutcome::Fail(w) => BudgetVerdict::Fail(w),
                        SearchOutcome::Undecided => BudgetVerdict::Undecided,
                    },
                };
                out.push(v);
            }
            out
        })
        .collect()
}

fn first_order<F: Fn(&BudgetVerdict) -> bool>(table: &[Vec<BudgetVerdict>], ok: F) -> Option<Vec<usize>> {
    let s = table.len();
    let mut perm: Vec<usize> = (0..s).collect();
    loop {
        // stage t (0-based) examines cluster perm[t] with budget s - t
        if perm.iter().enumerate().all(|(t, &c)| ok(&table[c][s - t - 1])) {
            return Some(perm);
        }
        if !next_permutation(&mut perm) {
            return None;
        }
    }
}

/// Sequential partition certificate over cluster orderings.
///
/// Stage `t` of an ordering examines cluster `p_t` with budget `S - t + 1`;
/// the last stage therefore requires a nonsingular whole-cluster Gram. The
/// first certified ordering in lexicographic order is reported.
pub fn check_partition_condition(
    data: &Dataset,
    a: &Assignment,
    rank_tol: f64,
    limits: &PeLimits,
) -> Result<PartitionVerdict> {
    check_assignment(data, a)?;
    let table = cluster_budget_table(data, a, rank_tol, limits);
    if let Some(order) = first_order(&table, |v| matches!(v, BudgetVerdict::Pass)) {
        return Ok(PartitionVerdict::Certified {
            order: order.into_iter().map(|c| c + 1).collect(),
        });
    }
    if first_order(&table, |v| !matches!(v, BudgetVerdict::Fail(_))).is_some() {
        return Ok(PartitionVerdict::Undecided {
            reason: format!(
                "a cluster exceeds the enumeration guard of {} samples",
                limits.max_block_size
            ),
        });
    }
    let witnesses = table
        .iter()
        .enumerate()
        .filter_map(|(c, row)| {
            row.iter().enumerate().find_map(|(b, v)| match v {
                BudgetVerdict::Fail(blocks) => Some(PartitionWitness {
                    cluster: c + 1,
                    budget: b + 1,
                    blocks: blocks.clone(),
                }),
                _ => None,
            })
        })
        .collect();
    Ok(PartitionVerdict::Violated { witnesses })
}

/// Re-run the stage checks of a claimed ordering.
pub fn verify_certificate(
    data: &Dataset,
    a: &Assignment,
    order: &[usize],
    rank_tol: f64,
    limits: &PeLimits,
) -> bool {
    let s = a.subsystems();
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if a.len() != data.len() || sorted != (1..=s).collect::<Vec<_>>() {
        return false;
    }
    order.iter().enumerate().all(|(t, &label)| {
        find_singular_partition(data, &a.members(label), s - t, rank_tol, limits.max_block_size)
            == SearchOutcome::Pass
    })
}

/// A witness is valid iff it partitions its cluster into at most `budget`
/// nonempty blocks, all with singular Gram matrices.
pub fn verify_witness(data: &Dataset, a: &Assignment, w: &PartitionWitness, rank_tol: f64) -> bool {
    let mut rows: Vec<usize> = w.blocks.iter().flatten().copied().collect();
    rows.sort_unstable();
    w.cluster >= 1
        && w.cluster <= a.subsystems()
        && w.blocks.len() <= w.budget
        && w.blocks.iter().all(|b| !b.is_empty())
        && rows == a.members(w.cluster)
        && all_blocks_singular(data, &w.blocks, rank_tol)
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 1..=k as u128 {
        c = c.saturating_mul(n as u128 - k as u128 + i) / i;
    }
    c
}

fn for_each_combination<F: FnMut(&[usize]) -> bool>(pool: &[usize], k: usize, mut f: F) -> bool {
    let n = pool.len();
    if k > n {
        return true;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf = vec![0; k];
    loop {
        for (b, &i) in buf.iter_mut().zip(&idx) {
            *b = pool[i];
        }
        if !f(&buf) {
            return false;
        }
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return true;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Sufficient certificate: every n-subset of every cluster has a nonsingular
/// Gram, and the cluster sizes in descending order satisfy
/// `|C_(s)| >= n + (n - 1)(S - s)`.
pub fn check_genericity_sufficient(
    data: &Dataset,
    a: &Assignment,
    rank_tol: f64,
    limits: &PeLimits,
) -> Result<bool> {
    check_assignment(data, a)?;
    let n = data.dim();
    let s = a.subsystems();
    let mut sizes = a.sizes();
    sizes.sort_unstable_by(|x, y| y.cmp(x));
    let sizes_ok = sizes
        .iter()
        .enumerate()
        .all(|(i, &c)| c >= n + (n - 1) * (s - i - 1));
    if !sizes_ok {
        return Ok(false);
    }
    let needed: u128 = a.sizes().iter().map(|&c| binomial(c, n)).sum();
    if needed > limits.max_subsets {
        return Err(Error::EnumerationLimit {
            needed,
            limit: limits.max_subsets,
        });
    }
    Ok((1..=s).all(|label| {
        for_each_combination(&a.members(label), n, |subset| {
            is_nonsingular(&gram_of_rows(subset.iter().map(|&k| data.row(k)), n), rank_tol)
        })
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeReport {
    pub cond1_distinct_params: bool,
    pub cond2_no_separating_regressor: bool,
    pub cond2_violations: Vec<SeparatingViolation>,
    pub cond3_partition: PartitionVerdict,
    /// Nonsingular whole-cluster Gram, per subsystem label.
    pub cluster_pe: Vec<bool>,
    /// `None` when the subset enumeration would exceed its limit.
    pub genericity_sufficient: Option<bool>,
    pub sizes: Vec<usize>,
    pub certified: bool,
}

/// Run every check. `certified` iff conditions 1, 2 and the partition certificate hold.
pub fn pe_report(
    data: &Dataset,
    model: &SlModel,
    a: &Assignment,
    tol: &PeTolerances,
    limits: &PeLimits,
) -> Result<PeReport> {
    check_assignment(data, a)?;
    if a.subsystems() != model.subsystems() {
        return Err(Error::DimensionMismatch(format!(
            "assignment over {} subsystems, model has {}",
            a.subsystems(),
            model.subsystems()
        )));
    }
    let cond1 = check_distinct_params(model, tol.distinct);
    let (cond2, violations) = check_no_separating_regressor(data, model, tol.separation)?;
    let cond3 = check_partition_condition(data, a, tol.rank, limits)?;
    let cluster_pe = (1..=a.subsystems())
        .map(|l| check_cluster_pe(data, a, l, tol.rank))
        .collect::<Result<Vec<_>>>()?;
    let genericity = match check_genericity_sufficient(data, a, tol.rank, limits) {
        Ok(v) => Some(v),
        Err(Error::EnumerationLimit { .. }) => None,
        Err(e) => return Err(e),
    };
    let certified = cond1 && cond2 && cond3.is_certified();
    Ok(PeReport {
        cond1_distinct_params: cond1,
        cond2_no_separating_regressor: cond2,
        cond2_violations: violations,
        cond3_partition: cond3,
        cluster_pe,
        genericity_sufficient: genericity,
        sizes: a.sizes(),
        certified,
    })
}
