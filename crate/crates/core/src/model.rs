//! Domain types: datasets, switched linear models, switching sequences and
//! relaxed memberships.
//!
//! Subsystem labels are 1-based everywhere in the public API (`1..=S`).
//! Sample (row) indices are 0-based.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Regressor/output data, row-major, with an optional ground-truth switching sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    regressors: Vec<f64>,
    outputs: Vec<f64>,
    truth: Option<Assignment>,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<f64>>, outputs: Vec<f64>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch(
                "regressor rows have differing lengths".into(),
            ));
        }
        Self::from_row_major(dim, rows.into_iter().flatten().collect(), outputs)
    }

    pub fn from_row_major(dim: usize, regressors: Vec<f64>, outputs: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("regressor dimension must be >= 1".into()));
        }
        if outputs.is_empty() {
            return Err(Error::InvalidArgument("dataset needs at least one sample".into()));
        }
        if regressors.len() != dim * outputs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} regressor entries for {} outputs of dimension {}",
                regressors.len(),
                outputs.len(),
                dim
            )));
        }
        Ok(Self {
            dim,
            regressors,
            outputs,
            truth: None,
        })
    }

    /// Attach a ground-truth switching sequence.
    pub fn with_truth(mut self, truth: Assignment) -> Result<Self> {
        if truth.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "truth has {} labels for {} samples",
                truth.len(),
                self.len()
            )));
        }
        self.truth = Some(truth);
        Ok(self)
    }

    pub fn without_truth(mut self) -> Self {
        self.truth = None;
        self
    }

    /// Number of samples `N`.
    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    /// Regressor dimension `n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.regressors[k * self.dim..(k + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.regressors.chunks_exact(self.dim)
    }

    pub fn output(&self, k: usize) -> f64 {
        self.outputs[k]
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    pub fn regressors(&self) -> &[f64] {
        &self.regressors
    }

    pub fn truth(&self) -> Option<&Assignment> {
        self.truth.as_ref()
    }

    /// Copy of the dataset restricted to the given rows (truth carried along).
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        let mut regs = Vec::with_capacity(rows.len() * self.dim);
        let mut ys = Vec::with_capacity(rows.len());
        for &k in rows {
            if k >= self.len() {
                return Err(Error::InvalidArgument(format!("row {k} out of range")));
            }
            regs.extend_from_slice(self.row(k));
            ys.push(self.outputs[k]);
        }
        let mut out = Self::from_row_major(self.dim, regs, ys)?;
        if let Some(t) = &self.truth {
            let idx = rows.iter().map(|&k| t.index(k)).collect();
            out.truth = Some(Assignment::from_indices(idx, t.subsystems()));
        }
        Ok(out)
    }

    /// Append one sample; the truth label (1-based) is required iff the dataset has truth.
    pub fn push(&mut self, x: &[f64], y: f64, label: Option<usize>) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "sample of dimension {} for dataset of dimension {}",
                x.len(),
                self.dim
            )));
        }
        match (&mut self.truth, label) {
            (Some(t), Some(l)) => t.push(l)?,
            (None, None) => {}
            (Some(_), None) => {
                return Err(Error::InvalidArgument("dataset has truth; label required".into()))
            }
            (None, Some(_)) => {
                return Err(Error::InvalidArgument("dataset has no truth; label not allowed".into()))
            }
        }
        self.regressors.extend_from_slice(x);
        self.outputs.push(y);
        Ok(())
    }
}

/// Parameters of the `S` linear subsystems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelJson", into = "ModelJson")]
pub struct SlModel {
    dim: usize,
    params: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    n: usize,
    #[serde(rename = "S")]
    s: usize,
    params: Vec<Vec<f64>>,
}

impl TryFrom<ModelJson> for SlModel {
    type Error = Error;

    fn try_from(m: ModelJson) -> Result<Self> {
        if m.params.len() != m.s {
            return Err(Error::DimensionMismatch(format!(
                "S = {} but {} parameter vectors",
                m.s,
                m.params.len()
            )));
        }
        let model = SlModel::new(m.params)?;
        if model.dim != m.n {
            return Err(Error::DimensionMismatch(format!(
                "n = {} but parameters have dimension {}",
                m.n, model.dim
            )));
        }
        Ok(model)
    }
}

impl From<SlModel> for ModelJson {
    fn from(m: SlModel) -> Self {
        ModelJson {
            n: m.dim,
            s: m.params.len(),
            params: m.params,
        }
    }
}

impl SlModel {
    pub fn new(params: Vec<Vec<f64>>) -> Result<Self> {
        let dim = params
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidArgument("model needs at least one subsystem".into()))?;
        if dim == 0 {
            return Err(Error::InvalidArgument("parameter dimension must be >= 1".into()));
        }
        if params.iter().any(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch(
                "parameter vectors have differing lengths".into(),
            ));
        }
        Ok(Self { dim, params })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of subsystems `S`.
    pub fn subsystems(&self) -> usize {
        self.params.len()
    }

    /// Parameter vector of subsystem `label` (1-based).
    pub fn param(&self, label: usize) -> &[f64] {
        &self.params[label - 1]
    }

    pub fn params(&self) -> &[Vec<f64>] {
        &self.params
    }

    pub(crate) fn param_at(&self, idx: usize) -> &[f64] {
        &self.params[idx]
    }

    /// Model with subsystems reordered so that new subsystem `j` is old `order[j]` (0-based).
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            dim: self.dim,
            params: order.iter().map(|&i| self.params[i].clone()).collect(),
        }
    }
}

/// Switching sequence: exactly one subsystem label per sample.
///
/// Serialized as `{"S": subsystems, "labels": [1-based labels]}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "AssignmentJson", into = "AssignmentJson")]
pub struct Assignment {
    subsystems: usize,
    indices: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct AssignmentJson {
    #[serde(rename = "S")]
    s: usize,
    labels: Vec<usize>,
}

impl TryFrom<AssignmentJson> for Assignment {
    type Error = Error;
    fn try_from(j: AssignmentJson) -> Result<Self> {
        Assignment::from_labels(&j.labels, j.s)
    }
}

impl From<Assignment> for AssignmentJson {
    fn from(a: Assignment) -> Self {
        AssignmentJson {
            s: a.subsystems,
            labels: a.labels(),
        }
    }
}

impl Assignment {
    /// Build from 1-based labels in `1..=subsystems`.
    pub fn from_labels(labels: &[usize], subsystems: usize) -> Result<Self> {
        if subsystems == 0 {
            return Err(Error::InvalidArgument("need at least one subsystem".into()));
        }
        let mut indices = Vec::with_capacity(labels.len());
        for (k, &l) in labels.iter().enumerate() {
            if l == 0 || l > subsystems {
                return Err(Error::LabelOutOfRange {
                    sample: k,
                    label: l,
                    subsystems,
                });
            }
            indices.push(l - 1);
        }
        Ok(Self {
            subsystems,
            indices,
        })
    }

    pub(crate) fn from_indices(indices: Vec<usize>, subsystems: usize) -> Self {
        debug_assert!(indices.iter().all(|&i| i < subsystems));
        Self {
            subsystems,
            indices,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn subsystems(&self) -> usize {
        self.subsystems
    }

    /// 1-based label of sample `k`.
    pub fn label(&self, k: usize) -> usize {
        self.indices[k] + 1
    }

    pub fn labels(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i + 1).collect()
    }

    pub(crate) fn index(&self, k: usize) -> usize {
        self.indices[k]
    }

    pub(crate) fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Rows assigned to subsystem `label` (1-based).
    pub fn members(&self, label: usize) -> Vec<usize> {
        self.indices
            .iter()
            .enumerate()
            .filter(|(_, &i)| i + 1 == label)
            .map(|(k, _)| k)
            .collect()
    }

    /// Cluster sizes, indexed by `label - 1`.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.subsystems];
        for &i in &self.indices {
            sizes[i] += 1;
        }
        sizes
    }

    /// Relabel so that labels appear in first-occurrence order (1, 2, ...).
    /// This is the lexicographically smallest relabeling of the sequence.
    pub fn canonical(&self) -> Self {
        let mut map = vec![usize::MAX; self.subsystems];
        let mut next = 0;
        let indices = self
            .indices
            .iter()
            .map(|&i| {
                if map[i] == usize::MAX {
                    map[i] = next;
                    next += 1;
                }
                map[i]
            })
            .collect();
        Self {
            subsystems: self.subsystems,
            indices,
        }
    }

    /// Apply a relabeling `perm[old_index] = new_index` (0-based).
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        Self {
            subsystems: self.subsystems,
            indices: self.indices.iter().map(|&i| perm[i]).collect(),
        }
    }

    fn push(&mut self, label: usize) -> Result<()> {
        if label == 0 || label > self.subsystems {
            return Err(Error::LabelOutOfRange {
                sample: self.indices.len(),
                label,
                subsystems: self.subsystems,
            });
        }
        self.indices.push(label - 1);
        Ok(())
    }
}

/// Column sum tolerance for relaxed memberships.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Fractional memberships `w[s][k]` in `[0, 1]` with unit column sums.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedMembership {
    subsystems: usize,
    samples: usize,
    weights: Vec<f64>,
}

impl RelaxedMembership {
    /// `weights[s][k]`, one row per subsystem.
    pub fn new(weights: Vec<Vec<f64>>) -> Result<Self> {
        let subsystems = weights.len();
        if subsystems == 0 {
            return Err(Error::InvalidArgument("need at least one subsystem".into()));
        }
        let samples = weights[0].len();
        if weights.iter().any(|w| w.len() != samples) {
            return Err(Error::DimensionMismatch("membership rows differ in length".into()));
        }
        let m = Self {
            subsystems,
            samples,
            weights: weights.into_iter().flatten().collect(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn from_assignment(a: &Assignment) -> Self {
        let s = a.subsystems();
        let n = a.len();
        let mut weights = vec![0.0; s * n];
        for (k, &i) in a.indices().iter().enumerate() {
            weights[i * n + k] = 1.0;
        }
        Self {
            subsystems: s,
            samples: n,
            weights,
        }
    }

    fn validate(&self) -> Result<()> {
        for k in 0..self.samples {
            let mut sum = 0.0;
            for s in 0..self.subsystems {
                let w = self.weight(s, k);
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::InfeasibleMembership(format!(
                        "weight {w} at subsystem {} sample {k}",
                        s + 1
                    )));
                }
                sum += w;
            }
            if (sum - 1.0).abs() > MEMBERSHIP_TOL {
                return Err(Error::InfeasibleMembership(format!(
                    "column {k} sums to {sum}"
                )));
            }
        }
        Ok(())
    }

    pub fn subsystems(&self) -> usize {
        self.subsystems
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Weight of 0-based subsystem `s` for sample `k`.
    pub fn weight(&self, s: usize, k: usize) -> f64 {
        self.weights[s * self.samples + k]
    }

    /// `Some(assignment)` when every column is a unit vector.
    pub fn to_assignment(&self) -> Option<Assignment> {
        let mut idx = Vec::with_capacity(self.samples);
        for k in 0..self.samples {
            let mut hit = None;
            for s in 0..self.subsystems {
                let w = self.weight(s, k);
                if w == 1.0 {
                    hit = Some(s);
                } else if w != 0.0 {
                    return None;
                }
            }
            idx.push(hit?);
        }
        Some(Assignment::from_indices(idx, self.subsystems))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    None,
    Gaussian,
}

/// Additive output noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self {
            kind: NoiseKind::None,
            sigma: 0.0,
            seed: 0,
        }
    }

    /// Gaussian noise; `sigma == 0` collapses to [`NoiseSpec::none`].
    pub fn gaussian(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!("noise sigma {sigma}")));
        }
        if sigma == 0.0 {
            return Ok(Self { seed, ..Self::none() });
        }
        Ok(Self {
            kind: NoiseKind::Gaussian,
            sigma,
            seed,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, self.sigma) {
            (NoiseKind::None, s) if s == 0.0 => Ok(()),
            (NoiseKind::Gaussian, s) if s > 0.0 && s.is_finite() => Ok(()),
            (k, s) => Err(Error::InvalidArgument(format!(
                "noise kind {k:?} with sigma {s}"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_relabels_in_first_occurrence_order() {
        let a = Assignment::from_labels(&[2, 2, 1, 3, 1], 3).unwrap();
        assert_eq!(a.canonical().labels(), vec![1, 1, 2, 3, 2]);
    }

    #[test]
    fn rejects_out_of_range_labels() {
        assert!(matches!(
            Assignment::from_labels(&[1, 3], 2),
            Err(Error::LabelOutOfRange { sample: 1, label: 3, .. })
        ));
        assert!(Assignment::from_labels(&[0], 2).is_err());
    }

    #[test]
    fn membership_validation() {
        assert!(RelaxedMembership::new(vec![vec![0.5], vec![0.5]]).is_ok());
        assert!(RelaxedMembership::new(vec![vec![0.6], vec![0.5]]).is_err());
        assert!(RelaxedMembership::new(vec![vec![1.5], vec![-0.5]]).is_err());
    }

    #[test]
    fn model_json_shape() {
        let m = SlModel::new(vec![vec![1.0, 1.0], vec![-2.0, 4.0]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"n":2,"S":2,"params":[[1.0,1.0],[-2.0,4.0]]}"#);
        let back: SlModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<SlModel>(r#"{"n":3,"S":1,"params":[[1.0]]}"#).is_err());
    }

    #[test]
    fn noise_invariant() {
        assert_eq!(NoiseSpec::gaussian(0.0, 3).unwrap().kind, NoiseKind::None);
        assert!(NoiseSpec::gaussian(-1.0, 3).is_err());
        let bad = NoiseSpec {
            kind: NoiseKind::Gaussian,
            sigma: 0.0,
            seed: 0,
        };
        assert!(bad.validate().is_err());
    }
}
