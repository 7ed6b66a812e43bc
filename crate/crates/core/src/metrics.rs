//! Estimation-quality metrics with permutation alignment of subsystems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dist_sq, norm_sq};
use crate::model::{Assignment, SlModel};

/// Largest subsystem count for which alignment enumerates all permutations.
pub const MAX_ALIGN_SUBSYSTEMS: usize = 8;

/// Maps estimated subsystem labels onto true labels.
///
/// Serialized as the 1-based image of each estimate label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", try_from = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(len: usize) -> Self {
        Self((0..len).collect())
    }

    /// From 1-based images: `images[j-1]` is the true label of estimate label `j`.
    pub fn from_images(images: &[usize]) -> Result<Self> {
        let len = images.len();
        let mut seen = vec![false; len];
        let mut v = Vec::with_capacity(len);
        for &i in images {
            if i == 0 || i > len || seen[i - 1] {
                return Err(Error::InvalidArgument(format!(
                    "{images:?} is not a permutation of 1..={len}"
                )));
            }
            seen[i - 1] = true;
            v.push(i - 1);
        }
        Ok(Self(v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True label for estimate label `label` (both 1-based).
    pub fn map(&self, label: usize) -> usize {
        self.0[label - 1] + 1
    }

    pub fn images(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    pub(crate) fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.images()
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Permutation::from_images(&v)
    }
}

/// Advance to the next permutation in lexicographic order; false after the last.
pub(crate) fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Permutation-aligned normalized parametric error
/// `min_pi sum_s ||theta_hat_{pi(s)} - theta*_s||^2 / ||theta*_s||^2`.
///
/// Ties between permutations go to the lexicographically first one.
pub fn nmse(estimate: &SlModel, truth: &SlModel) -> Result<(f64, Permutation)> {
    let s = truth.subsystems();
    if estimate.subsystems() != s || estimate.dim() != truth.dim() {
        return Err(Error::DimensionMismatch(format!(
            "estimate is {}x{}, truth is {}x{}",
            estimate.subsystems(),
            estimate.dim(),
            s,
            truth.dim()
        )));
    }
    if s > MAX_ALIGN_SUBSYSTEMS {
        return Err(Error::InvalidArgument(format!(
            "alignment supports at most {MAX_ALIGN_SUBSYSTEMS} subsystems"
        )));
    }
    let denom: Vec<f64> = truth.params().iter().map(|p| norm_sq(p)).collect();
    if let Some(i) = denom.iter().position(|&d| d == 0.0) {
        return Err(Error::ZeroNormParameter(i + 1));
    }
    // cost[j][t]: estimate j matched with truth t
    let cost: Vec<Vec<f64>> = estimate
        .params()
        .iter()
        .map(|e| {
            truth
                .params()
                .iter()
                .zip(&denom)
                .map(|(t, d)| dist_sq(e, t) / d)
                .collect()
        })
        .collect();
    let mut perm: Vec<usize> = (0..s).collect();
    let mut best = (f64::INFINITY, perm.clone());
    loop {
        let v: f64 = perm.iter().enumerate().map(|(j, &t)| cost[j][t]).sum();
        if v < best.0 {
            best = (v, perm.clone());
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok((best.0, Permutation(best.1)))
}

/// Fraction of samples whose aligned estimated label differs from the truth.
pub fn classification_error(
    estimate: &Assignment,
    truth: &Assignment,
    perm: &Permutation,
) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} estimated labels vs {} true labels",
            estimate.len(),
            truth.len()
        )));
    }
    if perm.len() < estimate.subsystems() {
        return Err(Error::DimensionMismatch(format!(
            "permutation of length {} for {} subsystems",
            perm.len(),
            estimate.subsystems()
        )));
    }
    if estimate.is_empty() {
        return Ok(0.0);
    }
    let p = perm.as_slice();
    let wrong = estimate
        .indices()
        .iter()
        .zip(truth.indices())
        .filter(|(&e, &t)| p[e] != t)
        .count();
    Ok(wrong as f64 / estimate.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex1_truth() -> SlModel {
        SlModel::new(vec![vec![1.0, 1.0], vec![-2.0, 4.0]]).unwrap()
    }

    #[test]
    fn identical_models() {
        let (v, p) = nmse(&ex1_truth(), &ex1_truth()).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(p, Permutation::identity(2));
    }

    #[test]
    fn swapped_models() {
        let est = ex1_truth().permuted(&[1, 0]);
        let (v, p) = nmse(&est, &ex1_truth()).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(p.images(), vec![2, 1]);
    }

    #[test]
    fn half_error_under_swap() {
        let est = SlModel::new(vec![vec![-2.0, 4.0], vec![1.0, 2.0]]).unwrap();
        let (v, p) = nmse(&est, &ex1_truth()).unwrap();
        assert_eq!(v, 0.5);
        assert_eq!(p.images(), vec![2, 1]);
    }

    #[test]
    fn zero_norm_truth_rejected() {
        let t = SlModel::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(nmse(&t, &t), Err(Error::ZeroNormParameter(1)));
    }

    #[test]
    fn ce_counts() {
        let t = Assignment::from_labels(&[1, 1, 2, 2], 2).unwrap();
        assert_eq!(classification_error(&t, &t, &Permutation::identity(2)).unwrap(), 0.0);
        let swapped = Assignment::from_labels(&[2, 2, 1, 1], 2).unwrap();
        let swap = Permutation::from_images(&[2, 1]).unwrap();
        assert_eq!(classification_error(&swapped, &t, &swap).unwrap(), 0.0);
        let one_off = Assignment::from_labels(&[1, 2, 2, 2], 2).unwrap();
        assert_eq!(
            classification_error(&one_off, &t, &Permutation::identity(2)).unwrap(),
            0.25
        );
        let short = Assignment::from_labels(&[1], 2).unwrap();
        assert!(classification_error(&short, &t, &Permutation::identity(2)).is_err());
    }

    #[test]
    fn permutations_enumerate_factorial() {
        let mut p = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut p) {
            count += 1;
        }
        assert_eq!(count, 24);
    }
}
