//! The integer identification objective and its penalty relaxation.

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::model::{Assignment, Dataset, RelaxedMembership, SlModel};

fn check_shapes(data: &Dataset, model: &SlModel, samples: usize, subsystems: usize) -> Result<()> {
    if data.dim() != model.dim() {
        return Err(Error::DimensionMismatch(format!(
            "data dimension {} vs model dimension {}",
            data.dim(),
            model.dim()
        )));
    }
    if samples != data.len() {
        return Err(Error::DimensionMismatch(format!(
            "{samples} memberships for {} samples",
            data.len()
        )));
    }
    if subsystems > model.subsystems() {
        return Err(Error::DimensionMismatch(format!(
            "memberships over {subsystems} subsystems, model has {}",
            model.subsystems()
        )));
    }
    Ok(())
}

/// Squared residual of sample `k` under parameter `theta`.
#[inline]
pub fn residual_sq(data: &Dataset, k: usize, theta: &[f64]) -> f64 {
    let r = data.output(k) - dot(data.row(k), theta);
    r * r
}

/// `sum_k (y_k - x_k . theta_{zeta_k})^2`.
pub fn objective_integer(data: &Dataset, model: &SlModel, a: &Assignment) -> Result<f64> {
    check_shapes(data, model, a.len(), a.subsystems())?;
    Ok(integer_unchecked(data, model, a))
}

pub(crate) fn integer_unchecked(data: &Dataset, model: &SlModel, a: &Assignment) -> f64 {
    (0..data.len())
        .map(|k| residual_sq(data, k, model.param_at(a.index(k))))
        .sum()
}

/// `sum_k { sum_s w_sk r_sk^2 + (1 - sum_s w_sk^2) }`.
pub fn objective_relaxed(data: &Dataset, model: &SlModel, w: &RelaxedMembership) -> Result<f64> {
    check_shapes(data, model, w.samples(), w.subsystems())?;
    let mut total = 0.0;
    for k in 0..data.len() {
        let mut fit = 0.0;
        let mut sq = 0.0;
        for s in 0..w.subsystems() {
            let wk = w.weight(s, k);
            if wk != 0.0 {
                fit += wk * residual_sq(data, k, model.param_at(s));
                sq += wk * wk;
            }
        }
        total += fit + (1.0 - sq);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_unit_residual() {
        let d = Dataset::new(vec![vec![1.0]], vec![1.0]).unwrap();
        let m = SlModel::new(vec![vec![0.0]]).unwrap();
        let a = Assignment::from_labels(&[1], 1).unwrap();
        assert_eq!(objective_integer(&d, &m, &a).unwrap(), 1.0);
    }

    #[test]
    fn half_half_penalty() {
        let d = Dataset::new(vec![vec![1.0, 2.0]], vec![3.0]).unwrap();
        let m = SlModel::new(vec![vec![1.0, 1.0], vec![3.0, 0.0]]).unwrap();
        let w = RelaxedMembership::new(vec![vec![0.5], vec![0.5]]).unwrap();
        assert_eq!(objective_relaxed(&d, &m, &w).unwrap(), 0.5);
    }

    #[test]
    fn binary_relaxed_equals_integer() {
        let d = Dataset::new(
            vec![vec![1.0, 0.0], vec![0.3, 1.0], vec![-2.0, 0.7]],
            vec![1.5, -0.2, 4.0],
        )
        .unwrap();
        let m = SlModel::new(vec![vec![1.0, 1.0], vec![-2.0, 4.0]]).unwrap();
        let a = Assignment::from_labels(&[2, 1, 2], 2).unwrap();
        let w = RelaxedMembership::from_assignment(&a);
        assert_eq!(
            objective_relaxed(&d, &m, &w).unwrap(),
            objective_integer(&d, &m, &a).unwrap()
        );
    }

    #[test]
    fn shape_errors() {
        let d = Dataset::new(vec![vec![1.0]], vec![1.0]).unwrap();
        let m = SlModel::new(vec![vec![0.0, 1.0]]).unwrap();
        let a = Assignment::from_labels(&[1], 1).unwrap();
        assert!(objective_integer(&d, &m, &a).is_err());
    }
}
