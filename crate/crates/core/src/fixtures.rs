//! Small reference datasets used across tests, `simulate --example` and `repro`.

use crate::model::{Assignment, Dataset, NoiseSpec, SlModel};
use crate::simulate::simulate;

fn build(params: Vec<Vec<f64>>, xs: Vec<Vec<f64>>, labels: &[usize]) -> (SlModel, Dataset) {
    let model = SlModel::new(params).expect("fixture model");
    let z = Assignment::from_labels(labels, model.subsystems()).expect("fixture labels");
    let data = simulate(&model, &xs, &z, &NoiseSpec::none()).expect("fixture data");
    (model, data)
}

/// Two planar subsystems with four samples: every cluster Gram is nonsingular,
/// yet the data admit two genuinely different exact fits.
pub fn example1() -> (SlModel, Dataset) {
    build(
        vec![vec![1.0, 1.0], vec![-2.0, 4.0]],
        vec![
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![-2.0, -1.0],
            vec![1.0, -2.0],
        ],
        &[1, 1, 2, 2],
    )
}

/// [`example1`] plus the sample `x = (1, 2)` generated by subsystem 1.
pub fn example1_augmented() -> (SlModel, Dataset) {
    build(
        vec![vec![1.0, 1.0], vec![-2.0, 4.0]],
        vec![
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![-2.0, -1.0],
            vec![1.0, -2.0],
            vec![1.0, 2.0],
        ],
        &[1, 1, 2, 2, 1],
    )
}

fn example2_regressors() -> Vec<Vec<f64>> {
    vec![
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 1.0],
        vec![1.0, 3.0, -1.0],
        vec![2.0, 1.0, 1.0],
        vec![-1.0, 2.0, 1.0],
        vec![-2.0, -1.0, 0.0],
        vec![1.0, -2.0, -1.0],
        vec![1.0, -1.0, -2.0],
    ]
}

/// Three-dimensional, two-subsystem dataset with exactly the minimum number
/// of samples (8) for the partition certificate.
pub fn example2() -> (SlModel, Dataset) {
    build(
        vec![vec![1.0, 1.0, 1.0], vec![-2.0, 4.0, 1.0]],
        example2_regressors(),
        &[1, 1, 1, 1, 1, 2, 2, 2],
    )
}

/// [`example2`] with the first sample removed (7 samples, not uniquely identifiable).
pub fn example2_seven() -> (SlModel, Dataset) {
    build(
        vec![vec![1.0, 1.0, 1.0], vec![-2.0, 4.0, 1.0]],
        example2_regressors()[1..].to_vec(),
        &[1, 1, 1, 1, 2, 2, 2],
    )
}

/// The second exact fit of [`example2_seven`] and its switching sequence.
pub fn example2_seven_alternate() -> (SlModel, Assignment) {
    (
        SlModel::new(vec![vec![-1.4, 2.8, 4.0], vec![-2.0, -2.0, 4.0]]).expect("model"),
        Assignment::from_labels(&[2, 1, 1, 2, 1, 1, 2], 2).expect("labels"),
    )
}

/// The second exact fit of [`example1`]: subsystem 1 explains rows {1, 2}, subsystem 2 rows {0, 3}.
pub fn example1_alternate() -> (SlModel, Assignment) {
    (
        SlModel::new(vec![vec![-0.5, 1.0], vec![1.0, 5.5]]).expect("model"),
        Assignment::from_labels(&[2, 1, 1, 2], 2).expect("labels"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::objective_integer;

    #[test]
    fn example_outputs() {
        assert_eq!(example1().1.outputs(), &[1.0, 1.0, 0.0, -10.0]);
        assert_eq!(
            example2().1.outputs(),
            &[1.0, 2.0, 3.0, 4.0, 2.0, 0.0, -11.0, -8.0]
        );
        assert_eq!(example1_augmented().1.output(4), 3.0);
    }

    #[test]
    fn alternates_fit_exactly() {
        let (m, a) = example1_alternate();
        assert_eq!(objective_integer(&example1().1, &m, &a).unwrap(), 0.0);
        let (m, a) = example2_seven_alternate();
        let v = objective_integer(&example2_seven().1, &m, &a).unwrap();
        assert!(v < 1e-24, "{v}");
    }
}
