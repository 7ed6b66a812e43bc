//! Data generation for switched linear systems.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::model::{Assignment, Dataset, NoiseKind, NoiseSpec, SlModel};

/// Outputs `y_k = x_k . theta_{zeta_k} + e_k` for the given regressors and switching.
pub fn simulate(
    model: &SlModel,
    regressors: &[Vec<f64>],
    switching: &Assignment,
    noise: &NoiseSpec,
) -> Result<Dataset> {
    noise.validate()?;
    if regressors.len() != switching.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} regressors but {} labels",
            regressors.len(),
            switching.len()
        )));
    }
    if let Some(r) = regressors.iter().find(|r| r.len() != model.dim()) {
        return Err(Error::DimensionMismatch(format!(
            "regressor of dimension {} for model of dimension {}",
            r.len(),
            model.dim()
        )));
    }
    if switching.subsystems() > model.subsystems() {
        if let Some(k) = (0..switching.len()).find(|&k| switching.label(k) > model.subsystems()) {
            return Err(Error::LabelOutOfRange {
                sample: k,
                label: switching.label(k),
                subsystems: model.subsystems(),
            });
        }
    }
    let mut outputs: Vec<f64> = regressors
        .iter()
        .enumerate()
        .map(|(k, x)| dot(x, model.param(switching.label(k))))
        .collect();
    if noise.kind == NoiseKind::Gaussian {
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        let normal = Normal::new(0.0, noise.sigma)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        for y in &mut outputs {
            *y += normal.sample(&mut rng);
        }
    }
    let truth = Assignment::from_indices(switching.indices().to_vec(), model.subsystems());
    Dataset::new(regressors.to_vec(), outputs)?.with_truth(truth)
}

/// Random scenario: parameter and regressor entries iid uniform on `range`,
/// labels iid uniform on `1..=subsystems`.
pub fn generate_random_scenario(
    dim: usize,
    subsystems: usize,
    samples: usize,
    range: (f64, f64),
    noise: &NoiseSpec,
    seed: u64,
) -> Result<(SlModel, Dataset)> {
    if dim == 0 || subsystems == 0 || samples == 0 {
        return Err(Error::InvalidArgument("n, S and N must all be >= 1".into()));
    }
    let (lo, hi) = range;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("empty interval [{lo}, {hi}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params: Vec<Vec<f64>> = (0..subsystems)
        .map(|_| (0..dim).map(|_| rng.random_range(lo..hi)).collect())
        .collect();
    let regressors: Vec<Vec<f64>> = (0..samples)
        .map(|_| (0..dim).map(|_| rng.random_range(lo..hi)).collect())
        .collect();
    let labels: Vec<usize> = (0..samples)
        .map(|_| rng.random_range(0..subsystems))
        .collect();
    let model = SlModel::new(params)?;
    let switching = Assignment::from_indices(labels, subsystems);
    let data = simulate(&model, &regressors, &switching, noise)?;
    Ok((model, data))
}

/// Deterministic child seed for repetition `parts` of a master seed.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    for &p in parts {
        rng.set_stream(p);
        rng = ChaCha8Rng::seed_from_u64(rng.random::<u64>());
    }
    rng.random()
}
