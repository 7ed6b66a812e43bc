use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Flat JSON configuration file. Every key is optional; command-line flags
/// take precedence over values found here.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    pub max_iters: Option<usize>,
    pub obj_tol: Option<f64>,
    pub sigma: Option<f64>,
    pub repetitions: Option<usize>,
    pub trials: Option<usize>,
    pub limit: Option<u128>,
    pub rank_tol: Option<f64>,
    pub s_bar: Option<usize>,
    pub lambda_c: Option<f64>,
    pub max_block_size: Option<usize>,
    pub nmse_success: Option<f64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_documents_parse() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"seed": 4, "restarts": 3}"#).unwrap();
        assert_eq!(c.seed, Some(4));
        assert_eq!(c.restarts, Some(3));
        assert_eq!(c.sigma, None);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"sede": 4}"#).is_err());
    }
}
