use std::path::Path;

use serde::{Deserialize, Serialize};

use perturbwalk_core::stats::{Thresholds, VarianceEstimator};
use perturbwalk_core::walk::WalkConfig;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Simulate,
    Couple,
    Occupation,
    Entrances,
    Returns,
    Survival,
    Scaling,
    Fclt,
    Check,
    DoaCheck,
}

impl Experiment {
    pub fn is_stochastic(self) -> bool {
        matches!(
            self,
            Experiment::Simulate
                | Experiment::Couple
                | Experiment::Occupation
                | Experiment::Entrances
                | Experiment::Fclt
        )
    }

    /// Experiments that only look at the law or report on the assumptions
    /// themselves run without the assumption gate.
    pub fn gated(self) -> bool {
        !matches!(self, Experiment::Check | Experiment::DoaCheck | Experiment::Scaling)
    }
}

/// One experiment, as read from JSON. Unknown keys are errors at every
/// level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub walk: WalkConfig,
    /// horizons for grid experiments
    #[serde(default)]
    pub grid: Option<Vec<u64>>,
    #[serde(default)]
    pub trajectories: Option<u64>,
    /// output prefix; `--out` wins
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub seed: Option<u64>,
    /// fclt probe times in (0, 1]
    #[serde(default)]
    pub probes: Option<Vec<f64>>,
    /// fclt: variance of the normal reference
    #[serde(default)]
    pub variance: VarianceEstimator,
    /// half-width of the exact-oracle box
    #[serde(default)]
    pub box_radius: Option<u64>,
    /// doa-check radii
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.experiment.is_stochastic() && self.seed.is_none() {
            return Err(CliError::Config(format!("experiment {:?} needs a seed", self.experiment)));
        }
        // builds the medium, catching bad laws and dimension errors early
        self.walk.medium().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn require_grid(&self) -> Result<&[u64], CliError> {
        self.grid.as_deref().ok_or_else(|| CliError::Config("missing key `grid`".into()))
    }

    pub fn require_trajectories(&self) -> Result<u64, CliError> {
        self.trajectories.ok_or_else(|| CliError::Config("missing key `trajectories`".into()))
    }

    pub fn require_horizon(&self) -> Result<u64, CliError> {
        self.walk.require_horizon().map_err(|e| CliError::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const OCC: &str = r#"{
        "experiment": "occupation",
        "walk": {"d": 2, "base": {"family": "product_lazy", "d": 2}},
        "grid": [10, 100, 1000],
        "trajectories": 100,
        "seed": 1
    }"#;

    #[test]
    fn parses_with_default_thresholds() {
        let cfg = ExperimentConfig::from_json(OCC).unwrap();
        assert_eq!(cfg.experiment, Experiment::Occupation);
        assert_eq!(cfg.thresholds, Thresholds::default());
        // the echo carries every threshold
        let echo = serde_json::to_value(&cfg).unwrap();
        assert_eq!(echo["thresholds"]["log_fit_r2_min"], 0.95);
    }

    #[test]
    fn unknown_key_is_named() {
        let bad = OCC.replace("\"grid\"", "\"gird\"");
        let err = ExperimentConfig::from_json(&bad).unwrap_err();
        assert!(err.to_string().contains("gird"), "{err}");
        let nested = OCC.replace("\"d\": 2, \"base\"", "\"d\": 2, \"horizen\": 5, \"base\"");
        assert!(ExperimentConfig::from_json(&nested).unwrap_err().to_string().contains("horizen"));
    }

    #[test]
    fn stochastic_experiments_need_a_seed() {
        let no_seed = OCC.replace(",\n        \"seed\": 1", "");
        assert!(matches!(ExperimentConfig::from_json(&no_seed), Err(CliError::Config(_))));
        let doa = r#"{"experiment": "doa-check", "walk": {"d": 2, "base": {"family": "product_lazy", "d": 2}}}"#;
        assert!(ExperimentConfig::from_json(doa).is_ok());
    }
}
