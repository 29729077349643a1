//! Estimators and verdicts built on batches of trajectory summaries.

mod blocks;
mod coupling;
mod estimator;
mod fclt;
mod fit;
mod growth;
mod tests_gof;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use blocks::{block_decomposition, entrances_before_outside_steps, Block, BlockDecomposition};
pub use coupling::{coupling_distance, CouplingPoint, CouplingReport};
pub use estimator::{EstimatorState, IntMoments};
pub use fclt::{fclt_check, FcltOptions, FcltReport, IndependenceTest, ProbeReport, VarianceEstimator};
pub use fit::{fit_log, fit_power, write_grid_csv, Coefficient, FitModel, FitReport, GridPoint};
pub use growth::{
    entrance_counts, occupation_growth, run_grid, validate_grid, EntranceReport, GridRun, GrowthReport, OrderingCheck,
};
pub use tests_gof::{
    chi_square_gof, chi_square_homogeneity, chi_square_independence, ks_statistic, normal_cdf, ChiSquareResult,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("grid must be strictly increasing and span at least two decades")]
    GridSpan,
    #[error("insufficient data at n = {n}: relative stderr {rel_stderr:.3} exceeds {limit}")]
    InsufficientData { n: u64, rel_stderr: f64, limit: f64 },
    #[error("need at least {needed} trajectories, got {got}")]
    TooFewTrajectories { needed: u64, got: u64 },
    #[error("probe time {0} outside (0, 1]")]
    BadProbe(f64),
    #[error("estimated covariance is rank-deficient")]
    DegenerateCovariance,
}

/// Pass/fail thresholds, overridable from experiment configs. The limit
/// theorems are asymptotic, so these are engineering choices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// r² of the a + b log n fit
    pub log_fit_r2_min: f64,
    /// exponent of the a n^p fit
    pub power_exponent_max: f64,
    /// stderr/mean at any grid point
    pub rel_stderr_max: f64,
    /// per-axis KS distance under diffusive scaling
    pub ks_max: f64,
    /// per-axis KS distance under L-type scaling; looser because the
    /// approach to the normal limit carries log corrections
    pub ks_ltype_max: f64,
    /// relative Frobenius error of the covariance, unperturbed walk
    pub covariance_rel_tol: f64,
    /// same, walk with impurities
    pub covariance_rel_tol_perturbed: f64,
    /// total variation between empirical and exact pmfs
    pub tv_max: f64,
    /// p-value floor for chi-square tests
    pub independence_p_min: f64,
    /// final median sup-distance over initial must stay below this
    pub coupling_final_ratio: f64,
    /// slack, in combined stderrs, for E ν <= E ν̄
    pub ordering_sigmas: f64,
    /// agreement of two exact computations
    pub oracle_agreement: f64,
    /// |n L(B_n) / B_n² - 1|
    pub scaling_residual: f64,
    /// decade-to-decade drift of B_n / sqrt(n log n)
    pub scaling_drift_max: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            log_fit_r2_min: 0.95,
            power_exponent_max: 0.2,
            rel_stderr_max: 0.1,
            ks_max: 0.05,
            ks_ltype_max: 0.1,
            covariance_rel_tol: 0.05,
            covariance_rel_tol_perturbed: 0.10,
            tv_max: 0.01,
            independence_p_min: 0.001,
            coupling_final_ratio: 0.5,
            ordering_sigmas: 2.0,
            oracle_agreement: 1e-10,
            scaling_residual: 1e-5,
            scaling_drift_max: 0.03,
        }
    }
}

/// Relative Frobenius distance ||a - b|| / ||b||.
pub fn relative_frobenius(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_accept_partial_overrides() {
        let t: Thresholds = serde_json::from_str(r#"{"tv_max": 0.02}"#).unwrap();
        assert_eq!(t.tv_max, 0.02);
        assert_eq!(t.log_fit_r2_min, 0.95);
        assert!(serde_json::from_str::<Thresholds>(r#"{"tv": 0.02}"#).is_err());
    }

    #[test]
    fn frobenius() {
        assert!((relative_frobenius(&[1.1, 0.0, 0.0, 1.0], &[1.0, 0.0, 0.0, 1.0]) - 0.1 / 2f64.sqrt()).abs() < 1e-12);
    }
}
