//! Random walks with local impurities: the medium, trajectory simulation,
//! the coupled pair, batch runs and the assumption checker.

mod assumptions;
mod batch;
mod config;
mod medium;
mod pathio;
mod simulate;

use thiserror::Error;

use crate::lattice::LatticePoint;
use crate::law::LawError;

pub use assumptions::{check_assumptions, AssumptionReport, MomentVerdict, SccVerdict};
pub use batch::{batch_run, batch_run_coupled, deterministic_fold, BLOCK_SIZE};
pub use config::{ImpurityConfig, WalkConfig};
pub use medium::{ImpuritySet, Medium};
pub use pathio::{read_path, write_path, PATH_MAGIC, PATH_VERSION};
pub use simulate::{
    simulate, simulate_coupled, simulate_coupled_trajectory, simulate_trajectory, CoupledSummary, FullPath, PathSummary,
};

/// FullPath recording refuses horizons above this.
pub const FULL_PATH_MAX_HORIZON: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("base law: {0}")]
    BaseLaw(LawError),
    #[error("impurity at {site}: {source}")]
    ImpurityLaw { site: LatticePoint, source: LawError },
    #[error("dimension mismatch: expected {expected}, found {found} ({what})")]
    DimensionMismatch { expected: usize, found: usize, what: &'static str },
    #[error("impurity site {0} listed twice")]
    DuplicateSite(LatticePoint),
    #[error("full-path recording is limited to {FULL_PATH_MAX_HORIZON} steps, got {0}")]
    HorizonTooLong(u64),
    #[error("horizon is required for this experiment")]
    MissingHorizon,
    #[error("coordinates out of range for the path format")]
    PathRange,
    #[error("malformed path file: {0}")]
    PathFormat(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for WalkError {
    fn from(e: std::io::Error) -> Self {
        WalkError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordMode {
    EndpointOnly,
    #[default]
    Summary,
    FullPath,
}

/// One experiment: medium, start, horizon, seed.
#[derive(Debug, Clone)]
pub struct WalkSpec {
    pub medium: std::sync::Arc<Medium>,
    pub start: LatticePoint,
    pub horizon: u64,
    pub seed: u64,
    pub record_mode: RecordMode,
    /// step indices at which positions are recorded (clamped to the horizon)
    pub probe_times: Vec<u64>,
}

impl WalkSpec {
    pub fn new(medium: Medium, start: LatticePoint, horizon: u64, seed: u64) -> Result<Self, WalkError> {
        if start.dim() != medium.dim() {
            return Err(WalkError::DimensionMismatch { expected: medium.dim(), found: start.dim(), what: "start" });
        }
        Ok(WalkSpec {
            medium: std::sync::Arc::new(medium),
            start,
            horizon,
            seed,
            record_mode: RecordMode::Summary,
            probe_times: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.medium.dim()
    }

    pub fn with_horizon(&self, horizon: u64) -> Self {
        WalkSpec { horizon, ..self.clone() }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        WalkSpec { seed, ..self.clone() }
    }

    pub fn with_start(&self, start: LatticePoint) -> Self {
        WalkSpec { start, ..self.clone() }
    }

    pub fn with_record_mode(&self, record_mode: RecordMode) -> Result<Self, WalkError> {
        if record_mode == RecordMode::FullPath && self.horizon > FULL_PATH_MAX_HORIZON {
            return Err(WalkError::HorizonTooLong(self.horizon));
        }
        Ok(WalkSpec { record_mode, ..self.clone() })
    }

    pub fn with_probes(&self, probe_times: Vec<u64>) -> Self {
        WalkSpec { probe_times, ..self.clone() }
    }
}
