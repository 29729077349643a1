use serde::{Deserialize, Serialize};

use crate::lattice::LatticePoint;
use crate::law::{LawRole, LawSpec};

use super::{ImpuritySet, Medium, RecordMode, WalkError, WalkSpec, FULL_PATH_MAX_HORIZON};

/// JSON form of a walk.
///
/// ```json
/// {
///   "d": 2,
///   "base": {"family": "product_lazy", "d": 2},
///   "impurities": [{"site": [0, 0], "law": {"family": "table", "entries": [...]}}],
///   "start": [0, 0],
///   "horizon": 1000,
///   "record_mode": "summary"
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkConfig {
    pub d: usize,
    pub base: LawSpec,
    #[serde(default)]
    pub impurities: Vec<ImpurityConfig>,
    /// defaults to the origin
    #[serde(default)]
    pub start: Option<LatticePoint>,
    /// required by single-horizon experiments; grid experiments ignore it
    #[serde(default)]
    pub horizon: Option<u64>,
    #[serde(default)]
    pub record_mode: RecordMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpurityConfig {
    pub site: LatticePoint,
    pub law: LawSpec,
}

impl WalkConfig {
    pub fn medium(&self) -> Result<Medium, WalkError> {
        let base = self.base.build(LawRole::Base).map_err(WalkError::BaseLaw)?;
        if base.dim() != self.d {
            return Err(WalkError::DimensionMismatch { expected: self.d, found: base.dim(), what: "base law" });
        }
        let overrides = self
            .impurities
            .iter()
            .map(|imp| {
                imp.law
                    .build(LawRole::Impurity)
                    .map(|law| (imp.site.clone(), law))
                    .map_err(|source| WalkError::ImpurityLaw { site: imp.site.clone(), source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Medium::new(base, ImpuritySet::new(self.d, overrides)?)
    }

    /// The walk with the given seed; a missing horizon becomes 0.
    pub fn build(&self, seed: u64) -> Result<WalkSpec, WalkError> {
        let start = self.start.clone().unwrap_or_else(|| LatticePoint::origin(self.d));
        let horizon = self.horizon.unwrap_or(0);
        if self.record_mode == RecordMode::FullPath && horizon > FULL_PATH_MAX_HORIZON {
            return Err(WalkError::HorizonTooLong(horizon));
        }
        let mut spec = WalkSpec::new(self.medium()?, start, horizon, seed)?;
        spec.record_mode = self.record_mode;
        Ok(spec)
    }

    pub fn require_horizon(&self) -> Result<u64, WalkError> {
        self.horizon.ok_or(WalkError::MissingHorizon)
    }
}
