use serde::{Deserialize, Serialize};

use super::{JumpLaw, LawError};
use crate::lattice::LatticePoint;

/// JSON form of a jump law.
///
/// ```json
/// {"family": "table", "entries": [{"jump": [1, 0], "prob": 0.5}, {"jump": [-1, 0], "prob": 0.5}]}
/// {"family": "axis_power_tail", "d": 2, "beta": 3.0, "hold": 0.0}
/// {"family": "product_lazy", "d": 2}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawSpec {
    Table {
        entries: Vec<TableEntry>,
    },
    AxisPowerTail {
        d: usize,
        beta: f64,
        #[serde(default)]
        hold: f64,
    },
    ProductLazy {
        d: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub jump: LatticePoint,
    pub prob: f64,
}

/// Base laws must be centered with beta > 2; impurity rows only need
/// normalization and an epsilon-moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawRole {
    Base,
    Impurity,
}

impl LawSpec {
    pub fn build(&self, role: LawRole) -> Result<JumpLaw, LawError> {
        match (self, role) {
            (LawSpec::Table { entries }, LawRole::Base) => {
                JumpLaw::table(entries.iter().map(|e| (e.jump.clone(), e.prob)).collect())
            }
            (LawSpec::Table { entries }, LawRole::Impurity) => {
                JumpLaw::override_table(entries.iter().map(|e| (e.jump.clone(), e.prob)).collect())
            }
            (LawSpec::AxisPowerTail { d, beta, hold }, LawRole::Base) => JumpLaw::axis_power_tail(*d, *beta, *hold),
            (LawSpec::AxisPowerTail { d, beta, hold }, LawRole::Impurity) => {
                JumpLaw::override_power_tail(*d, *beta, *hold)
            }
            (LawSpec::ProductLazy { d }, _) => JumpLaw::product_lazy(*d),
        }
    }
}
