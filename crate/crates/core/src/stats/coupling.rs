use serde::Serialize;

use super::estimator::EstimatorState;
use super::fit::{fit_power, FitReport, GridPoint};
use super::growth::validate_grid;
use super::{StatsError, Thresholds};
use crate::rng::derive_seed;
use crate::scaling::ScalingSequence;
use crate::walk::{deterministic_fold, simulate_coupled_trajectory, WalkSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingPoint {
    pub n: u64,
    pub b_n: f64,
    /// statistics of sup_{i<=n} ||X_i - Z_i|| / B_n
    pub scaled: GridPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingReport {
    pub points: Vec<CouplingPoint>,
    /// power fit of the mean scaled distance, when every mean is positive
    pub fit: Option<FitReport>,
    /// every distance was zero (no impurities, or never inside K_N)
    pub trivial: bool,
    pub vanishing: bool,
}

impl CouplingReport {
    pub fn grid(&self) -> Vec<GridPoint> {
        self.points.iter().map(|p| p.scaled.clone()).collect()
    }
}

/// Distance between the walk and its coupled unperturbed copy over a grid
/// of horizons. Grid point `g` uses seed `derive_seed(spec.seed, g)`.
pub fn coupling_distance(
    spec: &WalkSpec,
    scaling: &ScalingSequence,
    grid: &[u64],
    trajectories: u64,
    threads: usize,
    t: &Thresholds,
) -> Result<CouplingReport, StatsError> {
    validate_grid(grid)?;
    if trajectories < 2 {
        return Err(StatsError::TooFewTrajectories { needed: 2, got: trajectories });
    }
    let d = spec.dim();
    let points: Vec<CouplingPoint> = grid
        .iter()
        .enumerate()
        .map(|(g, &n)| {
            let point = spec.with_horizon(n).with_seed(derive_seed(spec.seed, g as u64));
            let state = deterministic_fold(
                trajectories,
                threads,
                || EstimatorState::new(d, false),
                |mut s, i| {
                    s.push_coupled(&simulate_coupled_trajectory(&point, i));
                    s
                },
                EstimatorState::merge,
            );
            let b_n = scaling.b(n);
            let m = &state.sup_distance;
            CouplingPoint {
                n,
                b_n,
                scaled: GridPoint {
                    n,
                    mean: m.mean() / b_n,
                    stderr: m.stderr() / b_n,
                    q50: m.quantile(0.5) / b_n,
                    q90: m.quantile(0.9) / b_n,
                },
            }
        })
        .collect();

    let grid_points: Vec<GridPoint> = points.iter().map(|p| p.scaled.clone()).collect();
    let trivial = grid_points.iter().all(|p| p.q90 == 0.0 && p.mean == 0.0);
    let decreasing = |f: fn(&GridPoint) -> f64| grid_points.windows(2).all(|w| f(&w[1]) < f(&w[0]));
    let first = grid_points.first().expect("validated grid").q50;
    let last = grid_points.last().expect("validated grid").q50;
    let vanishing =
        trivial || (decreasing(|p| p.q50) && decreasing(|p| p.q90) && last < t.coupling_final_ratio * first);
    Ok(CouplingReport { fit: fit_power(&grid_points), points, trivial, vanishing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticePoint;
    use crate::law::JumpLaw;
    use crate::walk::{ImpuritySet, Medium};

    #[test]
    fn no_impurities_is_trivially_vanishing() {
        let spec =
            WalkSpec::new(Medium::unperturbed(JumpLaw::lazy_srw(2).unwrap()), LatticePoint::origin(2), 0, 3).unwrap();
        let rep =
            coupling_distance(&spec, &ScalingSequence::Diffusive, &[10, 100, 1000], 100, 1, &Thresholds::default())
                .unwrap();
        assert!(rep.trivial && rep.vanishing);
        assert!(rep.points.iter().all(|p| p.scaled.q90 == 0.0));
    }

    #[test]
    fn bounded_impurity_distance_shrinks() {
        let push = JumpLaw::override_table(vec![(LatticePoint::from([3, 0]), 0.5), (LatticePoint::from([0, 3]), 0.5)])
            .unwrap();
        let imp = ImpuritySet::new(2, vec![(LatticePoint::origin(2), push)]).unwrap();
        let medium = Medium::new(JumpLaw::lazy_srw(2).unwrap(), imp).unwrap();
        let spec = WalkSpec::new(medium, LatticePoint::origin(2), 0, 11).unwrap();
        let rep =
            coupling_distance(&spec, &ScalingSequence::Diffusive, &[100, 1000, 10_000], 400, 0, &Thresholds::default())
                .unwrap();
        assert!(!rep.trivial);
        assert!(rep.vanishing, "{:?}", rep.points);
    }
}
