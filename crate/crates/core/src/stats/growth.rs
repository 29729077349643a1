//! Occupation-time and entrance-count growth over a grid of horizons.

use serde::Serialize;

use super::estimator::{EstimatorState, IntMoments};
use super::fit::{fit_log, fit_power, FitReport, GridPoint};
use super::{StatsError, Thresholds};
use crate::rng::derive_seed;
use crate::walk::{deterministic_fold, simulate_trajectory, RecordMode, WalkSpec};

/// Estimator states at each horizon of a grid. Grid point `g` uses seed
/// `derive_seed(spec.seed, g)`, so points are independent.
#[derive(Debug, Clone, Serialize)]
pub struct GridRun {
    pub grid: Vec<u64>,
    pub trajectories: u64,
    pub states: Vec<EstimatorState>,
}

/// Strictly increasing, positive, spanning at least two decades.
pub fn validate_grid(grid: &[u64]) -> Result<(), StatsError> {
    let increasing = grid.windows(2).all(|w| w[0] < w[1]);
    match (grid.first(), grid.last()) {
        (Some(&lo), Some(&hi)) if increasing && lo > 0 && hi >= 100 * lo => Ok(()),
        _ => Err(StatsError::GridSpan),
    }
}

pub fn run_grid(spec: &WalkSpec, grid: &[u64], trajectories: u64, threads: usize) -> Result<GridRun, StatsError> {
    validate_grid(grid)?;
    if trajectories < 2 {
        return Err(StatsError::TooFewTrajectories { needed: 2, got: trajectories });
    }
    let d = spec.dim();
    let states = grid
        .iter()
        .enumerate()
        .map(|(g, &n)| {
            let mut point = spec.with_horizon(n).with_seed(derive_seed(spec.seed, g as u64));
            point.record_mode = RecordMode::Summary;
            point.probe_times.clear();
            deterministic_fold(
                trajectories,
                threads,
                || EstimatorState::new(d, false),
                |mut s, t| {
                    s.push_path(&simulate_trajectory(&point, t));
                    s
                },
                EstimatorState::merge,
            )
        })
        .collect();
    Ok(GridRun { grid: grid.to_vec(), trajectories, states })
}

fn grid_points(run: &GridRun, stat: impl Fn(&EstimatorState) -> &IntMoments) -> Vec<GridPoint> {
    run.grid
        .iter()
        .zip(&run.states)
        .map(|(&n, s)| {
            let m = stat(s);
            GridPoint { n, mean: m.mean(), stderr: m.stderr(), q50: m.quantile(0.5), q90: m.quantile(0.9) }
        })
        .collect()
}

fn check_precision(points: &[GridPoint], limit: f64) -> Result<(), StatsError> {
    for p in points {
        let rel = p.stderr / p.mean;
        if !(rel <= limit) {
            return Err(StatsError::InsufficientData { n: p.n, rel_stderr: rel, limit });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub statistic: &'static str,
    pub log_fit: FitReport,
    pub power_fit: Option<FitReport>,
    /// log fit with r² at the threshold, positive slope, and a power fit
    /// whose exponent stays below the threshold
    pub log_growth: bool,
    /// slope of the log fit within 2 stderr of zero
    pub bounded: bool,
}

fn growth_report(statistic: &'static str, points: Vec<GridPoint>, t: &Thresholds) -> GrowthReport {
    let log_fit = fit_log(&points);
    let power_fit = fit_power(&points);
    let b = log_fit.coefficient("b").expect("log fit has b").clone();
    let exponent_ok = power_fit
        .as_ref()
        .map(|f| f.coefficient("p").expect("power fit has p").value < t.power_exponent_max)
        .unwrap_or(false);
    let log_growth = log_fit.r_squared >= t.log_fit_r2_min && b.value > 0.0 && exponent_ok;
    let bounded = b.value.abs() <= 2.0 * b.stderr;
    GrowthReport { statistic, log_fit, power_fit, log_growth, bounded }
}

/// Growth of E ρ_n over the grid.
pub fn occupation_growth(run: &GridRun, t: &Thresholds) -> Result<GrowthReport, StatsError> {
    let points = grid_points(run, |s| &s.rho);
    check_precision(&points, t.rel_stderr_max)?;
    Ok(growth_report("rho", points, t))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingCheck {
    pub n: u64,
    pub nu_mean: f64,
    pub nu_bar_mean: f64,
    pub combined_stderr: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntranceReport {
    pub nu: GrowthReport,
    pub nu_bar: GrowthReport,
    pub ordering: Vec<OrderingCheck>,
    /// E ν_n <= E ν̄_n + k σ at every grid point
    pub ordering_holds: bool,
    /// trajectories whose ν̄ continuation hit its cap
    pub censored: u64,
}

/// Growth of E ν_n and E ν̄_n, and the ordering E ν_n <= E ν̄_n.
pub fn entrance_counts(run: &GridRun, t: &Thresholds) -> Result<EntranceReport, StatsError> {
    let nu = grid_points(run, |s| &s.nu);
    let nu_bar = grid_points(run, |s| &s.nu_bar);
    check_precision(&nu_bar, t.rel_stderr_max)?;
    let ordering: Vec<OrderingCheck> = nu
        .iter()
        .zip(&nu_bar)
        .map(|(a, b)| {
            // same paths, so the stderrs are correlated; adding variances
            // is conservative for the one-sided check
            let combined = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
            OrderingCheck {
                n: a.n,
                nu_mean: a.mean,
                nu_bar_mean: b.mean,
                combined_stderr: combined,
                holds: a.mean <= b.mean + t.ordering_sigmas * combined,
            }
        })
        .collect();
    Ok(EntranceReport {
        ordering_holds: ordering.iter().all(|o| o.holds),
        ordering,
        censored: run.states.iter().map(|s| s.nu_bar_censored).sum(),
        nu: growth_report("nu", nu, t),
        nu_bar: growth_report("nu_bar", nu_bar, t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticePoint;
    use crate::law::JumpLaw;
    use crate::walk::Medium;

    fn lazy_spec() -> WalkSpec {
        WalkSpec::new(Medium::unperturbed(JumpLaw::lazy_srw(2).unwrap()), LatticePoint::origin(2), 0, 5).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(validate_grid(&[10, 100, 1000]).is_ok());
        assert_eq!(validate_grid(&[10, 100]), Err(StatsError::GridSpan));
        assert_eq!(validate_grid(&[10, 99]), Err(StatsError::GridSpan));
        assert_eq!(validate_grid(&[100, 10, 10_000]), Err(StatsError::GridSpan));
        assert_eq!(validate_grid(&[]), Err(StatsError::GridSpan));
    }

    #[test]
    fn grid_points_use_independent_seeds() {
        let run = run_grid(&lazy_spec(), &[10, 100, 1000], 200, 1).unwrap();
        assert_eq!(run.states.len(), 3);
        assert!(run.states.iter().all(|s| s.count == 200));
        let again = run_grid(&lazy_spec(), &[10, 100, 1000], 200, 4).unwrap();
        assert_eq!(run.states, again.states);
    }

    #[test]
    fn two_dimensional_occupation_grows_logarithmically() {
        let run = run_grid(&lazy_spec(), &[100, 1000, 10_000], 2000, 0).unwrap();
        let rep = occupation_growth(&run, &Thresholds::default()).unwrap();
        assert!(rep.log_growth, "{rep:?}");
        assert!(!rep.bounded);
        let ent = entrance_counts(&run, &Thresholds::default()).unwrap();
        assert!(ent.ordering_holds);
        assert_eq!(ent.censored, 0);
        for (a, b) in ent.nu.log_fit.grid.iter().zip(&ent.nu_bar.log_fit.grid) {
            assert!(a.mean <= b.mean);
        }
    }

    #[test]
    fn imprecise_grid_is_rejected() {
        let far = lazy_spec().with_start(LatticePoint::from([40, 0]));
        let run = run_grid(&far, &[1, 10, 100], 50, 1).unwrap();
        assert!(matches!(occupation_growth(&run, &Thresholds::default()), Err(StatsError::InsufficientData { .. })));
    }
}
