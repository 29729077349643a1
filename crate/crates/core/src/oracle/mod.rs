//! Exact small-horizon computations used as ground truth for the Monte
//! Carlo estimates.

mod io;
mod pmf;
mod renewal;

use thiserror::Error;

use crate::lattice::LatticePoint;
use crate::law::JumpLaw;
use crate::walk::Medium;

pub use io::{read_ppmf, write_csv, write_ppmf, PPMF_MAGIC, PPMF_VERSION};
pub use pmf::LatticePmf;
pub use renewal::{
    c_n_partial_sums, hybrid_return_sequence, product_lazy_return, product_lazy_returns, survival_by_renewal, CnReport,
    Growth, HybridReturns, BOUNDED_DECADE_FRACTION,
};

use pmf::Evolution;

/// Leaked mass above this makes the box too small for a 0.01 TV comparison.
pub const LEAK_LIMIT: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("box of radius {box_radius} leaked {leaked:.3e} of the mass; enlarge it")]
    BoxTooSmall { leaked: f64, box_radius: u64 },
    #[error("box too large for a dense grid")]
    BoxTooLarge,
    #[error("point {0} lies outside the box")]
    OutsideBox(LatticePoint),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("renewal recursion left [0, 1] or increased at n = {n} (R = {value})")]
    NumericUnderflow { n: usize, value: f64 },
    #[error("not a return-probability sequence: {0}")]
    BadReturnSequence(String),
    #[error("malformed grid file: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for OracleError {
    fn from(e: std::io::Error) -> Self {
        OracleError::Io(e.to_string())
    }
}

/// Running Neumaier sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl From<f64> for Compensated {
    fn from(v: f64) -> Self {
        Compensated { sum: v, comp: 0.0 }
    }
}

/// Law of X_n for the unperturbed walk started at `start`.
pub fn n_step_pmf(law: &JumpLaw, start: &LatticePoint, n: u64, box_radius: u64) -> Result<LatticePmf, OracleError> {
    n_step_pmf_medium(&Medium::unperturbed(law.clone()), start, n, box_radius)
}

/// Law of X_n in a medium with impurities.
pub fn n_step_pmf_medium(
    medium: &Medium,
    start: &LatticePoint,
    n: u64,
    box_radius: u64,
) -> Result<LatticePmf, OracleError> {
    evolve(medium, LatticePmf::point_mass(medium.dim(), box_radius, start)?, n)
}

/// Pushes `init` forward `n` steps on its own box.
pub fn evolve(medium: &Medium, init: LatticePmf, n: u64) -> Result<LatticePmf, OracleError> {
    let mut ev = Evolution::new(medium, init, &[])?;
    for _ in 0..n {
        ev.advance()?;
    }
    Ok(ev.pmf)
}

/// u(k) = P_0(X_k = 0) for k = 0..=n_max, unperturbed.
pub fn return_probabilities(law: &JumpLaw, n_max: u64, box_radius: u64) -> Result<Vec<f64>, OracleError> {
    let medium = Medium::unperturbed(law.clone());
    let origin = LatticePoint::origin(law.dim());
    let mut ev = Evolution::new(&medium, LatticePmf::point_mass(law.dim(), box_radius, &origin)?, &[])?;
    let mut u = vec![1.0];
    for _ in 0..n_max {
        ev.advance()?;
        u.push(ev.pmf.get(origin.coords()));
    }
    Ok(u)
}

/// Survival against a taboo set: `survival[k]` = P(no visit to B at steps
/// 1..=k), with mass that left the box counted as surviving.
#[derive(Debug, Clone, PartialEq)]
pub struct TabooResult {
    pub survival: Vec<f64>,
    pub leaked: f64,
}

/// P_start(T_B > k) for k = 0..=n, where T_B = min{k >= 1 : X_k in B}.
/// Rows at impurity sites are used, so in a perturbed medium this is S_B.
pub fn taboo_survival_dp(
    medium: &Medium,
    start: &LatticePoint,
    taboo: &[LatticePoint],
    n: u64,
    box_radius: u64,
) -> Result<TabooResult, OracleError> {
    let init = LatticePmf::point_mass(medium.dim(), box_radius, start)?;
    let mut ev = Evolution::new(medium, init, taboo)?;
    let mut absorbed = Compensated::default();
    let mut survival = vec![1.0];
    for _ in 0..n {
        ev.advance()?;
        absorbed.add(*ev.absorbed.last().expect("one entry per step"));
        survival.push(1.0 - absorbed.value());
    }
    Ok(TabooResult { survival, leaked: ev.pmf.leaked() })
}

/// The sites of K_N.
pub fn cube_sites(d: usize, n: u64) -> Vec<LatticePoint> {
    let grid = LatticePmf::zeros(d, n).expect("small cube");
    (0..grid.mass().len()).map(|i| grid.point(i)).collect()
}

/// P_z(S_{K_N} > k) in the given medium.
pub fn kn_avoidance(
    medium: &Medium,
    start: &LatticePoint,
    n: u64,
    box_radius: u64,
) -> Result<TabooResult, OracleError> {
    taboo_survival_dp(medium, start, &cube_sites(medium.dim(), medium.n()), n, box_radius)
}

/// P_0(T_{0} > k) for the unperturbed walk.
pub fn origin_avoidance(law: &JumpLaw, n: u64, box_radius: u64) -> Result<TabooResult, OracleError> {
    let origin = LatticePoint::origin(law.dim());
    taboo_survival_dp(&Medium::unperturbed(law.clone()), &origin, &[origin.clone()], n, box_radius)
}

/// E_z(ρ_k) for k = 0..=n.
pub fn expected_occupation(
    medium: &Medium,
    start: &LatticePoint,
    n: u64,
    box_radius: u64,
) -> Result<Vec<f64>, OracleError> {
    let cube = cube_sites(medium.dim(), medium.n());
    let mut ev = Evolution::new(medium, LatticePmf::point_mass(medium.dim(), box_radius, start)?, &[])?;
    let occupancy = |pmf: &LatticePmf| cube.iter().map(|x| pmf.get(x.coords())).sum::<f64>();
    let mut acc = Compensated::default();
    acc.add(occupancy(&ev.pmf));
    let mut out = vec![acc.value()];
    for _ in 0..n {
        ev.advance()?;
        acc.add(occupancy(&ev.pmf));
        out.push(acc.value());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::ImpuritySet;

    fn lazy() -> JumpLaw {
        JumpLaw::lazy_srw(2).unwrap()
    }

    #[test]
    fn zero_steps_is_point_mass() {
        let p = n_step_pmf(&lazy(), &LatticePoint::from([1, -1]), 0, 3).unwrap();
        assert_eq!(p.get(&[1, -1]), 1.0);
        assert_eq!(p.total(), 1.0);
    }

    #[test]
    fn two_step_return_by_enumeration() {
        let law = lazy();
        let mut brute = 0.0;
        for (a, p) in law.atoms() {
            for (b, q) in law.atoms() {
                if a.add(b).is_origin() {
                    brute += p * q;
                }
            }
        }
        let pmf = n_step_pmf(&law, &LatticePoint::origin(2), 2, 2).unwrap();
        assert!((pmf.get(&[0, 0]) - brute).abs() < 1e-15);
        assert!((brute - 0.2).abs() < 1e-15);
    }

    #[test]
    fn product_lazy_matches_closed_form() {
        let law = JumpLaw::product_lazy(2).unwrap();
        let u = return_probabilities(&law, 12, 12).unwrap();
        for (n, v) in u.iter().enumerate() {
            assert!((v - product_lazy_return(n as u64)).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn leak_is_zero_iff_box_covers_reach() {
        let law = lazy();
        let p = n_step_pmf(&law, &LatticePoint::origin(2), 5, 5).unwrap();
        assert_eq!(p.leaked(), 0.0);
        assert!((p.total() - 1.0).abs() < 1e-12);
        let q = n_step_pmf(&law, &LatticePoint::origin(2), 5, 4).unwrap();
        assert!(q.leaked() > 0.0);
        assert!((q.total() + q.leaked() - 1.0).abs() < 1e-12);
        assert!(matches!(n_step_pmf(&law, &LatticePoint::origin(2), 40, 2), Err(OracleError::BoxTooSmall { .. })));
    }

    #[test]
    fn single_step_taboo() {
        let law = JumpLaw::axis_power_tail(2, 3.0, 0.3).unwrap();
        let r = origin_avoidance(&law, 1, 8).unwrap();
        assert!((r.survival[1] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn restart_composition() {
        let sticky = JumpLaw::table(vec![
            (LatticePoint::from([0, 0]), 0.9),
            (LatticePoint::from([1, 0]), 0.025),
            (LatticePoint::from([-1, 0]), 0.025),
            (LatticePoint::from([0, 1]), 0.025),
            (LatticePoint::from([0, -1]), 0.025),
        ])
        .unwrap();
        let medium =
            Medium::new(lazy(), ImpuritySet::new(2, vec![(LatticePoint::from([1, 0]), sticky)]).unwrap()).unwrap();
        let start = LatticePoint::origin(2);
        let direct = n_step_pmf_medium(&medium, &start, 9, 9).unwrap();
        let half = n_step_pmf_medium(&medium, &start, 4, 9).unwrap();
        let composed = evolve(&medium, half, 5).unwrap();
        for (a, b) in direct.mass().iter().zip(composed.mass()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn expected_occupation_counts_start() {
        let medium = Medium::unperturbed(lazy());
        let e = expected_occupation(&medium, &LatticePoint::origin(2), 2, 2).unwrap();
        assert_eq!(e[0], 1.0);
        assert!((e[1] - 1.2).abs() < 1e-15);
        assert!((e[2] - 1.4).abs() < 1e-15);
    }
}
