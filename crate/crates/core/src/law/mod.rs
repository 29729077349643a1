//! Jump distributions on Z^d.

mod diagnostics;
mod sampler;
mod spec;

use std::collections::BTreeMap;

use rand_core::RngCore;
use serde::Serialize;
use thiserror::Error;

use crate::lattice::{LatticePoint, MAX_DIM};
use crate::special::{hurwitz_zeta, power_sum, zeta};

pub use diagnostics::{
    domain_of_attraction_check, lattice_index, one_lattice_check, DoaReport, RatioTrend, DEFAULT_DOA_RADII,
    DIRECTION_PAIRS,
};
pub use sampler::MAX_JUMP;
pub use spec::{LawRole, LawSpec, TableEntry};

use sampler::{AliasSampler, PowerTailSampler};

/// Magnitudes up to this radius are tabulated for the power-tail sampler.
const POWER_TAIL_HEAD: u64 = 1024;

const MASS_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LawError {
    #[error("jump law has nonzero mean {0:?}")]
    NonZeroMean(Vec<f64>),
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension {0} outside the supported range 2..={MAX_DIM}")]
    BadDimension(usize),
    #[error("tail exponent {beta} must exceed {min}")]
    BadExponent { beta: f64, min: f64 },
    #[error("hold probability {0} must lie in [0, 1)")]
    BadHold(f64),
    #[error("probability {0} is not in (0, 1]")]
    BadProbability(f64),
    #[error("law has no atoms")]
    Empty,
    #[error("law fails the domain-of-attraction diagnostic")]
    NotInDomain,
    #[error("truncated second-moment matrix is singular at radius {0}")]
    DegenerateLaw(f64),
    #[error("radii must be positive and strictly increasing, with at least two entries")]
    BadRadii,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LawFamily {
    Table,
    AxisPowerTail,
    ProductLazy,
}

/// Moment class of a jump law. `LType` is the logarithmic special case of
/// `BType`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LawClass {
    FiniteVariance,
    BType,
    LType,
}

impl LawClass {
    pub fn is_btype(self) -> bool {
        matches!(self, LawClass::BType | LawClass::LType)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct PowerTail {
    beta: f64,
    hold: f64,
    zeta_beta: f64,
}

impl PowerTail {
    /// Probability of one signed atom k e_i, k != 0.
    fn atom(&self, d: usize, k: u64) -> f64 {
        (1.0 - self.hold) * (k as f64).powf(-self.beta) / (2.0 * d as f64 * self.zeta_beta)
    }

    /// P(|k| > m) summed over all axes.
    fn tail(&self, m: u64) -> f64 {
        (1.0 - self.hold) * hurwitz_zeta(self.beta, m as f64 + 1.0) / self.zeta_beta
    }

    /// sum_{1 <= k <= m} k^2 * P(|jump| = k) over all axes.
    fn second_moment_upto(&self, m: u64) -> f64 {
        (1.0 - self.hold) * power_sum(2.0 - self.beta, m) / self.zeta_beta
    }
}

/// A probability mass function on jumps in Z^d, with a sampler.
#[derive(Debug, Clone)]
pub struct JumpLaw {
    d: usize,
    family: LawFamily,
    /// explicit support for Table/ProductLazy, empty for AxisPowerTail
    atoms: Vec<(LatticePoint, f64)>,
    tail: Option<PowerTail>,
    class: LawClass,
    covariance: Option<Vec<f64>>,
    mean: Vec<f64>,
    symmetric: bool,
    sampler: AliasSampler,
}

impl PartialEq for JumpLaw {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.family == other.family && self.atoms == other.atoms && self.tail == other.tail
    }
}

impl JumpLaw {
    /// Finite-support law; requires mean zero.
    pub fn table(entries: Vec<(LatticePoint, f64)>) -> Result<Self, LawError> {
        let law = Self::build_table(entries, LawFamily::Table)?;
        if !law.is_centered() {
            return Err(LawError::NonZeroMean(law.mean.clone()));
        }
        Ok(law)
    }

    /// Finite-support law for an impurity row: normalized but not
    /// necessarily centered.
    pub fn override_table(entries: Vec<(LatticePoint, f64)>) -> Result<Self, LawError> {
        Self::build_table(entries, LawFamily::Table)
    }

    /// P(jump = k e_i) = (1 - hold) |k|^{-beta} / (2 d zeta(beta)), P(0) = hold.
    pub fn axis_power_tail(d: usize, beta: f64, hold: f64) -> Result<Self, LawError> {
        if !(beta > 2.0) {
            return Err(LawError::BadExponent { beta, min: 2.0 });
        }
        Self::build_power_tail(d, beta, hold)
    }

    /// Power-tail impurity row. Only an epsilon-moment is needed there, so
    /// any beta > 1 is accepted; the law is symmetric but for beta <= 2 has
    /// no mean.
    pub fn override_power_tail(d: usize, beta: f64, hold: f64) -> Result<Self, LawError> {
        if !(beta > 1.0) {
            return Err(LawError::BadExponent { beta, min: 1.0 });
        }
        Self::build_power_tail(d, beta, hold)
    }

    /// Independent coordinates, each {0: 1/2, +-1: 1/4}.
    pub fn product_lazy(d: usize) -> Result<Self, LawError> {
        check_dim(d)?;
        let mut atoms = vec![(Vec::<i64>::new(), 1.0)];
        for _ in 0..d {
            let mut next = Vec::with_capacity(atoms.len() * 3);
            for (v, p) in &atoms {
                for (step, q) in [(-1i64, 0.25), (0, 0.5), (1, 0.25)] {
                    let mut w = v.clone();
                    w.push(step);
                    next.push((w, p * q));
                }
            }
            atoms = next;
        }
        let entries = atoms.into_iter().map(|(v, p)| (LatticePoint::new(v), p)).collect();
        Self::build_table(entries, LawFamily::ProductLazy)
    }

    /// Lazy simple random walk: hold and each of the 2d neighbours with
    /// probability 1/(2d+1).
    pub fn lazy_srw(d: usize) -> Result<Self, LawError> {
        check_dim(d)?;
        let p = 1.0 / (2 * d + 1) as f64;
        let mut entries = vec![(LatticePoint::origin(d), p)];
        for i in 0..d {
            entries.push((LatticePoint::axis(d, i, 1), p));
            entries.push((LatticePoint::axis(d, i, -1), p));
        }
        Self::table(entries)
    }

    /// Simple symmetric random walk (no holding).
    pub fn simple_srw(d: usize) -> Result<Self, LawError> {
        check_dim(d)?;
        let p = 1.0 / (2 * d) as f64;
        let mut entries = Vec::new();
        for i in 0..d {
            entries.push((LatticePoint::axis(d, i, 1), p));
            entries.push((LatticePoint::axis(d, i, -1), p));
        }
        Self::table(entries)
    }

    fn build_table(entries: Vec<(LatticePoint, f64)>, family: LawFamily) -> Result<Self, LawError> {
        let d = entries.first().ok_or(LawError::Empty)?.0.dim();
        check_dim(d)?;
        let mut merged: BTreeMap<LatticePoint, f64> = BTreeMap::new();
        for (jump, p) in entries {
            if jump.dim() != d {
                return Err(LawError::DimensionMismatch { expected: d, found: jump.dim() });
            }
            if !(p > 0.0 && p <= 1.0) {
                return Err(LawError::BadProbability(p));
            }
            *merged.entry(jump).or_insert(0.0) += p;
        }
        let total = neumaier_sum(merged.values().copied());
        if (total - 1.0).abs() > MASS_TOL {
            return Err(LawError::NotNormalized(total));
        }
        let atoms: Vec<(LatticePoint, f64)> = merged.into_iter().collect();

        let mean: Vec<f64> =
            (0..d).map(|i| neumaier_sum(atoms.iter().map(|(x, p)| p * x.coords()[i] as f64))).collect();
        let mut covariance = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                covariance[i * d + j] =
                    neumaier_sum(atoms.iter().map(|(x, p)| p * x.coords()[i] as f64 * x.coords()[j] as f64))
                        - mean[i] * mean[j];
            }
        }
        let lookup: BTreeMap<&LatticePoint, f64> = atoms.iter().map(|(x, p)| (x, *p)).collect();
        let symmetric =
            atoms.iter().all(|(x, p)| lookup.get(&x.neg()).is_some_and(|q| (p - q).abs() <= 1e-15 * p.max(*q)));

        let jumps: Vec<i64> = atoms.iter().flat_map(|(x, _)| x.coords().to_vec()).collect();
        let weights: Vec<f64> = atoms.iter().map(|(_, p)| *p).collect();
        let sampler = AliasSampler::new(d, jumps, weights, None);

        Ok(JumpLaw {
            d,
            family,
            atoms,
            tail: None,
            class: LawClass::FiniteVariance,
            covariance: Some(covariance),
            mean,
            symmetric,
            sampler,
        })
    }

    fn build_power_tail(d: usize, beta: f64, hold: f64) -> Result<Self, LawError> {
        check_dim(d)?;
        if !(0.0..1.0).contains(&hold) {
            return Err(LawError::BadHold(hold));
        }
        let tail = PowerTail { beta, hold, zeta_beta: zeta(beta) };
        let class = if beta > 3.0 {
            LawClass::FiniteVariance
        } else if beta == 3.0 {
            LawClass::LType
        } else {
            LawClass::BType
        };
        let covariance = (beta > 3.0).then(|| {
            let var = (1.0 - hold) * zeta(beta - 2.0) / (d as f64 * tail.zeta_beta);
            let mut c = vec![0.0; d * d];
            for i in 0..d {
                c[i * d + i] = var;
            }
            c
        });

        let mut jumps = Vec::new();
        let mut weights = Vec::new();
        if hold > 0.0 {
            jumps.extend(std::iter::repeat(0).take(d));
            weights.push(hold);
        }
        for k in 1..=POWER_TAIL_HEAD {
            let p = tail.atom(d, k);
            for axis in 0..d {
                for sign in [1i64, -1] {
                    let mut v = vec![0i64; d];
                    v[axis] = sign * k as i64;
                    jumps.extend(v);
                    weights.push(p);
                }
            }
        }
        let tail_sampler = PowerTailSampler {
            d,
            beta,
            head_radius: POWER_TAIL_HEAD,
            tail_mass: hurwitz_zeta(beta, POWER_TAIL_HEAD as f64 + 1.0),
        };
        let sampler = AliasSampler::new(d, jumps, weights, Some((tail.tail(POWER_TAIL_HEAD), tail_sampler)));

        Ok(JumpLaw {
            d,
            family: LawFamily::AxisPowerTail,
            atoms: Vec::new(),
            tail: Some(tail),
            class,
            covariance,
            mean: vec![0.0; d],
            symmetric: true,
            sampler,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn family(&self) -> LawFamily {
        self.family
    }

    pub fn class(&self) -> LawClass {
        self.class
    }

    /// Tail exponent of an AxisPowerTail law.
    pub fn beta(&self) -> Option<f64> {
        self.tail.map(|t| t.beta)
    }

    pub fn hold_prob(&self) -> f64 {
        match &self.tail {
            Some(t) => t.hold,
            None => self.prob(&LatticePoint::origin(self.d)),
        }
    }

    /// Covariance matrix in row-major order, when finite.
    pub fn covariance(&self) -> Option<&[f64]> {
        self.covariance.as_deref()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn is_centered(&self) -> bool {
        self.mean.iter().all(|m| m.abs() <= MASS_TOL)
    }

    /// Symmetric under negation; asymmetric laws have no closed-form oracle.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Largest jump norm, `None` for infinite support.
    pub fn support_radius(&self) -> Option<u64> {
        match self.tail {
            Some(_) => None,
            None => self.atoms.iter().map(|(x, _)| x.max_norm()).max(),
        }
    }

    /// Explicit support, empty for infinite-support families.
    pub fn atoms(&self) -> &[(LatticePoint, f64)] {
        &self.atoms
    }

    pub fn prob(&self, jump: &LatticePoint) -> f64 {
        match &self.tail {
            None => self.atoms.binary_search_by(|(x, _)| x.cmp(jump)).map(|i| self.atoms[i].1).unwrap_or(0.0),
            Some(t) => {
                let nonzero: Vec<_> = jump.coords().iter().filter(|&&c| c != 0).collect();
                match nonzero.len() {
                    0 => t.hold,
                    1 => t.atom(self.d, nonzero[0].unsigned_abs()),
                    _ => 0.0,
                }
            }
        }
    }

    /// Atoms with norm at most `radius`, and the probability left outside.
    pub fn atoms_within(&self, radius: u64) -> (Vec<(LatticePoint, f64)>, f64) {
        match &self.tail {
            None => {
                let (inside, outside): (Vec<_>, Vec<_>) =
                    self.atoms.iter().cloned().partition(|(x, _)| x.max_norm() <= radius);
                (inside, outside.iter().map(|(_, p)| p).sum())
            }
            Some(t) => {
                let mut atoms = Vec::new();
                if t.hold > 0.0 {
                    atoms.push((LatticePoint::origin(self.d), t.hold));
                }
                for k in 1..=radius {
                    let p = t.atom(self.d, k);
                    for axis in 0..self.d {
                        atoms.push((LatticePoint::axis(self.d, axis, k as i64), p));
                        atoms.push((LatticePoint::axis(self.d, axis, -(k as i64)), p));
                    }
                }
                (atoms, t.tail(radius))
            }
        }
    }

    /// P(||jump|| > r).
    pub fn tail_prob(&self, r: f64) -> f64 {
        let m = r.floor().max(0.0) as u64;
        match &self.tail {
            None => self.atoms.iter().filter(|(x, _)| x.max_norm() > m).map(|(_, p)| p).sum(),
            Some(t) => t.tail(m),
        }
    }

    /// Truncated second moment L(x) = sum_{||y|| <= x} P(y) ||y||^2.
    pub fn truncated_second_moment(&self, x: f64) -> f64 {
        let m = x.floor().max(0.0) as u64;
        match &self.tail {
            None => neumaier_sum(self.atoms.iter().filter(|(y, _)| y.max_norm() <= m).map(|(y, p)| {
                let n = y.max_norm() as f64;
                p * n * n
            })),
            Some(t) => t.second_moment_upto(m),
        }
    }

    /// Marginal truncated second moment along one axis:
    /// sum_{|y_axis| <= x} P(y) y_axis^2.
    pub fn axis_truncated_second_moment(&self, axis: usize, x: f64) -> f64 {
        let m = x.floor().max(0.0) as u64;
        match &self.tail {
            None => neumaier_sum(
                self.atoms
                    .iter()
                    .filter(|(y, _)| y.coords()[axis].unsigned_abs() <= m)
                    .map(|(y, p)| p * (y.coords()[axis] as f64).powi(2)),
            ),
            Some(t) => t.second_moment_upto(m) / self.d as f64,
        }
    }

    /// sum_{||y|| < r} P(y) y y' in row-major order.
    pub fn truncated_moment_matrix(&self, r: f64) -> Vec<f64> {
        let d = self.d;
        let mut out = vec![0.0; d * d];
        match &self.tail {
            None => {
                for (y, p) in self.atoms.iter().filter(|(y, _)| (y.max_norm() as f64) < r) {
                    for i in 0..d {
                        for j in 0..d {
                            out[i * d + j] += p * y.coords()[i] as f64 * y.coords()[j] as f64;
                        }
                    }
                }
            }
            Some(t) => {
                let m = (r.ceil() as u64).saturating_sub(1);
                let per_axis = t.second_moment_upto(m) / d as f64;
                for i in 0..d {
                    out[i * d + i] = per_axis;
                }
            }
        }
        out
    }

    /// Sum over ||y|| < r of P(y) (t.y)^2 for a direction t.
    pub fn truncated_directional_moment(&self, direction: &[f64], r: f64) -> f64 {
        let m = self.truncated_moment_matrix(r);
        let d = self.d;
        let mut total = 0.0;
        for i in 0..d {
            for j in 0..d {
                total += direction[i] * m[i * d + j] * direction[j];
            }
        }
        total
    }

    /// ε-moments E||J||^ε exist for every ε below this bound.
    pub fn moment_bound(&self) -> f64 {
        match &self.tail {
            None => f64::INFINITY,
            Some(t) => t.beta - 1.0,
        }
    }

    /// Adds one sampled jump to `pos` in place.
    #[inline]
    pub fn sample_into<R: RngCore + ?Sized>(&self, rng: &mut R, pos: &mut [i64]) {
        self.sampler.sample_into(rng, pos)
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> LatticePoint {
        let mut p = LatticePoint::origin(self.d);
        self.sample_into(rng, p.coords_mut());
        p
    }

    /// Serializable description of this law.
    pub fn to_spec(&self) -> LawSpec {
        match (&self.family, &self.tail) {
            (LawFamily::AxisPowerTail, Some(t)) => LawSpec::AxisPowerTail { d: self.d, beta: t.beta, hold: t.hold },
            (LawFamily::ProductLazy, _) => LawSpec::ProductLazy { d: self.d },
            _ => LawSpec::Table {
                entries: self.atoms.iter().map(|(jump, prob)| TableEntry { jump: jump.clone(), prob: *prob }).collect(),
            },
        }
    }
}

fn check_dim(d: usize) -> Result<(), LawError> {
    if (2..=MAX_DIM).contains(&d) {
        Ok(())
    } else {
        Err(LawError::BadDimension(d))
    }
}

/// Compensated summation.
pub(crate) fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(v: &[i64]) -> LatticePoint {
        LatticePoint::from_slice(v)
    }

    #[test]
    fn lazy_srw_covariance() {
        let law = JumpLaw::lazy_srw(2).unwrap();
        let c = law.covariance().unwrap();
        // sum p(x) x_i^2 = 2 * 1/5
        assert!((c[0] - 0.4).abs() < 1e-15);
        assert!((c[3] - 0.4).abs() < 1e-15);
        assert_eq!(c[1], 0.0);
        assert_eq!(law.class(), LawClass::FiniteVariance);
        assert!(law.is_symmetric());
        assert!((law.hold_prob() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn single_axis_law_is_accepted_with_degenerate_covariance() {
        let law = JumpLaw::table(vec![(pt(&[1, 0]), 0.5), (pt(&[-1, 0]), 0.5)]).unwrap();
        assert_eq!(law.covariance().unwrap(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn table_errors() {
        assert!(matches!(JumpLaw::table(vec![(pt(&[1, 0]), 1.0)]), Err(LawError::NonZeroMean(_))));
        assert!(matches!(
            JumpLaw::table(vec![(pt(&[1, 0]), 0.5), (pt(&[-1, 0]), 0.4)]),
            Err(LawError::NotNormalized(_))
        ));
        assert!(matches!(
            JumpLaw::table(vec![(pt(&[1, 0]), 0.5), (pt(&[-1, 0, 0]), 0.5)]),
            Err(LawError::DimensionMismatch { .. })
        ));
        assert!(matches!(JumpLaw::table(vec![(pt(&[1]), 0.5), (pt(&[-1]), 0.5)]), Err(LawError::BadDimension(1))));
        // impurity rows need not be centered
        assert!(JumpLaw::override_table(vec![(pt(&[1, 0]), 1.0)]).is_ok());
    }

    #[test]
    fn asymmetric_centered_table_is_flagged() {
        let law = JumpLaw::table(vec![(pt(&[2, 0]), 1.0 / 3.0), (pt(&[-1, 0]), 2.0 / 3.0)]).unwrap();
        assert!(!law.is_symmetric());
    }

    #[test]
    fn power_tail_classes_and_errors() {
        assert_eq!(JumpLaw::axis_power_tail(2, 3.0, 0.0).unwrap().class(), LawClass::LType);
        assert_eq!(JumpLaw::axis_power_tail(2, 2.5, 0.0).unwrap().class(), LawClass::BType);
        assert_eq!(JumpLaw::axis_power_tail(2, 5.0, 0.0).unwrap().class(), LawClass::FiniteVariance);
        assert!(matches!(JumpLaw::axis_power_tail(2, 1.5, 0.0), Err(LawError::BadExponent { .. })));
        assert!(JumpLaw::override_power_tail(2, 1.5, 0.0).is_ok());
        assert!(matches!(JumpLaw::axis_power_tail(2, 3.0, 1.0), Err(LawError::BadHold(_))));
    }

    #[test]
    fn power_tail_mass_is_normalized() {
        let law = JumpLaw::axis_power_tail(2, 3.0, 0.1).unwrap();
        let (atoms, rest) = law.atoms_within(2000);
        let total = neumaier_sum(atoms.iter().map(|(_, p)| *p)) + rest;
        assert!((total - 1.0).abs() < 1e-12, "{total}");
        assert!((law.prob(&pt(&[0, 0])) - 0.1).abs() < 1e-15);
        assert_eq!(law.prob(&pt(&[1, 1])), 0.0);
    }

    #[test]
    fn beta5_covariance_matches_series() {
        // oracle: direct summation of k^2 * P over both axes
        let law = JumpLaw::axis_power_tail(2, 5.0, 0.0).unwrap();
        let z5: f64 = (1..2_000_000u64).map(|k| (k as f64).powi(-5)).sum();
        let s3: f64 = (1..2_000_000u64).map(|k| (k as f64).powi(-3)).sum();
        // per axis: 2 signs * sum k^2 * k^{-5} / (2 * 2 * zeta(5))
        let want = 2.0 * s3 / (4.0 * z5);
        let c = law.covariance().unwrap();
        assert!((c[0] - want).abs() < 1e-10, "{} vs {want}", c[0]);
        assert_eq!(c[1], 0.0);
    }

    #[test]
    fn ltype_truncated_moment_grows_logarithmically() {
        let law = JumpLaw::axis_power_tail(2, 3.0, 0.0).unwrap();
        // oracle: direct summation of sum_{k<=x} k^2 P over 2 axes x 2 signs
        let z3: f64 = (1..5_000_000u64).map(|k| (k as f64).powi(-3)).sum::<f64>() + 0.5 / 25e12;
        let mut ratios = Vec::new();
        for &x in &[100u64, 1000, 10_000] {
            let direct: f64 = (1..=x).map(|k| 4.0 * (k as f64).powi(2) * (k as f64).powi(-3) / (4.0 * z3)).sum();
            let got = law.truncated_second_moment(x as f64);
            assert!((got - direct).abs() < 1e-10 * direct);
            ratios.push(got / (x as f64).ln());
        }
        for w in ratios.windows(2) {
            assert!(((w[1] - w[0]) / w[0]).abs() < 0.05, "{ratios:?}");
        }
    }

    #[test]
    fn product_lazy_has_half_variance_per_axis() {
        let law = JumpLaw::product_lazy(2).unwrap();
        assert_eq!(law.atoms().len(), 9);
        let c = law.covariance().unwrap();
        assert!((c[0] - 0.5).abs() < 1e-15 && (c[3] - 0.5).abs() < 1e-15);
        assert!(c[1].abs() < 1e-15);
        assert_eq!(law.family(), LawFamily::ProductLazy);
    }
}
