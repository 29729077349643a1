use std::collections::BTreeMap;

use serde::Serialize;

use crate::lattice::LatticePoint;
use crate::walk::{CoupledSummary, PathSummary};

/// Count, sum, sum of squares and histogram of a nonnegative integer
/// statistic. Everything is integer, so merging is exact.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IntMoments {
    pub count: u64,
    pub sum: u128,
    pub sum_sq: u128,
    pub hist: BTreeMap<u64, u64>,
}

impl IntMoments {
    pub fn push(&mut self, v: u64) {
        self.count += 1;
        self.sum = self.sum.saturating_add(v as u128);
        self.sum_sq = self.sum_sq.saturating_add(v as u128 * v as u128);
        *self.hist.entry(v).or_default() += 1;
    }

    pub fn merge(&mut self, other: &IntMoments) {
        self.count += other.count;
        self.sum = self.sum.saturating_add(other.sum);
        self.sum_sq = self.sum_sq.saturating_add(other.sum_sq);
        for (&v, &c) in &other.hist {
            *self.hist.entry(v).or_default() += c;
        }
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        self.sum as f64 / self.count as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        let n = self.count as f64;
        // n * sum_sq - sum^2 in exact arithmetic where it fits
        let centered = match (self.sum_sq.checked_mul(self.count as u128), self.sum.checked_mul(self.sum)) {
            (Some(a), Some(b)) => a.saturating_sub(b) as f64 / n,
            _ => (self.sum_sq as f64 - (self.sum as f64).powi(2) / n).max(0.0),
        };
        centered / (n - 1.0)
    }

    pub fn stderr(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }

    /// Smallest value v with P(X <= v) >= q.
    pub fn quantile(&self, q: f64) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        let target = ((q * self.count as f64).ceil() as u64).clamp(1, self.count);
        let mut cum = 0;
        for (&v, &c) in &self.hist {
            cum += c;
            if cum >= target {
                return v as f64;
            }
        }
        unreachable!("histogram counts add up to count")
    }
}

/// Mergeable accumulator over trajectory summaries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EstimatorState {
    pub d: usize,
    pub count: u64,
    pub rho: IntMoments,
    pub nu: IntMoments,
    pub nu_bar: IntMoments,
    pub nu_bar_censored: u64,
    pub sup_distance: IntMoments,
    /// sum of endpoint coordinates
    pub endpoint_sum: Vec<i128>,
    /// sum of x_i x_j, row-major d x d
    pub endpoint_cross: Vec<i128>,
    /// endpoint frequencies (X for paths, X for coupled pairs)
    pub endpoints: Option<BTreeMap<LatticePoint, u64>>,
    /// Z endpoint frequencies of coupled pairs
    pub z_endpoints: Option<BTreeMap<LatticePoint, u64>>,
}

impl EstimatorState {
    pub fn new(d: usize, track_endpoints: bool) -> Self {
        EstimatorState {
            d,
            count: 0,
            rho: IntMoments::default(),
            nu: IntMoments::default(),
            nu_bar: IntMoments::default(),
            nu_bar_censored: 0,
            sup_distance: IntMoments::default(),
            endpoint_sum: vec![0; d],
            endpoint_cross: vec![0; d * d],
            endpoints: track_endpoints.then(BTreeMap::new),
            z_endpoints: None,
        }
    }

    pub fn with_z_endpoints(mut self) -> Self {
        self.z_endpoints = Some(BTreeMap::new());
        self
    }

    fn push_endpoint(&mut self, x: &LatticePoint) {
        let c = x.coords();
        for i in 0..self.d {
            self.endpoint_sum[i] = self.endpoint_sum[i].saturating_add(c[i] as i128);
            for j in 0..self.d {
                let k = i * self.d + j;
                self.endpoint_cross[k] = self.endpoint_cross[k].saturating_add(c[i] as i128 * c[j] as i128);
            }
        }
        if let Some(h) = self.endpoints.as_mut() {
            *h.entry(x.clone()).or_default() += 1;
        }
    }

    pub fn push_path(&mut self, s: &PathSummary) {
        self.count += 1;
        self.rho.push(s.rho);
        self.nu.push(s.nu);
        if let Some(nb) = s.nu_bar {
            self.nu_bar.push(nb);
            self.nu_bar_censored += s.nu_bar_censored as u64;
        }
        self.push_endpoint(&s.endpoint);
    }

    pub fn push_coupled(&mut self, s: &CoupledSummary) {
        self.count += 1;
        self.rho.push(s.rho);
        self.sup_distance.push(s.sup_distance);
        self.push_endpoint(&s.x_endpoint);
        if let Some(h) = self.z_endpoints.as_mut() {
            *h.entry(s.z_endpoint.clone()).or_default() += 1;
        }
    }

    /// Combines two states; commutative and associative.
    pub fn merge(mut self, other: EstimatorState) -> EstimatorState {
        assert_eq!(self.d, other.d);
        self.count += other.count;
        self.rho.merge(&other.rho);
        self.nu.merge(&other.nu);
        self.nu_bar.merge(&other.nu_bar);
        self.nu_bar_censored += other.nu_bar_censored;
        self.sup_distance.merge(&other.sup_distance);
        for (a, b) in self.endpoint_sum.iter_mut().zip(&other.endpoint_sum) {
            *a = a.saturating_add(*b);
        }
        for (a, b) in self.endpoint_cross.iter_mut().zip(&other.endpoint_cross) {
            *a = a.saturating_add(*b);
        }
        for (mine, theirs) in [(&mut self.endpoints, &other.endpoints), (&mut self.z_endpoints, &other.z_endpoints)] {
            match (mine.as_mut(), theirs) {
                (Some(h), Some(o)) => {
                    for (x, c) in o {
                        *h.entry(x.clone()).or_default() += c;
                    }
                }
                (None, Some(o)) => *mine = Some(o.clone()),
                _ => {}
            }
        }
        self
    }

    pub fn endpoint_mean(&self) -> Vec<f64> {
        self.endpoint_sum.iter().map(|&s| s as f64 / self.count as f64).collect()
    }

    /// Unbiased endpoint covariance, row-major.
    pub fn endpoint_covariance(&self) -> Vec<f64> {
        let n = self.count as f64;
        let mut out = vec![0.0; self.d * self.d];
        for i in 0..self.d {
            for j in 0..self.d {
                let k = i * self.d + j;
                let si = self.endpoint_sum[i] as f64;
                let sj = self.endpoint_sum[j] as f64;
                out[k] = (self.endpoint_cross[k] as f64 - si * sj / n) / (n - 1.0);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn summary(rho: u64, nu: u64, end: [i64; 2]) -> PathSummary {
        PathSummary {
            endpoint: LatticePoint::from(end),
            rho,
            nu,
            outside_steps: 0,
            nu_bar: Some(nu + 1),
            nu_bar_censored: false,
            tau: None,
            first_hit_kn: None,
            first_return_origin: None,
            max_excursion: 0,
            probes: vec![],
            path: None,
        }
    }

    #[test]
    fn moments_and_quantiles() {
        let mut m = IntMoments::default();
        for v in [1, 2, 3, 4, 10] {
            m.push(v);
        }
        assert_eq!(m.mean(), 4.0);
        assert!((m.variance() - 12.5).abs() < 1e-12);
        assert_eq!(m.quantile(0.5), 3.0);
        assert_eq!(m.quantile(0.9), 10.0);
        assert_eq!(m.quantile(0.0), 1.0);
    }

    #[test]
    fn covariance_of_known_points() {
        let mut s = EstimatorState::new(2, true);
        for e in [[1, 0], [-1, 0], [0, 1], [0, -1]] {
            s.push_path(&summary(0, 0, e));
        }
        let c = s.endpoint_covariance();
        assert!((c[0] - 2.0 / 3.0).abs() < 1e-12 && c[1].abs() < 1e-12 && (c[3] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.endpoints.as_ref().unwrap().len(), 4);
    }

    proptest! {
        #[test]
        fn merge_is_commutative_and_associative(
            xs in proptest::collection::vec((0u64..50, 0u64..5, -20i64..20, -20i64..20), 0..60),
            cut1 in 0usize..60,
            cut2 in 0usize..60,
        ) {
            let (c1, c2) = (cut1.min(xs.len()), cut2.min(xs.len()));
            let (lo, hi) = (c1.min(c2), c1.max(c2));
            let fill = |part: &[(u64, u64, i64, i64)]| {
                let mut s = EstimatorState::new(2, true);
                for &(r, n, a, b) in part {
                    s.push_path(&summary(r, n.min(r), [a, b]));
                }
                s
            };
            let whole = fill(&xs);
            let (a, b, c) = (fill(&xs[..lo]), fill(&xs[lo..hi]), fill(&xs[hi..]));
            let left = a.clone().merge(b.clone()).merge(c.clone());
            let right = a.clone().merge(b.clone().merge(c.clone()));
            let swapped = c.merge(b).merge(a);
            prop_assert_eq!(&left, &whole);
            prop_assert_eq!(&right, &whole);
            prop_assert_eq!(&swapped, &whole);
            if whole.count >= 2 {
                prop_assert!(whole.rho.variance() >= 0.0);
            }
        }
    }
}
