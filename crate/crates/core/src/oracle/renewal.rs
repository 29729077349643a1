//! Return probabilities, the renewal recursion for the no-return
//! probability, and partial sums of return probabilities.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use super::{Compensated, OracleError};

/// Tolerance for R leaving [0, 1] or increasing.
const RENEWAL_TOL: f64 = 1e-9;

/// Decade growth below this fraction of C_{n/10} counts as bounded.
pub const BOUNDED_DECADE_FRACTION: f64 = 0.05;

/// P_0(X_n = 0) for the d = 2 walk whose coordinates move independently by
/// {-1: 1/4, 0: 1/2, 1: 1/4}: each coordinate is a sum of two fair ±1/2
/// coins, so u(n) = (C(2n, n) / 4^n)^2.
pub fn product_lazy_return(n: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let nf = n as f64;
    let ln_axis = ln_gamma(2.0 * nf + 1.0) - 2.0 * ln_gamma(nf + 1.0) - nf * 4f64.ln();
    (2.0 * ln_axis).exp()
}

pub fn product_lazy_returns(n_max: u64) -> Vec<f64> {
    (0..=n_max).map(product_lazy_return).collect()
}

/// R(0..=n_max) from sum_{k=0}^n u(k) R(n-k) = 1. The input must look like
/// a genuine return sequence: R has to stay in [0, 1] and not increase.
pub fn survival_by_renewal(u: &[f64], n_max: usize) -> Result<Vec<f64>, OracleError> {
    if u.len() <= n_max {
        return Err(OracleError::BadReturnSequence(format!("need {} terms, got {}", n_max + 1, u.len())));
    }
    if (u[0] - 1.0).abs() > 1e-12 {
        return Err(OracleError::BadReturnSequence(format!("u(0) = {}", u[0])));
    }
    if let Some(k) = u.iter().position(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(OracleError::BadReturnSequence(format!("u({k}) = {}", u[k])));
    }
    let mut r = Vec::with_capacity(n_max + 1);
    r.push(1.0);
    for n in 1..=n_max {
        let mut acc = Compensated::default();
        for k in 1..=n {
            acc.add(u[k] * r[n - k]);
        }
        let value = 1.0 - acc.value();
        if !(-RENEWAL_TOL..=1.0 + RENEWAL_TOL).contains(&value) || value > r[n - 1] + RENEWAL_TOL {
            return Err(OracleError::NumericUnderflow { n, value });
        }
        r.push(value);
    }
    Ok(r)
}

/// Exact u(k) up to `splice`, then the local-limit tail g / k^{d/2}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HybridReturns {
    #[serde(skip)]
    pub u: Vec<f64>,
    pub splice: usize,
    pub g: f64,
    pub d: usize,
}

pub fn hybrid_return_sequence(exact: &[f64], g: f64, d: usize, n_max: usize) -> HybridReturns {
    let splice = exact.len().saturating_sub(1).min(n_max);
    let mut u: Vec<f64> = exact[..=splice].to_vec();
    u.extend((splice + 1..=n_max).map(|k| (g / (k as f64).powf(d as f64 / 2.0)).min(1.0)));
    HybridReturns { u, splice, g, d }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    Bounded,
    Logarithmic,
    /// fewer than 10 terms
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CnReport {
    #[serde(skip)]
    pub partial_sums: Vec<f64>,
    pub growth: Growth,
    /// C_n - C_{n/10} at the last n
    pub decade_increment: Option<f64>,
    /// least-squares slope of C_n against log n over the last decade
    pub log_slope: Option<f64>,
}

/// C_n = sum_{k<=n} u(k), with a bounded/logarithmic verdict from the
/// growth over the last decade.
pub fn c_n_partial_sums(u: &[f64]) -> CnReport {
    let mut acc = Compensated::default();
    let partial_sums: Vec<f64> = u
        .iter()
        .map(|&x| {
            acc.add(x);
            acc.value()
        })
        .collect();
    let n = partial_sums.len().saturating_sub(1);
    if n < 10 {
        return CnReport { partial_sums, growth: Growth::Undetermined, decade_increment: None, log_slope: None };
    }
    let lo = n / 10;
    let inc = partial_sums[n] - partial_sums[lo];
    let growth = if inc < BOUNDED_DECADE_FRACTION * partial_sums[lo] { Growth::Bounded } else { Growth::Logarithmic };
    let pts: Vec<(f64, f64)> = (0..=10)
        .map(|i| {
            let k = ((lo as f64) * 10f64.powf(i as f64 / 10.0)).round() as usize;
            let k = k.clamp(lo.max(1), n);
            ((k as f64).ln(), partial_sums[k])
        })
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    CnReport { partial_sums, growth, decade_increment: Some(inc), log_slope: (sxx > 0.0).then(|| sxy / sxx) }
}
