//! Finite-n checks of the functional CLT: covariance of the scaled walk,
//! per-axis normality, and independence of increments over disjoint
//! time windows.

use serde::Serialize;

use super::tests_gof::{chi_square_independence, ks_statistic, normal_cdf};
use super::{relative_frobenius, StatsError};
use crate::lattice::LatticePoint;
use crate::scaling::ScalingSequence;
use crate::walk::{deterministic_fold, simulate_trajectory, RecordMode, WalkSpec};

pub const MIN_FCLT_TRAJECTORIES: u64 = 1000;

/// How the variance of the normal reference in the KS test is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceEstimator {
    /// sample variance
    #[default]
    Sample,
    /// (IQR / 1.349)², insensitive to the rare huge jumps of heavy tails
    Iqr,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FcltOptions {
    pub probes: Vec<f64>,
    /// covariance of the limit at t = 1, row-major; compared to Σ̂(t)/t
    pub expected_covariance: Option<Vec<f64>>,
    pub covariance_tol: f64,
    pub ks_max: f64,
    pub independence_p_min: f64,
    pub variance: VarianceEstimator,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub t: f64,
    pub step: u64,
    /// Σ̂(t)/t, row-major
    pub sigma_hat: Vec<f64>,
    /// standard errors of the entries of `sigma_hat`
    pub sigma_stderr: Vec<f64>,
    pub covariance_error: Option<f64>,
    /// variance of the normal reference, per axis
    pub reference_variance: Vec<f64>,
    pub ks: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceTest {
    pub from: f64,
    pub to: f64,
    pub axis: usize,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FcltReport {
    pub n: u64,
    pub b_n: Vec<f64>,
    pub trajectories: u64,
    pub probes: Vec<ProbeReport>,
    pub independence: Vec<IndependenceTest>,
    pub ks_pass: bool,
    pub covariance_pass: Option<bool>,
    pub independence_pass: bool,
    pub passed: bool,
}

impl FcltReport {
    pub fn max_ks(&self) -> f64 {
        self.probes.iter().flat_map(|p| p.ks.iter().copied()).fold(0.0, f64::max)
    }
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let idx = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}

/// Determinant by Gaussian elimination with partial pivoting.
fn determinant(mut a: Vec<f64>, d: usize) -> f64 {
    let mut det = 1.0;
    for c in 0..d {
        let p = (c..d).max_by(|&i, &j| a[i * d + c].abs().total_cmp(&a[j * d + c].abs())).expect("nonempty");
        if a[p * d + c] == 0.0 {
            return 0.0;
        }
        if p != c {
            for k in 0..d {
                a.swap(p * d + k, c * d + k);
            }
            det = -det;
        }
        det *= a[c * d + c];
        for r in c + 1..d {
            let f = a[r * d + c] / a[c * d + c];
            for k in c..d {
                a[r * d + k] -= f * a[c * d + k];
            }
        }
    }
    det
}

/// Quartile bin of each value: 0..=3 by comparison with the sample
/// quartiles. Ties on a lattice can leave bins empty; the independence
/// test drops those.
fn quartile_bins(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let cuts = [quantile_sorted(&sorted, 0.25), quantile_sorted(&sorted, 0.5), quantile_sorted(&sorted, 0.75)];
    values.iter().map(|v| cuts.iter().filter(|&&c| *v > c).count()).collect()
}

pub fn fclt_check(
    spec: &WalkSpec,
    scaling: &ScalingSequence,
    n: u64,
    trajectories: u64,
    threads: usize,
    opts: &FcltOptions,
) -> Result<FcltReport, StatsError> {
    if trajectories < MIN_FCLT_TRAJECTORIES {
        return Err(StatsError::TooFewTrajectories { needed: MIN_FCLT_TRAJECTORIES, got: trajectories });
    }
    if let Some(&t) = opts.probes.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
        return Err(StatsError::BadProbe(t));
    }
    let d = spec.dim();
    let steps: Vec<u64> = opts.probes.iter().map(|&t| ((n as f64 * t).floor() as u64).max(1)).collect();
    let mut run = spec.with_horizon(n).with_probes(steps.clone());
    run.record_mode = RecordMode::EndpointOnly;
    let probes: Vec<Vec<LatticePoint>> = deterministic_fold(
        trajectories,
        threads,
        Vec::new,
        |mut acc, t| {
            acc.push(simulate_trajectory(&run, t).probes);
            acc
        },
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    );
    let b_n: Vec<f64> = (0..d).map(|i| scaling.axis_b(n, i)).collect();
    let start = spec.start.coords();
    let m = trajectories as f64;

    // scaled displacement from the start at each probe: [probe][traj][axis]
    let scaled: Vec<Vec<Vec<f64>>> = (0..steps.len())
        .map(|j| {
            probes.iter().map(|p| (0..d).map(|i| (p[j].coords()[i] - start[i]) as f64 / b_n[i]).collect()).collect()
        })
        .collect();

    let mut reports = Vec::new();
    for (j, &t) in opts.probes.iter().enumerate() {
        let xs = &scaled[j];
        let mean: Vec<f64> = (0..d).map(|i| xs.iter().map(|x| x[i]).sum::<f64>() / m).collect();
        let mut sigma = vec![0.0; d * d];
        let mut sigma_stderr = vec![0.0; d * d];
        for a in 0..d {
            for b in 0..d {
                let prods: Vec<f64> = xs.iter().map(|x| (x[a] - mean[a]) * (x[b] - mean[b])).collect();
                let s = prods.iter().sum::<f64>() / (m - 1.0);
                let var = prods.iter().map(|p| (p - s).powi(2)).sum::<f64>() / (m - 1.0);
                sigma[a * d + b] = s / t;
                sigma_stderr[a * d + b] = (var / m).sqrt() / t;
            }
        }
        let scale = (0..d).map(|i| sigma[i * d + i]).product::<f64>();
        if !(scale > 0.0) || determinant(sigma.clone(), d) / scale < 1e-10 {
            return Err(StatsError::DegenerateCovariance);
        }
        let mut reference_variance = Vec::with_capacity(d);
        let mut ks = Vec::with_capacity(d);
        for i in 0..d {
            let axis: Vec<f64> = xs.iter().map(|x| x[i]).collect();
            let var = match opts.variance {
                VarianceEstimator::Sample => sigma[i * d + i] * t,
                VarianceEstimator::Iqr => {
                    let mut sorted = axis.clone();
                    sorted.sort_by(f64::total_cmp);
                    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
                    (iqr / 1.348_979_500_392_163).powi(2)
                }
            };
            if !(var > 0.0) {
                return Err(StatsError::DegenerateCovariance);
            }
            let sd = var.sqrt();
            ks.push(ks_statistic(&axis, |x| normal_cdf(x, 0.0, sd)));
            reference_variance.push(var);
        }
        let covariance_error = opts.expected_covariance.as_ref().map(|e| relative_frobenius(&sigma, e));
        reports.push(ProbeReport {
            t,
            step: steps[j],
            sigma_hat: sigma,
            sigma_stderr,
            covariance_error,
            reference_variance,
            ks,
        });
    }

    // increments over (0, t_1], (t_1, t_2], ... tested pairwise for
    // consecutive windows
    let mut order: Vec<usize> = (0..steps.len()).collect();
    order.sort_by_key(|&j| steps[j]);
    let mut independence = Vec::new();
    for w in order.windows(2) {
        let (j1, j2) = (w[0], w[1]);
        if steps[j1] == steps[j2] {
            continue;
        }
        for axis in 0..d {
            let first: Vec<f64> = scaled[j1].iter().map(|x| x[axis]).collect();
            let second: Vec<f64> = scaled[j2].iter().zip(&scaled[j1]).map(|(b, a)| b[axis] - a[axis]).collect();
            let mut table = vec![vec![0u64; 4]; 4];
            for (r, c) in quartile_bins(&first).into_iter().zip(quartile_bins(&second)) {
                table[r][c] += 1;
            }
            let res = chi_square_independence(&table);
            independence.push(IndependenceTest {
                from: opts.probes[j1],
                to: opts.probes[j2],
                axis,
                statistic: res.statistic,
                dof: res.dof,
                p_value: res.p_value,
            });
        }
    }

    let ks_pass = reports.iter().all(|r| r.ks.iter().all(|&k| k < opts.ks_max));
    let covariance_pass = opts
        .expected_covariance
        .as_ref()
        .map(|_| reports.iter().all(|r| r.covariance_error.unwrap() < opts.covariance_tol));
    let independence_pass = independence.iter().all(|r| r.p_value > opts.independence_p_min);
    Ok(FcltReport {
        n,
        b_n,
        trajectories,
        probes: reports,
        independence,
        ks_pass,
        covariance_pass,
        independence_pass,
        passed: ks_pass && covariance_pass.unwrap_or(true) && independence_pass,
    })
}
