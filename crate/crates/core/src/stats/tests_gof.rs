//! Goodness-of-fit statistics: KS against a continuous cdf, chi-square
//! goodness of fit, homogeneity and independence.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Cells with expected count below this are pooled.
const MIN_EXPECTED: f64 = 5.0;

pub fn normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    Normal::new(mean, sd).expect("positive sd").cdf(x)
}

/// sup_x |F_m(x) - F(x)| for a continuous `cdf`. Ties in the sample are
/// handled by comparing on both sides of each jump of F_m.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let v = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == v {
            j += 1;
        }
        let f = cdf(v);
        d = d.max((i as f64 / m - f).abs()).max((j as f64 / m - f).abs());
        i = j;
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn result(statistic: f64, dof: usize) -> ChiSquareResult {
    let p_value = if dof == 0 { 1.0 } else { ChiSquared::new(dof as f64).expect("dof > 0").sf(statistic) };
    ChiSquareResult { statistic, dof, p_value }
}

/// Observed counts in cells with probabilities `probs` out of `total`
/// draws. Probability not covered by the cells forms one extra cell; cells
/// with expected count below 5 are pooled.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], total: u64) -> ChiSquareResult {
    assert_eq!(observed.len(), probs.len());
    let m = total as f64;
    let mut cells: Vec<(f64, f64)> = observed.iter().zip(probs).map(|(&o, &p)| (o as f64, p * m)).collect();
    let covered: f64 = probs.iter().sum();
    let seen: u64 = observed.iter().sum();
    if covered < 1.0 - 1e-12 || seen < total {
        cells.push(((total - seen) as f64, (1.0 - covered).max(0.0) * m));
    }
    let mut pooled = (0.0, 0.0);
    let mut stat = 0.0;
    let mut k = 0;
    for (o, e) in cells {
        if e < MIN_EXPECTED {
            pooled.0 += o;
            pooled.1 += e;
        } else {
            stat += (o - e).powi(2) / e;
            k += 1;
        }
    }
    if pooled.1 > 0.0 {
        stat += (pooled.0 - pooled.1).powi(2) / pooled.1;
        k += 1;
    } else if pooled.0 > 0.0 {
        // draws in cells of probability zero
        return ChiSquareResult { statistic: f64::INFINITY, dof: k, p_value: 0.0 };
    }
    result(stat, k.saturating_sub(1))
}

/// Pearson test of independence on a contingency table. Empty rows and
/// columns are dropped.
pub fn chi_square_independence(table: &[Vec<u64>]) -> ChiSquareResult {
    let rows: Vec<&Vec<u64>> = table.iter().filter(|r| r.iter().any(|&c| c > 0)).collect();
    if rows.is_empty() {
        return result(0.0, 0);
    }
    let width = rows[0].len();
    let cols: Vec<usize> = (0..width).filter(|&j| rows.iter().any(|r| r[j] > 0)).collect();
    let total: f64 = rows.iter().flat_map(|r| r.iter()).map(|&c| c as f64).sum();
    let row_sums: Vec<f64> = rows.iter().map(|r| r.iter().map(|&c| c as f64).sum()).collect();
    let col_sums: Vec<f64> = cols.iter().map(|&j| rows.iter().map(|r| r[j] as f64).sum()).collect();
    let mut stat = 0.0;
    for (r, rs) in rows.iter().zip(&row_sums) {
        for (&j, cs) in cols.iter().zip(&col_sums) {
            let e = rs * cs / total;
            stat += (r[j] as f64 - e).powi(2) / e;
        }
    }
    result(stat, (rows.len() - 1) * (cols.len().saturating_sub(1)))
}

/// Two-sample test that `a` and `b` (counts over the same cells) come from
/// one distribution. Sparse cells are pooled until each pooled cell has
/// expected count at least 5 in both samples.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> ChiSquareResult {
    assert_eq!(a.len(), b.len());
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let frac = na.min(nb) / (na + nb);
    let mut table = vec![Vec::new(), Vec::new()];
    let (mut pa, mut pb) = (0u64, 0u64);
    for (&x, &y) in a.iter().zip(b) {
        if ((x + y) as f64) * frac >= MIN_EXPECTED {
            table[0].push(x);
            table[1].push(y);
        } else {
            pa += x;
            pb += y;
        }
    }
    if pa + pb > 0 {
        table[0].push(pa);
        table[1].push(pb);
    }
    chi_square_independence(&table)
}
