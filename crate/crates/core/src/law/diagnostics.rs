//! Domain-of-attraction and lattice diagnostics for jump laws.

use serde::Serialize;

use super::{JumpLaw, LawError};
use crate::lattice::LatticePoint;

pub const DEFAULT_DOA_RADII: [f64; 3] = [1e2, 1e3, 1e4];

/// The extrapolated limit of the tail ratio must stay below this fraction
/// of its first value.
const LIMIT_FRACTION: f64 = 0.2;

/// Relative change between the last two radii below which a directional
/// ratio counts as stable.
const DIRECTIONAL_STABILITY: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    First,
    Second,
    Last,
    DiagPlus,
    DiagMinus,
    Ones,
}

impl Direction {
    fn vector(self, d: usize) -> Vec<f64> {
        let mut v = vec![0.0; d];
        match self {
            Direction::First => v[0] = 1.0,
            Direction::Second => v[1] = 1.0,
            Direction::Last => v[d - 1] = 1.0,
            Direction::DiagPlus => {
                v[0] = 1.0;
                v[1] = 1.0;
            }
            Direction::DiagMinus => {
                v[0] = 1.0;
                v[1] = -1.0;
            }
            Direction::Ones => v.iter_mut().for_each(|x| *x = 1.0),
        }
        v
    }
}

/// Probe pairs (t, u) for the directional ratio: axes and diagonals.
pub const DIRECTION_PAIRS: [(Direction, Direction); 8] = [
    (Direction::First, Direction::Second),
    (Direction::Second, Direction::First),
    (Direction::First, Direction::Last),
    (Direction::First, Direction::DiagPlus),
    (Direction::First, Direction::DiagMinus),
    (Direction::DiagPlus, Direction::DiagMinus),
    (Direction::Ones, Direction::First),
    (Direction::Ones, Direction::Second),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioTrend {
    /// identically zero from some radius on (bounded support)
    Vanishing,
    /// decreasing, extrapolates to zero
    DecreasingToZero,
    /// does not tend to zero
    Persistent,
}

#[derive(Debug, Clone, Serialize)]
pub struct DoaReport {
    pub radii: Vec<f64>,
    /// R^2 P(||x|| > R) / sum_{||x|| < R} P(x) ||x||^2
    pub tail_ratio: Vec<f64>,
    /// value of the tail ratio extrapolated to R = infinity along a + b / log R
    pub extrapolated_limit: f64,
    pub tail_trend: RatioTrend,
    /// per probe pair, the directional ratio at each radius
    pub directional_ratios: Vec<Vec<f64>>,
    pub tail_condition: bool,
    pub directional_condition: bool,
    pub in_domain: bool,
}

/// Tracks the two conditions characterising the domain of attraction of a
/// non-degenerate normal law along a sequence of radii.
pub fn domain_of_attraction_check(law: &JumpLaw, radii: &[f64]) -> Result<DoaReport, LawError> {
    if radii.len() < 2 || radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LawError::BadRadii);
    }
    let d = law.dim();
    let r_max = *radii.last().unwrap();
    if is_singular(&law.truncated_moment_matrix(r_max), d) {
        return Err(LawError::DegenerateLaw(r_max));
    }

    let tail_ratio: Vec<f64> = radii
        .iter()
        .map(|&r| {
            let tail = law.tail_prob(r);
            if tail == 0.0 {
                return 0.0;
            }
            let inner = law.truncated_second_moment((r.ceil() - 1.0).max(0.0));
            if inner == 0.0 {
                f64::INFINITY
            } else {
                r * r * tail / inner
            }
        })
        .collect();

    let extrapolated_limit = extrapolate_inverse_log(radii, &tail_ratio);
    let tail_trend = if *tail_ratio.last().unwrap() == 0.0 {
        RatioTrend::Vanishing
    } else if tail_ratio.windows(2).all(|w| w[1] < w[0]) && extrapolated_limit <= LIMIT_FRACTION * tail_ratio[0] {
        RatioTrend::DecreasingToZero
    } else {
        RatioTrend::Persistent
    };
    let tail_condition = tail_trend != RatioTrend::Persistent;

    let directional_ratios: Vec<Vec<f64>> = DIRECTION_PAIRS
        .iter()
        .map(|(t, u)| {
            let (tv, uv) = (t.vector(d), u.vector(d));
            radii
                .iter()
                .map(|&r| law.truncated_directional_moment(&tv, r) / law.truncated_directional_moment(&uv, r))
                .collect()
        })
        .collect();
    let directional_condition = directional_ratios.iter().all(|seq| {
        let n = seq.len();
        let (a, b) = (seq[n - 2], seq[n - 1]);
        a.is_finite() && b.is_finite() && ((b - a) / a).abs() < DIRECTIONAL_STABILITY
    });

    Ok(DoaReport {
        radii: radii.to_vec(),
        tail_ratio,
        extrapolated_limit,
        tail_trend,
        directional_ratios,
        tail_condition,
        directional_condition,
        in_domain: tail_condition && directional_condition,
    })
}

/// Least-squares intercept of y = a + b / ln R.
fn extrapolate_inverse_log(radii: &[f64], y: &[f64]) -> f64 {
    let x: Vec<f64> = radii.iter().map(|r| 1.0 / r.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return my;
    }
    my - (sxy / sxx) * mx
}

fn is_singular(m: &[f64], d: usize) -> bool {
    let trace: f64 = (0..d).map(|i| m[i * d + i]).sum();
    if trace <= 0.0 {
        return true;
    }
    determinant(m, d) / (trace / d as f64).powi(d as i32) < 1e-12
}

fn determinant(m: &[f64], d: usize) -> f64 {
    let mut a = m.to_vec();
    let mut det = 1.0;
    for col in 0..d {
        let pivot = (col..d).max_by(|&i, &j| a[i * d + col].abs().total_cmp(&a[j * d + col].abs())).unwrap();
        if a[pivot * d + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..d {
                a.swap(pivot * d + k, col * d + k);
            }
            det = -det;
        }
        let p = a[col * d + col];
        det *= p;
        for row in col + 1..d {
            let f = a[row * d + col] / p;
            for k in col..d {
                a[row * d + k] -= f * a[col * d + k];
            }
        }
    }
    det
}

/// Index in Z^d of the lattice generated by `generators`, or `None` when
/// they span less than d dimensions. Uses integer row reduction to Hermite
/// form.
pub fn lattice_index(generators: &[LatticePoint], d: usize) -> Option<u128> {
    let mut rows: Vec<Option<Vec<i128>>> = vec![None; d];
    for g in generators {
        let mut v: Vec<i128> = g.coords().iter().map(|&c| c as i128).collect();
        for col in 0..d {
            if v[col] == 0 {
                continue;
            }
            match rows[col].take() {
                None => {
                    rows[col] = Some(v);
                    break;
                }
                Some(r) => {
                    let (g, a, b) = ext_gcd(r[col], v[col]);
                    let (rc, vc) = (r[col] / g, v[col] / g);
                    let new_row: Vec<i128> = r.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
                    let rest: Vec<i128> = r.iter().zip(&v).map(|(x, y)| rc * y - vc * x).collect();
                    rows[col] = Some(new_row);
                    v = rest;
                }
            }
        }
    }
    let mut index: u128 = 1;
    for (col, r) in rows.iter().enumerate() {
        index = index.checked_mul(r.as_ref()?[col].unsigned_abs())?;
    }
    Some(index)
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Whether the differences of support points generate all of Z^d.
///
/// Infinite supports are truncated at the smallest radius whose atoms give
/// d independent differences, plus a margin of 2.
pub fn one_lattice_check(law: &JumpLaw) -> bool {
    let d = law.dim();
    let support: Vec<LatticePoint> = match law.support_radius() {
        Some(_) => law.atoms().iter().map(|(x, _)| x.clone()).collect(),
        None => {
            let mut r = 1;
            loop {
                let (atoms, _) = law.atoms_within(r);
                let pts: Vec<_> = atoms.into_iter().map(|(x, _)| x).collect();
                if lattice_index(&differences(&pts), d).is_some() || r >= 64 {
                    break;
                }
                r += 1;
            }
            law.atoms_within(r + 2).0.into_iter().map(|(x, _)| x).collect()
        }
    };
    if support.len() < d + 1 {
        return false;
    }
    lattice_index(&differences(&support), d) == Some(1)
}

/// x - x0 for all x; these generate the same lattice as all pairwise
/// differences.
fn differences(points: &[LatticePoint]) -> Vec<LatticePoint> {
    match points.first() {
        None => Vec::new(),
        Some(x0) => points[1..].iter().map(|x| x.sub(x0)).collect(),
    }
}
