use std::io::Write;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// mean ≈ a + b log n
    Log,
    /// mean ≈ a n^p
    Power,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: &'static str,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub n: u64,
    pub mean: f64,
    pub stderr: f64,
    pub q50: f64,
    pub q90: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub model: FitModel,
    pub coefficients: Vec<Coefficient>,
    pub r_squared: f64,
    pub grid: Vec<GridPoint>,
}

impl FitReport {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

/// Unweighted least squares y = a + b x. Coefficient stderrs propagate the
/// per-point stderrs `se` through the (linear) estimator.
fn linear_fit(x: &[f64], y: &[f64], se: &[f64]) -> (f64, f64, f64, f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let (mut var_a, mut var_b) = (0.0, 0.0);
    for (xi, s) in x.iter().zip(se) {
        let cb = (xi - mx) / sxx;
        let ca = 1.0 / m - mx * cb;
        var_a += ca * ca * s * s;
        var_b += cb * cb * s * s;
    }
    let ssr: f64 = x.iter().zip(y).map(|(xi, yi)| (yi - a - b * xi).powi(2)).sum();
    let sst: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let r2 = if sst > 0.0 {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    } else if ssr == 0.0 {
        1.0
    } else {
        0.0
    };
    (a, var_a.sqrt(), b, var_b.sqrt(), r2)
}

/// Fits mean = a + b log n. Needs at least two distinct n.
pub fn fit_log(grid: &[GridPoint]) -> FitReport {
    let x: Vec<f64> = grid.iter().map(|g| (g.n as f64).ln()).collect();
    let y: Vec<f64> = grid.iter().map(|g| g.mean).collect();
    let se: Vec<f64> = grid.iter().map(|g| g.stderr).collect();
    let (a, sa, b, sb, r2) = linear_fit(&x, &y, &se);
    FitReport {
        model: FitModel::Log,
        coefficients: vec![
            Coefficient { name: "a", value: a, stderr: sa },
            Coefficient { name: "b", value: b, stderr: sb },
        ],
        r_squared: r2,
        grid: grid.to_vec(),
    }
}

/// Fits mean = a n^p on the log-log scale; `None` if some mean is not
/// positive.
pub fn fit_power(grid: &[GridPoint]) -> Option<FitReport> {
    if grid.iter().any(|g| g.mean <= 0.0) {
        return None;
    }
    let x: Vec<f64> = grid.iter().map(|g| (g.n as f64).ln()).collect();
    let y: Vec<f64> = grid.iter().map(|g| g.mean.ln()).collect();
    let se: Vec<f64> = grid.iter().map(|g| g.stderr / g.mean).collect();
    let (ln_a, s_ln_a, p, sp, r2) = linear_fit(&x, &y, &se);
    let a = ln_a.exp();
    Some(FitReport {
        model: FitModel::Power,
        coefficients: vec![
            Coefficient { name: "a", value: a, stderr: a * s_ln_a },
            Coefficient { name: "p", value: p, stderr: sp },
        ],
        r_squared: r2,
        grid: grid.to_vec(),
    })
}

/// `n,mean,stderr,q50,q90`, one row per grid point.
pub fn write_grid_csv<W: Write>(mut w: W, grid: &[GridPoint]) -> std::io::Result<()> {
    let mut out = String::from("n,mean,stderr,q50,q90\n");
    for g in grid {
        out.push_str(&format!("{},{:.16e},{:.16e},{},{}\n", g.n, g.mean, g.stderr, g.q50, g.q90));
    }
    w.write_all(out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(f: impl Fn(f64) -> f64) -> Vec<GridPoint> {
        [10u64, 100, 1000, 10_000]
            .iter()
            .map(|&n| GridPoint { n, mean: f(n as f64), stderr: 0.01, q50: 0.0, q90: 0.0 })
            .collect()
    }

    #[test]
    fn recovers_log_law() {
        let r = fit_log(&grid(|n| 2.0 + 0.5 * n.ln()));
        assert!((r.coefficient("a").unwrap().value - 2.0).abs() < 1e-12);
        assert!((r.coefficient("b").unwrap().value - 0.5).abs() < 1e-12);
        assert_eq!(r.r_squared, 1.0);
        // four points spread over ln n in [2.3, 9.2]: var(b) = 0.01^2 / Sxx
        let sxx = 5.0 * 10f64.ln().powi(2);
        assert!((r.coefficient("b").unwrap().stderr - 0.01 / sxx.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn recovers_power_law() {
        let r = fit_power(&grid(|n| 3.0 * n.powf(0.5))).unwrap();
        assert!((r.coefficient("p").unwrap().value - 0.5).abs() < 1e-12);
        assert!((r.coefficient("a").unwrap().value - 3.0).abs() < 1e-10);
        assert!(fit_power(&grid(|_| 0.0)).is_none());
    }

    #[test]
    fn flat_data_has_full_r2() {
        assert_eq!(fit_log(&grid(|_| 1.0)).r_squared, 1.0);
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        write_grid_csv(&mut buf, &grid(|_| 1.5)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,mean,stderr,q50,q90\n10,1.5000000000000000e0,"));
    }
}
