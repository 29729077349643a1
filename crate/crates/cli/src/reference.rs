//! Canonical tables for the planar product-lazy walk, whose return
//! probabilities have the closed form u(n) = (C(2n, n) / 4^n)^2.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use perturbwalk_core::oracle::{c_n_partial_sums, product_lazy_returns, survival_by_renewal, CnReport};

use crate::CliError;

pub const REFERENCE_HORIZON: u64 = 20_000;
pub const TABLE_FILE: &str = "product_lazy_d2.csv";
pub const SUMMARY_FILE: &str = "product_lazy_d2.json";

#[derive(Debug, Clone, Serialize)]
pub struct ReferenceSummary {
    pub horizon: u64,
    pub g: f64,
    /// n u(n) at n = 10^4
    pub local_limit_at_1e4: f64,
    /// R(n) g log n at n = 100 and at the horizon
    pub survival_product_at_100: f64,
    pub survival_product_at_horizon: f64,
    pub c_n: CnReport,
}

pub struct ReferenceTables {
    pub csv: String,
    pub summary: ReferenceSummary,
}

/// Columns: n, u(n), R(n) from the renewal recursion, C_n, n u(n), and
/// C_n - log(n) / pi.
pub fn reference_tables(horizon: u64) -> Result<ReferenceTables, CliError> {
    let u = product_lazy_returns(horizon);
    let r = survival_by_renewal(&u, horizon as usize).map_err(|e| CliError::Runtime(e.to_string()))?;
    let cn = c_n_partial_sums(&u);
    let g = 1.0 / PI;
    let mut csv = String::from("n,u,r,c_n,n_u,c_n_minus_log_n_over_pi\n");
    for n in 0..=horizon as usize {
        let nf = n as f64;
        let excess = if n == 0 { String::new() } else { format!("{:.16e}", cn.partial_sums[n] - g * nf.ln()) };
        writeln!(csv, "{n},{:.16e},{:.16e},{:.16e},{:.16e},{excess}", u[n], r[n], cn.partial_sums[n], nf * u[n])
            .unwrap();
    }
    let survival_product = |n: usize| r[n] * g * (n as f64).ln();
    let at = |n: u64| n.min(horizon) as usize;
    let summary = ReferenceSummary {
        horizon,
        g,
        local_limit_at_1e4: 1e4 * u[at(10_000)],
        survival_product_at_100: survival_product(at(100)),
        survival_product_at_horizon: survival_product(horizon as usize),
        c_n: cn,
    };
    Ok(ReferenceTables { csv, summary })
}

pub fn write_reference(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let tables = reference_tables(REFERENCE_HORIZON)?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let table = dir.join(TABLE_FILE);
    let summary = dir.join(SUMMARY_FILE);
    crate::write_file(&table, tables.csv.as_bytes())?;
    let json = serde_json::to_string_pretty(&tables.summary).expect("summary serializes");
    crate::write_file(&summary, json.as_bytes())?;
    Ok(vec![table, summary])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_table_shape() {
        let t = reference_tables(100).unwrap();
        let lines: Vec<&str> = t.csv.lines().collect();
        assert_eq!(lines.len(), 102);
        assert!(lines[1].starts_with("0,1.0000000000000000e0,1.0000000000000000e0,"));
        assert_eq!(t.summary.horizon, 100);
    }
}
