//! One function per experiment kind. Each returns verdicts, a JSON result
//! block and the CSV body; nothing here touches the filesystem.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use perturbwalk_core::law::{domain_of_attraction_check, JumpLaw, LawSpec, DEFAULT_DOA_RADII};
use perturbwalk_core::oracle::{
    c_n_partial_sums, kn_avoidance, n_step_pmf_medium, product_lazy_return, return_probabilities, survival_by_renewal,
};
use perturbwalk_core::scaling::{compute_scaling, numeric_scaling, ScalingKind, ScalingSequence};
use perturbwalk_core::stats::{
    coupling_distance, entrance_counts, fclt_check, occupation_growth, run_grid, write_grid_csv, EstimatorState,
    FcltOptions, GridPoint, IntMoments,
};
use perturbwalk_core::walk::{
    check_assumptions, deterministic_fold, simulate, simulate_trajectory, AssumptionReport, FullPath, RecordMode,
    WalkSpec,
};

use crate::config::{Experiment, ExperimentConfig};
use crate::CliError;

/// Cells allowed in a default oracle box before a `box_radius` is demanded.
const DEFAULT_BOX_CELLS: u64 = 1 << 22;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub verdicts: BTreeMap<&'static str, bool>,
    pub results: Value,
    pub csv: String,
    /// single FullPath trajectory, written next to the report
    pub path: Option<FullPath>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.verdicts.values().all(|&v| v)
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn config(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

pub fn coord_names(d: usize) -> Vec<String> {
    match d {
        2 => vec!["x".into(), "y".into()],
        3 => vec!["x".into(), "y".into(), "z".into()],
        _ => (1..=d).map(|i| format!("x{i}")).collect(),
    }
}

fn grid_csv(grid: &[GridPoint]) -> String {
    let mut buf = Vec::new();
    write_grid_csv(&mut buf, grid).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}

fn moments(m: &IntMoments) -> Value {
    json!({"mean": m.mean(), "stderr": m.stderr(), "q50": m.quantile(0.5), "q90": m.quantile(0.9)})
}

/// Default oracle box: the farthest a bounded law can carry the walk in
/// `n` steps, if that grid is small enough.
fn box_radius(cfg: &ExperimentConfig, spec: &WalkSpec, n: u64) -> Result<u64, CliError> {
    if let Some(r) = cfg.box_radius {
        return Ok(r);
    }
    let medium = &spec.medium;
    let reach = std::iter::once(medium.base())
        .chain(medium.impurities().iter().map(|(_, l)| l))
        .map(JumpLaw::support_radius)
        .try_fold(0u64, |acc, r| r.map(|r| acc.max(r)));
    let r = reach.map(|reach| spec.start.max_norm() + reach * n);
    match r {
        Some(r) if (2 * r + 1).checked_pow(spec.dim() as u32).is_some_and(|c| c <= DEFAULT_BOX_CELLS) => Ok(r),
        _ => Err(CliError::Config("set `box_radius`: the walk's reach does not fit a default oracle box".into())),
    }
}

pub fn execute(cfg: &ExperimentConfig, threads: usize) -> Result<Outcome, CliError> {
    let spec = cfg.walk.build(cfg.seed()).map_err(config)?;
    match cfg.experiment {
        Experiment::Simulate => simulate_experiment(cfg, &spec, threads),
        Experiment::Couple => couple_experiment(cfg, &spec, threads),
        Experiment::Occupation => occupation_experiment(cfg, &spec, threads),
        Experiment::Entrances => entrances_experiment(cfg, &spec, threads),
        Experiment::Returns => returns_experiment(cfg, &spec),
        Experiment::Survival => survival_experiment(cfg, &spec),
        Experiment::Scaling => scaling_experiment(cfg, &spec),
        Experiment::Fclt => fclt_experiment(cfg, &spec, threads),
        Experiment::Check => Ok(check_experiment(&spec)),
        Experiment::DoaCheck => doa_experiment(cfg, &spec),
    }
}

fn simulate_experiment(cfg: &ExperimentConfig, spec: &WalkSpec, threads: usize) -> Result<Outcome, CliError> {
    let n = cfg.require_horizon()?;
    let trajectories = cfg.trajectories.unwrap_or(1);
    let mut path = None;
    if trajectories == 1 && spec.record_mode == RecordMode::FullPath {
        path = simulate(spec).path;
    }
    let d = spec.dim();
    let state = deterministic_fold(
        trajectories,
        threads,
        || EstimatorState::new(d, true),
        |mut s, t| {
            s.push_path(&simulate_trajectory(spec, t));
            s
        },
        EstimatorState::merge,
    );
    let counts = state.endpoints.clone().unwrap_or_default();
    // the oracle is only run on request: dense evolution is cheap for short
    // horizons and ruinous for long ones
    let exact = match cfg.box_radius {
        Some(r) => Some(n_step_pmf_medium(&spec.medium, &spec.start, n, r).map_err(runtime)?),
        None => None,
    };
    let mut csv = coord_names(d).join(",");
    csv.push_str(if exact.is_some() { ",count,empirical,exact\n" } else { ",count,empirical\n" });
    let mut cells: BTreeSet<_> = counts.keys().cloned().collect();
    if let Some(pmf) = &exact {
        cells.extend(pmf.iter().filter(|(_, p)| *p > 0.0).map(|(x, _)| x));
    }
    for x in cells {
        let c = counts.get(&x).copied().unwrap_or(0);
        for v in x.coords() {
            write!(csv, "{v},").unwrap();
        }
        write!(csv, "{c},{:.16e}", c as f64 / trajectories as f64).unwrap();
        if let Some(pmf) = &exact {
            write!(csv, ",{:.16e}", pmf.get(x.coords())).unwrap();
        }
        csv.push('\n');
    }

    let mut verdicts = BTreeMap::new();
    let tv = exact.as_ref().map(|pmf| pmf.tv_to_counts(&counts));
    if let Some(tv) = tv {
        verdicts.insert("tv_to_oracle", tv < cfg.thresholds.tv_max);
    }
    let results = json!({
        "trajectories": trajectories,
        "horizon": n,
        "rho": moments(&state.rho),
        "nu": moments(&state.nu),
        "nu_bar": if state.nu_bar.count > 0 { moments(&state.nu_bar) } else { Value::Null },
        "nu_bar_censored": state.nu_bar_censored,
        "endpoint_mean": state.endpoint_mean(),
        "endpoint_covariance": if trajectories > 1 { to_value(&state.endpoint_covariance()) } else { Value::Null },
        "tv_to_oracle": tv,
        "oracle_leaked": exact.as_ref().map(|p| p.leaked()),
    });
    Ok(Outcome { verdicts, results, csv, path })
}

fn scaling_for(spec: &WalkSpec) -> Result<ScalingSequence, CliError> {
    compute_scaling(spec.medium.base()).map_err(config)
}

fn couple_experiment(cfg: &ExperimentConfig, spec: &WalkSpec, threads: usize) -> Result<Outcome, CliError> {
    let scaling = scaling_for(spec)?;
    let rep =
        coupling_distance(spec, &scaling, cfg.require_grid()?, cfg.require_trajectories()?, threads, &cfg.thresholds)
            .map_err(runtime)?;
    let verdicts = BTreeMap::from([("vanishing", rep.vanishing)]);
    Ok(Outcome { verdicts, csv: grid_csv(&rep.grid()), results: to_value(&rep), path: None })
}

fn occupation_experiment(cfg: &ExperimentConfig, spec: &WalkSpec, threads: usize) -> Result<Outcome, CliError> {
    let run = run_grid(spec, cfg.require_grid()?, cfg.require_trajectories()?, threads).map_err(runtime)?;
    let rep = occupation_growth(&run, &cfg.thresholds).map_err(runtime)?;
    let verdicts = BTreeMap::from([("log_growth", rep.log_growth)]);
    Ok(Outcome { verdicts, csv: grid_csv(&rep.log_fit.grid), results: to_value(&rep), path: None })
}

fn entrances_experiment(cfg: &ExperimentConfig, spec: &WalkSpec, threads: usize) -> Result<Outcome, CliError> {
    let run = run_grid(spec, cfg.require_grid()?, cfg.require_trajectories()?, threads).map_err(runtime)?;
    let rep = entrance_counts(&run, &cfg.thresholds).map_err(runtime)?;
    let verdicts = BTreeMap::from([("nu_bar_log_growth", rep.nu_bar.log_growth), ("ordering", rep.ordering_holds)]);
    let mut csv = String::from("statistic,n,mean,stderr,q50,q90\n");
    for (name, grid) in [("nu", &rep.nu.log_fit.grid), ("nu_bar", &rep.nu_bar.log_fit.grid)] {
        for line in grid_csv(grid).lines().skip(1) {
            writeln!(csv, "{name},{line}").unwrap();
        }
    }
    Ok(Outcome { verdicts, csv, results: to_value(&rep), path: None })
}

fn require_unperturbed(spec: &WalkSpec, what: &str) -> Result<(), CliError> {
    if spec.medium.impurities().is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{what} is computed for the unperturbed walk; remove the impurities")))
    }
}

/// u(0..=n) for the base law: closed form for the planar product-lazy
/// walk, dense evolution otherwise.
fn base_returns(cfg: &ExperimentConfig, spec: &WalkSpec, n: u64) -> Result<(Vec<f64>, &'static str), CliError> {
    if matches!(cfg.walk.base, LawSpec::ProductLazy { d: 2 }) && cfg.box_radius.is_none() {
        return Ok(((0..=n).map(product_lazy_return).collect(), "closed_form"));
    }
    let r = box_radius(cfg, spec, n)?;
    Ok((return_probabilities(spec.medium.base(), n, r).map_err(runtime)?, "dense"))
}

fn returns_experiment(cfg: &ExperimentConfig, spec: &WalkSpec) -> Result<Outcome, CliError> {
    require_unperturbed(spec, "returns")?;
    let n = cfg.require_horizon()?;
    let (u, method) = base_returns(cfg, spec, n)?;
    let renewal = survival_by_renewal(&u, n as usize);
    let cn = c_n_partial_sums(&u);
    let mut csv = String::from("n,u,c_n,r\n");
    for k in 0..=n as usize {
        let r = renewal.as_ref().map(|r| format!("{:.16e}", r[k])).unwrap_or_default();
        writeln!(csv, "{k},{:.16e},{:.16e},{r}", u[k], cn.partial_sums[k]).unwrap();
    }
    let verdicts = BTreeMap::from([("renewal_consistent", renewal.is_ok())]);
    let results = json!({
        "method": method,
        "horizon": n,
        "c_n": cn,
        "n_u_n": n as f64 * u[n as usize],
        "renewal_error": renewal.as_ref().err().map(|e| e.to_string()),
    });
    Ok(Outcome { verdicts, results, csv, path: None })
}

fn survival_experiment(cfg: &ExperimentConfig, spec: &WalkSpec) -> Result<Outcome, CliError> {
    let n = cfg.require_horizon()?;
    let r = box_radius(cfg, spec, n)?;
    let taboo = kn_avoidance(&spec.medium, &spec.start, n, r).map_err(runtime)?;
    // the renewal route only covers unperturbed returns to the origin
    let renewal = if spec.medium.impurities().is_empty() && spec.start.is_origin() {
        let u = return_probabilities(spec.medium.base(), n, r).map_err(runtime)?;
        Some(survival_by_renewal(&u, n as usize).map_err(runtime)?)
    } else {
        None
    };
    let mut csv = String::from(if renewal.is_some() { "n,taboo,renewal\n" } else { "n,taboo\n" });
    for k in 0..=n as usize {
        write!(csv, "{k},{:.16e}", taboo.survival[k]).unwrap();
        if let Some(rv) = &renewal {
            write!(csv, ",{:.16e}", rv[k]).unwrap();
        }
        csv.push('\n');
    }
    let mut verdicts = BTreeMap::new();
    let max_diff =
        renewal.as_ref().map(|rv| rv.iter().zip(&taboo.survival).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    if let Some(diff) = max_diff {
        verdicts.insert("oracle_agreement", diff <= cfg.thresholds.oracle_agreement);
    }
    let results = json!({
        "horizon": n,
        "box_radius": r,
        "leaked": taboo.leaked,
        "survival_at_horizon": taboo.survival[n as usize],
        "max_abs_difference": max_diff,
    });
    Ok(Outcome { verdicts, results, csv, path: None })
}

const DEFAULT_SCALING_GRID: [u64; 5] = [100, 1_000, 10_000, 100_000, 1_000_000];

fn scaling_experiment(cfg: &ExperimentConfig, spec: &WalkSpec) -> Result<Outcome, CliError> {
    let base = spec.medium.base();
    let grid = cfg.grid.clone().unwrap_or_else(|| DEFAULT_SCALING_GRID.to_vec());
    let numeric = numeric_scaling(base);
    let closed = compute_scaling(base).ok();
    let sqrt_nlogn = |n: u64| ((n as f64) * (n as f64).ln()).sqrt();
    let mut csv = String::from("n,b_n,residual_ratio,iterations,closed_form,b_over_sqrt_n_log_n\n");
    let mut rows = Vec::new();
    for &n in &grid {
        let s = numeric.solve(n);
        let cf = closed.as_ref().map(|c| c.b(n));
        writeln!(
            csv,
            "{n},{:.16e},{:.16e},{},{},{:.16e}",
            s.b,
            s.residual_ratio,
            s.iterations,
            cf.map(|v| format!("{v:.16e}")).unwrap_or_default(),
            s.b / sqrt_nlogn(n)
        )
        .unwrap();
        rows.push(s);
    }
    let t = &cfg.thresholds;
    let mut verdicts = BTreeMap::new();
    verdicts.insert("residual", rows.iter().all(|s| (s.residual_ratio - 1.0).abs() <= t.scaling_residual));
    let drift =
        (closed.as_ref().map(ScalingSequence::kind) == Some(ScalingKind::LType) && rows.len() >= 2).then(|| {
            let [a, b] = [&rows[rows.len() - 2], &rows[rows.len() - 1]];
            (b.b / sqrt_nlogn(b.n)) / (a.b / sqrt_nlogn(a.n)) - 1.0
        });
    if let Some(drift) = drift {
        verdicts.insert("drift", drift.abs() < t.scaling_drift_max);
    }
    let results = json!({
        "kind": closed.as_ref().map(ScalingSequence::kind),
        "c": closed.as_ref().and_then(ScalingSequence::c_constant),
        "solutions": rows,
        "final_decade_drift": drift,
    });
    Ok(Outcome { verdicts, results, csv, path: None })
}

fn fclt_experiment(cfg: &ExperimentConfig, spec: &WalkSpec, threads: usize) -> Result<Outcome, CliError> {
    let n = cfg.require_horizon()?;
    let scaling = scaling_for(spec)?;
    let t = &cfg.thresholds;
    let perturbed = !spec.medium.impurities().is_empty();
    let expected_covariance = match scaling.kind() {
        ScalingKind::Diffusive => spec.medium.base().covariance().map(<[f64]>::to_vec),
        _ => None,
    };
    let opts = FcltOptions {
        probes: cfg.probes.clone().unwrap_or_else(|| vec![1.0]),
        expected_covariance,
        covariance_tol: if perturbed { t.covariance_rel_tol_perturbed } else { t.covariance_rel_tol },
        ks_max: if scaling.kind() == ScalingKind::LType { t.ks_ltype_max } else { t.ks_max },
        independence_p_min: t.independence_p_min,
        variance: cfg.variance,
    };
    let rep = fclt_check(spec, &scaling, n, cfg.require_trajectories()?, threads, &opts).map_err(runtime)?;
    let mut verdicts = BTreeMap::from([("ks", rep.ks_pass)]);
    if let Some(c) = rep.covariance_pass {
        verdicts.insert("covariance", c);
    }
    if !rep.independence.is_empty() {
        verdicts.insert("independence", rep.independence_pass);
    }
    let d = spec.dim();
    let mut csv = String::from("t,axis,ks,reference_variance,sigma_hat\n");
    for p in &rep.probes {
        for i in 0..d {
            writeln!(
                csv,
                "{},{i},{:.16e},{:.16e},{:.16e}",
                p.t,
                p.ks[i],
                p.reference_variance[i],
                p.sigma_hat[i * d + i]
            )
            .unwrap();
        }
    }
    let results = json!({"scaling": scaling.kind(), "options": opts, "report": rep});
    Ok(Outcome { verdicts, results, csv, path: None })
}

pub fn assumptions(spec: &WalkSpec) -> AssumptionReport {
    check_assumptions(spec)
}

fn check_experiment(spec: &WalkSpec) -> Outcome {
    let rep = check_assumptions(spec);
    let mut csv = String::from("check,passed\n");
    let failures = rep.failures();
    for name in ["strong connectivity", "epsilon-moment", "aperiodicity"] {
        writeln!(csv, "{name},{}", !failures.iter().any(|f| f.starts_with(name))).unwrap();
    }
    Outcome {
        verdicts: BTreeMap::from([("assumptions", rep.passed())]),
        results: json!({"assumptions": rep, "failures": failures}),
        csv,
        path: None,
    }
}

fn doa_experiment(cfg: &ExperimentConfig, spec: &WalkSpec) -> Result<Outcome, CliError> {
    let radii = cfg.radii.clone().unwrap_or_else(|| DEFAULT_DOA_RADII.to_vec());
    let rep = domain_of_attraction_check(spec.medium.base(), &radii).map_err(config)?;
    let mut csv = String::from("r,tail_ratio\n");
    for (r, v) in rep.radii.iter().zip(&rep.tail_ratio) {
        writeln!(csv, "{r},{v:.16e}").unwrap();
    }
    let verdicts = BTreeMap::from([("in_domain", rep.in_domain)]);
    Ok(Outcome { verdicts, results: to_value(&rep), csv, path: None })
}
