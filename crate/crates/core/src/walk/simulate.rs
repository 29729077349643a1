use serde::Serialize;

use crate::lattice::{max_norm, LatticePoint, MAX_DIM};
use crate::rng::{stream, COUPLING_STREAM, WALK_STREAM};

use super::{RecordMode, WalkSpec, FULL_PATH_MAX_HORIZON};

/// Positions X_0, X_1, ... in lattice units, `d` coordinates per point.
///
/// Holds `horizon + 1` points, followed by whatever was simulated past the
/// horizon to settle the entrance count ν̄ (see [`PathSummary::nu_bar`]).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FullPath {
    pub d: usize,
    pub horizon: u64,
    pub points: Vec<i64>,
}

impl FullPath {
    pub fn len(&self) -> usize {
        self.points.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[i64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    /// X_0..=X_horizon only.
    pub fn within_horizon(&self) -> impl Iterator<Item = &[i64]> {
        self.points.chunks_exact(self.d).take(self.horizon as usize + 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = &[i64]> {
        self.points.chunks_exact(self.d)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathSummary {
    /// X_n
    pub endpoint: LatticePoint,
    /// #{0 <= i <= n : X_i in K_N}
    pub rho: u64,
    /// number of 1-blocks of the indicator sequence up to time n
    pub nu: u64,
    /// #{0 <= i <= n : X_i not in K_N}
    pub outside_steps: u64,
    /// Entrances counted until the walk has spent n+1 steps outside K_N:
    /// blocks starting at j with at most n outside steps before j. The walk
    /// is continued past the horizon to find them. `None` in EndpointOnly
    /// mode.
    pub nu_bar: Option<u64>,
    /// the continuation hit its step cap; `nu_bar` is then a lower bound
    pub nu_bar_censored: bool,
    /// first exit time from K_N, if the start is in K_N and it happens by n
    pub tau: Option<u64>,
    /// S_{K_N} = min{k >= 1 : X_k in K_N}, if <= n
    pub first_hit_kn: Option<u64>,
    /// min{k >= 1 : X_k = 0}, if <= n
    pub first_return_origin: Option<u64>,
    /// max_{i <= n} ||X_i||
    pub max_excursion: u64,
    /// positions at `WalkSpec::probe_times`, in the order given
    pub probes: Vec<LatticePoint>,
    pub path: Option<FullPath>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoupledSummary {
    pub x_endpoint: LatticePoint,
    pub z_endpoint: LatticePoint,
    /// max_{i <= n} ||X_i - Z_i||
    pub sup_distance: u64,
    pub rho: u64,
    /// ||X_{k+1} - X_k|| for the steps taken from inside K_N
    pub impurity_jump_norms: Vec<u64>,
    /// norms of the independent increments Z took at those steps
    pub fresh_increment_norms: Vec<u64>,
}

struct Probes {
    /// (time, slot) sorted by time
    schedule: Vec<(u64, usize)>,
    next: usize,
    out: Vec<LatticePoint>,
}

impl Probes {
    fn new(times: &[u64], horizon: u64) -> Self {
        let mut schedule: Vec<(u64, usize)> =
            times.iter().enumerate().map(|(slot, &t)| (t.min(horizon), slot)).collect();
        schedule.sort_unstable();
        Probes { schedule, next: 0, out: vec![LatticePoint::origin(0); times.len()] }
    }

    #[inline]
    fn record(&mut self, i: u64, x: &[i64]) {
        while self.next < self.schedule.len() && self.schedule[self.next].0 == i {
            self.out[self.schedule[self.next].1] = LatticePoint::from_slice(x);
            self.next += 1;
        }
    }
}

/// One trajectory of the walk in `spec.medium`, using the walk substream of
/// trajectory 0 of `spec.seed`.
pub fn simulate(spec: &WalkSpec) -> PathSummary {
    simulate_trajectory(spec, 0)
}

/// Trajectory `trajectory` of a batch; trajectory 0 is [`simulate`].
pub fn simulate_trajectory(spec: &WalkSpec, trajectory: u64) -> PathSummary {
    let medium = &*spec.medium;
    let base = medium.base();
    let d = medium.dim();
    let cube = medium.n();
    let n = spec.horizon;
    let mut rng = stream(spec.seed, trajectory, WALK_STREAM);

    let mut buf = [0i64; MAX_DIM];
    buf[..d].copy_from_slice(spec.start.coords());
    let x = &mut buf[..d];

    let record_path = spec.record_mode == RecordMode::FullPath && n <= FULL_PATH_MAX_HORIZON;
    let mut path = record_path.then(|| {
        let mut v = Vec::with_capacity((n as usize + 1) * d);
        v.extend_from_slice(x);
        v
    });
    let mut probes = Probes::new(&spec.probe_times, n);
    probes.record(0, x);

    let mut norm = max_norm(x);
    let mut inside = norm <= cube;
    let start_inside = inside;
    let mut rho = inside as u64;
    let mut nu = inside as u64;
    let mut tau = None;
    let mut first_hit_kn = None;
    let mut first_return_origin = None;
    let mut max_excursion = norm;

    for i in 1..=n {
        let law = if inside { medium.law_at(x) } else { base };
        law.sample_into(&mut rng, x);
        norm = max_norm(x);
        let now_inside = norm <= cube;
        if now_inside {
            rho += 1;
            nu += !inside as u64;
            if first_hit_kn.is_none() {
                first_hit_kn = Some(i);
            }
            if norm == 0 && first_return_origin.is_none() {
                first_return_origin = Some(i);
            }
        } else if start_inside && tau.is_none() {
            tau = Some(i);
        }
        max_excursion = max_excursion.max(norm);
        inside = now_inside;
        if let Some(p) = path.as_mut() {
            p.extend_from_slice(x);
        }
        probes.record(i, x);
    }
    let endpoint = LatticePoint::from_slice(x);
    let outside_steps = n + 1 - rho;

    // ν̄: keep walking until the (n+1)-th outside step; every block that
    // starts before it is counted.
    let (nu_bar, nu_bar_censored) = if spec.record_mode == RecordMode::EndpointOnly {
        (None, false)
    } else {
        let mut nu_bar = nu;
        let mut zeros = outside_steps;
        let cap = n.max(1024);
        let mut extra = 0;
        while zeros <= n && extra < cap {
            let law = if inside { medium.law_at(x) } else { base };
            law.sample_into(&mut rng, x);
            extra += 1;
            let now_inside = max_norm(x) <= cube;
            if now_inside {
                nu_bar += !inside as u64;
            } else {
                zeros += 1;
            }
            inside = now_inside;
            if let Some(p) = path.as_mut() {
                p.extend_from_slice(x);
            }
        }
        (Some(nu_bar), zeros <= n)
    };

    PathSummary {
        endpoint,
        rho,
        nu,
        outside_steps,
        nu_bar,
        nu_bar_censored,
        tau,
        first_hit_kn,
        first_return_origin,
        max_excursion,
        probes: probes.out,
        path: path.map(|points| FullPath { d, horizon: n, points }),
    }
}

/// The pair (X, Z): Z repeats X's increment while X is outside K_N and
/// otherwise takes an independent base-law step from the coupling
/// substream. X is driven exactly as in [`simulate`]. Without impurities
/// there is nothing to decouple and Z = X.
pub fn simulate_coupled(spec: &WalkSpec) -> CoupledSummary {
    simulate_coupled_trajectory(spec, 0)
}

pub fn simulate_coupled_trajectory(spec: &WalkSpec, trajectory: u64) -> CoupledSummary {
    let medium = &*spec.medium;
    let base = medium.base();
    let d = medium.dim();
    let cube = medium.n();
    let mut rng_x = stream(spec.seed, trajectory, WALK_STREAM);
    let mut rng_z = stream(spec.seed, trajectory, COUPLING_STREAM);

    let mut xb = [0i64; MAX_DIM];
    let mut zb = [0i64; MAX_DIM];
    xb[..d].copy_from_slice(spec.start.coords());
    zb[..d].copy_from_slice(spec.start.coords());
    let (x, z) = (&mut xb[..d], &mut zb[..d]);

    // with no impurities K_0 = {0} only matters for counting; Z is X
    let perturbed = !medium.impurities().is_empty();
    let mut inside = max_norm(x) <= cube;
    let mut rho = inside as u64;
    let mut sup_distance = 0u64;
    let mut impurity_jump_norms = Vec::new();
    let mut fresh_increment_norms = Vec::new();

    for _ in 0..spec.horizon {
        if inside && perturbed {
            let mut jump = [0i64; MAX_DIM];
            medium.law_at(x).sample_into(&mut rng_x, &mut jump[..d]);
            let mut fresh = [0i64; MAX_DIM];
            base.sample_into(&mut rng_z, &mut fresh[..d]);
            add_assign(x, &jump[..d]);
            add_assign(z, &fresh[..d]);
            impurity_jump_norms.push(max_norm(&jump[..d]));
            fresh_increment_norms.push(max_norm(&fresh[..d]));
            sup_distance = sup_distance.max(distance(x, z));
        } else {
            let mut jump = [0i64; MAX_DIM];
            base.sample_into(&mut rng_x, &mut jump[..d]);
            add_assign(x, &jump[..d]);
            add_assign(z, &jump[..d]);
        }
        inside = max_norm(x) <= cube;
        rho += inside as u64;
    }

    CoupledSummary {
        x_endpoint: LatticePoint::from_slice(x),
        z_endpoint: LatticePoint::from_slice(z),
        sup_distance,
        rho,
        impurity_jump_norms,
        fresh_increment_norms,
    }
}

#[inline]
fn add_assign(x: &mut [i64], v: &[i64]) {
    for (a, b) in x.iter_mut().zip(v) {
        *a = a.saturating_add(*b);
    }
}

#[inline]
fn distance(x: &[i64], z: &[i64]) -> u64 {
    x.iter().zip(z).map(|(a, b)| a.abs_diff(*b)).max().unwrap_or(0)
}
