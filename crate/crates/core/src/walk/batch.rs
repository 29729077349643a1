use rayon::prelude::*;

use super::simulate::{simulate_coupled_trajectory, simulate_trajectory, CoupledSummary, PathSummary};
use super::WalkSpec;

/// Trajectories are folded in blocks of this size; the block layout, not
/// the worker count, fixes the merge order.
pub const BLOCK_SIZE: u64 = 1024;

/// Folds `0..trajectories` block by block (in parallel when `threads != 1`)
/// and merges the block results in index order. The result does not depend
/// on `threads`; `0` means the rayon default.
pub fn deterministic_fold<S, I, F, M>(trajectories: u64, threads: usize, init: I, fold: F, merge: M) -> S
where
    S: Send,
    I: Fn() -> S + Sync,
    F: Fn(S, u64) -> S + Sync,
    M: Fn(S, S) -> S,
{
    let blocks = trajectories.div_ceil(BLOCK_SIZE);
    let block = |b: u64| {
        let lo = b * BLOCK_SIZE;
        let hi = (lo + BLOCK_SIZE).min(trajectories);
        (lo..hi).fold(init(), &fold)
    };
    let parts: Vec<S> = if threads == 1 {
        (0..blocks).map(block).collect()
    } else if threads == 0 {
        (0..blocks).into_par_iter().map(block).collect()
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(|| (0..blocks).into_par_iter().map(block).collect()),
            Err(_) => (0..blocks).map(block).collect(),
        }
    };
    parts.into_iter().fold(init(), merge)
}

/// Summaries of trajectories `0..trajectories`, in index order.
pub fn batch_run(spec: &WalkSpec, trajectories: u64, threads: usize) -> Vec<PathSummary> {
    deterministic_fold(
        trajectories,
        threads,
        Vec::new,
        |mut acc, t| {
            acc.push(simulate_trajectory(spec, t));
            acc
        },
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    )
}

pub fn batch_run_coupled(spec: &WalkSpec, trajectories: u64, threads: usize) -> Vec<CoupledSummary> {
    deterministic_fold(
        trajectories,
        threads,
        Vec::new,
        |mut acc, t| {
            acc.push(simulate_coupled_trajectory(spec, t));
            acc
        },
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    )
}
