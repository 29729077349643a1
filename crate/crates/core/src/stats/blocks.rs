use serde::Serialize;

use crate::lattice::max_norm;
use crate::walk::FullPath;

/// A maximal run of consecutive indices on one side of K_N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Block {
    pub inside: bool,
    pub start: u64,
    pub len: u64,
}

/// The 0/1 indicator sequence of X_0..=X_n in K_N, split into runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockDecomposition {
    pub blocks: Vec<Block>,
}

impl BlockDecomposition {
    /// Lengths ξ_i of the inside blocks.
    pub fn inside_lengths(&self) -> Vec<u64> {
        self.blocks.iter().filter(|b| b.inside).map(|b| b.len).collect()
    }

    /// Lengths η_i of the outside blocks.
    pub fn outside_lengths(&self) -> Vec<u64> {
        self.blocks.iter().filter(|b| !b.inside).map(|b| b.len).collect()
    }

    /// (η_i, ξ_i): each inside block with the outside run before it (0 if
    /// the path starts inside). A trailing outside run is not included.
    pub fn pairs(&self) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        let mut eta = 0;
        for b in &self.blocks {
            if b.inside {
                out.push((eta, b.len));
                eta = 0;
            } else {
                eta = b.len;
            }
        }
        out
    }

    pub fn rho(&self) -> u64 {
        self.inside_lengths().iter().sum()
    }

    pub fn entrances(&self) -> u64 {
        self.blocks.iter().filter(|b| b.inside).count() as u64
    }
}

fn runs<'a>(points: impl Iterator<Item = &'a [i64]>, cube: u64) -> Vec<Block> {
    let mut blocks: Vec<Block> = Vec::new();
    for (i, x) in points.enumerate() {
        let inside = max_norm(x) <= cube;
        match blocks.last_mut() {
            Some(b) if b.inside == inside => b.len += 1,
            _ => blocks.push(Block { inside, start: i as u64, len: 1 }),
        }
    }
    blocks
}

/// Runs of X_0..=X_horizon inside and outside the cube of radius `cube`.
pub fn block_decomposition(path: &FullPath, cube: u64) -> BlockDecomposition {
    BlockDecomposition { blocks: runs(path.within_horizon(), cube) }
}

/// Inside blocks of the whole recorded path whose start j has at most `k`
/// outside indices before it. `None` if the recording ends before the
/// (k+1)-th outside index, so later blocks might still count.
pub fn entrances_before_outside_steps(path: &FullPath, cube: u64, k: u64) -> Option<u64> {
    let mut zeros = 0;
    let mut count = 0;
    for b in runs(path.iter(), cube) {
        if b.inside {
            count += 1;
        } else {
            zeros += b.len;
            if zeros > k {
                return Some(count);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_1d(xs: &[i64], horizon: u64) -> FullPath {
        FullPath { d: 1, horizon, points: xs.to_vec() }
    }

    #[test]
    fn runs_and_pairs() {
        let p = path_1d(&[0, 1, 3, 4, 1, 5, 0, 0], 7);
        let b = block_decomposition(&p, 1);
        assert_eq!(b.inside_lengths(), vec![2, 1, 2]);
        assert_eq!(b.outside_lengths(), vec![2, 1]);
        assert_eq!(b.pairs(), vec![(0, 2), (2, 1), (1, 2)]);
        assert_eq!(b.rho(), 5);
        assert_eq!(b.entrances(), 3);
    }

    #[test]
    fn horizon_cuts_the_continuation() {
        let p = path_1d(&[5, 0, 5, 5, 0, 5], 2);
        assert_eq!(block_decomposition(&p, 0).entrances(), 1);
        // outside indices 0, 2, 3 -> with k = 2 the block at 4 is excluded
        assert_eq!(entrances_before_outside_steps(&p, 0, 2), Some(1));
        assert_eq!(entrances_before_outside_steps(&p, 0, 3), Some(2));
        assert_eq!(entrances_before_outside_steps(&p, 0, 4), None);
    }
}
