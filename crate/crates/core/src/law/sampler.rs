//! O(1) sampling of lattice jumps.
//!
//! Finite atom sets go through a Walker alias table driven by a single
//! 64-bit draw: the high half of `u * k` picks the column and the low half
//! is compared against a 64-bit acceptance threshold. Laws with infinite
//! support put the remote tail into one extra column; landing there hands
//! off to an inverse-CDF search on the Hurwitz-zeta survival function.

use rand_core::RngCore;

use crate::lattice::MAX_DIM;
use crate::special::hurwitz_zeta;

/// Jump magnitudes are capped here so that coordinates stay in i64.
pub const MAX_JUMP: u64 = 1 << 53;

#[derive(Clone, Debug)]
pub(crate) struct PowerTailSampler {
    pub d: usize,
    pub beta: f64,
    /// magnitudes strictly above this come from the tail column
    pub head_radius: u64,
    /// zeta(beta, head_radius + 1)
    pub tail_mass: f64,
}

impl PowerTailSampler {
    /// P(K > m | K > head_radius).
    fn conditional_survival(&self, m: u64) -> f64 {
        hurwitz_zeta(self.beta, m as f64 + 1.0) / self.tail_mass
    }

    /// Draws a magnitude K > head_radius with P(K = m) proportional to m^{-beta}.
    pub fn magnitude<R: RngCore + ?Sized>(&self, rng: &mut R) -> u64 {
        let u = open_unit(rng.next_u64());
        let mut lo = self.head_radius;
        let mut hi = self.head_radius.saturating_mul(2).max(lo + 1);
        while self.conditional_survival(hi) >= u {
            if hi >= MAX_JUMP {
                return MAX_JUMP;
            }
            lo = hi;
            hi = hi.saturating_mul(2).min(MAX_JUMP);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.conditional_survival(mid) < u {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    fn sample_into<R: RngCore + ?Sized>(&self, rng: &mut R, pos: &mut [i64]) {
        let r = rng.next_u64();
        let axis = (((r >> 1) as u128 * self.d as u128) >> 63) as usize;
        let k = self.magnitude(rng) as i64;
        let step = if r & 1 == 0 { k } else { -k };
        pos[axis] = pos[axis].saturating_add(step);
    }
}

/// (0, 1] with 53 bits of resolution.
#[inline]
pub(crate) fn open_unit(x: u64) -> f64 {
    ((x >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Clone, Copy, Debug)]
struct Column {
    threshold: u64,
    /// atom index when the low half is below `threshold`, else the alias
    own: u32,
    alias: u32,
}

#[derive(Clone, Debug)]
pub(crate) struct AliasSampler {
    d: usize,
    columns: Vec<Column>,
    /// one padded jump per atom; the tail atom (if any) is all zeros
    jumps: Vec<[i64; MAX_DIM]>,
    /// atom index of the tail column, `u32::MAX` if none
    tail_atom: u32,
    tail: Option<PowerTailSampler>,
}

impl AliasSampler {
    /// `weights[i]` belongs to `jumps[i*d..(i+1)*d]`; if `tail` is given its
    /// weight is appended as one extra column.
    pub fn new(d: usize, jumps: Vec<i64>, mut weights: Vec<f64>, tail: Option<(f64, PowerTailSampler)>) -> Self {
        assert_eq!(jumps.len(), weights.len() * d);
        assert!(d <= MAX_DIM);
        let mut padded: Vec<[i64; MAX_DIM]> = jumps
            .chunks_exact(d.max(1))
            .map(|c| {
                let mut j = [0i64; MAX_DIM];
                j[..d].copy_from_slice(c);
                j
            })
            .collect();
        let (tail_atom, tail) = match tail {
            Some((w, s)) => {
                weights.push(w);
                padded.push([0; MAX_DIM]);
                ((weights.len() - 1) as u32, Some(s))
            }
            None => (u32::MAX, None),
        };
        let k = weights.len();
        let total: f64 = weights.iter().sum();
        let mut scaled: Vec<f64> = weights.iter().map(|w| w * k as f64 / total).collect();
        let mut columns: Vec<Column> =
            (0..k as u32).map(|i| Column { threshold: u64::MAX, own: i, alias: i }).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) = (0..k).partition(|&i| scaled[i] < 1.0);
        while let (Some(s), Some(&l)) = (small.pop(), large.last()) {
            columns[s].threshold = to_threshold(scaled[s]);
            columns[s].alias = l as u32;
            scaled[l] -= 1.0 - scaled[s];
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // leftovers are 1 up to rounding
        for i in small.into_iter().chain(large) {
            columns[i].threshold = u64::MAX;
            columns[i].alias = i as u32;
        }
        AliasSampler { d, columns, jumps: padded, tail_atom, tail }
    }

    #[inline]
    pub fn sample_into<R: RngCore + ?Sized>(&self, rng: &mut R, pos: &mut [i64]) {
        let m = rng.next_u64() as u128 * self.columns.len() as u128;
        let col = &self.columns[(m >> 64) as usize];
        let atom = if (m as u64) < col.threshold { col.own } else { col.alias };
        if atom == self.tail_atom {
            if let Some(tail) = &self.tail {
                tail.sample_into(rng, pos);
            }
            return;
        }
        let jump = &self.jumps[atom as usize];
        for (p, j) in pos.iter_mut().zip(&jump[..self.d]) {
            *p = p.saturating_add(*j);
        }
    }
}

fn to_threshold(q: f64) -> u64 {
    if q >= 1.0 {
        u64::MAX
    } else if q <= 0.0 {
        0
    } else {
        (q * 18_446_744_073_709_551_616.0) as u64
    }
}
