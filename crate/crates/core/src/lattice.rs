//! Points of the integer lattice Z^d.

use std::borrow::Borrow;
use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

/// Largest dimension the simulation engine supports.
pub const MAX_DIM: usize = 8;

/// A site of Z^d in lattice units.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticePoint(SmallVec<[i64; 4]>);

impl LatticePoint {
    pub fn new(coords: impl Into<Vec<i64>>) -> Self {
        LatticePoint(SmallVec::from_vec(coords.into()))
    }

    pub fn origin(d: usize) -> Self {
        LatticePoint(SmallVec::from_elem(0, d))
    }

    /// The `axis`-th unit vector scaled by `k`.
    pub fn axis(d: usize, axis: usize, k: i64) -> Self {
        let mut p = Self::origin(d);
        p.0[axis] = k;
        p
    }

    pub fn from_slice(coords: &[i64]) -> Self {
        LatticePoint(SmallVec::from_slice(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn coords_mut(&mut self) -> &mut [i64] {
        &mut self.0
    }

    /// L-infinity norm, the norm used for every distance in this crate.
    pub fn max_norm(&self) -> u64 {
        max_norm(&self.0)
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &LatticePoint) -> LatticePoint {
        debug_assert_eq!(self.dim(), other.dim());
        LatticePoint(self.0.iter().zip(other.0.iter()).map(|(a, b)| a.saturating_add(*b)).collect())
    }

    pub fn sub(&self, other: &LatticePoint) -> LatticePoint {
        debug_assert_eq!(self.dim(), other.dim());
        LatticePoint(self.0.iter().zip(other.0.iter()).map(|(a, b)| a.saturating_sub(*b)).collect())
    }

    pub fn neg(&self) -> LatticePoint {
        LatticePoint(self.0.iter().map(|c| -c).collect())
    }
}

impl Borrow<[i64]> for LatticePoint {
    fn borrow(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(v: Vec<i64>) -> Self {
        LatticePoint::new(v)
    }
}

impl<const N: usize> From<[i64; N]> for LatticePoint {
    fn from(v: [i64; N]) -> Self {
        LatticePoint::from_slice(&v)
    }
}

#[inline]
pub fn max_norm(coords: &[i64]) -> u64 {
    coords.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
}

/// Membership in the cube K_N = [-N-1/2, N+1/2]^d.
#[inline]
pub fn in_cube(coords: &[i64], radius: u64) -> bool {
    coords.iter().all(|c| c.unsigned_abs() <= radius)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_norm_is_linf() {
        let p = LatticePoint::from([3, -7, 2]);
        assert_eq!(p.max_norm(), 7);
        assert_eq!(LatticePoint::origin(2).max_norm(), 0);
    }

    #[test]
    fn cube_membership_uses_half_integer_faces() {
        assert!(in_cube(&[1, -1], 1));
        assert!(!in_cube(&[2, 0], 1));
        assert!(in_cube(&[0, 0], 0));
        assert!(!in_cube(&[0, 1], 0));
    }

    #[test]
    fn serializes_as_plain_array() {
        let p = LatticePoint::from([1, -2]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[1,-2]");
        let q: LatticePoint = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }
}
