use std::collections::BTreeMap;

use crate::lattice::{in_cube, LatticePoint};
use crate::law::JumpLaw;

use super::WalkError;

/// Sites whose transition rows differ from the base law.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ImpuritySet {
    overrides: BTreeMap<LatticePoint, JumpLaw>,
    n: u64,
}

impl ImpuritySet {
    pub fn new(d: usize, overrides: Vec<(LatticePoint, JumpLaw)>) -> Result<Self, WalkError> {
        let mut map = BTreeMap::new();
        for (site, law) in overrides {
            if site.dim() != d {
                return Err(WalkError::DimensionMismatch { expected: d, found: site.dim(), what: "impurity site" });
            }
            if law.dim() != d {
                return Err(WalkError::DimensionMismatch { expected: d, found: law.dim(), what: "impurity law" });
            }
            if map.contains_key(&site) {
                return Err(WalkError::DuplicateSite(site));
            }
            map.insert(site, law);
        }
        let n = map.keys().map(|s| s.max_norm()).max().unwrap_or(0);
        Ok(ImpuritySet { overrides: map, n })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Smallest N with every impurity inside K_N; 0 when empty.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.overrides.is_empty()
    }

    pub fn len(&self) -> usize {
        self.overrides.len()
    }

    pub fn get(&self, site: &LatticePoint) -> Option<&JumpLaw> {
        self.overrides.get(site)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LatticePoint, &JumpLaw)> {
        self.overrides.iter()
    }
}

/// Dense lookup above this many cells falls back to the ordered map.
const DENSE_LIMIT: u64 = 1 << 22;

/// Base law plus impurities, with a fast per-site law lookup inside K_N.
#[derive(Debug, Clone)]
pub struct Medium {
    d: usize,
    base: JumpLaw,
    impurities: ImpuritySet,
    laws: Vec<JumpLaw>,
    /// index into `laws` + 1 for each cell of K_N, 0 for base-law cells
    dense: Option<Vec<u32>>,
}

impl Medium {
    pub fn new(base: JumpLaw, impurities: ImpuritySet) -> Result<Self, WalkError> {
        let d = base.dim();
        if let Some((site, _)) = impurities.iter().next() {
            if site.dim() != d {
                return Err(WalkError::DimensionMismatch { expected: d, found: site.dim(), what: "impurity site" });
            }
        }
        let laws: Vec<JumpLaw> = impurities.iter().map(|(_, l)| l.clone()).collect();
        let width = 2 * impurities.n() + 1;
        let cells = (width as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
        let dense = (!impurities.is_empty() && cells <= DENSE_LIMIT as u128).then(|| {
            let mut table = vec![0u32; cells as usize];
            for (i, (site, _)) in impurities.iter().enumerate() {
                table[cube_index(site.coords(), impurities.n())] = i as u32 + 1;
            }
            table
        });
        Ok(Medium { d, base, impurities, laws, dense })
    }

    pub fn unperturbed(base: JumpLaw) -> Self {
        Medium::new(base, ImpuritySet::empty()).expect("empty impurity set")
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn base(&self) -> &JumpLaw {
        &self.base
    }

    pub fn impurities(&self) -> &ImpuritySet {
        &self.impurities
    }

    /// N of the cube K_N.
    pub fn n(&self) -> u64 {
        self.impurities.n()
    }

    #[inline]
    pub fn in_kn(&self, coords: &[i64]) -> bool {
        in_cube(coords, self.n())
    }

    /// The transition law used at `coords`.
    #[inline]
    pub fn law_at(&self, coords: &[i64]) -> &JumpLaw {
        if self.impurities.is_empty() || !self.in_kn(coords) {
            return &self.base;
        }
        match &self.dense {
            Some(table) => match table[cube_index(coords, self.n())] {
                0 => &self.base,
                i => &self.laws[i as usize - 1],
            },
            None => self.impurities.overrides.get(coords).unwrap_or(&self.base),
        }
    }

    /// Distinct laws in use: base first, then overrides in site order.
    pub fn distinct_laws(&self) -> impl Iterator<Item = &JumpLaw> {
        std::iter::once(&self.base).chain(self.laws.iter())
    }
}

/// Row-major index of a point of K_n (first coordinate slowest).
#[inline]
fn cube_index(coords: &[i64], n: u64) -> usize {
    let width = 2 * n as i64 + 1;
    coords.iter().fold(0i64, |acc, &c| acc * width + (c + n as i64)) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sticky() -> JumpLaw {
        JumpLaw::table(vec![
            (LatticePoint::from([0, 0]), 0.9),
            (LatticePoint::from([1, 0]), 0.025),
            (LatticePoint::from([-1, 0]), 0.025),
            (LatticePoint::from([0, 1]), 0.025),
            (LatticePoint::from([0, -1]), 0.025),
        ])
        .unwrap()
    }

    #[test]
    fn n_is_max_norm_of_sites() {
        let set =
            ImpuritySet::new(2, vec![(LatticePoint::from([2, -1]), sticky()), (LatticePoint::from([0, 0]), sticky())])
                .unwrap();
        assert_eq!(set.n(), 2);
        assert_eq!(ImpuritySet::empty().n(), 0);
    }

    #[test]
    fn duplicate_and_mismatched_sites_rejected() {
        let r =
            ImpuritySet::new(2, vec![(LatticePoint::from([0, 0]), sticky()), (LatticePoint::from([0, 0]), sticky())]);
        assert!(matches!(r, Err(WalkError::DuplicateSite(_))));
        let r = ImpuritySet::new(2, vec![(LatticePoint::from([0, 0, 0]), sticky())]);
        assert!(matches!(r, Err(WalkError::DimensionMismatch { .. })));
    }

    #[test]
    fn law_lookup() {
        let base = JumpLaw::lazy_srw(2).unwrap();
        let set = ImpuritySet::new(2, vec![(LatticePoint::from([1, -1]), sticky())]).unwrap();
        let m = Medium::new(base.clone(), set).unwrap();
        assert_eq!(m.law_at(&[1, -1]), &sticky());
        assert_eq!(m.law_at(&[0, 0]), &base);
        assert_eq!(m.law_at(&[5, 5]), &base);
        assert!(m.in_kn(&[-1, 1]));
        assert!(!m.in_kn(&[2, 0]));
        // the ordered-map fallback agrees with the dense table
        let sparse = Medium { dense: None, ..m.clone() };
        for x in -2..=2 {
            for y in -2..=2 {
                assert_eq!(sparse.law_at(&[x, y]), m.law_at(&[x, y]));
            }
        }
    }
}
