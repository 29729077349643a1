//! Dense evolution of distributions on a box [-R, R]^d.

use std::collections::{BTreeMap, HashMap};

use crate::lattice::{in_cube, LatticePoint, MAX_DIM};
use crate::law::{neumaier_sum, JumpLaw};
use crate::walk::Medium;

use super::{Compensated, OracleError, LEAK_LIMIT};

/// Probability mass on the cells of [-R, R]^d, row-major (first coordinate
/// slowest), plus the mass that left the box.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePmf {
    d: usize,
    box_radius: u64,
    mass: Vec<f64>,
    leaked: f64,
}

impl LatticePmf {
    pub fn point_mass(d: usize, box_radius: u64, at: &LatticePoint) -> Result<Self, OracleError> {
        if at.dim() != d {
            return Err(OracleError::DimensionMismatch { expected: d, found: at.dim() });
        }
        let mut pmf = Self::zeros(d, box_radius)?;
        let i = pmf.index(at.coords()).ok_or(OracleError::OutsideBox(at.clone()))?;
        pmf.mass[i] = 1.0;
        Ok(pmf)
    }

    pub(crate) fn zeros(d: usize, box_radius: u64) -> Result<Self, OracleError> {
        let width = 2 * box_radius + 1;
        let cells = (width as u128).checked_pow(d as u32).filter(|&c| c <= 1 << 28).ok_or(OracleError::BoxTooLarge)?;
        Ok(LatticePmf { d, box_radius, mass: vec![0.0; cells as usize], leaked: 0.0 })
    }

    pub(crate) fn from_parts(d: usize, box_radius: u64, mass: Vec<f64>, leaked: f64) -> Self {
        LatticePmf { d, box_radius, mass, leaked }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn box_radius(&self) -> u64 {
        self.box_radius
    }

    pub fn width(&self) -> usize {
        2 * self.box_radius as usize + 1
    }

    /// Cell masses in row-major order.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Mass that jumped out of the box (and was dropped).
    pub fn leaked(&self) -> f64 {
        self.leaked
    }

    /// Mass still in the box.
    pub fn total(&self) -> f64 {
        neumaier_sum(self.mass.iter().copied())
    }

    pub fn index(&self, x: &[i64]) -> Option<usize> {
        if x.len() != self.d || !in_cube(x, self.box_radius) {
            return None;
        }
        let w = self.width() as i64;
        let r = self.box_radius as i64;
        Some(x.iter().fold(0i64, |acc, &c| acc * w + c + r) as usize)
    }

    pub fn point(&self, mut index: usize) -> LatticePoint {
        let w = self.width();
        let mut coords = vec![0i64; self.d];
        for c in coords.iter_mut().rev() {
            *c = (index % w) as i64 - self.box_radius as i64;
            index /= w;
        }
        LatticePoint::new(coords)
    }

    /// Probability of `x`; zero outside the box.
    pub fn get(&self, x: &[i64]) -> f64 {
        self.index(x).map_or(0.0, |i| self.mass[i])
    }

    /// Cells with positive mass.
    pub fn iter(&self) -> impl Iterator<Item = (LatticePoint, f64)> + '_ {
        self.mass.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(i, &p)| (self.point(i), p))
    }

    /// Total-variation distance; mass leaked by either side counts as
    /// disagreement.
    pub fn tv_distance(&self, other: &LatticePmf) -> f64 {
        let mut pts: BTreeMap<LatticePoint, (f64, f64)> = BTreeMap::new();
        for (x, p) in self.iter() {
            pts.entry(x).or_default().0 = p;
        }
        for (x, q) in other.iter() {
            pts.entry(x).or_default().1 = q;
        }
        0.5 * (neumaier_sum(pts.values().map(|(p, q)| (p - q).abs())) + self.leaked + other.leaked)
    }

    /// Total-variation distance to the empirical law of `counts`.
    pub fn tv_to_counts(&self, counts: &BTreeMap<LatticePoint, u64>) -> f64 {
        let total: u64 = counts.values().sum();
        if total == 0 {
            return 1.0;
        }
        let m = total as f64;
        let mut diff = Vec::with_capacity(self.mass.len() + counts.len());
        for (i, &p) in self.mass.iter().enumerate() {
            let f = counts.get(&self.point(i)).map_or(0.0, |&c| c as f64 / m);
            diff.push((p - f).abs());
        }
        for (x, &c) in counts {
            if self.index(x.coords()).is_none() {
                diff.push(c as f64 / m);
            }
        }
        0.5 * (neumaier_sum(diff) + self.leaked)
    }

    /// Distribution of the walk in `medium` after one more step.
    pub fn step(&self, medium: &Medium) -> Result<LatticePmf, OracleError> {
        let mut ev = Evolution::new(medium, self.clone(), &[])?;
        ev.advance()?;
        Ok(ev.pmf)
    }
}

/// Jumps of one law truncated to the box diameter.
struct Kernel {
    jumps: Vec<([i64; MAX_DIM], isize, f64)>,
    /// probability of jumps longer than the box diameter
    escape: f64,
    reach: u64,
}

impl Kernel {
    fn new(law: &JumpLaw, box_radius: u64, strides: &[isize]) -> Self {
        let diameter = 2 * box_radius;
        let (atoms, escape) = law.atoms_within(diameter);
        let reach = atoms.iter().map(|(j, _)| j.max_norm()).max().unwrap_or(0);
        let jumps = atoms
            .into_iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(j, p)| {
                let mut a = [0i64; MAX_DIM];
                a[..j.dim()].copy_from_slice(j.coords());
                let offset = j.coords().iter().zip(strides).map(|(&c, &s)| c as isize * s).sum();
                (a, offset, p)
            })
            .collect();
        Kernel { jumps, escape, reach }
    }
}

/// Step-by-step evolution with optional absorbing (taboo) cells.
pub(crate) struct Evolution<'a> {
    medium: &'a Medium,
    pub pmf: LatticePmf,
    kernels: Vec<Kernel>,
    /// impurity sites -> kernel index
    site_kernel: HashMap<LatticePoint, usize>,
    taboo: Vec<usize>,
    /// current bounding rectangle of nonzero mass, per axis
    lo: Vec<i64>,
    hi: Vec<i64>,
    reach: u64,
    pub absorbed: Vec<f64>,
}

impl<'a> Evolution<'a> {
    pub fn new(medium: &'a Medium, pmf: LatticePmf, taboo: &[LatticePoint]) -> Result<Self, OracleError> {
        let d = pmf.d;
        if medium.dim() != d {
            return Err(OracleError::DimensionMismatch { expected: d, found: medium.dim() });
        }
        let w = pmf.width() as isize;
        let strides: Vec<isize> = (0..d).map(|i| w.pow((d - 1 - i) as u32)).collect();
        let mut kernels = vec![Kernel::new(medium.base(), pmf.box_radius, &strides)];
        let mut site_kernel = HashMap::new();
        for (site, law) in medium.impurities().iter() {
            site_kernel.insert(site.clone(), kernels.len());
            kernels.push(Kernel::new(law, pmf.box_radius, &strides));
        }
        let taboo = taboo
            .iter()
            .map(|b| pmf.index(b.coords()).ok_or_else(|| OracleError::OutsideBox(b.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let reach = kernels.iter().map(|k| k.reach).max().unwrap_or(0);
        let (mut lo, mut hi) = (vec![i64::MAX; d], vec![i64::MIN; d]);
        for (x, _) in pmf.iter() {
            for i in 0..d {
                lo[i] = lo[i].min(x.coords()[i]);
                hi[i] = hi[i].max(x.coords()[i]);
            }
        }
        Ok(Evolution { medium, pmf, kernels, site_kernel, taboo, lo, hi, reach, absorbed: Vec::new() })
    }

    /// One step; mass landing on taboo cells is removed and recorded.
    pub fn advance(&mut self) -> Result<(), OracleError> {
        let d = self.pmf.d;
        let r = self.pmf.box_radius as i64;
        let mut next = vec![0.0f64; self.pmf.mass.len()];
        let mut leaked = Compensated::from(self.pmf.leaked);
        if self.lo[0] <= self.hi[0] {
            let mut site = self.lo.clone();
            'cells: loop {
                let src = self.pmf.index(&site).expect("active cell in box");
                let m = self.pmf.mass[src];
                if m != 0.0 {
                    let k = if self.medium.in_kn(&site) {
                        self.site_kernel.get(site.as_slice()).map_or(&self.kernels[0], |&i| &self.kernels[i])
                    } else {
                        &self.kernels[0]
                    };
                    if k.escape > 0.0 {
                        leaked.add(m * k.escape);
                    }
                    for (j, offset, p) in &k.jumps {
                        let inside = (0..d).all(|i| (site[i] + j[i]).abs() <= r);
                        if inside {
                            next[(src as isize + offset) as usize] += m * p;
                        } else {
                            leaked.add(m * p);
                        }
                    }
                }
                // odometer over the active rectangle
                for i in (0..d).rev() {
                    if site[i] < self.hi[i] {
                        site[i] += 1;
                        continue 'cells;
                    }
                    site[i] = self.lo[i];
                }
                break;
            }
        }
        let absorbed = neumaier_sum(self.taboo.iter().map(|&b| std::mem::take(&mut next[b])));
        self.absorbed.push(absorbed);
        let spread = self.reach as i64;
        for i in 0..d {
            self.lo[i] = (self.lo[i] - spread).max(-r);
            self.hi[i] = (self.hi[i] + spread).min(r);
        }
        self.pmf.mass = next;
        self.pmf.leaked = leaked.value();
        if self.pmf.leaked > LEAK_LIMIT {
            return Err(OracleError::BoxTooSmall { leaked: self.pmf.leaked, box_radius: self.pmf.box_radius });
        }
        Ok(())
    }
}
