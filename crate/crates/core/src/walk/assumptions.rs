//! Checks of the standing assumptions: the start lies in the strongly
//! connected component reaching infinity, every row has an ε-moment, and
//! the walk is aperiodic.

use std::collections::BTreeSet;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use crate::lattice::{in_cube, LatticePoint};
use crate::law::{one_lattice_check, JumpLaw, LawFamily};

use super::WalkSpec;

/// Depth of the cycle search used when the base law never holds.
const CYCLE_DEPTH: u64 = 6;
/// Jump radius explored by the cycle search for infinite-support laws.
const CYCLE_REACH: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SccVerdict {
    Pass,
    Fail,
    /// the base law is not 1-lattice, so the exterior cannot be collapsed
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentVerdict {
    /// `None` for the base law
    pub site: Option<LatticePoint>,
    pub family: LawFamily,
    /// E||J||^ε < ∞ for every ε below this (infinite for finite support)
    pub epsilon_sup: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub one_lattice: bool,
    pub scc: SccVerdict,
    /// radius of the box K_{N+r} the exterior was collapsed around
    pub scc_box_radius: u64,
    pub origin_in_component: bool,
    pub start_in_component: bool,
    pub epsilon_moments: Vec<MomentVerdict>,
    pub aperiodic: bool,
    /// gcd of the return-cycle lengths found through 0, if any were found
    pub period: Option<u64>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.scc == SccVerdict::Pass && self.aperiodic && self.epsilon_moments.iter().all(|m| m.pass)
    }

    /// Names of the failed checks.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        match self.scc {
            SccVerdict::Pass => {}
            SccVerdict::Fail => out.push("strong connectivity"),
            SccVerdict::Indeterminate => out.push("strong connectivity (indeterminate: base law not 1-lattice)"),
        }
        if !self.epsilon_moments.iter().all(|m| m.pass) {
            out.push("epsilon-moment");
        }
        if !self.aperiodic {
            out.push("aperiodicity");
        }
        out
    }
}

pub fn check_assumptions(spec: &WalkSpec) -> AssumptionReport {
    let medium = &*spec.medium;
    let base = medium.base();
    let one_lattice = one_lattice_check(base);

    let epsilon_moments = std::iter::once((None, base))
        .chain(medium.impurities().iter().map(|(s, l)| (Some(s.clone()), l)))
        .map(|(site, law)| {
            let epsilon_sup = law.moment_bound();
            MomentVerdict { site, family: law.family(), epsilon_sup, pass: epsilon_sup > 0.0 }
        })
        .collect();

    let n = medium.n();
    let reach = medium.impurities().iter().map(|(_, l)| l.support_radius().unwrap_or(n + 2)).max().unwrap_or(0);
    let radius = n + reach;
    let graph = ExteriorGraph::build(spec, radius);
    let origin = LatticePoint::origin(medium.dim());
    let origin_in_component = graph.connected_to_exterior(&origin);
    let start_in_component = graph.connected_to_exterior(&spec.start);
    let scc = if !one_lattice {
        SccVerdict::Indeterminate
    } else if origin_in_component && start_in_component {
        SccVerdict::Pass
    } else {
        SccVerdict::Fail
    };

    let period = if base.prob(&origin) > 0.0 { Some(1) } else { cycle_gcd(spec) };

    AssumptionReport {
        one_lattice,
        scc,
        scc_box_radius: radius,
        origin_in_component,
        start_in_component,
        epsilon_moments,
        aperiodic: period == Some(1),
        period,
    }
}

/// Transition graph on K_radius with everything outside merged into one
/// "free" vertex.
struct ExteriorGraph {
    d: usize,
    radius: u64,
    free: NodeIndex,
    component_of_free: Vec<bool>,
}

impl ExteriorGraph {
    fn build(spec: &WalkSpec, radius: u64) -> Self {
        let medium = &*spec.medium;
        let d = medium.dim();
        let width = 2 * radius + 1;
        let cells = width.pow(d as u32) as usize;
        let mut g: DiGraph<(), ()> = DiGraph::with_capacity(cells + 1, 0);
        for _ in 0..=cells {
            g.add_node(());
        }
        let free = NodeIndex::new(cells);
        let far = 2 * radius + 1;
        let support = |law: &JumpLaw| -> (Vec<LatticePoint>, bool) {
            let (atoms, rest) = match law.support_radius() {
                Some(_) => (law.atoms().to_vec(), 0.0),
                None => law.atoms_within(far),
            };
            (atoms.into_iter().filter(|(_, p)| *p > 0.0).map(|(j, _)| j).collect(), rest > 0.0)
        };
        let (base_jumps, _) = support(medium.base());
        let mut site = vec![0i64; d];
        for cell in 0..cells {
            decode(cell, radius, &mut site);
            let (jumps, escapes) = support(medium.law_at(&site));
            let mut to_free = escapes;
            for j in &jumps {
                let t: Vec<i64> = site.iter().zip(j.coords()).map(|(a, b)| a + b).collect();
                if in_cube(&t, radius) {
                    g.update_edge(NodeIndex::new(cell), NodeIndex::new(encode(&t, radius)), ());
                } else {
                    to_free = true;
                }
            }
            if to_free {
                g.update_edge(NodeIndex::new(cell), free, ());
            }
            // some site outside the box jumps here under the base law
            if base_jumps.iter().any(|j| {
                let u: Vec<i64> = site.iter().zip(j.coords()).map(|(a, b)| a - b).collect();
                !in_cube(&u, radius)
            }) {
                g.update_edge(free, NodeIndex::new(cell), ());
            }
        }
        let mut component_of_free = vec![false; cells + 1];
        for comp in tarjan_scc(&g) {
            if comp.contains(&free) {
                for v in comp {
                    component_of_free[v.index()] = true;
                }
            }
        }
        ExteriorGraph { d, radius, free, component_of_free }
    }

    fn connected_to_exterior(&self, x: &LatticePoint) -> bool {
        debug_assert_eq!(x.dim(), self.d);
        if !in_cube(x.coords(), self.radius) {
            return self.component_of_free[self.free.index()];
        }
        self.component_of_free[encode(x.coords(), self.radius)]
    }
}

fn encode(x: &[i64], radius: u64) -> usize {
    let w = 2 * radius as i64 + 1;
    x.iter().fold(0i64, |acc, &c| acc * w + c + radius as i64) as usize
}

fn decode(mut cell: usize, radius: u64, out: &mut [i64]) {
    let w = 2 * radius as usize + 1;
    for c in out.iter_mut().rev() {
        *c = (cell % w) as i64 - radius as i64;
        cell /= w;
    }
}

/// gcd of the lengths t <= CYCLE_DEPTH with P_0(X_t = 0) > 0.
fn cycle_gcd(spec: &WalkSpec) -> Option<u64> {
    let medium = &*spec.medium;
    let origin = LatticePoint::origin(medium.dim());
    let mut frontier: BTreeSet<LatticePoint> = BTreeSet::from([origin.clone()]);
    let mut g = 0u64;
    for t in 1..=CYCLE_DEPTH {
        let mut next = BTreeSet::new();
        for x in &frontier {
            let law = medium.law_at(x.coords());
            let atoms = match law.support_radius() {
                Some(_) => law.atoms().to_vec(),
                None => law.atoms_within(CYCLE_REACH).0,
            };
            for (j, p) in atoms {
                if p > 0.0 {
                    next.insert(x.add(&j));
                }
            }
        }
        if next.contains(&origin) {
            g = gcd(g, t);
        }
        frontier = next;
    }
    (g > 0).then_some(g)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
