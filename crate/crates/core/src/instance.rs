//! Instance model, extended-real helpers, metric checks and cost evaluation.
//!
//! Distances and opening costs are extended reals: `f64::INFINITY` is a valid
//! value. Arithmetic that may meet two infinities goes through [`pos_diff`],
//! which saturates `(x - inf)^+` to zero.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used by comparisons that gate discrete decisions.
pub const TOL: f64 = 1e-9;

/// Positive part `max(x, 0)`, mapping NaN (from `inf - inf`) to zero.
#[inline]
pub fn pos(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Saturating `(a - b)^+` on extended reals: zero whenever `b` is infinite.
#[inline]
pub fn pos_diff(a: f64, b: f64) -> f64 {
    if b == f64::INFINITY {
        0.0
    } else {
        pos(a - b)
    }
}

/// One (home, work) pair carrying a mass of individuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    /// Home location.
    pub h: usize,
    /// Work location.
    pub w: usize,
    /// Number of individuals, finite and positive.
    pub mass: f64,
}

/// A 2-LFLP instance.
///
/// Edges are stored sorted by `(h, w)`; duplicate pairs are merged by summing
/// their masses and zero-mass pairs are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    n: usize,
    dist: Vec<f64>,
    opening: Vec<f64>,
    edges: Vec<Edge>,
    coords: Option<Vec<[f64; 2]>>,
    metric: bool,
}

/// A set of opened facility locations.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Solution {
    /// Opened locations in ascending order.
    pub opened: BTreeSet<usize>,
}

impl Solution {
    /// The empty solution.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Number of opened facilities.
    pub fn len(&self) -> usize {
        self.opened.len()
    }

    /// Whether no facility is open.
    pub fn is_empty(&self) -> bool {
        self.opened.is_empty()
    }

    /// Whether `i` is opened.
    pub fn contains(&self, i: usize) -> bool {
        self.opened.contains(&i)
    }
}

impl FromIterator<usize> for Solution {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self {
            opened: iter.into_iter().collect(),
        }
    }
}

/// Decomposed cost of a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    /// Sum of opening costs of the opened facilities.
    pub opening_cost: f64,
    /// Mass-weighted distance from every edge to its nearest opened facility.
    pub connection_cost: f64,
    /// `opening_cost + connection_cost`.
    pub total: f64,
    /// Serving facility per edge (lowest index among the nearest), or `None`
    /// when no opened facility is at finite distance.
    pub assignment: Vec<Option<usize>>,
}

impl CostReport {
    /// Whether some edge is left without a finite-distance facility.
    pub fn has_unserved(&self) -> bool {
        self.assignment.iter().any(Option::is_none)
    }
}

fn check_value(what: &str, x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::InvalidInstance(format!("{what} must be a nonnegative extended real, got {x}")));
    }
    Ok(())
}

fn normalize_flows(n: usize, flows: &[(usize, usize, f64)]) -> Result<Vec<Edge>> {
    let mut raw: Vec<(usize, usize, f64)> = Vec::with_capacity(flows.len());
    for &(h, w, mass) in flows {
        if h >= n || w >= n {
            return Err(Error::InvalidInstance(format!("flow ({h},{w}) references a location outside 0..{n}")));
        }
        if !mass.is_finite() || mass < 0.0 {
            return Err(Error::InvalidInstance(format!("flow ({h},{w}) has invalid mass {mass}")));
        }
        raw.push((h, w, mass));
    }
    raw.sort_by_key(|a| (a.0, a.1));
    let mut edges: Vec<Edge> = Vec::with_capacity(raw.len());
    for (h, w, mass) in raw {
        match edges.last_mut() {
            Some(last) if last.h == h && last.w == w => last.mass += mass,
            _ => edges.push(Edge { h, w, mass }),
        }
    }
    edges.retain(|e| e.mass > 0.0);
    Ok(edges)
}

impl Instance {
    /// Builds an instance from an explicit distance matrix.
    ///
    /// The matrix must be square, symmetric, have a zero diagonal and
    /// nonnegative (possibly infinite) entries.
    pub fn new(dist: Vec<Vec<f64>>, opening: Vec<f64>, flows: &[(usize, usize, f64)]) -> Result<Self> {
        let n = dist.len();
        if opening.len() != n {
            return Err(Error::InvalidInstance(format!("{} opening costs for {n} locations", opening.len())));
        }
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in dist.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInstance(format!("distance row {i} has length {}", row.len())));
            }
            for &x in row {
                check_value("distance", x)?;
                flat.push(x);
            }
        }
        for i in 0..n {
            if flat[i * n + i] != 0.0 {
                return Err(Error::InvalidInstance(format!("d({i},{i}) must be zero")));
            }
            for j in 0..i {
                if flat[i * n + j] != flat[j * n + i] {
                    return Err(Error::InvalidInstance(format!("distance matrix is not symmetric at ({i},{j})")));
                }
            }
        }
        for &f in &opening {
            check_value("opening cost", f)?;
        }
        let edges = normalize_flows(n, flows)?;
        Ok(Self {
            n,
            dist: flat,
            opening,
            edges,
            coords: None,
            metric: false,
        })
    }

    /// Builds a Euclidean instance from planar coordinates; it is flagged metric.
    pub fn from_coords(coords: Vec<[f64; 2]>, opening: Vec<f64>, flows: &[(usize, usize, f64)]) -> Result<Self> {
        let n = coords.len();
        for c in &coords {
            if !c[0].is_finite() || !c[1].is_finite() {
                return Err(Error::InvalidInstance(format!("coordinate {c:?} is not finite")));
            }
        }
        let mut dist = Vec::with_capacity(n);
        for a in &coords {
            dist.push(coords.iter().map(|b| libm::hypot(a[0] - b[0], a[1] - b[1])).collect());
        }
        let mut inst = Self::new(dist, opening, flows)?;
        inst.coords = Some(coords);
        inst.metric = true;
        Ok(inst)
    }

    /// Flags the instance as metric after verifying the triangle inequality.
    pub fn into_metric(mut self) -> Result<Self> {
        let bad = self.check_metric();
        if let Some(&(i, j, k)) = bad.first() {
            return Err(Error::InvalidInstance(format!(
                "triangle inequality fails on ({i},{j},{k}) and {} more triples",
                bad.len() - 1
            )));
        }
        self.metric = true;
        Ok(self)
    }

    /// Number of locations.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Distance between two locations.
    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    /// Row `i` of the distance matrix.
    pub fn dist_row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    /// Opening cost of location `i`.
    #[inline]
    pub fn f(&self, i: usize) -> f64 {
        self.opening[i]
    }

    /// All opening costs.
    pub fn opening(&self) -> &[f64] {
        &self.opening
    }

    /// Edges sorted by `(h, w)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Planar coordinates, when the instance was built from them.
    pub fn coords(&self) -> Option<&[[f64; 2]]> {
        self.coords.as_deref()
    }

    /// Whether the instance is flagged metric.
    pub fn is_metric(&self) -> bool {
        self.metric
    }

    /// Total mass over all edges.
    pub fn total_mass(&self) -> f64 {
        self.edges.iter().map(|e| e.mass).sum()
    }

    /// `d(e, i) = min(d(e_H, i), d(e_W, i))`.
    #[inline]
    pub fn edge_distance(&self, e: &Edge, i: usize) -> f64 {
        let a = self.d(e.h, i);
        let b = self.d(e.w, i);
        if a <= b {
            a
        } else {
            b
        }
    }

    /// Opening plus connection cost of `sol`, with per-edge assignments.
    pub fn total_cost(&self, sol: &Solution) -> CostReport {
        cost_report(self, sol, self.edges.len(), |k, i| {
            let e = &self.edges[k];
            (self.edge_distance(e, i), e.mass)
        })
    }

    /// Triples `(i, j, k)` with `i < k` where `d(i,k) > d(i,j) + d(j,k) + 1e-9`
    /// and all three distances are finite.
    pub fn check_metric(&self) -> Vec<(usize, usize, usize)> {
        let n = self.n;
        let mut out = Vec::new();
        for i in 0..n {
            for k in i + 1..n {
                let dik = self.d(i, k);
                if !dik.is_finite() {
                    continue;
                }
                for j in 0..n {
                    let (dij, djk) = (self.d(i, j), self.d(j, k));
                    if dij.is_finite() && djk.is_finite() && dik > dij + djk + TOL {
                        out.push((i, j, k));
                    }
                }
            }
        }
        out
    }

    /// A copy with every opening cost multiplied by `s`.
    pub fn with_scaled_opening(&self, s: f64) -> Self {
        let mut out = self.clone();
        for f in &mut out.opening {
            *f *= s;
        }
        out
    }

    /// A copy with locations relabeled so that old location `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n;
        let mut seen = alloc::vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || core::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidParams(format!("not a permutation of 0..{n}")));
        }
        let mut dist = alloc::vec![alloc::vec![0.0; n]; n];
        let mut opening = alloc::vec![0.0; n];
        for i in 0..n {
            opening[perm[i]] = self.opening[i];
            for j in 0..n {
                dist[perm[i]][perm[j]] = self.d(i, j);
            }
        }
        let flows: Vec<_> = self.edges.iter().map(|e| (perm[e.h], perm[e.w], e.mass)).collect();
        let mut out = Self::new(dist, opening, &flows)?;
        out.metric = self.metric;
        if let Some(c) = &self.coords {
            let mut nc = alloc::vec![[0.0; 2]; n];
            for i in 0..n {
                nc[perm[i]] = c[i];
            }
            out.coords = Some(nc);
        }
        Ok(out)
    }
}

/// Cost report for `count` clients where `client(k, i)` yields the distance
/// from client `k` to location `i` together with its mass.
pub(crate) fn cost_report(
    inst: &Instance,
    sol: &Solution,
    count: usize,
    client: impl Fn(usize, usize) -> (f64, f64),
) -> CostReport {
    let opening_cost: f64 = sol.opened.iter().map(|&i| inst.f(i)).sum();
    let mut connection_cost = 0.0;
    let mut assignment = Vec::with_capacity(count);
    for k in 0..count {
        let mut best: Option<(usize, f64)> = None;
        let mut mass = 0.0;
        for &i in &sol.opened {
            let (d, m) = client(k, i);
            mass = m;
            if d.is_finite() && best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        match best {
            Some((i, d)) => {
                connection_cost += mass * d;
                assignment.push(Some(i));
            }
            None => {
                connection_cost = f64::INFINITY;
                assignment.push(None);
            }
        }
    }
    CostReport {
        opening_cost,
        connection_cost,
        total: opening_cost + connection_cost,
        assignment,
    }
}

/// A K-location instance: every hyperedge lists its K locations on top of a
/// base [`Instance`] that supplies distances and opening costs.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperEdges {
    k: usize,
    sides: Vec<usize>,
    mass: Vec<f64>,
}

impl HyperEdges {
    /// Builds hyperedges with `k` sides each; `side_map[e]` lists the sides of edge `e`.
    pub fn new(inst: &Instance, k: usize, side_map: &[Vec<usize>], mass: &[f64]) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParams("hyperedges need at least one side".into()));
        }
        if side_map.len() != mass.len() {
            return Err(Error::InvalidInstance(format!("{} side lists for {} masses", side_map.len(), mass.len())));
        }
        let mut sides = Vec::with_capacity(k * side_map.len());
        let mut masses = Vec::with_capacity(mass.len());
        for (e, (s, &m)) in side_map.iter().zip(mass).enumerate() {
            if s.len() != k {
                return Err(Error::InvalidInstance(format!("hyperedge {e} has {} sides, expected {k}", s.len())));
            }
            if let Some(&bad) = s.iter().find(|&&l| l >= inst.n()) {
                return Err(Error::InvalidInstance(format!("hyperedge {e} references location {bad}")));
            }
            if !m.is_finite() || m < 0.0 {
                return Err(Error::InvalidInstance(format!("hyperedge {e} has invalid mass {m}")));
            }
            if m > 0.0 {
                sides.extend_from_slice(s);
                masses.push(m);
            }
        }
        Ok(Self { k, sides, mass: masses })
    }

    /// The two-sided hyperedges `[h, w]` of a 2-LFLP instance, in edge order.
    pub fn from_instance(inst: &Instance) -> Self {
        let mut sides = Vec::with_capacity(2 * inst.edges().len());
        for e in inst.edges() {
            sides.push(e.h);
            sides.push(e.w);
        }
        Self {
            k: 2,
            sides,
            mass: inst.edges().iter().map(|e| e.mass).collect(),
        }
    }

    /// Number of sides per hyperedge.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of hyperedges.
    pub fn len(&self) -> usize {
        self.mass.len()
    }

    /// Whether there are no hyperedges.
    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// Locations of hyperedge `e`.
    #[inline]
    pub fn sides(&self, e: usize) -> &[usize] {
        &self.sides[e * self.k..(e + 1) * self.k]
    }

    /// Mass of hyperedge `e`.
    #[inline]
    pub fn mass(&self, e: usize) -> f64 {
        self.mass[e]
    }

    /// Minimum distance from any side of `e` to location `i`.
    #[inline]
    pub fn distance(&self, inst: &Instance, e: usize, i: usize) -> f64 {
        self.sides(e).iter().map(|&l| inst.d(l, i)).fold(f64::INFINITY, f64::min)
    }

    /// Opening plus connection cost of `sol`.
    pub fn total_cost(&self, inst: &Instance, sol: &Solution) -> CostReport {
        cost_report(inst, sol, self.len(), |e, i| (self.distance(inst, e, i), self.mass(e)))
    }
}
