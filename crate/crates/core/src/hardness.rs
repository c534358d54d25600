//! Hard-instance families and reductions.
//!
//! * [`example1_family`]: a star instance on which the greedy without the second chance pays a
//!   harmonic factor.
//! * [`lblp_to_instance`]: turns a feasible point of the lower-bound program into an instance on
//!   which 2-Chance Greedy with `γ = 1, η = 2` pays about the program objective.
//! * [`VcGraph`] and [`vc_to_2lflp`]: weighted vertex cover and its encoding as a 2-LFLP instance.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frp::{build, check_solution, FRSolution, ProgramSpec};
use crate::instance::Instance;

/// Largest graph accepted by [`VcGraph::min_vertex_cover`].
pub const VC_ENUM_CAP: usize = 24;

/// Builds the star family: `n0` spokes with opening costs `1/(n0 − i) − ε` (0-based `i`), a hub
/// with opening cost 1 at index `n0`, all distinct pairs at distance `1/η`, and one unit edge
/// between every spoke and the hub.
pub fn example1_family(n0: usize, eps: f64, eta: f64) -> Result<Instance> {
    if n0 < 2 {
        return Err(Error::InvalidParams(format!("n0 must be at least 2, got {n0}")));
    }
    if !(eps > 0.0 && eps < 1.0 / n0 as f64) {
        return Err(Error::InvalidParams(format!("eps must lie in (0, 1/n0), got {eps}")));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::InvalidParams(format!("eta must be positive and finite, got {eta}")));
    }
    let n = n0 + 1;
    let off = 1.0 / eta;
    let dist = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { off }).collect()).collect();
    let mut opening: Vec<f64> = (0..n0).map(|i| 1.0 / (n0 - i) as f64 - eps).collect();
    opening.push(1.0);
    let flows: Vec<(usize, usize, f64)> = (0..n0).map(|i| (i, n0, 1.0)).collect();
    Instance::new(dist, opening, &flows)?.into_metric()
}

/// Builds the `4m + 1` location instance encoding a feasible point of `LBLP(m)`.
///
/// Location `ℓ` is the home and `m + ℓ` the work of individual `ℓ`; both are unopenable. Locations
/// `2m + ℓ` and `3m + ℓ` sit at distance `c(ℓ)` from the home and the work respectively and cost
/// `(α(ℓ) − c(ℓ))/2`, so that under `η = 2` each opens exactly when `α(ℓ)` is reached. The hub `4m`
/// costs `f + eps` and sits at distance `d(ℓ)` from every home. All remaining distances are shortest
/// paths over these links, which leaves every work at infinite distance from the hub.
pub fn lblp_to_instance(sol: &FRSolution, eps: f64) -> Result<Instance> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidParams(format!("eps must be positive and finite, got {eps}")));
    }
    let m = sol.alpha.len();
    if m == 0 {
        return Err(Error::InfeasibleInput("LBLP solution has no indices".into()));
    }
    let report = check_solution(&build(&ProgramSpec::Lblp { m })?, sol)?;
    if !report.feasible {
        let v = &report.violations[0];
        return Err(Error::InfeasibleInput(format!(
            "LBLP({m}) point violates {} {:?} by {}",
            v.family, v.index, v.excess
        )));
    }
    let n = 4 * m + 1;
    let hub = 4 * m;
    let mut dist = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in dist.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    let mut link = |a: usize, b: usize, x: f64| {
        dist[a][b] = dist[a][b].min(x);
        dist[b][a] = dist[a][b];
    };
    for l in 0..m {
        link(l, 2 * m + l, sol.c[l]);
        link(m + l, 3 * m + l, sol.c[l]);
        link(l, hub, sol.d[l]);
    }
    shortest_paths(&mut dist);
    let mut opening = vec![f64::INFINITY; n];
    for l in 0..m {
        let half = (sol.alpha[l] - sol.c[l]).max(0.0) / 2.0;
        opening[2 * m + l] = half;
        opening[3 * m + l] = half;
    }
    opening[hub] = sol.f + eps;
    let flows: Vec<(usize, usize, f64)> = (0..m).map(|l| (l, m + l, 1.0)).collect();
    Instance::new(dist, opening, &flows)
}

/// Floyd-Warshall closure in place.
fn shortest_paths(dist: &mut [Vec<f64>]) {
    let n = dist.len();
    for k in 0..n {
        for i in 0..n {
            let dik = dist[i][k];
            if dik == f64::INFINITY {
                continue;
            }
            for j in 0..n {
                let via = dik + dist[k][j];
                if via < dist[i][j] {
                    dist[i][j] = via;
                }
            }
        }
    }
}

/// A vertex-weighted undirected graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VcGraph {
    weights: Vec<f64>,
    edges: Vec<(usize, usize)>,
}

impl VcGraph {
    /// Validates weights (finite, nonnegative) and edges (in range, no self-loops).
    pub fn new(weights: Vec<f64>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = weights.len();
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidInstance(format!("vertex weight {w} is not a nonnegative real")));
        }
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(Error::InvalidInstance(format!("edge ({u},{v}) references a vertex outside 0..{n}")));
            }
            if u == v {
                return Err(Error::InvalidInstance(format!("self-loop at vertex {u}")));
            }
        }
        Ok(Self { weights, edges })
    }

    /// Vertex weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Edge list.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    /// Whether the graph has no vertices.
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Whether every edge has an endpoint in `cover`.
    pub fn is_vertex_cover(&self, cover: &[usize]) -> bool {
        let mut inside = vec![false; self.len()];
        for &v in cover {
            if v < inside.len() {
                inside[v] = true;
            }
        }
        self.edges.iter().all(|&(u, v)| inside[u] || inside[v])
    }

    /// Total weight of `cover`.
    pub fn weight_of(&self, cover: &[usize]) -> f64 {
        cover.iter().map(|&v| self.weights[v]).sum()
    }

    /// Minimum-weight vertex cover by exhaustive enumeration; ties go to the smallest subset mask.
    pub fn min_vertex_cover(&self) -> Result<(Vec<usize>, f64)> {
        let n = self.len();
        if n > VC_ENUM_CAP {
            return Err(Error::BudgetExceeded { n, cap: VC_ENUM_CAP });
        }
        let edge_masks: Vec<u32> = self.edges.iter().map(|&(u, v)| (1u32 << u) | (1u32 << v)).collect();
        let mut best = (0u32, f64::INFINITY);
        for mask in 0u32..(1u32 << n) {
            if !edge_masks.iter().all(|&e| e & mask != 0) {
                continue;
            }
            let w: f64 = (0..n).filter(|&v| mask >> v & 1 == 1).map(|v| self.weights[v]).sum();
            if w < best.1 {
                best = (mask, w);
            }
        }
        let cover = (0..n).filter(|&v| best.0 >> v & 1 == 1).collect();
        Ok((cover, best.1))
    }
}

/// Encodes `g` as a 2-LFLP instance: one location per vertex with opening cost equal to its weight,
/// distance `sentinel` (finite or `∞`) between distinct vertices, one unit edge per graph edge.
pub fn vc_to_2lflp(g: &VcGraph, sentinel: f64) -> Result<Instance> {
    let total: f64 = g.weights.iter().sum();
    if !(sentinel >= total + 1.0) {
        return Err(Error::InvalidParams(format!("sentinel {sentinel} must be at least total weight + 1 = {}", total + 1.0)));
    }
    let n = g.len();
    let dist = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { sentinel }).collect()).collect();
    let flows: Vec<(usize, usize, f64)> = g.edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
    let inst = Instance::new(dist, g.weights.clone(), &flows)?;
    if sentinel.is_finite() {
        inst.into_metric()
    } else {
        Ok(inst)
    }
}
