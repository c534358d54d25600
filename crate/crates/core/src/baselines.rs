//! Single-location greedy, home/work projections, myopic pruning and the exact optimum.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::engine::{EngineResult, Event, Trace};
use crate::error::{Error, Result};
use crate::instance::{CostReport, Instance, Solution, TOL};

/// Largest location count accepted by [`brute_force_opt`].
pub const BRUTE_FORCE_CAP: usize = 22;

/// A single-location instance: every client has one position, given by its
/// distance row to all candidate facilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedInstance {
    opening: Vec<f64>,
    mass: Vec<f64>,
    dist: Vec<Vec<f64>>,
}

impl ProjectedInstance {
    /// Builds a projected instance; `dist[c][i]` is the distance from client `c` to location `i`.
    pub fn new(opening: Vec<f64>, mass: Vec<f64>, dist: Vec<Vec<f64>>) -> Result<Self> {
        if mass.len() != dist.len() {
            return Err(Error::InvalidInstance(format!("{} masses for {} clients", mass.len(), dist.len())));
        }
        for (c, row) in dist.iter().enumerate() {
            if row.len() != opening.len() {
                return Err(Error::InvalidInstance(format!("client {c} has {} distances", row.len())));
            }
            if row.iter().any(|x| x.is_nan() || *x < 0.0) || !(mass[c].is_finite() && mass[c] >= 0.0) {
                return Err(Error::InvalidInstance(format!("client {c} has invalid data")));
            }
        }
        Ok(Self { opening, mass, dist })
    }

    fn by_location(inst: &Instance, side: impl Fn(&crate::Edge) -> usize) -> Self {
        let n = inst.n();
        let mut mass = vec![0.0; n];
        for e in inst.edges() {
            mass[side(e)] += e.mass;
        }
        let clients: Vec<usize> = (0..n).filter(|&l| mass[l] > 0.0).collect();
        Self {
            opening: inst.opening().to_vec(),
            mass: clients.iter().map(|&l| mass[l]).collect(),
            dist: clients.iter().map(|&l| inst.dist_row(l).to_vec()).collect(),
        }
    }

    /// Every individual sits at its home location; per-location demand is the summed mass.
    pub fn home(inst: &Instance) -> Self {
        Self::by_location(inst, |e| e.h)
    }

    /// Every individual sits at its work location.
    pub fn work(inst: &Instance) -> Self {
        Self::by_location(inst, |e| e.w)
    }

    /// One client per edge at distance `d(e, i)` from location `i`.
    pub fn edge_expansion(inst: &Instance) -> Self {
        Self {
            opening: inst.opening().to_vec(),
            mass: inst.edges().iter().map(|e| e.mass).collect(),
            dist: inst
                .edges()
                .iter()
                .map(|e| (0..inst.n()).map(|i| inst.edge_distance(e, i)).collect())
                .collect(),
        }
    }

    /// Number of candidate facility locations.
    pub fn n(&self) -> usize {
        self.opening.len()
    }

    /// Number of clients.
    pub fn clients(&self) -> usize {
        self.mass.len()
    }

    /// Total client mass.
    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Cost of `sol` on this projected instance.
    pub fn total_cost(&self, sol: &Solution) -> CostReport {
        let opening_cost: f64 = sol.opened.iter().map(|&i| self.opening[i]).sum();
        let mut connection_cost = 0.0;
        let mut assignment = Vec::with_capacity(self.clients());
        for (c, row) in self.dist.iter().enumerate() {
            let best = sol
                .opened
                .iter()
                .filter(|&&i| row[i].is_finite())
                .fold(None, |acc: Option<usize>, &i| match acc {
                    Some(b) if row[b] <= row[i] => Some(b),
                    _ => Some(i),
                });
            match best {
                Some(i) => connection_cost += self.mass[c] * row[i],
                None => connection_cost = f64::INFINITY,
            }
            assignment.push(best);
        }
        CostReport {
            opening_cost,
            connection_cost,
            total: opening_cost + connection_cost,
            assignment,
        }
    }
}

/// Earliest `t' >= t` with `sum (t' - d)^+ * tau >= target`, given the
/// `(d, tau)` pairs sorted by `d`.
fn crossing(t: f64, target: f64, pts: &[(f64, f64)]) -> f64 {
    if !target.is_finite() {
        return f64::INFINITY;
    }
    let target = target - TOL * target.max(1.0);
    let (mut s, mut sd, mut k) = (0.0, 0.0, 0);
    while k < pts.len() && pts[k].0 <= t {
        s += pts[k].1;
        sd += pts[k].1 * pts[k].0;
        k += 1;
    }
    if s * t - sd >= target {
        return t;
    }
    loop {
        let b = pts.get(k).map_or(f64::INFINITY, |p| p.0);
        if s > 0.0 {
            let tc = (target + sd) / s;
            if tc <= b {
                return tc.max(t);
            }
        }
        if k >= pts.len() {
            return f64::INFINITY;
        }
        s += pts[k].1;
        sd += pts[k].1 * pts[k].0;
        k += 1;
    }
}

/// The single-location greedy: every unconnected client raises its budget at
/// unit rate; a client connects when its budget reaches an opened facility,
/// and a location opens when the budgets of unconnected clients pay for it.
///
/// The returned trace has one side per client and the cost is evaluated on `p`.
pub fn jmmsv(p: &ProjectedInstance) -> Result<EngineResult> {
    let n = p.n();
    let m = p.clients();
    let mut t = 0.0_f64;
    let mut opened = vec![false; n];
    let mut in_u = vec![true; m];
    let mut u_count = m;
    let mut alpha = vec![0.0; m];
    let mut psi: Vec<Option<usize>> = vec![None; m];
    let mut ctime = vec![f64::NAN; m];
    let mut events = Vec::new();
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(m);
    let limit = 4 * n * n + 4 * m + n;
    let mut batches = 0;

    let b_time = |t: f64, i: usize, in_u: &[bool], pts: &mut Vec<(f64, f64)>| {
        pts.clear();
        pts.extend((0..m).filter(|&c| in_u[c] && p.dist[c][i].is_finite()).map(|c| (p.dist[c][i], p.mass[c])));
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        crossing(t, p.opening[i], pts)
    };

    while u_count > 0 {
        let mut next = f64::INFINITY;
        for i in 0..n {
            let ti = if opened[i] {
                (0..m)
                    .filter(|&c| in_u[c])
                    .map(|c| p.dist[c][i])
                    .fold(f64::INFINITY, f64::min)
            } else {
                b_time(t, i, &in_u, &mut pts)
            };
            next = next.min(ti);
        }
        if next == f64::INFINITY {
            let edge = in_u.iter().position(|&u| u).unwrap_or(0);
            return Err(Error::Unservable { edge });
        }
        t = t.max(next);
        let mut connect = |c: usize, i: usize, events: &mut Vec<Event>, in_u: &mut [bool]| {
            in_u[c] = false;
            alpha[c] = t;
            psi[c] = Some(i);
            ctime[c] = t;
            events.push(Event::Connect {
                edge: c,
                side: 0,
                facility: i,
                t,
            });
        };
        for i in 0..n {
            if !opened[i] {
                continue;
            }
            for c in 0..m {
                if in_u[c] && p.dist[c][i] <= t + TOL {
                    connect(c, i, &mut events, &mut in_u);
                    u_count -= 1;
                }
            }
        }
        while let Some(i) = (0..n).find(|&i| !opened[i] && b_time(t, i, &in_u, &mut pts) <= t) {
            opened[i] = true;
            events.push(Event::Open { facility: i, t });
            for c in 0..m {
                if in_u[c] && p.dist[c][i] <= t + TOL {
                    connect(c, i, &mut events, &mut in_u);
                    u_count -= 1;
                }
            }
        }
        batches += 1;
        if batches > limit {
            return Err(Error::NonTermination { batches });
        }
    }
    let solution: Solution = (0..n).filter(|&i| opened[i]).collect();
    let cost = p.total_cost(&solution);
    let trace = Trace {
        events,
        alpha,
        psi: psi.into_iter().map(|x| vec![x]).collect(),
        connect_time: ctime.into_iter().map(|c| vec![if c.is_nan() { t } else { c }]).collect(),
        end_time: t,
        sides: 1,
    };
    Ok(EngineResult { solution, trace, cost })
}

/// Greedy on the home projection, costed on the full instance.
pub fn gr_home(inst: &Instance) -> Result<(Solution, CostReport)> {
    let sol = jmmsv(&ProjectedInstance::home(inst))?.solution;
    let cost = inst.total_cost(&sol);
    Ok((sol, cost))
}

/// Greedy on the work projection, costed on the full instance.
pub fn gr_work(inst: &Instance) -> Result<(Solution, CostReport)> {
    let sol = jmmsv(&ProjectedInstance::work(inst))?.solution;
    let cost = inst.total_cost(&sol);
    Ok((sol, cost))
}

fn strictly_below(a: f64, b: f64) -> bool {
    if b == f64::INFINITY {
        a < b
    } else {
        a < b - TOL * b.abs().max(1.0)
    }
}

/// Repeatedly removes the facility whose removal lowers the total cost the
/// most (lowest index on ties) until no removal lowers it.
pub fn myopic_prune(inst: &Instance, sol: &Solution) -> Solution {
    let mut open: Vec<usize> = sol.opened.iter().copied().collect();
    let edges = inst.edges();
    let mut best_d = vec![0.0; edges.len()];
    let mut best_i = vec![usize::MAX; edges.len()];
    let mut second = vec![0.0; edges.len()];
    loop {
        if open.is_empty() {
            break;
        }
        for (k, e) in edges.iter().enumerate() {
            let (mut b, mut bi, mut s) = (f64::INFINITY, usize::MAX, f64::INFINITY);
            for &i in &open {
                let d = inst.edge_distance(e, i);
                if d < b {
                    s = b;
                    b = d;
                    bi = i;
                } else if d < s {
                    s = d;
                }
            }
            best_d[k] = b;
            best_i[k] = bi;
            second[k] = s;
        }
        let total_with = |skip: Option<usize>| -> f64 {
            let opening: f64 = open.iter().filter(|&&i| Some(i) != skip).map(|&i| inst.f(i)).sum();
            let conn: f64 = edges
                .iter()
                .enumerate()
                .map(|(k, e)| e.mass * if Some(best_i[k]) == skip { second[k] } else { best_d[k] })
                .sum();
            opening + conn
        };
        let current = total_with(None);
        let mut pick: Option<(usize, f64)> = None;
        for (pos, &i) in open.iter().enumerate() {
            let c = total_with(Some(i));
            if strictly_below(c, current) && pick.map_or(true, |(_, pc)| strictly_below(c, pc)) {
                pick = Some((pos, c));
            }
        }
        match pick {
            Some((pos, _)) => {
                open.remove(pos);
            }
            None => break,
        }
    }
    open.into_iter().collect()
}

fn ties(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= TOL * b.abs().max(1.0)
}

/// Exact optimum by exhaustive search with bound pruning; ties go to the
/// lexicographically smallest set.
pub fn brute_force_opt(inst: &Instance) -> Result<(Solution, CostReport)> {
    let n = inst.n();
    if n > BRUTE_FORCE_CAP {
        return Err(Error::BudgetExceeded { n, cap: BRUTE_FORCE_CAP });
    }
    let edges = inst.edges();
    let m = edges.len();
    if m == 0 {
        let sol = Solution::empty();
        let cost = inst.total_cost(&sol);
        return Ok((sol, cost));
    }
    let mut dist = vec![0.0; n * m];
    for i in 0..n {
        for (k, e) in edges.iter().enumerate() {
            dist[i * m + k] = inst.edge_distance(e, i);
        }
    }
    let mut sufmin = vec![f64::INFINITY; (n + 1) * m];
    for i in (0..n).rev() {
        for k in 0..m {
            sufmin[i * m + k] = sufmin[(i + 1) * m + k].min(dist[i * m + k]);
        }
    }
    let mass: Vec<f64> = edges.iter().map(|e| e.mass).collect();
    let mut search = Search {
        n,
        m,
        dist: &dist,
        sufmin: &sufmin,
        mass: &mass,
        opening: inst.opening(),
        best_cost: f64::INFINITY,
        best: None,
        chosen: Vec::with_capacity(n),
        bufs: vec![vec![f64::INFINITY; m]; n + 1],
    };
    search.dfs(0, 0.0);
    let sol: Solution = search.best.unwrap_or_default().into_iter().collect();
    let cost = inst.total_cost(&sol);
    Ok((sol, cost))
}

struct Search<'a> {
    n: usize,
    m: usize,
    dist: &'a [f64],
    sufmin: &'a [f64],
    mass: &'a [f64],
    opening: &'a [f64],
    best_cost: f64,
    best: Option<BTreeSet<usize>>,
    chosen: Vec<usize>,
    bufs: Vec<Vec<f64>>,
}

impl Search<'_> {
    fn dfs(&mut self, i: usize, open_cost: f64) {
        let m = self.m;
        let cur = &self.bufs[i];
        let mut bound = open_cost;
        for k in 0..m {
            bound += self.mass[k] * cur[k].min(self.sufmin[i * m + k]);
        }
        if bound > self.best_cost && !ties(bound, self.best_cost) {
            return;
        }
        if i == self.n {
            let cost = bound;
            if cost == f64::INFINITY && self.best.is_some() {
                return;
            }
            let set: BTreeSet<usize> = self.chosen.iter().copied().collect();
            let better = match &self.best {
                None => true,
                Some(b) => {
                    if ties(cost, self.best_cost) {
                        set < *b
                    } else {
                        cost < self.best_cost
                    }
                }
            };
            if better {
                self.best_cost = if self.best.is_some() && ties(cost, self.best_cost) {
                    self.best_cost.min(cost)
                } else {
                    cost
                };
                self.best = Some(set);
            }
            return;
        }
        if self.opening[i].is_finite() {
            let (head, tail) = self.bufs.split_at_mut(i + 1);
            let next = &mut tail[0];
            for k in 0..m {
                next[k] = head[i][k].min(self.dist[i * m + k]);
            }
            self.chosen.push(i);
            self.dfs(i + 1, open_cost + self.opening[i]);
            self.chosen.pop();
        }
        let (head, tail) = self.bufs.split_at_mut(i + 1);
        tail[0].copy_from_slice(&head[i]);
        self.dfs(i + 1, open_cost);
    }
}
