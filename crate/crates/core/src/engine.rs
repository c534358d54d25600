//! Exact event-driven execution of the 2-Chance and K-Chance greedy algorithms.
//!
//! Every unconnected edge carries a candidate cost `alpha` that grows at unit
//! rate. Two kinds of events stop the clock:
//!
//! * **(a)** an unconnected edge reaches `alpha = d(e, i)` for an opened facility `i`;
//! * **(b)** an unopened location `i` reaches
//!   `sum_{e in U} tau_e (alpha - d(e,i))^+ + sum_{e partial} tau_e (g_k alpha(e) - d(e_L,i))^+ = eta f_i`,
//!   where `k` counts the connected sides of `e` and `e_L` is its nearest
//!   unconnected side.
//!
//! The left-hand side of (b) is piecewise linear in time with breakpoints at
//! the distances `d(e, i)`. Each location keeps its reachable edges sorted by
//! distance together with running sums of `tau` and `tau * d` over the active
//! prefix, so crossing times come from a linear scan of breakpoints instead of
//! time stepping. Crossing times are cached and recomputed only when an edge
//! change can affect them.
//!
//! Within one timestamp, all (a) connections are processed first (ascending
//! edge; every side within reach connects to the lowest-index open facility it
//! reaches), then (b) openings one at a time in ascending location order,
//! re-evaluating after each opening.

use alloc::borrow::Cow;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{pos_diff, CostReport, HyperEdges, Instance, Solution, TOL};

/// Parameters of the 2-Chance greedy algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Discount applied to partially connected edges, in `[0, 1]`.
    pub gamma: f64,
    /// Opening cost scalar, positive.
    pub eta: f64,
}

impl Params {
    /// Validated parameters.
    pub fn new(gamma: f64, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidParams(format!("gamma = {gamma} is outside [0, 1]")));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParams(format!("eta = {eta} must be positive and finite")));
        }
        Ok(Self { gamma, eta })
    }

    /// True when `eta` lies outside `[1, 1 + gamma]`, where the approximation analysis applies.
    pub fn outside_theory_range(&self) -> bool {
        self.eta < 1.0 || self.eta > 1.0 + self.gamma
    }

    /// The discount vector `(1, gamma, 0)` used by the K-sided engine.
    pub fn discounts(&self) -> [f64; 3] {
        [1.0, self.gamma, 0.0]
    }
}

/// Discounts `(1, ..., 1, 0)` of length `k + 1`; paired with `eta = k` this is
/// the canonical K-Chance variant.
pub fn canonical_discounts(k: usize) -> Vec<f64> {
    let mut g = vec![1.0; k + 1];
    g[k] = 0.0;
    g
}

/// Display name of side `s`: `H`, `W`, then `L2`, `L3`, ...
pub fn side_name(s: usize) -> Cow<'static, str> {
    match s {
        0 => Cow::Borrowed("H"),
        1 => Cow::Borrowed("W"),
        _ => Cow::Owned(format!("L{s}")),
    }
}

/// One entry of the event log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Event {
    /// A facility opened.
    Open {
        /// Opened location.
        facility: usize,
        /// Time stamp.
        t: f64,
    },
    /// One side of an edge connected to an opened facility.
    Connect {
        /// Edge index.
        edge: usize,
        /// Side index (0 = home, 1 = work, ...).
        side: usize,
        /// Serving facility.
        facility: usize,
        /// Time stamp.
        t: f64,
    },
}

impl Event {
    /// Time stamp of the event.
    pub fn t(&self) -> f64 {
        match *self {
            Event::Open { t, .. } | Event::Connect { t, .. } => t,
        }
    }
}

/// Full execution record of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    /// Totally ordered event log.
    pub events: Vec<Event>,
    /// Final candidate cost per edge.
    pub alpha: Vec<f64>,
    /// Serving facility per edge and side, `None` when never connected.
    pub psi: Vec<Vec<Option<usize>>>,
    /// Connection time per edge and side; the termination time when never connected.
    pub connect_time: Vec<Vec<f64>>,
    /// Time at which the last edge left the unconnected set.
    pub end_time: f64,
    /// Number of sides per edge.
    pub sides: usize,
}

impl Trace {
    /// Opened facilities in order of opening.
    pub fn openings(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.events.iter().filter_map(|ev| match *ev {
            Event::Open { facility, t } => Some((facility, t)),
            Event::Connect { .. } => None,
        })
    }

    /// Number of connected sides of edge `e`.
    pub fn connected_sides(&self, e: usize) -> usize {
        self.psi[e].iter().filter(|p| p.is_some()).count()
    }
}

/// Outcome of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineResult {
    /// Opened facilities.
    pub solution: Solution,
    /// Event log and final state.
    pub trace: Trace,
    /// Cost of `solution` on the input instance.
    pub cost: CostReport,
}

/// Runs the 2-Chance greedy algorithm.
pub fn run_two_chance(inst: &Instance, p: Params) -> Result<EngineResult> {
    let p = Params::new(p.gamma, p.eta)?;
    let hyper = HyperEdges::from_instance(inst);
    let mut state = EngineState::new(inst, &hyper, &p.discounts(), p.eta)?;
    state.run()?;
    let (solution, trace) = state.into_parts();
    let cost = inst.total_cost(&solution);
    Ok(EngineResult { solution, trace, cost })
}

/// Runs the K-Chance greedy algorithm with `discounts = (g_0, ..., g_K)`,
/// `g_0 = 1 >= g_1 >= ... >= g_K = 0`, where `K = hyper.k()`.
pub fn run_k_chance(inst: &Instance, hyper: &HyperEdges, discounts: &[f64], eta: f64) -> Result<EngineResult> {
    let mut state = EngineState::new(inst, hyper, discounts, eta)?;
    state.run()?;
    let (solution, trace) = state.into_parts();
    let cost = hyper.total_cost(inst, &solution);
    Ok(EngineResult { solution, trace, cost })
}

/// Resumable state of the event-driven process.
#[derive(Debug, Clone)]
pub struct EngineState<'a> {
    inst: &'a Instance,
    hyper: &'a HyperEdges,
    discounts: Vec<f64>,
    eta: f64,
    t: f64,
    opened: Vec<bool>,
    in_u: Vec<bool>,
    u_count: usize,
    alpha: Vec<f64>,
    psi: Vec<Option<usize>>,
    conn: Vec<usize>,
    ctime: Vec<f64>,
    /// Per location: reachable edges sorted by `(d(e,i), e)`.
    order: Vec<Vec<u32>>,
    /// Per location: distances matching `order`.
    dsorted: Vec<Vec<f64>>,
    /// `rank[e * n + i]`: position of `e` in `order[i]`, `u32::MAX` if unreachable.
    rank: Vec<u32>,
    /// Unopened: prefix `order[i][..ptr]` has `d <= t`. Opened: prefix already scanned for (a).
    ptr: Vec<usize>,
    s_tau: Vec<f64>,
    s_taud: Vec<f64>,
    /// Contribution of partially connected edges to each location's opening condition.
    c_part: Vec<f64>,
    next_b: Vec<f64>,
    dirty: Vec<bool>,
    events: Vec<Event>,
    batches: usize,
    scratch: Vec<f64>,
}

impl<'a> EngineState<'a> {
    /// Initial state at time zero.
    pub fn new(inst: &'a Instance, hyper: &'a HyperEdges, discounts: &[f64], eta: f64) -> Result<Self> {
        let k = hyper.k();
        if discounts.len() != k + 1 {
            return Err(Error::InvalidParams(format!("{} discounts for {k} sides", discounts.len())));
        }
        if discounts[0] != 1.0 || discounts[k] != 0.0 {
            return Err(Error::InvalidParams("discounts must start at 1 and end at 0".into()));
        }
        if discounts.windows(2).any(|w| !(w[1] <= w[0]) || w[1] < 0.0) {
            return Err(Error::InvalidParams("discounts must be nonincreasing in [0, 1]".into()));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParams(format!("eta = {eta} must be positive and finite")));
        }
        let n = inst.n();
        let m = hyper.len();
        let mut order = Vec::with_capacity(n);
        let mut dsorted = Vec::with_capacity(n);
        let mut rank = vec![u32::MAX; m * n];
        let mut keyed: Vec<(f64, u32)> = Vec::with_capacity(m);
        for i in 0..n {
            keyed.clear();
            keyed.extend((0..m).filter_map(|e| {
                let d = hyper.distance(inst, e, i);
                d.is_finite().then_some((d, e as u32))
            }));
            keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for (pos, &(_, e)) in keyed.iter().enumerate() {
                rank[e as usize * n + i] = pos as u32;
            }
            order.push(keyed.iter().map(|p| p.1).collect());
            dsorted.push(keyed.iter().map(|p| p.0).collect());
        }
        Ok(Self {
            inst,
            hyper,
            discounts: discounts.to_vec(),
            eta,
            t: 0.0,
            opened: vec![false; n],
            in_u: vec![true; m],
            u_count: m,
            alpha: vec![0.0; m],
            psi: vec![None; m * k],
            conn: vec![0; m],
            ctime: vec![f64::NAN; m * k],
            order,
            dsorted,
            rank,
            ptr: vec![0; n],
            s_tau: vec![0.0; n],
            s_taud: vec![0.0; n],
            c_part: vec![0.0; n],
            next_b: vec![f64::INFINITY; n],
            dirty: vec![true; n],
            events: Vec::new(),
            batches: 0,
            scratch: vec![0.0; n],
        })
    }

    /// Current time.
    pub fn time(&self) -> f64 {
        self.t
    }

    /// Whether every edge has left the unconnected set.
    pub fn is_done(&self) -> bool {
        self.u_count == 0
    }

    /// Events recorded so far.
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Whether location `i` is opened.
    pub fn is_open(&self, i: usize) -> bool {
        self.opened[i]
    }

    /// Current candidate cost of edge `e`.
    pub fn alpha(&self, e: usize) -> f64 {
        if self.in_u[e] {
            self.t
        } else {
            self.alpha[e]
        }
    }

    /// Earliest time `>= now` at which the opening condition of unopened
    /// location `i` holds, or infinity if it never does under the current
    /// connection state.
    pub fn next_event_b_time(&self, i: usize) -> f64 {
        let target = self.eta * self.inst.f(i);
        if !target.is_finite() {
            return f64::INFINITY;
        }
        let slack = target - TOL * target.max(1.0);
        let t = self.t;
        let (ord, ds) = (&self.order[i], &self.dsorted[i]);
        let (mut s, mut sd, mut k) = (self.s_tau[i], self.s_taud[i], self.ptr[i]);
        while k < ord.len() && ds[k] <= t {
            let e = ord[k] as usize;
            if self.in_u[e] {
                let tau = self.hyper.mass(e);
                s += tau;
                sd += tau * ds[k];
            }
            k += 1;
        }
        let c = self.c_part[i];
        if c + s * t - sd >= slack {
            return t;
        }
        loop {
            while k < ord.len() && !self.in_u[ord[k] as usize] {
                k += 1;
            }
            let b = if k < ord.len() { ds[k] } else { f64::INFINITY };
            if s > 0.0 {
                let tc = (target - c + sd) / s;
                if tc <= b {
                    return tc.max(t);
                }
            }
            if k >= ord.len() {
                return f64::INFINITY;
            }
            let tau = self.hyper.mass(ord[k] as usize);
            s += tau;
            sd += tau * b;
            k += 1;
        }
    }

    /// Moves the active prefix of unopened location `i` up to the current time.
    fn advance(&mut self, i: usize) {
        let t = self.t;
        let (ord, ds) = (&self.order[i], &self.dsorted[i]);
        let mut k = self.ptr[i];
        while k < ord.len() && ds[k] <= t {
            let e = ord[k] as usize;
            if self.in_u[e] {
                let tau = self.hyper.mass(e);
                self.s_tau[i] += tau;
                self.s_taud[i] += tau * ds[k];
            }
            k += 1;
        }
        self.ptr[i] = k;
    }

    fn refresh(&mut self, i: usize) -> f64 {
        if self.dirty[i] {
            self.advance(i);
            self.next_b[i] = self.next_event_b_time(i);
            self.dirty[i] = false;
        }
        self.next_b[i]
    }

    /// Earliest (a) time for opened `i`, skipping edges that already left `U`.
    fn next_a(&mut self, i: usize) -> f64 {
        let (ord, ds) = (&self.order[i], &self.dsorted[i]);
        let mut k = self.ptr[i];
        while k < ord.len() && !self.in_u[ord[k] as usize] {
            k += 1;
        }
        self.ptr[i] = k;
        if k < ord.len() {
            ds[k]
        } else {
            f64::INFINITY
        }
    }

    /// Contribution of non-`U` edge `e` to the opening condition of location `j`.
    fn contribution(&self, e: usize, j: usize) -> f64 {
        let k = self.conn[e];
        let kk = self.hyper.k();
        if k == 0 || k == kk {
            return 0.0;
        }
        let mut dmin = f64::INFINITY;
        for (s, &l) in self.hyper.sides(e).iter().enumerate() {
            if self.psi[e * kk + s].is_none() {
                dmin = dmin.min(self.inst.d(l, j));
            }
        }
        self.hyper.mass(e) * pos_diff(self.discounts[k] * self.alpha[e], dmin)
    }

    /// Connects the sides of `e` flagged in `sides` to facility `i` at the current time.
    fn connect(&mut self, e: usize, sides: &[bool], i: usize) {
        let n = self.inst.n();
        let kk = self.hyper.k();
        let was_u = self.in_u[e];
        if !was_u {
            for j in 0..n {
                self.scratch[j] = if self.opened[j] { 0.0 } else { self.contribution(e, j) };
            }
        }
        for (s, &flag) in sides.iter().enumerate() {
            if flag && self.psi[e * kk + s].is_none() {
                self.psi[e * kk + s] = Some(i);
                self.ctime[e * kk + s] = self.t;
                self.conn[e] += 1;
                self.events.push(Event::Connect {
                    edge: e,
                    side: s,
                    facility: i,
                    t: self.t,
                });
            }
        }
        if was_u {
            self.in_u[e] = false;
            self.u_count -= 1;
            self.alpha[e] = self.t;
            let tau = self.hyper.mass(e);
            for j in 0..n {
                if self.opened[j] {
                    continue;
                }
                let r = self.rank[e * n + j];
                if r != u32::MAX && (r as usize) < self.ptr[j] {
                    let d = self.dsorted[j][r as usize];
                    self.s_tau[j] -= tau;
                    self.s_taud[j] -= tau * d;
                    self.dirty[j] = true;
                } else if r != u32::MAX && self.dsorted[j][r as usize] < self.next_b[j] {
                    self.dirty[j] = true;
                }
                self.scratch[j] = 0.0;
            }
        }
        for j in 0..n {
            if self.opened[j] {
                continue;
            }
            let new = self.contribution(e, j);
            let old = self.scratch[j];
            if new != old {
                self.c_part[j] += new - old;
                self.dirty[j] = true;
            }
        }
    }

    fn open(&mut self, i: usize) {
        let kk = self.hyper.k();
        let t = self.t;
        self.opened[i] = true;
        self.events.push(Event::Open { facility: i, t });
        let mut flags = vec![false; kk];
        for e in 0..self.hyper.len() {
            let k = self.conn[e];
            if k == 0 || k == kk {
                continue;
            }
            let reach = self.discounts[k] * self.alpha[e];
            let mut any = false;
            for (s, &l) in self.hyper.sides(e).iter().enumerate() {
                flags[s] = self.psi[e * kk + s].is_none() && reach >= self.inst.d(l, i) - TOL;
                any |= flags[s];
            }
            if any {
                self.connect(e, &flags, i);
            }
        }
        let mut hits = Vec::new();
        let mut k = 0;
        while k < self.order[i].len() && self.dsorted[i][k] <= t + TOL {
            let e = self.order[i][k] as usize;
            if self.in_u[e] {
                hits.push(e);
            }
            k += 1;
        }
        self.ptr[i] = k;
        hits.sort_unstable();
        for e in hits {
            for (s, &l) in self.hyper.sides(e).iter().enumerate() {
                flags[s] = t >= self.inst.d(l, i) - TOL;
            }
            self.connect(e, &flags, i);
        }
    }

    fn batch_limit(&self) -> usize {
        let n = self.inst.n();
        4 * (n * n).max(self.hyper.len()) + n
    }

    /// Advances to the next event time and processes every event at that time.
    /// Returns `Ok(false)` once the process has terminated.
    pub fn step(&mut self) -> Result<bool> {
        if self.is_done() {
            return Ok(false);
        }
        let n = self.inst.n();
        let mut next = f64::INFINITY;
        for i in 0..n {
            let ti = if self.opened[i] { self.next_a(i) } else { self.refresh(i) };
            next = next.min(ti);
        }
        if next == f64::INFINITY {
            let edge = self.in_u.iter().position(|&u| u).unwrap_or(0);
            return Err(Error::Unservable { edge });
        }
        self.t = self.t.max(next);
        let t = self.t;

        let kk = self.hyper.k();
        let mut hits = Vec::new();
        for i in 0..n {
            if !self.opened[i] {
                continue;
            }
            let mut k = self.ptr[i];
            while k < self.order[i].len() && self.dsorted[i][k] <= t + TOL {
                let e = self.order[i][k] as usize;
                if self.in_u[e] {
                    hits.push(e);
                }
                k += 1;
            }
            self.ptr[i] = k;
        }
        hits.sort_unstable();
        hits.dedup();
        let mut target = vec![None; kk];
        let mut flags = vec![false; kk];
        for e in hits {
            for (s, &l) in self.hyper.sides(e).iter().enumerate() {
                target[s] = (0..n).find(|&i| self.opened[i] && t >= self.inst.d(l, i) - TOL);
            }
            let mut facilities: Vec<usize> = target.iter().flatten().copied().collect();
            facilities.sort_unstable();
            facilities.dedup();
            for i in facilities {
                for s in 0..kk {
                    flags[s] = target[s] == Some(i);
                }
                self.connect(e, &flags, i);
            }
        }

        loop {
            let mut fire = None;
            for i in 0..n {
                if !self.opened[i] && self.refresh(i) <= t {
                    fire = Some(i);
                    break;
                }
            }
            match fire {
                Some(i) => self.open(i),
                None => break,
            }
        }

        self.batches += 1;
        if self.batches > self.batch_limit() {
            return Err(Error::NonTermination { batches: self.batches });
        }
        Ok(!self.is_done())
    }

    /// Runs to termination.
    pub fn run(&mut self) -> Result<()> {
        while self.step()? {}
        Ok(())
    }

    /// Final solution and trace. Unconnected sides get the current time as
    /// their connection time.
    pub fn into_parts(self) -> (Solution, Trace) {
        let kk = self.hyper.k();
        let end = self.t;
        let m = self.hyper.len();
        let solution = (0..self.inst.n()).filter(|&i| self.opened[i]).collect();
        let mut psi = Vec::with_capacity(m);
        let mut connect_time = Vec::with_capacity(m);
        for e in 0..m {
            psi.push(self.psi[e * kk..(e + 1) * kk].to_vec());
            connect_time.push(
                self.ctime[e * kk..(e + 1) * kk]
                    .iter()
                    .map(|&c| if c.is_nan() { end } else { c })
                    .collect(),
            );
        }
        let alpha = (0..m).map(|e| if self.in_u[e] { end } else { self.alpha[e] }).collect();
        let trace = Trace {
            events: self.events,
            alpha,
            psi,
            connect_time,
            end_time: end,
            sides: kk,
        };
        (solution, trace)
    }
}

/// Outcome of [`run_time_stepping`].
#[derive(Debug, Clone, PartialEq)]
pub struct SteppingResult {
    /// Opened facilities.
    pub solution: Solution,
    /// Final candidate cost per edge.
    pub alpha: Vec<f64>,
}

/// Fixed-step forward simulation of the K-Chance process, used as a reference for the
/// event-driven engine.
///
/// Time advances in increments of `dt`. At every grid time, unconnected edges first connect to
/// open facilities within reach, then locations whose opening condition holds open one at a time
/// in ascending index order. Event times are therefore rounded up to the grid, so results agree
/// with the exact engine up to `O(dt)` away from near ties.
pub fn run_time_stepping(
    inst: &Instance,
    hyper: &HyperEdges,
    discounts: &[f64],
    eta: f64,
    dt: f64,
) -> Result<SteppingResult> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParams(format!("dt = {dt} must be positive and finite")));
    }
    // Validates the discounts and eta with the same rules as the exact engine.
    EngineState::new(inst, hyper, discounts, eta)?;
    let n = inst.n();
    let m = hyper.len();
    let kk = hyper.k();
    let mut opened = vec![false; n];
    let mut psi = vec![vec![false; kk]; m];
    let mut conn = vec![0usize; m];
    let mut alpha = vec![0.0; m];
    let mut unconnected = m;
    // An edge still unconnected at `d(e, i) + η f_i / τ_e` opens `i` on its own.
    let horizon = (0..m)
        .map(|e| {
            (0..n)
                .map(|i| hyper.distance(inst, e, i) + eta * inst.f(i) / hyper.mass(e))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let max_steps = if horizon.is_finite() { (2.0 * horizon / dt) as u64 + 16 } else { 0 };
    let mut step: u64 = 0;
    while unconnected > 0 {
        if step > max_steps {
            let edge = (0..m).find(|&e| conn[e] == 0).unwrap_or(0);
            return Err(Error::Unservable { edge });
        }
        let t = step as f64 * dt;
        for e in 0..m {
            if conn[e] != 0 {
                continue;
            }
            let mut any = false;
            for (s, &l) in hyper.sides(e).iter().enumerate() {
                if (0..n).any(|i| opened[i] && inst.d(l, i) <= t) {
                    psi[e][s] = true;
                    any = true;
                }
            }
            if any {
                alpha[e] = t;
                conn[e] = psi[e].iter().filter(|&&x| x).count();
                unconnected -= 1;
            }
        }
        loop {
            let fire = (0..n).find(|&i| {
                if opened[i] {
                    return false;
                }
                let mut lhs = 0.0;
                for e in 0..m {
                    let k = conn[e];
                    if k == 0 {
                        lhs += hyper.mass(e) * pos_diff(t, hyper.distance(inst, e, i));
                    } else if k < kk {
                        let dmin = hyper
                            .sides(e)
                            .iter()
                            .enumerate()
                            .filter(|&(s, _)| !psi[e][s])
                            .map(|(_, &l)| inst.d(l, i))
                            .fold(f64::INFINITY, f64::min);
                        lhs += hyper.mass(e) * pos_diff(discounts[k] * alpha[e], dmin);
                    }
                }
                lhs >= eta * inst.f(i)
            });
            let Some(i) = fire else { break };
            opened[i] = true;
            for e in 0..m {
                let k = conn[e];
                if k == kk {
                    continue;
                }
                let reach = if k == 0 { t } else { discounts[k] * alpha[e] };
                let mut any = false;
                for (s, &l) in hyper.sides(e).iter().enumerate() {
                    if !psi[e][s] && reach >= inst.d(l, i) {
                        psi[e][s] = true;
                        any = true;
                    }
                }
                if any {
                    if k == 0 {
                        alpha[e] = t;
                        unconnected -= 1;
                    }
                    conn[e] = psi[e].iter().filter(|&&x| x).count();
                }
            }
        }
        step += 1;
    }
    let solution = (0..n).filter(|&i| opened[i]).collect();
    Ok(SteppingResult { solution, alpha })
}
