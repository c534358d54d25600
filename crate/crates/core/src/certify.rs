//! Runtime certificates for 2-Chance Greedy executions.
//!
//! * [`check_structural`] verifies the three structural properties linking candidate costs,
//!   connection times and distances on a finished trace.
//! * [`dual_certificate`] builds the per-edge dual assignment and checks that it covers the cost
//!   of the returned solution.
//! * [`wfrp_from_region`] turns a service region of a trace into a normalized point of the weakly
//!   factor-revealing program.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::engine::{Params, Trace};
use crate::error::{Error, Result};
use crate::frp::{FRSolution, ProgramSpec};
use crate::instance::{pos, Instance, Solution};

/// Tolerance of the structural and dual checks.
pub const CERT_TOL: f64 = 1e-7;

const H: usize = 0;
const W: usize = 1;

fn slack(tol: f64, lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + tol * rhs.abs().max(1.0)
}

/// The structural property a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Property {
    /// `γ·α(e′) ≤ d(e_L, ψ(e,L)) + d(e_L, i) + d(e′_L′, i)` whenever `Y(e,L) < Y(e′,L′)`.
    #[serde(rename = "i")]
    Precedence,
    /// `Σ_{e′: χ(e′) ≥ χ(e)} τ_e′·(γ·min{α(e), α(e′)} − d(e′_σ, i))^+ ≤ η·f_i`.
    #[serde(rename = "ii")]
    Star,
    /// `d(e_L, ψ(e,L)) ≤ α(e)` for every connected side.
    #[serde(rename = "iii")]
    Reach,
}

/// One failed structural inequality with its witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralViolation {
    /// Violated property.
    pub property: Property,
    /// Facility `i` (absent for property iii).
    pub facility: Option<usize>,
    /// Edge `e`.
    pub edge: usize,
    /// Side of `e`.
    pub side: usize,
    /// Second edge `e′` (property i only).
    pub other_edge: Option<usize>,
    /// Side of `e′` (property i only).
    pub other_side: Option<usize>,
    /// Evaluated left-hand side.
    pub lhs: f64,
    /// Evaluated right-hand side.
    pub rhs: f64,
}

/// Outcome of [`check_structural`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StructuralReport {
    /// Number of inequalities evaluated.
    pub checked: usize,
    /// Failed inequalities.
    pub violations: Vec<StructuralViolation>,
}

impl StructuralReport {
    /// Whether no inequality failed.
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn check_trace_shape(inst: &Instance, trace: &Trace) -> Result<()> {
    let m = inst.edges().len();
    if trace.sides != 2 || trace.alpha.len() != m || trace.psi.len() != m || trace.connect_time.len() != m {
        return Err(Error::ShapeMismatch(format!(
            "trace does not describe the {m} two-sided edges of the instance"
        )));
    }
    if trace.psi.iter().any(|p| p.len() != 2)
        || trace.connect_time.iter().any(|t| t.len() != 2)
        || trace.psi.iter().flatten().flatten().any(|&i| i >= inst.n())
    {
        return Err(Error::ShapeMismatch("trace sides or facilities out of range".into()));
    }
    Ok(())
}

fn side_location(inst: &Instance, e: usize, side: usize) -> usize {
    let edge = &inst.edges()[e];
    if side == H {
        edge.h
    } else {
        edge.w
    }
}

/// Side of edge `e` closer to facility `i`; ties go to the home side.
pub fn closer_side(inst: &Instance, e: usize, i: usize) -> usize {
    let edge = &inst.edges()[e];
    if inst.d(edge.w, i) < inst.d(edge.h, i) {
        W
    } else {
        H
    }
}

/// Checks the three structural properties on a finished two-chance trace.
///
/// Property (i) relies on the triangle inequality and is only guaranteed on metric instances.
pub fn check_structural(inst: &Instance, trace: &Trace, p: Params) -> Result<StructuralReport> {
    check_structural_tol(inst, trace, p, CERT_TOL)
}

/// [`check_structural`] with relative tolerance `tol`.
pub fn check_structural_tol(inst: &Instance, trace: &Trace, p: Params, tol: f64) -> Result<StructuralReport> {
    check_trace_shape(inst, trace)?;
    let gamma = p.gamma;
    let m = inst.edges().len();
    let n = inst.n();
    let mut rep = StructuralReport::default();

    // (iii)
    for e in 0..m {
        for side in [H, W] {
            if let Some(j) = trace.psi[e][side] {
                let lhs = inst.d(side_location(inst, e, side), j);
                rep.checked += 1;
                if !slack(tol, lhs, trace.alpha[e]) {
                    rep.violations.push(StructuralViolation {
                        property: Property::Reach,
                        facility: None,
                        edge: e,
                        side,
                        other_edge: None,
                        other_side: None,
                        lhs,
                        rhs: trace.alpha[e],
                    });
                }
            }
        }
    }

    // (i): for each facility, sweep sides by connection time keeping the smallest right-hand prefix.
    let mut sides: Vec<(f64, usize, usize)> =
        (0..m).flat_map(|e| [H, W].map(|s| (trace.connect_time[e][s], e, s))).collect();
    sides.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    for i in 0..n {
        let mut best: Option<(f64, usize, usize)> = None;
        let mut k = 0;
        while k < sides.len() {
            let t = sides[k].0;
            let mut end = k;
            while end < sides.len() && sides[end].0 == t {
                end += 1;
            }
            if let Some((base, e, s)) = best {
                for &(_, e2, s2) in &sides[k..end] {
                    let lhs = gamma * trace.alpha[e2];
                    let rhs = base + inst.d(side_location(inst, e2, s2), i);
                    rep.checked += 1;
                    if !slack(tol, lhs, rhs) {
                        rep.violations.push(StructuralViolation {
                            property: Property::Precedence,
                            facility: Some(i),
                            edge: e,
                            side: s,
                            other_edge: Some(e2),
                            other_side: Some(s2),
                            lhs,
                            rhs,
                        });
                    }
                }
            }
            for &(_, e, s) in &sides[k..end] {
                let Some(j) = trace.psi[e][s] else { continue };
                let loc = side_location(inst, e, s);
                let base = inst.d(loc, j) + inst.d(loc, i);
                if best.map_or(true, |(b, _, _)| base < b) {
                    best = Some((base, e, s));
                }
            }
            k = end;
        }
    }

    // (ii)
    for i in 0..n {
        let fi = inst.f(i);
        if !fi.is_finite() {
            continue;
        }
        let sig: Vec<usize> = (0..m).map(|e| closer_side(inst, e, i)).collect();
        let chi: Vec<f64> = (0..m).map(|e| trace.connect_time[e][sig[e]]).collect();
        let dist: Vec<f64> = (0..m).map(|e| inst.d(side_location(inst, e, sig[e]), i)).collect();
        for e in 0..m {
            let lhs: f64 = (0..m)
                .filter(|&e2| chi[e2] >= chi[e])
                .map(|e2| inst.edges()[e2].mass * pos(gamma * trace.alpha[e].min(trace.alpha[e2]) - dist[e2]))
                .sum();
            let rhs = p.eta * fi;
            rep.checked += 1;
            if !slack(tol, lhs, rhs) {
                rep.violations.push(StructuralViolation {
                    property: Property::Star,
                    facility: Some(i),
                    edge: e,
                    side: sig[e],
                    other_edge: None,
                    other_side: None,
                    lhs,
                    rhs,
                });
            }
        }
    }
    Ok(rep)
}

/// Class of an edge in the dual assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeClass {
    /// Partially connected, or both sides served by the same facility.
    #[serde(rename = "E1")]
    Single,
    /// Both sides served by two distinct facilities.
    #[serde(rename = "E2")]
    Double,
}

/// Per-edge dual values and their total against the solution cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    /// `μ(e)` per edge.
    pub mu: Vec<f64>,
    /// Class per edge.
    pub class: Vec<EdgeClass>,
    /// Side playing the home role in the formula, per edge.
    pub home_side: Vec<usize>,
    /// `Σ μ(e)`.
    pub sum_mu: f64,
    /// Total cost of the opened set.
    pub cost: f64,
}

/// Builds the dual assignment of a finished two-chance trace and checks `Σ μ ≥ cost`.
///
/// With `A = (1 + γ)/η`, a single-facility edge gets `τ·(A·α − (A − 1)·d_H)` and a two-facility edge
/// gets `τ·(A·α − (d_H + d_W)/η + d_H)`, where `d_L = d(e_L, ψ(e, L))` and the home role goes to
/// the connected side (the nearer one when both are connected).
pub fn dual_certificate(inst: &Instance, trace: &Trace, p: Params) -> Result<DualCertificate> {
    dual_certificate_tol(inst, trace, p, CERT_TOL)
}

/// [`dual_certificate`] with relative tolerance `tol`.
pub fn dual_certificate_tol(inst: &Instance, trace: &Trace, p: Params, tol: f64) -> Result<DualCertificate> {
    check_trace_shape(inst, trace)?;
    let a = (1.0 + p.gamma) / p.eta;
    let m = inst.edges().len();
    let mut mu = Vec::with_capacity(m);
    let mut class = Vec::with_capacity(m);
    let mut home_side = Vec::with_capacity(m);
    for e in 0..m {
        let tau = inst.edges()[e].mass;
        let dl = |s: usize| trace.psi[e][s].map(|j| inst.d(side_location(inst, e, s), j));
        let (dh, dw) = (dl(H), dl(W));
        let home = match (dh, dw) {
            (Some(x), Some(y)) => {
                if y < x {
                    W
                } else {
                    H
                }
            }
            (None, Some(_)) => W,
            _ => H,
        };
        let double = matches!((trace.psi[e][H], trace.psi[e][W]), (Some(x), Some(y)) if x != y);
        let d_home = dl(home).ok_or_else(|| Error::InvalidInstance(format!("edge {e} was never connected")))?;
        let value = if double {
            let d_other = dl(1 - home).unwrap_or(f64::INFINITY);
            a * trace.alpha[e] - (d_home + d_other) / p.eta + d_home
        } else {
            a * trace.alpha[e] - (a - 1.0) * d_home
        };
        mu.push(tau * value);
        class.push(if double { EdgeClass::Double } else { EdgeClass::Single });
        home_side.push(home);
    }
    let sol: Solution = trace.openings().map(|(i, _)| i).collect();
    let cost = inst.total_cost(&sol).total;
    let sum_mu: f64 = mu.iter().sum();
    if !(sum_mu >= cost - tol * cost.abs().max(1.0)) {
        return Err(Error::CertificateFailure { sum_mu, cost });
    }
    Ok(DualCertificate { mu, class, home_side, sum_mu, cost })
}

/// A facility together with a set of edges it is charged for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceRegion {
    /// Facility index.
    pub facility: usize,
    /// Edge indices; must be nonempty.
    pub edges: Vec<usize>,
}

/// Normalized `WFRP` point of a service region.
///
/// Every edge of mass `τ` becomes `τ` unit indices (masses must be integral). Index values are
/// `α = N·α(e)`, `d = N·d(e, i)` and `c = N·d(e_σ, ψ(e, σ))`, where `σ` is the side nearer to `i`
/// (home on ties) and the other connected side is used when `σ` was never connected. The order key
/// is the connection time of side `σ`, `f = N·f_i`, and `N = 1/(f_i + Σ τ·d(e, i))`.
pub fn wfrp_from_region(
    inst: &Instance,
    trace: &Trace,
    p: Params,
    region: &ServiceRegion,
) -> Result<(ProgramSpec, FRSolution)> {
    check_trace_shape(inst, trace)?;
    let i = region.facility;
    if i >= inst.n() {
        return Err(Error::InvalidParams(format!("facility {i} out of range")));
    }
    if region.edges.is_empty() {
        return Err(Error::InvalidParams("service region has no edges".into()));
    }
    let mut copies = Vec::new();
    for &e in &region.edges {
        let edge = inst.edges().get(e).ok_or_else(|| Error::InvalidParams(format!("edge {e} out of range")))?;
        let r = libm::round(edge.mass);
        if (edge.mass - r).abs() > 1e-9 || r < 1.0 {
            return Err(Error::NonIntegralMass { edge: e, mass: edge.mass });
        }
        copies.extend(core::iter::repeat(e).take(r as usize));
    }
    let denom: f64 = inst.f(i) + copies.iter().map(|&e| inst.edge_distance(&inst.edges()[e], i)).sum::<f64>();
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::DegenerateRegion);
    }
    let nf = 1.0 / denom;
    let mut chi = Vec::with_capacity(copies.len());
    let mut sol = FRSolution { f: nf * inst.f(i), ..FRSolution::default() };
    for &e in &copies {
        let s = closer_side(inst, e, i);
        let used = if trace.psi[e][s].is_some() { s } else { 1 - s };
        let c = trace.psi[e][used]
            .map(|j| inst.d(side_location(inst, e, used), j))
            .ok_or_else(|| Error::InvalidInstance(format!("edge {e} was never connected")))?;
        chi.push(trace.connect_time[e][s]);
        sol.alpha.push(nf * trace.alpha[e]);
        sol.d.push(nf * inst.d(side_location(inst, e, s), i));
        sol.c.push(nf * c);
    }
    Ok((ProgramSpec::Wfrp { chi, gamma: p.gamma, eta: p.eta }, sol))
}

/// Regions used by the certification pipeline: every opened facility with all edges, and every
/// facility with the edges it serves on at least one side.
pub fn standard_regions(inst: &Instance, trace: &Trace) -> Vec<ServiceRegion> {
    let m = inst.edges().len();
    let mut out = Vec::new();
    for (i, _) in trace.openings() {
        if m > 0 {
            out.push(ServiceRegion { facility: i, edges: (0..m).collect() });
        }
        let served: Vec<usize> = (0..m).filter(|&e| trace.psi[e].contains(&Some(i))).collect();
        if !served.is_empty() && served.len() < m {
            out.push(ServiceRegion { facility: i, edges: served });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run_two_chance;
    use alloc::vec;

    #[test]
    fn single_self_edge_certificate() {
        let inst = Instance::new(vec![vec![0.0]], vec![2.0], &[(0, 0, 1.0)]).unwrap();
        let p = Params::new(1.0, 2.0).unwrap();
        let r = run_two_chance(&inst, p).unwrap();
        let cert = dual_certificate(&inst, &r.trace, p).unwrap();
        assert_eq!(cert.class, vec![EdgeClass::Single]);
        assert!((cert.mu[0] - r.trace.alpha[0]).abs() < 1e-12);
        assert!(cert.sum_mu >= cert.cost);
        assert!(check_structural(&inst, &r.trace, p).unwrap().is_ok());
    }

    #[test]
    fn corrupted_serving_facility_breaks_reach() {
        let inst = Instance::new(
            vec![vec![0.0, 5.0], vec![5.0, 0.0]],
            vec![1.0, 1.0],
            &[(0, 0, 1.0), (1, 1, 1.0)],
        )
        .unwrap();
        let p = Params::new(1.0, 1.0).unwrap();
        let mut trace = run_two_chance(&inst, p).unwrap().trace;
        assert!(check_structural(&inst, &trace, p).unwrap().is_ok());
        trace.psi[0] = vec![Some(1), Some(1)];
        let rep = check_structural(&inst, &trace, p).unwrap();
        assert!(rep.violations.iter().any(|v| v.property == Property::Reach && v.edge == 0));
    }

    #[test]
    fn fractional_mass_is_rejected_for_extraction() {
        let inst = Instance::new(vec![vec![0.0]], vec![1.0], &[(0, 0, 1.5)]).unwrap();
        let p = Params::new(1.0, 1.0).unwrap();
        let r = run_two_chance(&inst, p).unwrap();
        let region = ServiceRegion { facility: 0, edges: vec![0] };
        assert!(matches!(wfrp_from_region(&inst, &r.trace, p, &region), Err(Error::NonIntegralMass { .. })));
    }
}
