//! The facility-selection policies exposed by the command line and the benchmark harness.

use std::fmt;
use std::str::FromStr;

use lflp_core::baselines::{brute_force_opt, gr_home, gr_work, jmmsv, myopic_prune, ProjectedInstance};
use lflp_core::engine::{canonical_discounts, run_k_chance, run_two_chance, Params, Trace};
use lflp_core::{CostReport, HyperEdges, Instance, Solution};

/// A facility-selection policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    /// 2-Chance greedy `2-GR(γ, η)`.
    TwoGr,
    /// 2-Chance greedy followed by myopic pruning, `2-GRP(γ, η)`.
    TwoGrp,
    /// Single-location greedy on the edge expansion (every edge is a client at both sides).
    Jmmsv,
    /// Single-location greedy on home locations, `GR-H`.
    GrHome,
    /// Single-location greedy on work locations, `GR-W`.
    GrWork,
    /// K-Chance greedy with discounts `(1, …, 1, 0)`.
    KGr,
    /// Exact optimum by exhaustive search.
    Opt,
}

impl Policy {
    /// Every policy, in command-line order.
    pub const ALL: [Policy; 7] =
        [Policy::TwoGr, Policy::TwoGrp, Policy::Jmmsv, Policy::GrHome, Policy::GrWork, Policy::KGr, Policy::Opt];

    /// Command-line name.
    pub fn name(self) -> &'static str {
        match self {
            Policy::TwoGr => "2gr",
            Policy::TwoGrp => "2grp",
            Policy::Jmmsv => "jmmsv",
            Policy::GrHome => "grh",
            Policy::GrWork => "grw",
            Policy::KGr => "kgr",
            Policy::Opt => "opt",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown policy {s:?}; expected one of 2gr, 2grp, jmmsv, grh, grw, kgr, opt"))
    }
}

/// Parameters shared by all policies; each policy reads the ones it needs.
#[derive(Debug, Clone)]
pub struct PolicyParams {
    /// Discount factor of the 2-Chance policies.
    pub gamma: f64,
    /// Opening cost scalar of the 2-Chance policies; for `kgr` it defaults to `K`.
    pub eta: Option<f64>,
    /// Hyperedges for `kgr`; `None` uses the instance's home-work pairs (`K = 2`).
    pub hyper: Option<HyperEdges>,
}

impl Default for PolicyParams {
    fn default() -> Self {
        PolicyParams { gamma: 1.0, eta: None, hyper: None }
    }
}

/// Opening cost scalar used by the 2-Chance policies when none is given.
pub const DEFAULT_ETA: f64 = 2.0;

/// Outcome of one policy run.
#[derive(Debug, Clone)]
pub struct PolicyRun {
    /// Policy that produced the solution.
    pub policy: Policy,
    /// Opened facilities.
    pub solution: Solution,
    /// Cost on the input instance (or on the hyperedges for `kgr`).
    pub cost: CostReport,
    /// Event log of the greedy process, when the policy has one.
    pub trace: Option<Trace>,
}

/// Runs `policy` on `inst`.
pub fn run_policy(inst: &Instance, policy: Policy, params: &PolicyParams) -> lflp_core::Result<PolicyRun> {
    let eta = params.eta.unwrap_or(DEFAULT_ETA);
    let (solution, trace) = match policy {
        Policy::TwoGr | Policy::TwoGrp => {
            let r = run_two_chance(inst, Params::new(params.gamma, eta)?)?;
            let sol = if policy == Policy::TwoGrp { myopic_prune(inst, &r.solution) } else { r.solution };
            (sol, Some(r.trace))
        }
        Policy::Jmmsv => {
            let r = jmmsv(&ProjectedInstance::edge_expansion(inst))?;
            (r.solution, Some(r.trace))
        }
        Policy::GrHome => (gr_home(inst)?.0, None),
        Policy::GrWork => (gr_work(inst)?.0, None),
        Policy::Opt => (brute_force_opt(inst)?.0, None),
        Policy::KGr => {
            let pairs;
            let hyper = match &params.hyper {
                Some(h) => h,
                None => {
                    pairs = HyperEdges::from_instance(inst);
                    &pairs
                }
            };
            let k = hyper.k();
            let r = run_k_chance(inst, hyper, &canonical_discounts(k), params.eta.unwrap_or(k as f64))?;
            return Ok(PolicyRun { policy, solution: r.solution, cost: r.cost, trace: Some(r.trace) });
        }
    };
    let cost = inst.total_cost(&solution);
    Ok(PolicyRun { policy, solution, cost, trace })
}
