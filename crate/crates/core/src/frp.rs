//! Factor-revealing programs.
//!
//! A program is a symbolic system of constraints over the variables `f`, `α`, `d`, `c` and `q`.
//! Programs are built from a [`ProgramSpec`], candidate points ([`FRSolution`]) are checked
//! exactly with [`check_solution`], weak programs are converted into strong ones with
//! [`batch_wfrp_to_sfrp`] and [`batch_mflp`], and every program except the weak one can be
//! written as CPLEX-style LP text with [`export_lp`].
//!
//! Indexing conventions: single-index programs use `ℓ ∈ [1, m]` stored at `ℓ - 1`; block programs
//! use cells `(a, b)` with `1 ≤ b ≤ a ≤ n` stored at [`cell_index`].

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::pos;

/// Absolute tolerance used by [`check_solution`].
pub const CHECK_TOL: f64 = 1e-8;

/// Number of cells `(a, b)` with `1 ≤ b ≤ a ≤ n`.
pub fn cell_count(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Storage index of cell `(a, b)` (both 1-based, `b ≤ a`).
pub fn cell_index(a: usize, b: usize) -> usize {
    debug_assert!(1 <= b && b <= a);
    a * (a - 1) / 2 + (b - 1)
}

/// All cells `(a, b)` of an `n`-block program in storage order.
pub fn cells(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=n).flat_map(|a| (1..=a).map(move |b| (a, b)))
}

/// Program family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    /// Weakly factor-revealing program `WFRP(m, χ, γ, η)`.
    Wfrp,
    /// Single-location weak program `WFRP_MFLP(m)`.
    WfrpMflp,
    /// Strongly factor-revealing program `SFRP(n, γ, η)`.
    Sfrp,
    /// Single-location strong program `SFRP_MFLP(n)`.
    SfrpMflp,
    /// Lower-bound program `LBLP(m)`.
    Lblp,
    /// K-location strong program `SFRK(n, K)`.
    Sfrk,
}

impl Kind {
    /// Upper-case name used in file names and reports.
    pub fn name(self) -> &'static str {
        match self {
            Kind::Wfrp => "WFRP",
            Kind::WfrpMflp => "WFRP_MFLP",
            Kind::Sfrp => "SFRP",
            Kind::SfrpMflp => "SFRP_MFLP",
            Kind::Lblp => "LBLP",
            Kind::Sfrk => "SFRK",
        }
    }
}

/// Program kind together with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProgramSpec {
    /// `WFRP(m, χ, γ, η)` with `m = chi.len()`.
    Wfrp {
        /// Order key of every index.
        chi: Vec<f64>,
        /// Discount factor.
        gamma: f64,
        /// Opening cost scalar.
        eta: f64,
    },
    /// `WFRP_MFLP(m)`.
    WfrpMflp {
        /// Number of indices.
        m: usize,
    },
    /// `SFRP(n, γ, η)`.
    Sfrp {
        /// Number of blocks.
        n: usize,
        /// Discount factor.
        gamma: f64,
        /// Opening cost scalar.
        eta: f64,
    },
    /// `SFRP_MFLP(n)`.
    SfrpMflp {
        /// Number of indices.
        n: usize,
    },
    /// `LBLP(m)`.
    Lblp {
        /// Number of indices.
        m: usize,
    },
    /// `SFRK(n, K)`: the strong program with `γ = 1` and `η = K`.
    Sfrk {
        /// Number of blocks.
        n: usize,
        /// Number of locations per individual.
        k: f64,
    },
}

/// Which optional vectors a program uses and how long the indexed vectors are.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    /// Length of `alpha` and `d`.
    pub len: usize,
    /// Whether `c` is a variable of the program.
    pub has_c: bool,
    /// Whether `q` is a variable of the program.
    pub has_q: bool,
    /// Whether indices are cells `(a, b)` rather than single indices.
    pub cells: bool,
}

fn fmt_param(x: f64) -> String {
    if libm::trunc(x) == x && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{}", x)
    }
}

impl ProgramSpec {
    /// Program family.
    pub fn kind(&self) -> Kind {
        match self {
            ProgramSpec::Wfrp { .. } => Kind::Wfrp,
            ProgramSpec::WfrpMflp { .. } => Kind::WfrpMflp,
            ProgramSpec::Sfrp { .. } => Kind::Sfrp,
            ProgramSpec::SfrpMflp { .. } => Kind::SfrpMflp,
            ProgramSpec::Lblp { .. } => Kind::Lblp,
            ProgramSpec::Sfrk { .. } => Kind::Sfrk,
        }
    }

    /// Expected solution shape.
    pub fn shape(&self) -> Shape {
        match *self {
            ProgramSpec::Wfrp { ref chi, .. } => Shape { len: chi.len(), has_c: true, has_q: false, cells: false },
            ProgramSpec::WfrpMflp { m } => Shape { len: m, has_c: false, has_q: false, cells: false },
            ProgramSpec::SfrpMflp { n } => Shape { len: n, has_c: false, has_q: false, cells: false },
            ProgramSpec::Lblp { m } => Shape { len: m, has_c: true, has_q: false, cells: false },
            ProgramSpec::Sfrp { n, .. } | ProgramSpec::Sfrk { n, .. } => {
                Shape { len: cell_count(n), has_c: true, has_q: true, cells: true }
            }
        }
    }

    /// `(γ, η)` of the programs that carry them; `SFRK(n, K)` reports `(1, K)`.
    pub fn gamma_eta(&self) -> Option<(f64, f64)> {
        match *self {
            ProgramSpec::Wfrp { gamma, eta, .. } | ProgramSpec::Sfrp { gamma, eta, .. } => Some((gamma, eta)),
            ProgramSpec::Sfrk { k, .. } => Some((1.0, k)),
            _ => None,
        }
    }

    /// Validates the parameter domains.
    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidParams(s));
        match *self {
            ProgramSpec::Wfrp { ref chi, gamma, eta } => {
                if chi.iter().any(|x| !x.is_finite()) {
                    return bad("chi must be finite".into());
                }
                check_gamma_eta(gamma, eta)
            }
            ProgramSpec::Sfrp { n, gamma, eta } => {
                if n == 0 {
                    return bad("n must be at least 1".into());
                }
                check_gamma_eta(gamma, eta)
            }
            ProgramSpec::Sfrk { n, k } => {
                if n == 0 {
                    return bad("n must be at least 1".into());
                }
                if !(k >= 1.0) || !k.is_finite() {
                    return bad(format!("K must be at least 1, got {k}"));
                }
                Ok(())
            }
            ProgramSpec::WfrpMflp { m } | ProgramSpec::Lblp { m } | ProgramSpec::SfrpMflp { n: m } => {
                if m == 0 {
                    return bad("size must be at least 1".into());
                }
                Ok(())
            }
        }
    }

    /// Whether `(γ, η)` lies outside `γ ∈ [0, 1]`, `η ∈ [1, 1 + γ]`, where the approximation analysis applies.
    pub fn outside_theory_range(&self) -> bool {
        match self.gamma_eta() {
            Some((g, e)) if self.kind() != Kind::Sfrk => !(1.0..=1.0 + g).contains(&e),
            _ => false,
        }
    }

    /// File stem `{kind}_{params}`, for example `SFRP_25_1_2`.
    pub fn file_stem(&self) -> String {
        match *self {
            ProgramSpec::Wfrp { ref chi, gamma, eta } => {
                format!("WFRP_{}_{}_{}", chi.len(), fmt_param(gamma), fmt_param(eta))
            }
            ProgramSpec::WfrpMflp { m } => format!("WFRP_MFLP_{m}"),
            ProgramSpec::Sfrp { n, gamma, eta } => format!("SFRP_{n}_{}_{}", fmt_param(gamma), fmt_param(eta)),
            ProgramSpec::SfrpMflp { n } => format!("SFRP_MFLP_{n}"),
            ProgramSpec::Lblp { m } => format!("LBLP_{m}"),
            ProgramSpec::Sfrk { n, k } => format!("SFRK_{n}_{}", fmt_param(k)),
        }
    }
}

fn check_gamma_eta(gamma: f64, eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidParams(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidParams(format!("eta must be positive and finite, got {eta}")));
    }
    Ok(())
}

/// Candidate assignment of the program variables.
///
/// Vectors that a program does not use are left empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FRSolution {
    /// Opening cost variable.
    pub f: f64,
    /// `α` per index or cell.
    #[serde(default)]
    pub alpha: Vec<f64>,
    /// `d` per index or cell.
    #[serde(default)]
    pub d: Vec<f64>,
    /// `c` per index or cell.
    #[serde(default)]
    pub c: Vec<f64>,
    /// `q` per cell.
    #[serde(default)]
    pub q: Vec<f64>,
}

impl FRSolution {
    /// All-zero point of the given shape with opening cost `f`.
    pub fn zeros(spec: &ProgramSpec, f: f64) -> Self {
        let s = spec.shape();
        FRSolution {
            f,
            alpha: vec![0.0; s.len],
            d: vec![0.0; s.len],
            c: if s.has_c { vec![0.0; s.len] } else { Vec::new() },
            q: if s.has_q { vec![0.0; s.len] } else { Vec::new() },
        }
    }

    fn value(&self, v: Var) -> f64 {
        match v {
            Var::F => self.f,
            Var::Alpha(i) => self.alpha[i],
            Var::D(i) => self.d[i],
            Var::C(i) => self.c[i],
            Var::Q(i) => self.q[i],
        }
    }
}

/// A program variable; indices are storage indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// Opening cost.
    F,
    /// `α`.
    Alpha(usize),
    /// `d`.
    D(usize),
    /// `c`.
    C(usize),
    /// `q`.
    Q(usize),
}

/// Symbolic expression over program variables.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Constant.
    Const(f64),
    /// Variable.
    Var(Var),
    /// Sum of terms.
    Sum(Vec<Expr>),
    /// Constant multiple.
    Scale(f64, Box<Expr>),
    /// Variable times an expression.
    Mul(Var, Box<Expr>),
    /// Minimum of two expressions.
    Min(Box<Expr>, Box<Expr>),
    /// Positive part `max(0, ·)`.
    Pos(Box<Expr>),
}

impl Expr {
    fn var(v: Var) -> Self {
        Expr::Var(v)
    }

    fn scaled(s: f64, v: Var) -> Self {
        if s == 1.0 {
            Expr::Var(v)
        } else {
            Expr::Scale(s, Box::new(Expr::Var(v)))
        }
    }

    fn neg(v: Var) -> Self {
        Expr::Scale(-1.0, Box::new(Expr::Var(v)))
    }

    fn pos(e: Expr) -> Self {
        Expr::Pos(Box::new(e))
    }

    fn mul(v: Var, e: Expr) -> Self {
        Expr::Mul(v, Box::new(e))
    }

    /// Evaluates the expression exactly as written.
    pub fn eval(&self, sol: &FRSolution) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => sol.value(*v),
            Expr::Sum(ts) => ts.iter().map(|t| t.eval(sol)).sum(),
            Expr::Scale(s, e) => s * e.eval(sol),
            Expr::Mul(v, e) => sol.value(*v) * e.eval(sol),
            Expr::Min(a, b) => a.eval(sol).min(b.eval(sol)),
            Expr::Pos(e) => pos(e.eval(sol)),
        }
    }
}

/// Constraint sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// `lhs ≤ rhs`.
    Le,
    /// `lhs ≥ rhs`.
    Ge,
    /// `lhs = rhs`.
    Eq,
}

/// One constraint of a program.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Family label such as `SFR.iii`.
    pub family: &'static str,
    /// 1-based indices identifying the member of the family.
    pub index: Vec<usize>,
    /// Left-hand side.
    pub lhs: Expr,
    /// Sense.
    pub sense: Sense,
    /// Right-hand side.
    pub rhs: Expr,
}

/// A built program: objective (maximized) and constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct FRProgram {
    /// Kind and parameters.
    pub spec: ProgramSpec,
    /// Objective to maximize.
    pub objective: Expr,
    /// Constraint list; nonnegativity of all variables is implicit.
    pub constraints: Vec<Constraint>,
}

impl FRProgram {
    /// Distinct family labels in order of first appearance.
    pub fn families(&self) -> Vec<&'static str> {
        let mut out: Vec<&'static str> = Vec::new();
        for c in &self.constraints {
            if !out.contains(&c.family) {
                out.push(c.family);
            }
        }
        out
    }

    /// Constraints of one family.
    pub fn family(&self, name: &str) -> impl Iterator<Item = &Constraint> {
        let name = String::from(name);
        self.constraints.iter().filter(move |c| c.family == name)
    }
}

struct Builder {
    cons: Vec<Constraint>,
}

impl Builder {
    fn push(&mut self, family: &'static str, index: Vec<usize>, lhs: Expr, sense: Sense, rhs: Expr) {
        self.cons.push(Constraint { family, index, lhs, sense, rhs });
    }
}

/// Builds the symbolic program for `spec`.
pub fn build(spec: &ProgramSpec) -> Result<FRProgram> {
    spec.validate()?;
    let mut b = Builder { cons: Vec::new() };
    let objective = match *spec {
        ProgramSpec::Wfrp { ref chi, gamma, eta } => build_wfrp(&mut b, chi, gamma, eta),
        ProgramSpec::Sfrp { n, gamma, eta } => build_sfrp(&mut b, n, gamma, eta, false),
        ProgramSpec::Sfrk { n, k } => build_sfrp(&mut b, n, 1.0, k, true),
        ProgramSpec::WfrpMflp { m } => build_mflp(&mut b, m, false),
        ProgramSpec::SfrpMflp { n } => build_mflp(&mut b, n, true),
        ProgramSpec::Lblp { m } => build_lblp(&mut b, m),
    };
    Ok(FRProgram { spec: spec.clone(), objective, constraints: b.cons })
}

fn weighted_value(a: f64, alpha: Var, c: Var) -> Expr {
    Expr::Sum(vec![Expr::scaled(a, alpha), Expr::Scale(-(a - 1.0), Box::new(Expr::var(c)))])
}

fn build_wfrp(b: &mut Builder, chi: &[f64], gamma: f64, eta: f64) -> Expr {
    let m = chi.len();
    for l in 0..m {
        for l2 in 0..m {
            if chi[l] < chi[l2] {
                b.push(
                    "FR.i",
                    vec![l + 1, l2 + 1],
                    Expr::scaled(gamma, Var::Alpha(l2)),
                    Sense::Le,
                    Expr::Sum(vec![Expr::var(Var::C(l)), Expr::var(Var::D(l)), Expr::var(Var::D(l2))]),
                );
            }
        }
    }
    for l in 0..m {
        let terms = (0..m)
            .filter(|&l2| chi[l2] >= chi[l])
            .map(|l2| {
                let mn = Expr::Min(Box::new(Expr::var(Var::Alpha(l))), Box::new(Expr::var(Var::Alpha(l2))));
                Expr::pos(Expr::Sum(vec![Expr::Scale(gamma, Box::new(mn)), Expr::neg(Var::D(l2))]))
            })
            .collect();
        b.push("FR.ii", vec![l + 1], Expr::Sum(terms), Sense::Le, Expr::scaled(eta, Var::F));
    }
    for l in 0..m {
        b.push("FR.iii", vec![l + 1], Expr::var(Var::C(l)), Sense::Le, Expr::var(Var::Alpha(l)));
    }
    let mut norm = vec![Expr::var(Var::F)];
    norm.extend((0..m).map(|l| Expr::var(Var::D(l))));
    b.push("FR.iv", Vec::new(), Expr::Sum(norm), Sense::Le, Expr::Const(1.0));
    let a = (1.0 + gamma) / eta;
    Expr::Sum((0..m).map(|l| weighted_value(a, Var::Alpha(l), Var::C(l))).collect())
}

fn build_sfrp(b: &mut Builder, n: usize, gamma: f64, eta: f64, k_variant: bool) -> Expr {
    let all: Vec<(usize, usize)> = cells(n).collect();
    let alpha = |a, bb| Var::Alpha(cell_index(a, bb));
    let dv = |a, bb| Var::D(cell_index(a, bb));
    let cv = |a, bb| Var::C(cell_index(a, bb));
    let qv = |a, bb| Var::Q(cell_index(a, bb));
    for &(a, bb) in &all {
        for &(a2, b2) in &all {
            if bb < b2 {
                b.push("SFR.i", vec![a, bb, a2, b2], Expr::var(alpha(a, bb)), Sense::Le, Expr::var(alpha(a2, b2)));
            }
        }
    }
    for &(a, bb) in &all {
        for &(a2, b2) in &all {
            if a < a2 {
                b.push(
                    "SFR.ii",
                    vec![a, bb, a2, b2],
                    Expr::scaled(gamma, alpha(a2, b2)),
                    Sense::Le,
                    Expr::Sum(vec![Expr::var(cv(a, bb)), Expr::var(dv(a, bb)), Expr::var(dv(a2, b2))]),
                );
            }
        }
    }
    for a in 1..n {
        let mut terms = Vec::new();
        for a2 in a + 1..=n {
            for b2 in 1..=a {
                let inner = Expr::Sum(vec![Expr::scaled(gamma, alpha(a2, b2)), Expr::neg(dv(a2, b2))]);
                terms.push(Expr::mul(qv(a2, b2), Expr::pos(inner)));
            }
            for b2 in a + 1..=a2 {
                let inner = Expr::Sum(vec![Expr::scaled(gamma, alpha(a, a)), Expr::neg(dv(a2, b2))]);
                terms.push(Expr::mul(qv(a2, b2), Expr::pos(inner)));
            }
        }
        b.push("SFR.iii", vec![a], Expr::Sum(terms), Sense::Le, Expr::scaled(eta, Var::F));
    }
    for &(a, bb) in &all {
        b.push("SFR.iv", vec![a, bb], Expr::var(dv(a, bb)), Sense::Le, Expr::var(alpha(a, bb)));
    }
    for &(a, bb) in &all {
        b.push("SFR.v", vec![a, bb], Expr::var(cv(a, bb)), Sense::Le, Expr::var(alpha(a, bb)));
    }
    let mut norm = vec![Expr::var(Var::F)];
    norm.extend(all.iter().map(|&(a, bb)| Expr::mul(qv(a, bb), Expr::var(dv(a, bb)))));
    b.push("SFR.vi", Vec::new(), Expr::Sum(norm), Sense::Le, Expr::Const(1.0));
    for bb in 1..=n {
        let col = (bb..=n).map(|a| Expr::var(qv(a, bb))).collect();
        b.push("SFR.vii", vec![bb], Expr::Sum(col), Sense::Eq, Expr::Const(1.0));
    }
    if k_variant {
        Expr::Sum(all.iter().map(|&(a, bb)| Expr::mul(qv(a, bb), Expr::var(alpha(a, bb)))).collect())
    } else {
        let w = (1.0 + gamma) / eta;
        Expr::Sum(all.iter().map(|&(a, bb)| Expr::mul(qv(a, bb), weighted_value(w, alpha(a, bb), cv(a, bb)))).collect())
    }
}

fn build_mflp(b: &mut Builder, m: usize, strong: bool) -> Expr {
    for l in 0..m.saturating_sub(1) {
        b.push("MFLP.i", vec![l + 1, l + 2], Expr::var(Var::Alpha(l)), Sense::Le, Expr::var(Var::Alpha(l + 1)));
    }
    let lo = if strong { 1 } else { 0 };
    for l in lo..m {
        for l2 in lo..m {
            if l != l2 {
                b.push(
                    "MFLP.ii",
                    vec![l + 1, l2 + 1],
                    Expr::var(Var::Alpha(l2)),
                    Sense::Le,
                    Expr::Sum(vec![Expr::var(Var::Alpha(l)), Expr::var(Var::D(l)), Expr::var(Var::D(l2))]),
                );
            }
        }
    }
    for l in 0..m {
        let start = if strong { l + 1 } else { l };
        let terms =
            (start..m).map(|l2| Expr::pos(Expr::Sum(vec![Expr::var(Var::Alpha(l)), Expr::neg(Var::D(l2))]))).collect();
        b.push("MFLP.iii", vec![l + 1], Expr::Sum(terms), Sense::Le, Expr::var(Var::F));
    }
    let mut norm = vec![Expr::var(Var::F)];
    norm.extend((0..m).map(|l| Expr::var(Var::D(l))));
    b.push("MFLP.iv", Vec::new(), Expr::Sum(norm), Sense::Le, Expr::Const(1.0));
    Expr::Sum((0..m).map(|l| Expr::var(Var::Alpha(l))).collect())
}

fn build_lblp(b: &mut Builder, m: usize) -> Expr {
    for l in 0..m.saturating_sub(1) {
        b.push("LB.i", vec![l + 1, l + 2], Expr::var(Var::Alpha(l)), Sense::Le, Expr::var(Var::Alpha(l + 1)));
    }
    for l in 0..m {
        for l2 in l..m {
            b.push(
                "LB.ii",
                vec![l + 1, l2 + 1],
                Expr::var(Var::Alpha(l2)),
                Sense::Le,
                Expr::Sum(vec![Expr::var(Var::C(l)), Expr::var(Var::D(l)), Expr::var(Var::D(l2))]),
            );
        }
    }
    for l in 0..m {
        b.push("LB.iii", vec![l + 1], Expr::var(Var::C(l)), Sense::Le, Expr::var(Var::Alpha(l)));
    }
    for l in 0..m {
        let terms =
            (l..m).map(|l2| Expr::pos(Expr::Sum(vec![Expr::var(Var::Alpha(l)), Expr::neg(Var::D(l2))]))).collect();
        b.push("LB.iv", vec![l + 1], Expr::Sum(terms), Sense::Le, Expr::scaled(2.0, Var::F));
    }
    let mut norm = vec![Expr::var(Var::F)];
    norm.extend((0..m).map(|l| Expr::var(Var::D(l))));
    b.push("LB.v", Vec::new(), Expr::Sum(norm), Sense::Eq, Expr::Const(1.0));
    Expr::Sum((0..m).map(|l| Expr::var(Var::Alpha(l))).collect())
}

/// One violated constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Family label, or `nonneg` for a negative variable.
    pub family: String,
    /// 1-based member indices.
    pub index: Vec<usize>,
    /// Evaluated left-hand side.
    pub lhs: f64,
    /// Evaluated right-hand side.
    pub rhs: f64,
    /// Amount by which the constraint is violated.
    pub excess: f64,
}

/// Result of [`check_solution`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    /// Whether every constraint holds within the check tolerance.
    pub feasible: bool,
    /// Violated constraints.
    pub violations: Vec<Violation>,
    /// Objective value.
    pub objective: f64,
}

fn check_shape(spec: &ProgramSpec, sol: &FRSolution) -> Result<()> {
    let s = spec.shape();
    let mismatch = |name: &str, got: usize| {
        Err(Error::ShapeMismatch(format!("{}: `{name}` has length {got}, expected {}", spec.file_stem(), s.len)))
    };
    if sol.alpha.len() != s.len {
        return mismatch("alpha", sol.alpha.len());
    }
    if sol.d.len() != s.len {
        return mismatch("d", sol.d.len());
    }
    if s.has_c && sol.c.len() != s.len {
        return mismatch("c", sol.c.len());
    }
    if s.has_q && sol.q.len() != s.len {
        return mismatch("q", sol.q.len());
    }
    if !s.has_c && !sol.c.is_empty() {
        return mismatch("c", sol.c.len());
    }
    if !s.has_q && !sol.q.is_empty() {
        return mismatch("q", sol.q.len());
    }
    Ok(())
}

fn var_label(spec: &ProgramSpec, i: usize) -> Vec<usize> {
    if spec.shape().cells {
        let mut a = 1;
        while cell_index(a, a) < i {
            a += 1;
        }
        vec![a, i - cell_index(a, 1) + 1]
    } else {
        vec![i + 1]
    }
}

/// Evaluates every constraint and the objective of `prog` at `sol`.
pub fn check_solution(prog: &FRProgram, sol: &FRSolution) -> Result<CheckReport> {
    check_solution_tol(prog, sol, CHECK_TOL)
}

/// [`check_solution`] with absolute tolerance `tol`.
pub fn check_solution_tol(prog: &FRProgram, sol: &FRSolution, tol: f64) -> Result<CheckReport> {
    check_shape(&prog.spec, sol)?;
    let mut violations = Vec::new();
    let mut nonneg = |name: &str, vals: &[f64]| {
        for (i, &v) in vals.iter().enumerate() {
            if !(v >= -tol) || !v.is_finite() {
                violations.push(Violation {
                    family: format!("nonneg.{name}"),
                    index: var_label(&prog.spec, i),
                    lhs: v,
                    rhs: 0.0,
                    excess: if v.is_finite() { -v } else { f64::INFINITY },
                });
            }
        }
    };
    nonneg("f", core::slice::from_ref(&sol.f));
    nonneg("alpha", &sol.alpha);
    nonneg("d", &sol.d);
    nonneg("c", &sol.c);
    nonneg("q", &sol.q);
    for c in &prog.constraints {
        let l = c.lhs.eval(sol);
        let r = c.rhs.eval(sol);
        let excess = match c.sense {
            Sense::Le => l - r,
            Sense::Ge => r - l,
            Sense::Eq => (l - r).abs(),
        };
        if !(excess <= tol) {
            violations.push(Violation {
                family: c.family.to_string(),
                index: c.index.clone(),
                lhs: l,
                rhs: r,
                excess: if excess.is_nan() { f64::INFINITY } else { excess },
            });
        }
    }
    let objective = prog.objective.eval(sol);
    Ok(CheckReport { feasible: violations.is_empty() && objective.is_finite(), violations, objective })
}

/// Evaluates one constraint member, returning `(lhs, rhs)`.
pub fn evaluate(prog: &FRProgram, sol: &FRSolution, family: &str, index: &[usize]) -> Result<(f64, f64)> {
    check_shape(&prog.spec, sol)?;
    prog.constraints
        .iter()
        .find(|c| c.family == family && c.index == index)
        .map(|c| (c.lhs.eval(sol), c.rhs.eval(sol)))
        .ok_or_else(|| Error::InvalidParams(format!("no constraint {family} {index:?}")))
}

/// Objective of a solution under `spec`, evaluated without building the constraint system.
pub fn objective(spec: &ProgramSpec, sol: &FRSolution) -> Result<f64> {
    check_shape(spec, sol)?;
    let s = spec.shape();
    let value = |i: usize| match spec.gamma_eta() {
        Some((g, e)) if spec.kind() != Kind::Sfrk => {
            let a = (1.0 + g) / e;
            a * sol.alpha[i] - (a - 1.0) * sol.c[i]
        }
        _ => sol.alpha[i],
    };
    Ok((0..s.len).map(|i| if s.has_q { sol.q[i] * value(i) } else { value(i) }).sum())
}

// ---------------------------------------------------------------------------
// Batching
// ---------------------------------------------------------------------------

/// 1-based start indices `ℓ_1 < … < ℓ_n` of consecutive blocks turning `m` indices into `n`.
///
/// Requires `⌈m/n⌉·(n − 1) ≤ m`; blocks `2..n` have exactly `⌈m/n⌉` indices and block 1 the rest.
pub fn mflp_blocks(m: usize, n: usize) -> Result<Vec<usize>> {
    if n == 0 || m < n {
        return Err(Error::InvalidParams(format!("need 1 ≤ n ≤ m, got m={m}, n={n}")));
    }
    let k = m.div_ceil(n);
    if k * (n - 1) > m {
        return Err(Error::InvalidParams(format!("m={m} is too small for uniform blocks of size {k}")));
    }
    Ok((1..=n).map(|a| if a == 1 { 1 } else { 1 + m - k * (n + 1 - a) }).collect())
}

/// Sums `alpha`, `d` and (when present) `c` over consecutive blocks with the given 1-based starts.
pub fn naive_batch(sol: &FRSolution, starts: &[usize]) -> FRSolution {
    let m = sol.alpha.len();
    let sum = |v: &[f64], a: usize| -> f64 {
        if v.is_empty() {
            return 0.0;
        }
        let lo = starts[a] - 1;
        let hi = starts.get(a + 1).map_or(m, |s| s - 1);
        v[lo..hi].iter().sum()
    };
    let n = starts.len();
    FRSolution {
        f: sol.f,
        alpha: (0..n).map(|a| sum(&sol.alpha, a)).collect(),
        d: (0..n).map(|a| sum(&sol.d, a)).collect(),
        c: if sol.c.is_empty() { Vec::new() } else { (0..n).map(|a| sum(&sol.c, a)).collect() },
        q: Vec::new(),
    }
}

/// Converts a `WFRP_MFLP(m)` point into an `SFRP_MFLP(n)` point with the same objective.
///
/// While `m` is too small for uniform blocks every index is split into two copies carrying
/// half of its `α` and `d`.
pub fn batch_mflp(sol: &FRSolution, n: usize) -> Result<FRSolution> {
    let m = sol.alpha.len();
    if n == 0 || m < n {
        return Err(Error::InvalidParams(format!("need 1 ≤ n ≤ m, got m={m}, n={n}")));
    }
    if sol.d.len() != m {
        return Err(Error::ShapeMismatch(format!("alpha has length {m} but d has length {}", sol.d.len())));
    }
    let mut cur = sol.clone();
    cur.c.clear();
    cur.q.clear();
    while cur.alpha.len().div_ceil(n) * (n - 1) > cur.alpha.len() {
        let split = |v: &[f64]| v.iter().flat_map(|&x| [x / 2.0, x / 2.0]).collect::<Vec<_>>();
        cur.alpha = split(&cur.alpha);
        cur.d = split(&cur.d);
    }
    let starts = mflp_blocks(cur.alpha.len(), n)?;
    Ok(naive_batch(&cur, &starts))
}

/// Scales an `SFRK(n, K)` point to `SFRK(n, K′)` by multiplying `α`, `d` and `c` by `K′/K`.
pub fn scale_k_solution(sol: &FRSolution, k: f64, k_new: f64) -> Result<FRSolution> {
    if !(k >= 1.0) || !(k_new >= 1.0) || k_new > k || !k.is_finite() {
        return Err(Error::InvalidParams(format!("need 1 ≤ K′ ≤ K, got K={k}, K′={k_new}")));
    }
    let s = k_new / k;
    let scale = |v: &[f64]| v.iter().map(|x| x * s).collect();
    Ok(FRSolution { f: sol.f, alpha: scale(&sol.alpha), d: scale(&sol.d), c: scale(&sol.c), q: sol.q.clone() })
}

#[derive(Debug, Clone, Copy)]
struct Item {
    alpha: f64,
    d: f64,
    c: f64,
    chi: f64,
}

/// Removes indices with `d > α` from a `WFRP` point by folding their distance into the index
/// of largest `α`, whose `α` is raised to at least its own `d`.
///
/// Returns the reduced order keys and point. The objective does not decrease when
/// `(1 + γ)/η ≥ 1`.
pub fn fold_distances(chi: &[f64], sol: &FRSolution) -> (Vec<f64>, FRSolution) {
    let m = sol.alpha.len();
    if m == 0 {
        return (Vec::new(), sol.clone());
    }
    let mut star = 0;
    for l in 1..m {
        if sol.alpha[l] > sol.alpha[star] {
            star = l;
        }
    }
    let mut out = sol.clone();
    if out.d[star] > out.alpha[star] {
        out.alpha[star] = out.d[star];
    }
    let folded: Vec<usize> = (0..m).filter(|&l| l != star && sol.d[l] > sol.alpha[l]).collect();
    let extra: f64 = folded.iter().map(|&l| sol.d[l]).sum();
    out.alpha[star] += extra;
    out.d[star] += extra;
    let keep: Vec<usize> = (0..m).filter(|l| !folded.contains(l)).collect();
    let pick = |v: &[f64]| keep.iter().map(|&l| v[l]).collect::<Vec<_>>();
    let chi2 = pick(chi);
    (chi2, FRSolution { f: out.f, alpha: pick(&out.alpha), d: pick(&out.d), c: pick(&out.c), q: Vec::new() })
}

/// Pivot indices `ℓ_1, …, ℓ_k` in increasing order of `χ` (and strictly increasing `α`).
fn pivots(items: &[Item]) -> Vec<usize> {
    let better = |x: &Item, xi: usize, y: &Item, yi: usize| -> bool {
        match x.alpha.partial_cmp(&y.alpha).unwrap_or(Ordering::Equal) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => (x.chi, xi) < (y.chi, yi),
        }
    };
    let mut out = Vec::new();
    let mut bound = f64::INFINITY;
    loop {
        let mut best: Option<usize> = None;
        for (i, it) in items.iter().enumerate() {
            if it.chi < bound && best.map_or(true, |b| better(it, i, &items[b], b)) {
                best = Some(i);
            }
        }
        match best {
            Some(b) => {
                out.push(b);
                bound = items[b].chi;
            }
            None => break,
        }
    }
    out.reverse();
    out
}

#[derive(Debug, Clone, Copy, Default)]
struct Cell {
    q: f64,
    alpha: f64,
    d: f64,
    c: f64,
    real: bool,
}

/// Converts a feasible `WFRP(m, χ, γ, η)` point into an `SFRP(n, γ, η)` point.
///
/// The indices are first cleaned with [`fold_distances`]. Pivots are the records of `α` along
/// increasing `χ`; each index joins the group of the last pivot not after it in `χ`.
/// Indices are laid out by increasing `α` (equal values ordered by group, a pivot last within its
/// group) on a line of total mass `n`, every index carrying mass `n/m` and values scaled by `m/n`;
/// column `b` is the slice `(b − 1, b]` of the line and each group goes to the row of the column
/// holding the end of its last index. Cells average
/// the slices that fall into them. Cells without mass get `α = d = c = v`, where `v` copies the
/// nearest cell above in the same column when one exists and is otherwise the smallest value
/// compatible with the earlier columns and with the rows below.
///
/// The result is not re-checked here; callers validate it with [`check_solution`].
pub fn batch_wfrp_to_sfrp(spec: &ProgramSpec, sol: &FRSolution, n: usize) -> Result<(ProgramSpec, FRSolution)> {
    let ProgramSpec::Wfrp { chi, gamma, eta } = spec else {
        return Err(Error::Unsupported(format!("batching expects a WFRP point, got {}", spec.kind().name())));
    };
    spec.validate()?;
    check_shape(spec, sol)?;
    if n == 0 {
        return Err(Error::InvalidParams("target n must be at least 1".into()));
    }
    let (gamma, eta) = (*gamma, *eta);
    let out_spec = ProgramSpec::Sfrp { n, gamma, eta };
    let (chi, clean) = fold_distances(chi, sol);
    let items: Vec<Item> = (0..clean.alpha.len())
        .map(|l| Item { alpha: clean.alpha[l], d: clean.d[l], c: clean.c[l], chi: chi[l] })
        .collect();
    let m = items.len();
    if m == 0 {
        return Err(Error::InvalidParams("cannot batch an empty point".into()));
    }
    let piv = pivots(&items);
    let is_pivot = {
        let mut v = vec![false; m];
        for &p in &piv {
            v[p] = true;
        }
        v
    };
    let group: Vec<usize> =
        items.iter().map(|it| piv.iter().rposition(|&p| items[p].chi <= it.chi).unwrap_or(0)).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| {
        items[x]
            .alpha
            .partial_cmp(&items[y].alpha)
            .unwrap_or(Ordering::Equal)
            .then(group[x].cmp(&group[y]))
            .then(is_pivot[x].cmp(&is_pivot[y]))
            .then(items[x].chi.partial_cmp(&items[y].chi).unwrap_or(Ordering::Equal))
            .then(x.cmp(&y))
    });
    // Row of each group: the column holding the end of its last index on the line.
    let mut row_of_group = vec![1usize; piv.len()];
    for (p, &l) in order.iter().enumerate() {
        let end = ((p + 1) * n).div_ceil(m).clamp(1, n);
        row_of_group[group[l]] = row_of_group[group[l]].max(end);
    }

    // Positions are measured in units of 1/m: index p covers [p·n, (p+1)·n], column j covers [(j−1)·m, j·m].
    let mut grid = vec![Cell::default(); cell_count(n)];
    let scale = m as f64 / n as f64;
    for (p, &l) in order.iter().enumerate() {
        let row = row_of_group[group[l]];
        let (lo, hi) = (p * n, (p + 1) * n);
        let first = lo / m + 1;
        let last = hi.div_ceil(m);
        for j in first..=last.min(n) {
            let overlap = hi.min(j * m).saturating_sub(lo.max((j - 1) * m));
            if overlap == 0 {
                continue;
            }
            debug_assert!(j <= row);
            let w = overlap as f64 / m as f64;
            let cell = &mut grid[cell_index(row, j)];
            cell.q += w;
            cell.alpha += w * items[l].alpha * scale;
            cell.d += w * items[l].d * scale;
            cell.c += w * items[l].c * scale;
            cell.real = true;
        }
    }
    for cell in grid.iter_mut().filter(|c| c.real) {
        cell.alpha /= cell.q;
        cell.d /= cell.q;
        cell.c /= cell.q;
    }
    // Largest γ·α − d over real cells in rows ≥ t, indexed by t.
    let mut below = vec![0.0f64; n + 2];
    for t in (1..=n).rev() {
        let here = (1..=t)
            .map(|b| grid[cell_index(t, b)])
            .filter(|c| c.real)
            .map(|c| gamma * c.alpha - c.d)
            .fold(0.0f64, f64::max);
        below[t] = below[t + 1].max(here);
    }
    let mut left_max = 0.0f64;
    for tau in 1..=n {
        let mut col_max = left_max;
        for t in tau..=n {
            let idx = cell_index(t, tau);
            if grid[idx].real {
                col_max = col_max.max(grid[idx].alpha);
                continue;
            }
            let above = (tau..t).rev().map(|s| grid[cell_index(s, tau)]).find(|c| c.real);
            let v = match above {
                Some(c) => c.alpha.max(left_max),
                None => left_max.max(below[t + 1] / 2.0),
            };
            grid[idx] = Cell { q: 0.0, alpha: v, d: v, c: v, real: false };
            col_max = col_max.max(v);
        }
        left_max = col_max;
    }
    let out = FRSolution {
        f: clean.f,
        alpha: grid.iter().map(|c| c.alpha).collect(),
        d: grid.iter().map(|c| c.d).collect(),
        c: grid.iter().map(|c| c.c).collect(),
        q: grid.iter().map(|c| c.q).collect(),
    };
    Ok((out_spec, out))
}

// ---------------------------------------------------------------------------
// LP export
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum LpVar {
    Prog(Var),
    Aux(usize),
}

#[derive(Debug, Default, Clone)]
struct Poly {
    constant: f64,
    lin: BTreeMap<LpVar, f64>,
    quad: BTreeMap<(LpVar, LpVar), f64>,
}

impl Poly {
    fn add_lin(&mut self, v: LpVar, c: f64) {
        *self.lin.entry(v).or_insert(0.0) += c;
    }

    fn key(&self) -> String {
        let mut s = format!("{:?}", self.constant.to_bits());
        for (v, c) in &self.lin {
            let _ = write!(s, "|{v:?}:{}", c.to_bits());
        }
        s
    }
}

struct Lowering {
    aux: Vec<Poly>,
    cache: BTreeMap<String, usize>,
}

impl Lowering {
    /// Adds `coef · e` to `out`. `pos_ok` tells whether positive parts may be relaxed at this sign.
    fn lower(&mut self, e: &Expr, coef: f64, pos_ok: bool, out: &mut Poly) -> Result<()> {
        match e {
            Expr::Const(c) => out.constant += coef * c,
            Expr::Var(v) => out.add_lin(LpVar::Prog(*v), coef),
            Expr::Sum(ts) => {
                for t in ts {
                    self.lower(t, coef, pos_ok, out)?;
                }
            }
            Expr::Scale(s, inner) => {
                let ok = if *s >= 0.0 { pos_ok } else { false };
                self.lower(inner, coef * s, ok, out)?;
            }
            Expr::Mul(v, inner) => {
                let mut p = Poly::default();
                self.lower(inner, 1.0, pos_ok && coef >= 0.0, &mut p)?;
                if !p.quad.is_empty() {
                    return Err(Error::Unsupported("products of more than two variables".into()));
                }
                out.add_lin(LpVar::Prog(*v), coef * p.constant);
                for (x, c) in p.lin {
                    *out.quad.entry((LpVar::Prog(*v), x)).or_insert(0.0) += coef * c;
                }
            }
            Expr::Min(..) => return Err(Error::Unsupported("min terms have no LP form".into())),
            Expr::Pos(inner) => {
                if !(pos_ok && coef >= 0.0) {
                    return Err(Error::Unsupported("positive part on the non-bounding side".into()));
                }
                let mut p = Poly::default();
                self.lower(inner, 1.0, false, &mut p)?;
                if !p.quad.is_empty() {
                    return Err(Error::Unsupported("positive part of a quadratic term".into()));
                }
                let key = p.key();
                let id = match self.cache.get(&key) {
                    Some(&id) => id,
                    None => {
                        let id = self.aux.len();
                        self.aux.push(p);
                        self.cache.insert(key, id);
                        id
                    }
                };
                out.add_lin(LpVar::Aux(id), coef);
            }
        }
        Ok(())
    }
}

fn var_name(spec: &ProgramSpec, v: LpVar) -> String {
    let cells = spec.shape().cells;
    let field = |i: usize, f: &str| {
        if cells {
            let ab = var_label(spec, i);
            format!("a{}_b{}_{f}", ab[0], ab[1])
        } else {
            format!("l{}_{f}", i + 1)
        }
    };
    match v {
        LpVar::Aux(k) => format!("z{}", k + 1),
        LpVar::Prog(Var::F) => "f".into(),
        LpVar::Prog(Var::Alpha(i)) => field(i, "alpha"),
        LpVar::Prog(Var::D(i)) => field(i, "d"),
        LpVar::Prog(Var::C(i)) => field(i, "c"),
        LpVar::Prog(Var::Q(i)) => field(i, "q"),
    }
}

struct LineWriter {
    out: String,
    line: String,
}

impl LineWriter {
    fn token(&mut self, t: &str) {
        if self.line.len() + t.len() + 1 > 100 && !self.line.trim().is_empty() {
            self.out.push_str(&self.line);
            self.out.push('\n');
            self.line = String::from("  ");
        }
        self.line.push(' ');
        self.line.push_str(t);
    }

    fn end(&mut self) {
        if !self.line.trim().is_empty() {
            self.out.push_str(&self.line);
            self.out.push('\n');
        }
        self.line.clear();
    }
}

fn fmt_coef(c: f64, first: bool) -> (String, String) {
    let sign = if c < 0.0 { "-" } else if first { "" } else { "+" };
    let a = c.abs();
    let mag = if a == 1.0 { String::new() } else { format!("{a}") };
    (sign.into(), mag)
}

fn write_poly(w: &mut LineWriter, spec: &ProgramSpec, p: &Poly, quad_scale: f64, objective: bool) {
    let mut first = true;
    let mut any = false;
    for (v, &c) in &p.lin {
        if c == 0.0 {
            continue;
        }
        let (s, mag) = fmt_coef(c, first);
        let name = var_name(spec, *v);
        let tok = match (s.is_empty(), mag.is_empty()) {
            (true, true) => name,
            (true, false) => format!("{mag} {name}"),
            (false, true) => format!("{s} {name}"),
            (false, false) => format!("{s} {mag} {name}"),
        };
        w.token(&tok);
        first = false;
        any = true;
    }
    let quads: Vec<_> = p.quad.iter().filter(|(_, &c)| c != 0.0).collect();
    if !quads.is_empty() {
        w.token(if first { "[" } else { "+ [" });
        let mut qfirst = true;
        for ((x, y), &c) in quads {
            let (s, mag) = fmt_coef(c * quad_scale, qfirst);
            let term = format!("{} * {}", var_name(spec, *x), var_name(spec, *y));
            let tok = match (s.is_empty(), mag.is_empty()) {
                (true, true) => term,
                (true, false) => format!("{mag} {term}"),
                (false, true) => format!("{s} {term}"),
                (false, false) => format!("{s} {mag} {term}"),
            };
            w.token(&tok);
            qfirst = false;
        }
        w.token(if objective { "] / 2" } else { "]" });
        any = true;
    }
    if !any {
        w.token("0 f");
    }
}

fn lp_name(family: &str, index: &[usize]) -> String {
    let mut s: String = family.chars().map(|ch| if ch == '.' { '_' } else { ch }).collect();
    for i in index {
        let _ = write!(s, "_{i}");
    }
    s
}

/// Renders `prog` as CPLEX-style LP text.
///
/// Positive parts on the bounding side of a constraint become auxiliary variables `z` with
/// `z ≥ expr` and `z ≥ 0`; products of two variables are written as bracketed quadratic terms.
/// `WFRP` has no LP form and is rejected with [`Error::Unsupported`].
pub fn export_lp(prog: &FRProgram) -> Result<String> {
    let spec = &prog.spec;
    if spec.kind() == Kind::Wfrp {
        return Err(Error::Unsupported("WFRP contains min terms without an LP form".into()));
    }
    let mut low = Lowering { aux: Vec::new(), cache: BTreeMap::new() };
    let mut obj = Poly::default();
    low.lower(&prog.objective, 1.0, false, &mut obj)?;
    let mut rows = Vec::with_capacity(prog.constraints.len());
    for c in &prog.constraints {
        let mut p = Poly::default();
        let (lsign, rsign) = match c.sense {
            Sense::Le => (true, false),
            Sense::Ge => (false, true),
            Sense::Eq => (false, false),
        };
        low.lower(&c.lhs, 1.0, lsign, &mut p)?;
        let mut r = Poly::default();
        low.lower(&c.rhs, 1.0, rsign, &mut r)?;
        p.constant -= r.constant;
        for (v, x) in r.lin {
            p.add_lin(v, -x);
        }
        for (k2, x) in r.quad {
            *p.quad.entry(k2).or_insert(0.0) -= x;
        }
        rows.push((lp_name(c.family, &c.index), p, c.sense));
    }

    let mut w = LineWriter { out: String::new(), line: String::new() };
    let _ = writeln!(w.out, "\\ {}", spec.file_stem());
    w.out.push_str("Maximize\n");
    w.line.push_str(" obj:");
    let mut obj_quad = obj.clone();
    for v in obj_quad.quad.values_mut() {
        *v *= 2.0;
    }
    obj_quad.constant = 0.0;
    write_poly(&mut w, spec, &obj_quad, 1.0, true);
    w.end();
    w.out.push_str("Subject To\n");
    for (name, p, sense) in &rows {
        let _ = write!(w.line, " {name}:");
        write_poly(&mut w, spec, p, 1.0, false);
        let op = match sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        w.token(op);
        w.token(&format!("{}", -p.constant + 0.0));
        w.end();
    }
    for (k2, p) in low.aux.iter().enumerate() {
        let mut def = Poly::default();
        def.add_lin(LpVar::Aux(k2), 1.0);
        for (v, x) in &p.lin {
            def.add_lin(*v, -x);
        }
        let _ = write!(w.line, " z{}_def:", k2 + 1);
        write_poly(&mut w, spec, &def, 1.0, false);
        w.token(">=");
        w.token(&format!("{}", p.constant + 0.0));
        w.end();
    }
    w.out.push_str("Bounds\n");
    let s = spec.shape();
    let mut vars = vec![Var::F];
    vars.extend((0..s.len).map(Var::Alpha));
    vars.extend((0..s.len).map(Var::D));
    if s.has_c {
        vars.extend((0..s.len).map(Var::C));
    }
    if s.has_q {
        vars.extend((0..s.len).map(Var::Q));
    }
    for v in vars {
        let _ = writeln!(w.out, " {} >= 0", var_name(spec, LpVar::Prog(v)));
    }
    for k2 in 0..low.aux.len() {
        let _ = writeln!(w.out, " z{} >= 0", k2 + 1);
    }
    w.out.push_str("End\n");
    Ok(w.out)
}
