//! Command-line front end.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lflp_core::baselines::{brute_force_opt, BRUTE_FORCE_CAP};
use lflp_core::certify::{check_structural_tol, dual_certificate_tol, StructuralReport, CERT_TOL};
use lflp_core::engine::{run_two_chance, Params, Trace};
use lflp_core::frp::{
    batch_mflp, batch_wfrp_to_sfrp, build, check_solution_tol, objective, CheckReport, ProgramSpec, CHECK_TOL,
};
use lflp_core::gen::{gen_synthetic, SynthConfig};
use lflp_core::hardness::{example1_family, lblp_to_instance, vc_to_2lflp, VC_ENUM_CAP};
use lflp_core::{Error as CoreError, Instance};
use serde::Serialize;
use serde_json::json;

use crate::bench::{run_bench, standard_grid, write_csv, BenchConfig, Normalizer};
use crate::io::{
    self, instance_to_json, load_od, parse_graph, program_point_from_json, read_hyperedges, read_instance,
    read_trace_file, write_file, write_lp, write_trace_file, ExtReal, ProgramPoint,
};
use crate::policy::{run_policy, Policy, PolicyParams, DEFAULT_ETA};

/// Two-location facility location toolkit.
#[derive(Debug, Parser)]
#[command(name = "lflp", version, about)]
pub struct Cli {
    /// Master seed for generated instances.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file (or directory for `bench` and `frp export`); standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for `bench`; all cores when absent.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Tolerance of certificate and program checks.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Command to run.
    #[command(subcommand)]
    pub command: Command,
}

/// Subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic instance or assemble one from origin-destination CSVs.
    Gen(GenArgs),
    /// Run one policy on an instance.
    Run(RunArgs),
    /// Benchmark every policy on seeded synthetic instances.
    Bench(BenchArgs),
    /// Run the 2-Chance greedy (or replay a trace) and check its certificates.
    Certify(CertifyArgs),
    /// Build, check, batch and export factor-revealing programs.
    Frp(FrpArgs),
    /// Build and run lower-bound instances.
    LowerBound(LowerBoundArgs),
    /// Run the vertex-cover reduction on a weighted graph.
    Vc(VcArgs),
    /// Exact optimum of a small instance.
    Opt(OptArgs),
}

/// Arguments of `gen`.
#[derive(Debug, Args)]
pub struct GenArgs {
    /// Number of locations.
    #[arg(long, default_value_t = 30)]
    pub n: usize,
    /// Mean opening cost (also the scale of CSV opening values).
    #[arg(long, default_value_t = 20.0)]
    pub fbar: f64,
    /// Distance decay of the commuting model.
    #[arg(long, default_value_t = 0.0)]
    pub iota: f64,
    /// Centroid CSV (`id, x, y`); selects CSV assembly together with --od and --opening.
    #[arg(long, requires_all = ["od", "opening"])]
    pub centroids: Option<PathBuf>,
    /// Origin-destination CSV (`home_id, work_id, count`).
    #[arg(long, requires = "centroids")]
    pub od: Option<PathBuf>,
    /// Opening CSV (`id, cost`).
    #[arg(long, requires = "centroids")]
    pub opening: Option<PathBuf>,
}

/// Arguments of `run`.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// Instance JSON file.
    pub instance: PathBuf,
    /// Policy: 2gr, 2grp, jmmsv, grh, grw, kgr or opt.
    #[arg(long, default_value = "2gr")]
    pub policy: Policy,
    /// Discount factor.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Opening cost scalar (default 2, or K for kgr).
    #[arg(long)]
    pub eta: Option<f64>,
    /// Hyperedge JSON file for kgr.
    #[arg(long)]
    pub hyper: Option<PathBuf>,
    /// Write the event log as JSON Lines to this file.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

/// Normalizing policy of `bench`.
#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NormalizeArg {
    /// Best pruned 2-Chance run.
    Grp,
    /// Best unpruned 2-Chance run.
    Gr,
}

/// Arguments of `bench`.
#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Number of instances; seeds run from --seed upward.
    #[arg(long, default_value_t = 100)]
    pub seeds: u64,
    /// Locations per instance.
    #[arg(long, default_value_t = 30)]
    pub n: usize,
    /// Mean opening cost.
    #[arg(long, default_value_t = 20.0)]
    pub fbar: f64,
    /// Distance decay of the commuting model.
    #[arg(long, default_value_t = 0.0)]
    pub iota: f64,
    /// Normalizing policy.
    #[arg(long, value_enum, default_value_t = NormalizeArg::Grp)]
    pub normalize: NormalizeArg,
    /// Record per-instance wall-clock time.
    #[arg(long)]
    pub timings: bool,
}

/// Arguments of `certify`.
#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Instance JSON file.
    pub instance: PathBuf,
    /// Discount factor.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Opening cost scalar.
    #[arg(long, default_value_t = DEFAULT_ETA)]
    pub eta: f64,
    /// Check this trace file instead of running the greedy.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

/// Arguments of `frp`.
#[derive(Debug, Args)]
pub struct FrpArgs {
    /// Operation.
    #[command(subcommand)]
    pub op: FrpOp,
}

/// `frp` operations.
#[derive(Debug, Subcommand)]
pub enum FrpOp {
    /// Summarize the constraint system of a program.
    Build(ProgramArgs),
    /// Check a program point document (`-` reads standard input).
    Check {
        /// Program point JSON file.
        point: PathBuf,
    },
    /// Batch a weak program point into a strong one.
    Batch {
        /// Program point JSON file of a WFRP or WFRP_MFLP point.
        point: PathBuf,
        /// Number of blocks of the strong program.
        #[arg(long)]
        target: usize,
    },
    /// Write a program as an LP file named after its kind and parameters.
    Export(ProgramArgs),
}

/// Program family selector.
#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    /// Weakly factor-revealing program.
    Wfrp,
    /// Weak single-location program.
    WfrpMflp,
    /// Strongly factor-revealing program.
    Sfrp,
    /// Strong single-location program.
    SfrpMflp,
    /// Lower-bound program.
    Lblp,
    /// Strong program for K locations.
    Sfrk,
}

/// Program parameters.
#[derive(Debug, Args)]
pub struct ProgramArgs {
    /// Program family.
    #[arg(value_enum)]
    pub kind: KindArg,
    /// Number of blocks or indices.
    #[arg(long, short = 'n', alias = "m")]
    pub n: Option<usize>,
    /// Discount factor.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Opening cost scalar.
    #[arg(long, default_value_t = DEFAULT_ETA)]
    pub eta: f64,
    /// Locations per individual (sfrk).
    #[arg(long, default_value_t = 2.0)]
    pub k: f64,
    /// Order keys of every index (wfrp), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub chi: Vec<f64>,
}

impl ProgramArgs {
    fn spec(&self) -> anyhow::Result<ProgramSpec> {
        let size = || self.n.context("--n is required for this program");
        Ok(match self.kind {
            KindArg::Wfrp => {
                let chi = if self.chi.is_empty() { (1..=size()?).map(|l| l as f64).collect() } else { self.chi.clone() };
                ProgramSpec::Wfrp { chi, gamma: self.gamma, eta: self.eta }
            }
            KindArg::WfrpMflp => ProgramSpec::WfrpMflp { m: size()? },
            KindArg::Sfrp => ProgramSpec::Sfrp { n: size()?, gamma: self.gamma, eta: self.eta },
            KindArg::SfrpMflp => ProgramSpec::SfrpMflp { n: size()? },
            KindArg::Lblp => ProgramSpec::Lblp { m: size()? },
            KindArg::Sfrk => ProgramSpec::Sfrk { n: size()?, k: self.k },
        })
    }
}

/// Arguments of `lower-bound`.
#[derive(Debug, Args)]
pub struct LowerBoundArgs {
    /// Family.
    #[command(subcommand)]
    pub family: LowerBoundFamily,
    /// Also write the constructed instance to this JSON file.
    #[arg(long, global = true)]
    pub instance_out: Option<PathBuf>,
}

/// Lower-bound families.
#[derive(Debug, Subcommand)]
pub enum LowerBoundFamily {
    /// Spokes with harmonic opening costs around a common hub.
    Example1 {
        /// Number of individuals.
        #[arg(long, default_value_t = 4)]
        n0: usize,
        /// Cost reduction of the spokes.
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        /// Discount factor of the greedy run.
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        /// Opening cost scalar of the greedy run.
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
    },
    /// Instance built from a feasible lower-bound program point.
    Lblp {
        /// Program point JSON file of an LBLP point.
        point: PathBuf,
        /// Extra opening cost of the hub.
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
    },
}

/// Arguments of `vc`.
#[derive(Debug, Args)]
pub struct VcArgs {
    /// Graph file in edge-list format.
    pub graph: PathBuf,
    /// Distance between non-adjacent locations (`inf` or at least the total weight plus one).
    #[arg(long, default_value = "inf")]
    pub sentinel: f64,
    /// Also write the reduced instance to this JSON file.
    #[arg(long)]
    pub instance_out: Option<PathBuf>,
}

/// Arguments of `opt`.
#[derive(Debug, Args)]
pub struct OptArgs {
    /// Instance JSON file.
    pub instance: PathBuf,
}

/// Exit code for a completed command whose checks found violations.
pub const EXIT_VIOLATION: i32 = 1;
/// Exit code for usage, input and internal errors.
pub const EXIT_ERROR: i32 = 2;

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => write_file(p, text.as_bytes())?,
        None => print_stdout(text)?,
    }
    Ok(())
}

/// Prints a line to standard output; a reader that closed the pipe early is not an error.
fn print_stdout(text: &str) -> anyhow::Result<()> {
    let mut stdout = std::io::stdout().lock();
    match writeln!(stdout, "{text}").and_then(|()| stdout.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn pretty<T: Serialize>(v: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn read_input(path: &Path) -> anyhow::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        Ok(io::read_to_string(path)?)
    }
}

#[derive(Serialize)]
struct CostJson {
    solution: Vec<usize>,
    opening_cost: ExtReal,
    connection_cost: ExtReal,
    total: ExtReal,
    assignment: Vec<Option<usize>>,
}

fn cost_json(sol: &lflp_core::Solution, cost: &lflp_core::CostReport) -> CostJson {
    CostJson {
        solution: sol.opened.iter().copied().collect(),
        opening_cost: ExtReal(cost.opening_cost),
        connection_cost: ExtReal(cost.connection_cost),
        total: ExtReal(cost.total),
        assignment: cost.assignment.clone(),
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> anyhow::Result<i32> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Gen(a) => cmd_gen(cli, a),
        Command::Run(a) => cmd_run(out, a),
        Command::Bench(a) => cmd_bench(cli, a),
        Command::Certify(a) => cmd_certify(out, cli.tolerance.unwrap_or(CERT_TOL), a),
        Command::Frp(a) => cmd_frp(out, cli.tolerance.unwrap_or(CHECK_TOL), &a.op),
        Command::LowerBound(a) => cmd_lower_bound(out, a),
        Command::Vc(a) => cmd_vc(out, a),
        Command::Opt(a) => {
            let inst = read_instance(&a.instance)?;
            let (sol, cost) = brute_force_opt(&inst)?;
            emit(out, &pretty(&cost_json(&sol, &cost))?)?;
            Ok(0)
        }
    }
}

fn cmd_gen(cli: &Cli, a: &GenArgs) -> anyhow::Result<i32> {
    let inst = match (&a.centroids, &a.od, &a.opening) {
        (Some(c), Some(od), Some(op)) => load_od(c, od, op, a.fbar)?.0,
        _ => gen_synthetic(&SynthConfig { n: a.n, seed: cli.seed, fbar: a.fbar, iota: a.iota })?,
    };
    emit(cli.out.as_deref(), &instance_to_json(&inst))?;
    Ok(0)
}

fn cmd_run(out: Option<&Path>, a: &RunArgs) -> anyhow::Result<i32> {
    let inst = read_instance(&a.instance)?;
    let hyper = a.hyper.as_deref().map(|p| read_hyperedges(p, &inst)).transpose()?;
    if hyper.is_some() && a.policy != Policy::KGr {
        bail!("--hyper only applies to the kgr policy");
    }
    let params = PolicyParams { gamma: a.gamma, eta: a.eta, hyper };
    let r = run_policy(&inst, a.policy, &params)?;
    if let Some(path) = &a.trace {
        let trace = r.trace.as_ref().with_context(|| format!("policy {} has no event log", a.policy))?;
        if trace.sides != 2 {
            let hyper = params.hyper.as_ref().expect("only hyperedge runs have other side counts");
            let mut buf = Vec::new();
            io::write_trace(&mut buf, trace, &|e| hyper.sides(e).to_vec())?;
            write_file(path, &buf)?;
        } else if a.policy == Policy::Jmmsv {
            bail!("the jmmsv event log refers to expanded clients and is not written as a trace");
        } else {
            write_trace_file(path, &inst, trace)?;
        }
    }
    let eta = match a.policy {
        Policy::TwoGr | Policy::TwoGrp => Some(a.eta.unwrap_or(DEFAULT_ETA)),
        Policy::KGr => Some(a.eta.unwrap_or(params.hyper.as_ref().map_or(2, |h| h.k()) as f64)),
        _ => None,
    };
    let doc = json!({
        "policy": a.policy.name(),
        "gamma": matches!(a.policy, Policy::TwoGr | Policy::TwoGrp).then_some(a.gamma),
        "eta": eta,
        "cost": cost_json(&r.solution, &r.cost),
        "trace": a.trace.as_ref().map(|p| p.display().to_string()),
    });
    emit(out, &pretty(&doc)?)?;
    Ok(0)
}

fn cmd_bench(cli: &Cli, a: &BenchArgs) -> anyhow::Result<i32> {
    let cfg = BenchConfig {
        seeds: (0..a.seeds).map(|k| cli.seed.wrapping_add(k)).collect(),
        n: a.n,
        fbar: a.fbar,
        iota: a.iota,
        grid: standard_grid(),
        normalizer: match a.normalize {
            NormalizeArg::Grp => Normalizer::TwoGrpStar,
            NormalizeArg::Gr => Normalizer::TwoGrStar,
        },
        timings: a.timings,
    };
    let res = run_bench(&cfg, cli.workers)?;
    let summary = pretty(&res.summary)?;
    match &cli.out {
        Some(dir) => {
            let mut buf = Vec::new();
            write_csv(&mut buf, &cfg, &res.rows)?;
            write_file(&dir.join("bench.csv"), &buf)?;
            write_file(&dir.join("summary.json"), summary.as_bytes())?;
        }
        None => print_stdout(&summary)?,
    }
    Ok(0)
}

/// Report of `certify`.
#[derive(Debug, Serialize)]
pub struct CertifyReport {
    /// Discount factor.
    pub gamma: f64,
    /// Opening cost scalar.
    pub eta: f64,
    /// Trace file checked, or `None` for a fresh run.
    pub trace_file: Option<String>,
    /// Structural property checks.
    pub structural: StructuralReport,
    /// Dual certificate sum.
    pub sum_mu: ExtReal,
    /// Cost of the traced solution.
    pub cost: ExtReal,
    /// Dual certificate failure or trace error, if any.
    pub dual_error: Option<String>,
    /// Whether every check passed.
    pub pass: bool,
}

/// Checks a trace of `inst` and builds the report.
pub fn certify_trace(inst: &Instance, trace: &Trace, p: Params, tol: f64, file: Option<String>) -> anyhow::Result<CertifyReport> {
    let structural = check_structural_tol(inst, trace, p, tol)?;
    let (sum_mu, cost, dual_error) = match dual_certificate_tol(inst, trace, p, tol) {
        Ok(c) => (c.sum_mu, c.cost, None),
        Err(CoreError::CertificateFailure { sum_mu, cost }) => {
            (sum_mu, cost, Some(format!("dual sum {sum_mu} is below the cost {cost}")))
        }
        Err(e) => (f64::NAN, f64::NAN, Some(e.to_string())),
    };
    let pass = structural.is_ok() && dual_error.is_none();
    Ok(CertifyReport {
        gamma: p.gamma,
        eta: p.eta,
        trace_file: file,
        structural,
        sum_mu: ExtReal(sum_mu),
        cost: ExtReal(cost),
        dual_error,
        pass,
    })
}

fn cmd_certify(out: Option<&Path>, tol: f64, a: &CertifyArgs) -> anyhow::Result<i32> {
    let inst = read_instance(&a.instance)?;
    let p = Params::new(a.gamma, a.eta)?;
    let trace = match &a.trace {
        Some(path) => read_trace_file(path, &inst)?,
        None => run_two_chance(&inst, p)?.trace,
    };
    let rep = certify_trace(&inst, &trace, p, tol, a.trace.as_ref().map(|x| x.display().to_string()))?;
    emit(out, &pretty(&rep)?)?;
    Ok(if rep.pass { 0 } else { EXIT_VIOLATION })
}

#[derive(Serialize)]
struct CheckJson<'a> {
    program: &'a ProgramSpec,
    feasible: bool,
    objective: ExtReal,
    violations: &'a [lflp_core::frp::Violation],
}

fn check_json<'a>(spec: &'a ProgramSpec, rep: &'a CheckReport) -> CheckJson<'a> {
    CheckJson { program: spec, feasible: rep.feasible, objective: ExtReal(rep.objective), violations: &rep.violations }
}

fn cmd_frp(out: Option<&Path>, tol: f64, op: &FrpOp) -> anyhow::Result<i32> {
    match op {
        FrpOp::Build(a) => {
            let spec = a.spec()?;
            let prog = build(&spec)?;
            let families: Vec<_> =
                prog.families().into_iter().map(|f| json!({"family": f, "count": prog.family(f).count()})).collect();
            let doc = json!({
                "program": spec,
                "file_stem": spec.file_stem(),
                "indexed_length": spec.shape().len,
                "constraints": prog.constraints.len(),
                "families": families,
            });
            emit(out, &pretty(&doc)?)?;
            Ok(0)
        }
        FrpOp::Check { point } => {
            let name = point.display().to_string();
            let pp = program_point_from_json(&read_input(point)?, &name)?;
            let rep = check_solution_tol(&build(&pp.program)?, &pp.solution, tol)?;
            emit(out, &pretty(&check_json(&pp.program, &rep))?)?;
            Ok(if rep.feasible { 0 } else { EXIT_VIOLATION })
        }
        FrpOp::Batch { point, target } => {
            let name = point.display().to_string();
            let pp = program_point_from_json(&read_input(point)?, &name)?;
            let before = objective(&pp.program, &pp.solution)?;
            let (spec, sol) = match &pp.program {
                ProgramSpec::Wfrp { .. } => batch_wfrp_to_sfrp(&pp.program, &pp.solution, *target)?,
                ProgramSpec::WfrpMflp { .. } => {
                    (ProgramSpec::SfrpMflp { n: *target }, batch_mflp(&pp.solution, *target)?)
                }
                other => bail!("batching needs a WFRP or WFRP_MFLP point, got {}", other.file_stem()),
            };
            let rep = check_solution_tol(&build(&spec)?, &sol, tol)?;
            for v in &rep.violations {
                eprintln!("violation {} {:?}: {} > {}", v.family, v.index, v.lhs, v.rhs);
            }
            eprintln!("objective {before} -> {}, feasible = {}", rep.objective, rep.feasible);
            emit(out, &pretty(&ProgramPoint { program: spec, solution: sol })?)?;
            Ok(if rep.feasible { 0 } else { EXIT_VIOLATION })
        }
        FrpOp::Export(a) => {
            let prog = build(&a.spec()?)?;
            let path = write_lp(out.unwrap_or(Path::new(".")), &prog)?;
            print_stdout(&path.display().to_string())?;
            Ok(0)
        }
    }
}

fn opt_if_small(inst: &Instance) -> anyhow::Result<Option<f64>> {
    Ok(if inst.n() <= BRUTE_FORCE_CAP { Some(brute_force_opt(inst)?.1.total) } else { None })
}

fn cmd_lower_bound(out: Option<&Path>, a: &LowerBoundArgs) -> anyhow::Result<i32> {
    let (inst, p, extra) = match &a.family {
        LowerBoundFamily::Example1 { n0, eps, gamma, eta } => {
            let inst = example1_family(*n0, *eps, *eta)?;
            let harmonic: f64 = (1..=*n0).map(|k| 1.0 / k as f64).sum();
            (inst, Params::new(*gamma, *eta)?, json!({"n0": n0, "eps": eps, "harmonic": harmonic}))
        }
        LowerBoundFamily::Lblp { point, eps } => {
            let name = point.display().to_string();
            let pp = program_point_from_json(&io::read_to_string(point)?, &name)?;
            if !matches!(pp.program, ProgramSpec::Lblp { .. }) {
                bail!("expected an LBLP point, got {}", pp.program.file_stem());
            }
            let obj = objective(&pp.program, &pp.solution)?;
            (lblp_to_instance(&pp.solution, *eps)?, Params::new(1.0, 2.0)?, json!({"eps": eps, "objective": obj}))
        }
    };
    if let Some(path) = &a.instance_out {
        write_file(path, instance_to_json(&inst).as_bytes())?;
    }
    let r = run_two_chance(&inst, p)?;
    let opt = opt_if_small(&inst)?;
    let doc = json!({
        "family": extra,
        "gamma": p.gamma,
        "eta": p.eta,
        "greedy": cost_json(&r.solution, &r.cost),
        "opt": opt.map(ExtReal),
        "ratio": opt.map(|o| ExtReal(r.cost.total / o)),
    });
    emit(out, &pretty(&doc)?)?;
    Ok(0)
}

fn cmd_vc(out: Option<&Path>, a: &VcArgs) -> anyhow::Result<i32> {
    let name = a.graph.display().to_string();
    let g = parse_graph(&io::read_to_string(&a.graph)?, &name)?;
    let inst = vc_to_2lflp(&g, a.sentinel)?;
    if let Some(path) = &a.instance_out {
        write_file(path, instance_to_json(&inst).as_bytes())?;
    }
    let r = run_two_chance(&inst, Params::new(1.0, 1.0)?)?;
    let cover: Vec<usize> = r.solution.opened.iter().copied().collect();
    let is_cover = g.is_vertex_cover(&cover);
    let exact = if g.len() <= VC_ENUM_CAP { Some(g.min_vertex_cover()?) } else { None };
    let doc = json!({
        "vertices": g.len(),
        "edges": g.edges().len(),
        "cover": cover,
        "is_vertex_cover": is_cover,
        "weight": g.weight_of(&cover),
        "cost": ExtReal(r.cost.total),
        "optimum": exact.as_ref().map(|e| json!({"cover": e.0, "weight": e.1})),
    });
    emit(out, &pretty(&doc)?)?;
    Ok(if is_cover { 0 } else { EXIT_VIOLATION })
}
