//! Benchmark harness: every policy on a set of seeded synthetic instances, normalized by the best
//! pruned 2-Chance run over a parameter grid.

use std::io::Write;
use std::time::Instant;

use lflp_core::baselines::{gr_home, gr_work, jmmsv, myopic_prune, ProjectedInstance};
use lflp_core::engine::{run_two_chance, Params};
use lflp_core::gen::{gen_synthetic, SynthConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Which best-of-grid policy normalizes the costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalizer {
    /// Best pruned 2-Chance run, `2-GRP*`.
    TwoGrpStar,
    /// Best unpruned 2-Chance run, `2-GR*`.
    TwoGrStar,
}

/// Benchmark settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Master seeds, one instance each.
    pub seeds: Vec<u64>,
    /// Locations per instance.
    pub n: usize,
    /// Mean opening cost.
    pub fbar: f64,
    /// Distance decay of the commuting model.
    pub iota: f64,
    /// `(γ, η)` grid of the 2-Chance policies.
    pub grid: Vec<(f64, f64)>,
    /// Normalizing policy.
    pub normalizer: Normalizer,
    /// Record wall-clock timings (makes the output run dependent).
    pub timings: bool,
}

/// Discount factors of the standard grid.
pub const GRID_GAMMAS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

/// The standard grid `γ ∈ {0, 0.2, …, 1}`, `η ∈ {1, 1 + γ/2, 1 + γ}`, without repeated pairs.
pub fn standard_grid() -> Vec<(f64, f64)> {
    let mut grid = Vec::new();
    for g in GRID_GAMMAS {
        for eta in [1.0, 1.0 + 0.5 * g, 1.0 + g] {
            if !grid.contains(&(g, eta)) {
                grid.push((g, eta));
            }
        }
    }
    grid
}

/// Costs of every policy on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRow {
    /// Instance seed.
    pub seed: u64,
    /// Number of edges with positive mass.
    pub edges: usize,
    /// `2-GR(γ, η)` cost per grid point.
    pub gr: Vec<f64>,
    /// `2-GRP(γ, η)` cost per grid point.
    pub grp: Vec<f64>,
    /// Best unpruned cost and the grid index attaining it (first on ties).
    pub gr_star: (f64, usize),
    /// Best pruned cost and the grid index attaining it (first on ties).
    pub grp_star: (f64, usize),
    /// `GR-H` cost.
    pub grh: f64,
    /// `GR-W` cost.
    pub grw: f64,
    /// Single-location greedy on the edge expansion.
    pub jmmsv: f64,
    /// Facilities opened by `2-GRP*`, `GR-H` and `GR-W`.
    pub sizes: [usize; 3],
    /// Wall-clock milliseconds, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub millis: Option<f64>,
}

impl InstanceRow {
    /// Cost of the normalizing policy.
    pub fn denominator(&self, by: Normalizer) -> f64 {
        match by {
            Normalizer::TwoGrpStar => self.grp_star.0,
            Normalizer::TwoGrStar => self.gr_star.0,
        }
    }

    /// Whether `2-GRP*` costs no more than both `GR-H` and `GR-W` (relative tolerance 1e-9).
    pub fn grp_star_wins(&self) -> bool {
        let best = self.grh.min(self.grw);
        self.grp_star.0 <= best + 1e-9 * best.abs().max(1.0)
    }
}

fn argmin(v: &[f64]) -> (f64, usize) {
    v.iter().enumerate().fold((f64::INFINITY, 0), |acc, (i, &x)| if x < acc.0 { (x, i) } else { acc })
}

/// Runs every policy on the synthetic instance of `seed`.
pub fn bench_instance(cfg: &BenchConfig, seed: u64) -> lflp_core::Result<InstanceRow> {
    let start = Instant::now();
    let inst = gen_synthetic(&SynthConfig { n: cfg.n, seed, fbar: cfg.fbar, iota: cfg.iota })?;
    let mut gr = Vec::with_capacity(cfg.grid.len());
    let mut grp = Vec::with_capacity(cfg.grid.len());
    let mut grp_sizes = Vec::with_capacity(cfg.grid.len());
    for &(g, eta) in &cfg.grid {
        let r = run_two_chance(&inst, Params::new(g, eta)?)?;
        gr.push(r.cost.total);
        let pruned = myopic_prune(&inst, &r.solution);
        grp.push(inst.total_cost(&pruned).total);
        grp_sizes.push(pruned.len());
    }
    let (h_sol, h_cost) = gr_home(&inst)?;
    let (w_sol, w_cost) = gr_work(&inst)?;
    let j = jmmsv(&ProjectedInstance::edge_expansion(&inst))?;
    let grp_star = argmin(&grp);
    Ok(InstanceRow {
        seed,
        edges: inst.edges().len(),
        gr_star: argmin(&gr),
        sizes: [grp_sizes.get(grp_star.1).copied().unwrap_or(0), h_sol.len(), w_sol.len()],
        grp_star,
        gr,
        grp,
        grh: h_cost.total,
        grw: w_cost.total,
        jmmsv: inst.total_cost(&j.solution).total,
        millis: cfg.timings.then(|| start.elapsed().as_secs_f64() * 1e3),
    })
}

/// Mean and median of a normalized column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    /// Arithmetic mean.
    pub mean: f64,
    /// Median (mean of the two middle values for even counts).
    pub median: f64,
}

fn stat(mut v: Vec<f64>) -> Stat {
    if v.is_empty() {
        return Stat { mean: f64::NAN, median: f64::NAN };
    }
    v.sort_by(f64::total_cmp);
    let k = v.len();
    let median = if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) };
    Stat { mean: v.iter().sum::<f64>() / k as f64, median }
}

/// Aggregate results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    /// Settings used.
    pub config: BenchConfig,
    /// Number of instances.
    pub instances: usize,
    /// Normalized `2-GR*`.
    pub gr_star: Stat,
    /// Normalized `2-GRP*`.
    pub grp_star: Stat,
    /// Normalized `GR-H`.
    pub grh: Stat,
    /// Normalized `GR-W`.
    pub grw: Stat,
    /// Normalized single-location greedy on the edge expansion.
    pub jmmsv: Stat,
    /// Per discount factor: normalized best-over-η `2-GR(γ)`.
    pub gr_by_gamma: Vec<(f64, Stat)>,
    /// Per discount factor: normalized best-over-η `2-GRP(γ)`.
    pub grp_by_gamma: Vec<(f64, Stat)>,
    /// Instances where `2-GRP*` costs no more than both `GR-H` and `GR-W`.
    pub grp_star_wins: usize,
}

/// Full benchmark output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchOutput {
    /// One row per seed, in seed order.
    pub rows: Vec<InstanceRow>,
    /// Aggregates.
    pub summary: BenchSummary,
}

/// Runs the benchmark on `workers` threads (all cores when `None`). Rows keep seed order.
pub fn run_bench(cfg: &BenchConfig, workers: Option<usize>) -> anyhow::Result<BenchOutput> {
    if cfg.grid.is_empty() {
        anyhow::bail!("the parameter grid is empty");
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        pool = pool.num_threads(w.max(1));
    }
    let pool = pool.build()?;
    let rows: Vec<InstanceRow> = pool.install(|| {
        cfg.seeds.par_iter().map(|&s| bench_instance(cfg, s)).collect::<lflp_core::Result<Vec<_>>>()
    })?;
    Ok(BenchOutput { summary: summarize(cfg, &rows), rows })
}

/// Aggregates rows normalized by `cfg.normalizer`.
pub fn summarize(cfg: &BenchConfig, rows: &[InstanceRow]) -> BenchSummary {
    let by = cfg.normalizer;
    let col = |f: &dyn Fn(&InstanceRow) -> f64| stat(rows.iter().map(|r| f(r) / r.denominator(by)).collect());
    let mut gammas: Vec<f64> = cfg.grid.iter().map(|p| p.0).collect();
    gammas.sort_by(f64::total_cmp);
    gammas.dedup();
    let best_for = |r: &InstanceRow, g: f64, pruned: bool| -> f64 {
        let costs = if pruned { &r.grp } else { &r.gr };
        cfg.grid.iter().zip(costs).filter(|(p, _)| p.0 == g).map(|(_, &c)| c).fold(f64::INFINITY, f64::min)
    };
    BenchSummary {
        config: cfg.clone(),
        instances: rows.len(),
        gr_star: col(&|r| r.gr_star.0),
        grp_star: col(&|r| r.grp_star.0),
        grh: col(&|r| r.grh),
        grw: col(&|r| r.grw),
        jmmsv: col(&|r| r.jmmsv),
        gr_by_gamma: gammas.iter().map(|&g| (g, col(&|r| best_for(r, g, false)))).collect(),
        grp_by_gamma: gammas.iter().map(|&g| (g, col(&|r| best_for(r, g, true)))).collect(),
        grp_star_wins: rows.iter().filter(|r| r.grp_star_wins()).count(),
    }
}

/// Writes one CSV row per instance with raw and normalized costs.
pub fn write_csv<W: Write>(out: W, cfg: &BenchConfig, rows: &[InstanceRow]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["seed", "edges", "gr_star", "gr_star_gamma", "gr_star_eta", "grp_star"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(["grp_star_gamma", "grp_star_eta", "grh", "grw", "jmmsv"].map(String::from));
    header.extend(["norm_gr_star", "norm_grh", "norm_grw", "norm_jmmsv"].map(String::from));
    header.extend(["size_grp_star", "size_grh", "size_grw"].map(String::from));
    for &(g, e) in &cfg.grid {
        header.push(format!("gr_{g}_{e}"));
    }
    for &(g, e) in &cfg.grid {
        header.push(format!("grp_{g}_{e}"));
    }
    if cfg.timings {
        header.push("millis".into());
    }
    w.write_record(&header)?;
    for r in rows {
        let den = r.denominator(cfg.normalizer);
        let (gs, ge) = cfg.grid[r.gr_star.1];
        let (ps, pe) = cfg.grid[r.grp_star.1];
        let mut rec: Vec<String> = vec![r.seed.to_string(), r.edges.to_string()];
        for x in [r.gr_star.0, gs, ge, r.grp_star.0, ps, pe, r.grh, r.grw, r.jmmsv] {
            rec.push(x.to_string());
        }
        for x in [r.gr_star.0, r.grh, r.grw, r.jmmsv] {
            rec.push((x / den).to_string());
        }
        rec.extend(r.sizes.iter().map(|s| s.to_string()));
        rec.extend(r.gr.iter().chain(&r.grp).map(|x| x.to_string()));
        if let Some(ms) = r.millis {
            rec.push(format!("{ms:.3}"));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_grid_has_sixteen_points() {
        let g = standard_grid();
        assert_eq!(g.len(), 16);
        assert!(g.contains(&(1.0, 2.0)));
        assert!(g.contains(&(0.0, 1.0)));
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(stat(vec![3.0, 1.0, 2.0]).median, 2.0);
        assert_eq!(stat(vec![4.0, 1.0, 2.0, 3.0]).median, 2.5);
        assert!(stat(Vec::new()).mean.is_nan());
    }
}
