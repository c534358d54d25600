//! Seeded synthetic instances and assembly of origin-destination data.
//!
//! Every random field draws from its own ChaCha8 stream whose seed is derived from the master seed
//! and a fixed stream tag, so adding a field never changes the values of the others.

use alloc::format;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;

const STREAM_COORDS: u64 = 1;
/// Stream tag of the population draws.
pub const STREAM_POPULATION: u64 = 2;
const STREAM_OPENING: u64 = 3;
const STREAM_ATTRACTIVENESS: u64 = 4;

/// Mean population of a location.
pub const MEAN_POPULATION: f64 = 100.0;

/// Parameters of a synthetic instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    /// Number of locations.
    pub n: usize,
    /// Master seed.
    pub seed: u64,
    /// Mean opening cost.
    pub fbar: f64,
    /// Distance decay of the commuting choice model.
    pub iota: f64,
}

impl SynthConfig {
    /// Checks `n ≥ 2`, `fbar > 0` and `iota ≥ 0`.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParams(format!("n must be at least 2, got {}", self.n)));
        }
        if !(self.fbar.is_finite() && self.fbar > 0.0) {
            return Err(Error::InvalidParams(format!("fbar must be positive and finite, got {}", self.fbar)));
        }
        if !(self.iota.is_finite() && self.iota >= 0.0) {
            return Err(Error::InvalidParams(format!("iota must be nonnegative and finite, got {}", self.iota)));
        }
        Ok(())
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Generator for the stream `tag` of master seed `seed`.
pub fn stream_rng(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(tag)))
}

/// Commuting flows `τ_ij = N_i ρ_j e^{−ι d(i,j)} / Σ_k ρ_k e^{−ι d(i,k)}`, self-flows included.
pub fn mnl_flows(dist: &dyn Fn(usize, usize) -> f64, population: &[f64], rho: &[f64], iota: f64) -> Vec<(usize, usize, f64)> {
    let n = population.len();
    let mut flows = Vec::with_capacity(n * n);
    for i in 0..n {
        let weights: Vec<f64> = (0..n).map(|j| rho[j] * libm::exp(-iota * dist(i, j))).collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            continue;
        }
        for (j, w) in weights.iter().enumerate() {
            flows.push((i, j, population[i] * w / total));
        }
    }
    flows
}

/// Draws a synthetic Euclidean instance.
///
/// Coordinates are standard normal, populations exponential with mean [`MEAN_POPULATION`],
/// attractiveness exponential with mean 1 and opening costs exponential with mean `fbar`.
pub fn gen_synthetic(cfg: &SynthConfig) -> Result<Instance> {
    cfg.validate()?;
    let n = cfg.n;
    let mut rng = stream_rng(cfg.seed, STREAM_COORDS);
    let coords: Vec<[f64; 2]> = (0..n)
        .map(|_| {
            let x: f64 = StandardNormal.sample(&mut rng);
            let y: f64 = StandardNormal.sample(&mut rng);
            [x, y]
        })
        .collect();
    let pop_dist = Exp::new(1.0 / MEAN_POPULATION).map_err(|e| Error::InvalidParams(format!("{e}")))?;
    let mut rng = stream_rng(cfg.seed, STREAM_POPULATION);
    let population: Vec<f64> = (0..n).map(|_| pop_dist.sample(&mut rng)).collect();
    let cost_dist = Exp::new(1.0 / cfg.fbar).map_err(|e| Error::InvalidParams(format!("{e}")))?;
    let mut rng = stream_rng(cfg.seed, STREAM_OPENING);
    let opening: Vec<f64> = (0..n).map(|_| cost_dist.sample(&mut rng)).collect();
    let rho_dist = Exp::new(1.0).map_err(|e| Error::InvalidParams(format!("{e}")))?;
    let mut rng = stream_rng(cfg.seed, STREAM_ATTRACTIVENESS);
    let rho: Vec<f64> = (0..n).map(|_| rho_dist.sample(&mut rng)).collect();
    let dist = |i: usize, j: usize| libm::hypot(coords[i][0] - coords[j][0], coords[i][1] - coords[j][1]);
    let flows = mnl_flows(&dist, &population, &rho, cfg.iota);
    Instance::from_coords(coords, opening, &flows)
}

/// Fills missing entries with the mean of the present ones; all-missing input becomes all ones.
pub fn fill_missing_with_mean(values: &[Option<f64>]) -> Vec<f64> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let mean = if present.is_empty() { 1.0 } else { present.iter().sum::<f64>() / present.len() as f64 };
    values.iter().map(|v| v.unwrap_or(mean)).collect()
}

/// Assembles an instance from centroid coordinates, a possibly incomplete opening index and
/// origin-destination counts. Opening costs are `fbar` times the index, with missing values
/// replaced by the mean index.
pub fn od_instance(coords: Vec<[f64; 2]>, index: &[Option<f64>], fbar: f64, counts: &[(usize, usize, f64)]) -> Result<Instance> {
    if index.len() != coords.len() {
        return Err(Error::InvalidInstance(format!("{} opening values for {} locations", index.len(), coords.len())));
    }
    if !(fbar.is_finite() && fbar > 0.0) {
        return Err(Error::InvalidParams(format!("fbar must be positive and finite, got {fbar}")));
    }
    let opening = fill_missing_with_mean(index).into_iter().map(|z| fbar * z).collect();
    Instance::from_coords(coords, opening, counts)
}
