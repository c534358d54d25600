#![allow(dead_code)]

use lflp_core::Instance;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random flows on `n` locations: each ordered pair independently with probability `p`,
/// integral masses in 1..=3, at least one edge.
pub fn random_flows(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(usize, usize, f64)> {
    let mut flows = Vec::new();
    for h in 0..n {
        for w in 0..n {
            if rng.random_bool(p) {
                flows.push((h, w, rng.random_range(1..=3) as f64));
            }
        }
    }
    if flows.is_empty() {
        flows.push((0, n - 1, 1.0));
    }
    flows
}

/// Euclidean instance with points in the unit square and opening costs in `[0, fmax)`.
pub fn random_euclidean(rng: &mut ChaCha8Rng, n: usize, fmax: f64) -> Instance {
    let coords = (0..n).map(|_| [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)]).collect();
    let opening = (0..n).map(|_| rng.random_range(0.0..fmax)).collect();
    let flows = random_flows(rng, n, 0.3);
    Instance::from_coords(coords, opening, &flows).unwrap()
}

/// Metric instance from a random weighted graph closed under shortest paths; pairs in
/// different components sit at a finite sentinel larger than every path.
pub fn random_graph_metric(rng: &mut ChaCha8Rng, n: usize, fmax: f64) -> Instance {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(0.5) {
                let w = rng.random_range(0.1..2.0);
                d[i][j] = w;
                d[j][i] = w;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    let sentinel = 2.0 * n as f64 + fmax + 1.0;
    for row in d.iter_mut() {
        for x in row.iter_mut() {
            if x.is_infinite() {
                *x = sentinel;
            }
        }
    }
    let opening = (0..n).map(|_| rng.random_range(0.0..fmax)).collect();
    let flows = random_flows(rng, n, 0.3);
    Instance::new(d, opening, &flows).unwrap().into_metric().unwrap()
}
