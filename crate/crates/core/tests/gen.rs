use lflp_core::gen::{gen_synthetic, mnl_flows, od_instance, stream_rng, SynthConfig, STREAM_POPULATION};
use lflp_core::Instance;
use proptest::prelude::*;
use rand_distr::{Distribution, Exp};

fn row_sums(inst: &Instance) -> Vec<f64> {
    let mut sums = vec![0.0; inst.n()];
    for e in inst.edges() {
        sums[e.h] += e.mass;
    }
    sums
}

fn populations(cfg: &SynthConfig) -> Vec<f64> {
    let dist = Exp::new(1.0 / 100.0).unwrap();
    let mut rng = stream_rng(cfg.seed, STREAM_POPULATION);
    (0..cfg.n).map(|_| dist.sample(&mut rng)).collect()
}

#[test]
fn same_seed_gives_identical_instances() {
    let cfg = SynthConfig { n: 30, seed: 12, fbar: 20.0, iota: 1.0 };
    let a = gen_synthetic(&cfg).unwrap();
    let b = gen_synthetic(&cfg).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, gen_synthetic(&SynthConfig { seed: 13, ..cfg }).unwrap());
}

#[test]
fn opening_costs_do_not_perturb_other_fields() {
    let cfg = SynthConfig { n: 12, seed: 3, fbar: 20.0, iota: 0.5 };
    let a = gen_synthetic(&cfg).unwrap();
    let b = gen_synthetic(&SynthConfig { fbar: 100.0, ..cfg }).unwrap();
    assert_eq!(a.coords(), b.coords());
    assert_eq!(a.edges(), b.edges());
    for (x, y) in a.opening().iter().zip(b.opening()) {
        assert!((y - 5.0 * x).abs() <= 1e-9 * y.abs().max(1.0));
    }
}

#[test]
fn zero_decay_flows_follow_attractiveness() {
    let cfg = SynthConfig { n: 8, seed: 5, fbar: 20.0, iota: 0.0 };
    let inst = gen_synthetic(&cfg).unwrap();
    let pop = populations(&cfg);
    // Every origin splits its population with the same destination shares.
    let mut share = vec![vec![0.0; cfg.n]; cfg.n];
    for e in inst.edges() {
        share[e.h][e.w] = e.mass / pop[e.h];
    }
    for i in 1..cfg.n {
        for j in 0..cfg.n {
            assert!((share[i][j] - share[0][j]).abs() < 1e-9, "origin {i}, destination {j}");
        }
    }
}

#[test]
fn mnl_formula_on_a_line() {
    let pos = [0.0, 1.0, 3.0];
    let dist = |i: usize, j: usize| f64::abs(pos[i] - pos[j]);
    let flows = mnl_flows(&dist, &[10.0, 20.0, 30.0], &[1.0, 2.0, 1.0], 1.0);
    let w0: Vec<f64> = [1.0, 2.0 * (-1.0f64).exp(), (-3.0f64).exp()].to_vec();
    let total: f64 = w0.iter().sum();
    for (h, w, m) in flows.iter().filter(|f| f.0 == 0) {
        assert_eq!(*h, 0);
        assert!((m - 10.0 * w0[*w] / total).abs() < 1e-12);
    }
}

#[test]
fn od_assembly_fills_missing_index_and_sums_duplicates() {
    let coords = vec![[0.0, 0.0], [3.0, 4.0], [6.0, 8.0]];
    let inst = od_instance(coords, &[Some(1.0), None, Some(3.0)], 10.0, &[(0, 1, 5.0), (0, 1, 2.0), (2, 0, 1.0)]).unwrap();
    assert_eq!(inst.opening(), &[10.0, 20.0, 30.0]);
    assert_eq!(inst.edges().len(), 2);
    assert_eq!(inst.edges()[0].mass, 7.0);
    assert!((inst.d(0, 2) - 10.0).abs() < 1e-12);
    assert!(od_instance(vec![[0.0, 0.0]], &[], 1.0, &[]).is_err());
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(gen_synthetic(&SynthConfig { n: 1, seed: 0, fbar: 1.0, iota: 0.0 }).is_err());
    assert!(gen_synthetic(&SynthConfig { n: 3, seed: 0, fbar: -1.0, iota: 0.0 }).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rows_preserve_population(seed in any::<u64>(), n in 2usize..40, iota in 0.0f64..5.0) {
        let cfg = SynthConfig { n, seed, fbar: 20.0, iota };
        let inst = gen_synthetic(&cfg).unwrap();
        let pop = populations(&cfg);
        for (s, p) in row_sums(&inst).iter().zip(&pop) {
            prop_assert!((s - p).abs() <= 1e-9 * p.max(f64::MIN_POSITIVE));
        }
        prop_assert!(inst.edges().iter().all(|e| e.mass > 0.0));
        prop_assert!(inst.opening().iter().all(|&f| f >= 0.0));
    }
}
