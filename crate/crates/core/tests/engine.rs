mod common;

use lflp_core::baselines::{jmmsv, ProjectedInstance};
use lflp_core::engine::{
    canonical_discounts, run_k_chance, run_time_stepping, run_two_chance, Event, EngineResult, Params,
};
use lflp_core::hardness::example1_family;
use lflp_core::{HyperEdges, Instance, Solution};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_instance(rng: &mut ChaCha8Rng, max_n: usize) -> Instance {
    let n = rng.random_range(2..=max_n);
    if rng.random_bool(0.5) {
        common::random_euclidean(rng, n, 1.5)
    } else {
        common::random_graph_metric(rng, n, 1.5)
    }
}

fn open_times(r: &EngineResult) -> Vec<(usize, f64)> {
    r.trace.openings().collect()
}

#[test]
fn example1_without_discount_opens_every_spoke() {
    let inst = example1_family(4, 0.01, 1.0).unwrap();
    let r = run_two_chance(&inst, Params::new(0.0, 1.0).unwrap()).unwrap();
    assert_eq!(r.solution, Solution::from_iter([0, 1, 2, 3]));
    let want = [0.24, 0.323_333_333_333, 0.49, 0.99];
    for ((_, t), w) in open_times(&r).iter().zip(want) {
        assert!((t - w).abs() < 1e-9, "{t} vs {w}");
    }
    assert!((r.cost.total - 2.043_333_333_333).abs() < 1e-9);
}

#[test]
fn example1_with_full_discount_opens_hub() {
    let inst = example1_family(4, 0.01, 1.0).unwrap();
    let r = run_two_chance(&inst, Params::new(1.0, 1.0).unwrap()).unwrap();
    assert_eq!(r.solution, Solution::from_iter([0, 4]));
    let opens = open_times(&r);
    assert_eq!(opens[0].0, 0);
    assert!((opens[0].1 - 0.24).abs() < 1e-9);
    assert_eq!(opens[1].0, 4);
    assert!((opens[1].1 - 0.253_333_333_333).abs() < 1e-9);
    assert!((r.cost.total - 1.24).abs() < 1e-9);
}

fn compare_with_stepping(inst: &Instance, p: Params) -> Result<(), String> {
    let exact = run_two_chance(inst, p).unwrap();
    let hyper = HyperEdges::from_instance(inst);
    let step = run_time_stepping(inst, &hyper, &p.discounts(), p.eta, 1e-5).unwrap();
    if exact.solution != step.solution {
        return Err(format!("solutions differ: {:?} vs {:?}", exact.solution, step.solution));
    }
    for (e, (a, b)) in exact.trace.alpha.iter().zip(&step.alpha).enumerate() {
        if (a - b).abs() > 1e-3 {
            return Err(format!("alpha of edge {e}: {a} vs {b}"));
        }
    }
    Ok(())
}

#[test]
fn matches_time_stepping_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in 0..15 {
        let inst = random_instance(&mut rng, 6);
        let p = Params::new([0.0, 0.5, 1.0][k % 3], [1.0, 1.5, 2.0][(k / 3) % 3]).unwrap();
        compare_with_stepping(&inst, p).unwrap_or_else(|e| panic!("instance {k} {p:?}: {e}"));
    }
}

#[test]
fn three_sided_star_matches_time_stepping() {
    // Three leaves at distance 1 from a hub; each hyperedge has one leaf and two copies of the hub side.
    let d = vec![
        vec![0.0, 1.0, 1.0, 1.0],
        vec![1.0, 0.0, 2.0, 2.0],
        vec![1.0, 2.0, 0.0, 2.0],
        vec![1.0, 2.0, 2.0, 0.0],
    ];
    let inst = Instance::new(d, vec![1.5, 5.0, 5.0, 5.0], &[]).unwrap();
    let side_map = vec![vec![1, 0, 0], vec![2, 0, 0], vec![3, 0, 0]];
    let hyper = HyperEdges::new(&inst, 3, &side_map, &[1.0, 1.0, 1.0]).unwrap();
    let disc = canonical_discounts(3);
    let exact = run_k_chance(&inst, &hyper, &disc, 3.0).unwrap();
    let step = run_time_stepping(&inst, &hyper, &disc, 3.0, 1e-5).unwrap();
    assert_eq!(exact.solution, Solution::from_iter([0]));
    assert_eq!(exact.solution, step.solution);
    // The hub is a side of every hyperedge, so three growing α's give 3t = 3 · 1.5 at t = 1.5.
    let (_, t) = exact.trace.openings().next().unwrap();
    assert!((t - 1.5).abs() < 1e-9);
    for (a, b) in exact.trace.alpha.iter().zip(&step.alpha) {
        assert!((a - b).abs() < 1e-3);
    }
}

#[test]
fn two_sided_k_chance_equals_two_chance() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let inst = random_instance(&mut rng, 7);
        let p = Params::new(rng.random_range(0.0..=1.0), rng.random_range(0.5..2.5)).unwrap();
        let a = run_two_chance(&inst, p).unwrap();
        let b = run_k_chance(&inst, &HyperEdges::from_instance(&inst), &p.discounts(), p.eta).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.solution, b.solution);
    }
}

#[test]
fn one_sided_k_chance_equals_jmmsv() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..50 {
        let inst = random_instance(&mut rng, 7);
        let side_map: Vec<Vec<usize>> = inst.edges().iter().map(|e| vec![e.h]).collect();
        let mass: Vec<f64> = inst.edges().iter().map(|e| e.mass).collect();
        let hyper = HyperEdges::new(&inst, 1, &side_map, &mass).unwrap();
        let k = run_k_chance(&inst, &hyper, &[1.0, 0.0], 1.0).unwrap();
        let j = jmmsv(&ProjectedInstance::home(&inst)).unwrap();
        assert_eq!(k.solution, j.solution);
    }
}

#[test]
fn stepping_rejects_bad_step() {
    let inst = Instance::new(vec![vec![0.0]], vec![1.0], &[(0, 0, 1.0)]).unwrap();
    let hyper = HyperEdges::from_instance(&inst);
    assert!(run_time_stepping(&inst, &hyper, &[1.0, 0.5, 0.0], 1.0, 0.0).is_err());
    let r = run_time_stepping(&inst, &hyper, &[1.0, 0.5, 0.0], 1.0, 1e-3).unwrap();
    assert_eq!(r.solution, Solution::from_iter([0]));
    assert!((r.alpha[0] - 1.0).abs() < 2e-3);
}

fn check_trace_invariants(inst: &Instance, r: &EngineResult) -> Result<(), TestCaseError> {
    let tr = &r.trace;
    prop_assert!(tr.events.windows(2).all(|w| w[0].t() <= w[1].t()));
    let n = inst.n();
    let mut opened_at = vec![None; n];
    let mut seen = std::collections::BTreeSet::new();
    for ev in &tr.events {
        match *ev {
            Event::Open { facility, t } => {
                prop_assert!(opened_at[facility].is_none());
                opened_at[facility] = Some(t);
            }
            Event::Connect { edge, side, facility, t } => {
                prop_assert!(seen.insert((edge, side)));
                prop_assert!(opened_at[facility].is_some_and(|t0| t0 <= t));
            }
        }
    }
    let from_events: Solution = (0..n).filter(|&i| opened_at[i].is_some()).collect();
    prop_assert_eq!(&from_events, &r.solution);
    for e in 0..inst.edges().len() {
        prop_assert!(tr.connected_sides(e) >= 1);
        let first = (0..tr.sides)
            .filter(|&s| tr.psi[e][s].is_some())
            .map(|s| tr.connect_time[e][s])
            .fold(f64::INFINITY, f64::min);
        prop_assert!((tr.alpha[e] - first).abs() <= 1e-9);
        prop_assert!(tr.alpha[e] <= tr.end_time + 1e-12);
    }
    Ok(())
}

fn instance_strategy() -> impl Strategy<Value = Instance> {
    (any::<u64>(), 2usize..=7).prop_map(|(seed, n)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if seed % 2 == 0 {
            common::random_euclidean(&mut rng, n, 2.0)
        } else {
            common::random_graph_metric(&mut rng, n, 2.0)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn trace_invariants_hold(inst in instance_strategy(), gamma in 0.0f64..=1.0, eta in 0.5f64..3.0) {
        let r = run_two_chance(&inst, Params::new(gamma, eta).unwrap()).unwrap();
        check_trace_invariants(&inst, &r)?;
    }

    #[test]
    fn runs_are_deterministic(inst in instance_strategy(), gamma in 0.0f64..=1.0) {
        let p = Params::new(gamma, 1.0 + gamma / 2.0).unwrap();
        let a = run_two_chance(&inst, p).unwrap();
        let b = run_two_chance(&inst.clone(), p).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn eta_equals_scaled_opening_costs(inst in instance_strategy(), gamma in 0.0f64..=1.0, k in 0usize..4) {
        // Power-of-two scalars keep f·η exact, so the two runs see identical thresholds.
        let eta = [0.5, 1.0, 2.0, 4.0][k];
        let a = run_two_chance(&inst, Params::new(gamma, eta).unwrap()).unwrap();
        let b = run_two_chance(&inst.with_scaled_opening(eta), Params::new(gamma, 1.0).unwrap()).unwrap();
        prop_assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn no_discount_unit_eta_is_jmmsv(inst in instance_strategy()) {
        let a = run_two_chance(&inst, Params::new(0.0, 1.0).unwrap()).unwrap();
        let b = jmmsv(&ProjectedInstance::edge_expansion(&inst)).unwrap();
        prop_assert_eq!(a.solution, b.solution);
    }

    #[test]
    fn single_location_flows_ignore_gamma(seed in any::<u64>(), n in 2usize..=7, eta in 0.5f64..2.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = common::random_euclidean(&mut rng, n, 2.0);
        let flows: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, rng.random_range(1..=3) as f64)).collect();
        let coords = base.coords().unwrap().to_vec();
        let inst = Instance::from_coords(coords, base.opening().to_vec(), &flows).unwrap();
        let sols: Vec<Solution> = [0.0, 0.3, 0.7, 1.0]
            .iter()
            .map(|&g| run_two_chance(&inst, Params::new(g, eta).unwrap()).unwrap().solution)
            .collect();
        prop_assert!(sols.windows(2).all(|w| w[0] == w[1]));
    }
}
