use lflp_core::frp::{
    batch_mflp, batch_wfrp_to_sfrp, build, cell_index, check_solution, evaluate, export_lp, mflp_blocks, naive_batch,
    objective, scale_k_solution, FRSolution, ProgramSpec,
};
use lflp_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: f64 = 1.0 / 31.0;

fn counterexample() -> (ProgramSpec, FRSolution) {
    let spec = ProgramSpec::Wfrp { chi: vec![1.0, 2.0, 3.0, 4.0], gamma: 1.0, eta: 1.0 };
    let sol = FRSolution {
        f: 3.0 * N,
        alpha: vec![9.0 * N, 9.0 * N, 4.0 * N, 14.0 * N],
        d: vec![9.0 * N, 9.0 * N, 4.0 * N, 6.0 * N],
        c: vec![9.0 * N, 9.0 * N, 4.0 * N, 14.0 * N],
        q: Vec::new(),
    };
    (spec, sol)
}

#[test]
fn counterexample_quoted_values() {
    let (spec, sol) = counterexample();
    let prog = build(&spec).unwrap();
    let (lhs, rhs) = evaluate(&prog, &sol, "FR.ii", &[2]).unwrap();
    assert!((lhs - 3.0 * N).abs() < 1e-12);
    assert!((rhs - sol.f).abs() < 1e-12);

    let naive = naive_batch(&sol, &[1, 3]);
    assert!((naive.alpha[0] - 18.0 * N).abs() < 1e-12);
    let two = ProgramSpec::Wfrp { chi: vec![1.0, 2.0], gamma: 1.0, eta: 1.0 };
    let (lhs, rhs) = evaluate(&build(&two).unwrap(), &naive, "FR.ii", &[1]).unwrap();
    assert!((lhs - 8.0 * N).abs() < 1e-12, "{lhs}");
    assert!(lhs > rhs);
}

#[test]
fn counterexample_last_index_exceeds_budget() {
    let (spec, sol) = counterexample();
    let rep = check_solution(&build(&spec).unwrap(), &sol).unwrap();
    assert!(!rep.feasible);
    let v = rep.violations.iter().find(|v| v.family == "FR.ii" && v.index == vec![4]).unwrap();
    assert!((v.lhs - 8.0 * N).abs() < 1e-12);
    assert!(rep.violations.iter().all(|v| v.family == "FR.ii"));
}

#[test]
fn counterexample_solution_dependent_batch_at_two() {
    let (spec, sol) = counterexample();
    let before = objective(&spec, &sol).unwrap();
    let (sspec, ssol) = batch_wfrp_to_sfrp(&spec, &sol, 2).unwrap();
    let rep = check_solution(&build(&sspec).unwrap(), &ssol).unwrap();
    assert!(rep.objective >= before - 1e-9);
    // The batch inherits the excess of the input at ℓ = 4 and nothing else.
    assert!(rep.violations.iter().all(|v| v.family == "SFR.iii"), "{:?}", rep.violations);
}

#[test]
fn all_zero_point_with_unit_cost_is_feasible() {
    let (spec, _) = counterexample();
    let rep = check_solution(&build(&spec).unwrap(), &FRSolution::zeros(&spec, 1.0)).unwrap();
    assert!(rep.feasible);
    assert_eq!(rep.objective, 0.0);
}

#[test]
fn lblp_normalization_is_an_equality() {
    let spec = ProgramSpec::Lblp { m: 4 };
    let prog = build(&spec).unwrap();
    let mut sol = FRSolution::zeros(&spec, 0.5);
    let rep = check_solution(&prog, &sol).unwrap();
    assert!(rep.violations.iter().any(|v| v.family == "LB.v"));
    sol.f = 1.0;
    assert!(check_solution(&prog, &sol).unwrap().feasible);
}

/// Random feasible `WFRP_MFLP(m)` point: sorted α is shrunk until the distance constraints
/// hold, `f` takes the smallest budget that covers every index, then everything is normalized.
fn random_mflp(rng: &mut ChaCha8Rng, m: usize) -> FRSolution {
    let d: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
    let mut alpha: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..2.0)).collect();
    alpha.sort_by(f64::total_cmp);
    let spread_ok = |a: &[f64]| (0..m).all(|l| (0..m).all(|l2| a[l2] <= a[l] + d[l] + d[l2] + 1e-12));
    while !spread_ok(&alpha) {
        alpha.iter_mut().for_each(|x| *x *= 0.5);
    }
    let f = (0..m).map(|l| (l..m).map(|l2| (alpha[l] - d[l2]).max(0.0)).sum::<f64>()).fold(0.0, f64::max);
    let norm = f + d.iter().sum::<f64>();
    FRSolution {
        f: f / norm,
        alpha: alpha.iter().map(|x| x / norm).collect(),
        d: d.iter().map(|x| x / norm).collect(),
        c: Vec::new(),
        q: Vec::new(),
    }
}

#[test]
fn mflp_batching_of_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let strong = build(&ProgramSpec::SfrpMflp { n: 5 }).unwrap();
    let weak = build(&ProgramSpec::WfrpMflp { m: 40 }).unwrap();
    for _ in 0..50 {
        let sol = random_mflp(&mut rng, 40);
        let rep = check_solution(&weak, &sol).unwrap();
        assert!(rep.feasible, "{:?}", rep.violations);
        let out = batch_mflp(&sol, 5).unwrap();
        let after = check_solution(&strong, &out).unwrap();
        assert!(after.feasible, "{:?}", after.violations);
        assert!((after.objective - rep.objective).abs() < 1e-9);
    }
}

#[test]
fn mflp_batching_identity_and_small_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let sol = random_mflp(&mut rng, 4);
    assert_eq!(batch_mflp(&sol, 4).unwrap(), sol);
    assert_eq!(mflp_blocks(11, 3).unwrap(), vec![1, 4, 8]);
    // m = 5 into n = 4 needs index duplication before uniform blocks exist.
    let sol = random_mflp(&mut rng, 5);
    let out = batch_mflp(&sol, 4).unwrap();
    let rep = check_solution(&build(&ProgramSpec::SfrpMflp { n: 4 }).unwrap(), &out).unwrap();
    assert!(rep.feasible, "{:?}", rep.violations);
    assert!(matches!(batch_mflp(&sol, 6), Err(Error::InvalidParams(_))));
}

#[test]
fn wfrp_identity_batching_for_strict_order() {
    let spec = ProgramSpec::Wfrp { chi: vec![1.0, 2.0, 3.0], gamma: 1.0, eta: 2.0 };
    let sol = FRSolution {
        f: 0.4,
        alpha: vec![0.1, 0.2, 0.3],
        d: vec![0.1, 0.1, 0.1],
        c: vec![0.1, 0.2, 0.3],
        q: Vec::new(),
    };
    assert!(check_solution(&build(&spec).unwrap(), &sol).unwrap().feasible);
    let (sspec, ssol) = batch_wfrp_to_sfrp(&spec, &sol, 3).unwrap();
    let rep = check_solution(&build(&sspec).unwrap(), &ssol).unwrap();
    assert!(rep.feasible, "{:?}", rep.violations);
    for a in 1..=3 {
        assert!((ssol.q[cell_index(a, a)] - 1.0).abs() < 1e-12);
        assert!((ssol.alpha[cell_index(a, a)] - sol.alpha[a - 1]).abs() < 1e-12);
    }
    assert!((rep.objective - objective(&spec, &sol).unwrap()).abs() < 1e-12);
}

/// Random feasible `SFRP(2, γ, η)` point, or `None` when the sampled direction violates SFR.ii.
///
/// α is drawn with the column-2 value largest, `d` and `c` are fractions of α, `f` is the
/// smallest budget satisfying SFR.iii and the point is scaled so SFR.vi is tight.
fn random_sfrp2(rng: &mut ChaCha8Rng, gamma: f64, eta: f64) -> Option<FRSolution> {
    let mut a = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
    a.sort_by(f64::total_cmp);
    if rng.random_bool(0.5) {
        a.swap(0, 1);
    }
    // Cell order: (1,1), (2,1), (2,2).
    let alpha = [a[0], a[1], a[2]];
    let d: Vec<f64> = alpha.iter().map(|x| x * rng.random_range(0.0..1.0)).collect();
    let c: Vec<f64> = alpha.iter().map(|x| x * rng.random_range(0.0..1.0)).collect();
    let p = rng.random_range(0.0..1.0);
    let q = vec![p, 1.0 - p, 1.0];
    for b2 in [1, 2] {
        if gamma * alpha[b2] > c[0] + d[0] + d[b2] {
            return None;
        }
    }
    let budget = q[1] * (gamma * alpha[1] - d[1]).max(0.0) + q[2] * (gamma * alpha[0] - d[2]).max(0.0);
    let f = budget / eta;
    let norm = f + (0..3).map(|i| q[i] * d[i]).sum::<f64>();
    if norm <= 1e-12 {
        return None;
    }
    let s = |v: &[f64]| v.iter().map(|x| x / norm).collect();
    Some(FRSolution { f: f / norm, alpha: s(&alpha), d: s(&d), c: s(&c), q })
}

#[test]
fn sfrp_two_random_points_respect_cap() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for gamma in [0.5, 1.0] {
        for eta in [1.0, 1.0 + gamma] {
            let spec = ProgramSpec::Sfrp { n: 2, gamma, eta };
            let prog = build(&spec).unwrap();
            let cap = 6.0 * (1.0 + gamma) / (gamma * gamma);
            let mut accepted = 0;
            while accepted < 2000 {
                let Some(sol) = random_sfrp2(&mut rng, gamma, eta) else { continue };
                let rep = check_solution(&prog, &sol).unwrap();
                assert!(rep.feasible, "{sol:?}: {:?}", rep.violations);
                assert!(rep.objective <= cap);
                accepted += 1;
            }
        }
    }
}

#[test]
fn sfrk_scaling_halves_objective() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let spec4 = ProgramSpec::Sfrk { n: 2, k: 4.0 };
    let spec2 = ProgramSpec::Sfrk { n: 2, k: 2.0 };
    let (p4, p2) = (build(&spec4).unwrap(), build(&spec2).unwrap());
    let mut done = 0;
    while done < 100 {
        let Some(sol) = random_sfrp2(&mut rng, 1.0, 4.0) else { continue };
        let rep = check_solution(&p4, &sol).unwrap();
        assert!(rep.feasible, "{:?}", rep.violations);
        let out = scale_k_solution(&sol, 4.0, 2.0).unwrap();
        let rep2 = check_solution(&p2, &out).unwrap();
        assert!(rep2.feasible, "{:?}", rep2.violations);
        assert!((rep2.objective - rep.objective / 2.0).abs() < 1e-12);
        done += 1;
    }
    let sol = random_sfrp2(&mut ChaCha8Rng::seed_from_u64(1), 1.0, 4.0).unwrap_or_else(|| FRSolution::zeros(&spec4, 1.0));
    assert_eq!(scale_k_solution(&sol, 4.0, 4.0).unwrap(), sol);
    let zero = FRSolution::zeros(&spec4, 0.0);
    assert_eq!(scale_k_solution(&zero, 4.0, 1.0).unwrap(), zero);
    assert!(scale_k_solution(&zero, 2.0, 3.0).is_err());
}

#[test]
fn lp_export_shapes() {
    let mflp = export_lp(&build(&ProgramSpec::SfrpMflp { n: 4 }).unwrap()).unwrap();
    assert!(!mflp.contains('['));
    assert!(mflp.starts_with("\\"));
    assert!(mflp.contains("Maximize"));
    assert!(mflp.contains("Subject To"));
    assert!(mflp.trim_end().ends_with("End"));

    let sfrp = export_lp(&build(&ProgramSpec::Sfrp { n: 2, gamma: 1.0, eta: 2.0 }).unwrap()).unwrap();
    let obj = sfrp.split("Subject To").next().unwrap();
    assert!(obj.contains("a1_b1_q * a1_b1_alpha"), "{obj}");
    assert!(obj.contains("] / 2"));

    let lblp = export_lp(&build(&ProgramSpec::Lblp { m: 3 }).unwrap()).unwrap();
    assert!(lblp.contains("LB_v: "));
    assert!(lblp.contains(" = 1"));

    let wfrp = build(&ProgramSpec::Wfrp { chi: vec![1.0, 2.0], gamma: 1.0, eta: 1.0 }).unwrap();
    assert!(matches!(export_lp(&wfrp), Err(Error::Unsupported(_))));
}

#[test]
fn lp_export_is_byte_stable() {
    for spec in [
        ProgramSpec::Sfrp { n: 25, gamma: 1.0, eta: 2.0 },
        ProgramSpec::SfrpMflp { n: 50 },
        ProgramSpec::Lblp { m: 30 },
        ProgramSpec::Sfrk { n: 5, k: 3.0 },
    ] {
        let a = export_lp(&build(&spec).unwrap()).unwrap();
        let b = export_lp(&build(&spec.clone()).unwrap()).unwrap();
        assert_eq!(a, b, "{}", spec.file_stem());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mflp_batching_preserves_objective(seed in any::<u64>(), m in 2usize..30, n in 1usize..8) {
        prop_assume!(n <= m);
        let sol = random_mflp(&mut ChaCha8Rng::seed_from_u64(seed), m);
        let out = batch_mflp(&sol, n).unwrap();
        let before = objective(&ProgramSpec::WfrpMflp { m }, &sol).unwrap();
        let after = check_solution(&build(&ProgramSpec::SfrpMflp { n }).unwrap(), &out).unwrap();
        prop_assert!(after.feasible, "{:?}", after.violations);
        prop_assert!((after.objective - before).abs() <= 1e-9 * before.max(1.0));
    }

    #[test]
    fn sfrp_points_stay_feasible_after_scaling_down(seed in any::<u64>(), shrink in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let Some(mut sol) = random_sfrp2(&mut rng, 1.0, 2.0) {
            sol.alpha.iter_mut().chain(sol.d.iter_mut()).chain(sol.c.iter_mut()).for_each(|x| *x *= shrink);
            sol.f *= shrink;
            let prog = build(&ProgramSpec::Sfrp { n: 2, gamma: 1.0, eta: 2.0 }).unwrap();
            prop_assert!(check_solution(&prog, &sol).unwrap().feasible);
        }
    }
}
