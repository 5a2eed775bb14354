use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use saturn_core::kernel::{
    fuzz_laws, saturate_by_powers, verify_condition5, verify_saturation_axioms, FuzzConfig, SaturationInstance,
};
use saturn_core::lts::LtsInstance;
use saturn_core::nfa::NfaInstance;
use saturn_core::rel::RelInstance;
use saturn_core::segala::CmInstance;

fn star<I: SaturationInstance>(instance: &I, alpha: &I::Arrow) -> I::Arrow {
    let report = saturate_by_powers(instance, alpha, instance.default_depth(alpha)).unwrap();
    assert!(report.converged);
    report.result
}

/// Closures above `alpha`: stars of `alpha ∨ g` for random `g`.
fn closed_candidates<I: SaturationInstance>(instance: &I, rng: &mut StdRng, alpha: &I::Arrow) -> Vec<I::Arrow> {
    let n = instance.carrier(alpha).0;
    (0..3)
        .map(|_| {
            let g = instance.random(rng, n);
            star(instance, &instance.join(alpha, &g).unwrap())
        })
        .collect()
}

fn leastness<I: SaturationInstance>(instance: &I, seed: u64) {
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..100 {
        let n = rng.gen_range(1..=5);
        let alpha = instance.random(&mut rng, n);
        let s = star(instance, &alpha);
        let candidates = closed_candidates(instance, &mut rng, &alpha);
        let violations = verify_saturation_axioms(instance, &alpha, &s, &candidates);
        assert!(violations.is_empty(), "{}: {violations:?}", instance.name());
    }
}

#[test]
fn stars_are_least_closures() {
    leastness(&RelInstance, 11);
    leastness(&LtsInstance::standard(), 12);
    leastness(&NfaInstance::standard(), 13);
}

fn condition5<I: SaturationInstance>(instance: &I, seed: u64) -> usize {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut premises = 0;
    for _ in 0..200 {
        let (n, m) = (rng.gen_range(1..=4), rng.gen_range(1..=3));
        let alpha = instance.random(&mut rng, n);
        let beta = instance.random(&mut rng, m);
        let map: Vec<usize> = (0..n).map(|_| rng.gen_range(0..m)).collect();
        let lifted = instance.lift_map(&map, &beta);
        let left = instance.compose(&lifted, &alpha);
        let right = instance.compose(&beta, &lifted);
        if instance.leq(&left, &right) || instance.leq(&right, &left) {
            premises += 1;
        }
        assert!(verify_condition5(instance, &alpha, &beta, &map, 64).unwrap(), "{}", instance.name());
    }
    premises
}

#[test]
fn homomorphisms_transfer_to_stars() {
    assert!(condition5(&RelInstance, 21) > 0);
    assert!(condition5(&LtsInstance::standard(), 22) > 0);
    assert!(condition5(&NfaInstance::standard(), 23) > 0);
}

#[test]
fn lts_saturation_routes_agree() {
    let instance = LtsInstance::standard();
    let mut rng = StdRng::seed_from_u64(31);
    for _ in 0..300 {
        let n = rng.gen_range(1..=8);
        let alpha = instance.random(&mut rng, n);
        let direct = alpha.saturate_direct().unwrap();
        assert_eq!(alpha.saturate_monadic().unwrap(), direct);
        assert_eq!(star(&instance, &alpha), direct);
        assert_eq!(direct.saturate().unwrap(), direct);
    }
}

#[test]
fn nfa_closed_form_matches_powers() {
    let instance = NfaInstance::standard();
    let mut rng = StdRng::seed_from_u64(41);
    for _ in 0..300 {
        let n = rng.gen_range(1..=6);
        let alpha = instance.random(&mut rng, n);
        assert_eq!(alpha.saturate().unwrap(), star(&instance, &alpha));
    }
}

#[test]
fn fuzz_reports_are_reproducible() {
    let config = FuzzConfig::new(7, 200);
    let first = fuzz_laws(&CmInstance, &config);
    assert!(first.success(), "{first}");
    assert_eq!(fuzz_laws(&CmInstance, &config), first);
}
