//! End-to-end acceptance criteria. Each criterion prints one line and the
//! process exits non-zero if any of them fails.

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use saturn_core::convex::{rat, ConvexSet, Expr, Rat};
use saturn_core::kernel::{fuzz_laws, saturate_by_lfp, saturate_by_powers, FuzzConfig, SaturationInstance};
use saturn_core::lts::LtsInstance;
use saturn_core::nfa::NfaInstance;
use saturn_core::rel::RelInstance;
use saturn_core::segala::{
    build_beta, check_coalgebraic_weak_bisim_with, check_prob_weak_bisim_with, largest_prob_weak_bisim, CmInstance,
    SigmaShape,
};
use saturn_core::syntax::read_aut;
use saturn_core::{Alphabet, Distribution, Label, Lts, LtsMorphism, Partition, SegalaSystem};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ab() -> Alphabet {
    Alphabet::new(["a", "b"]).unwrap()
}

fn a() -> Label {
    Label::visible(0)
}

fn b() -> Label {
    Label::visible(1)
}

fn worked_lts() -> Lts {
    let s = Label::visible(0);
    LtsMorphism::from_triples(3, Alphabet::new(["s"]).unwrap(), [(0, Label::TAU, 1), (1, s, 1), (2, s, 0)]).unwrap()
}

fn criterion_1() -> Outcome {
    let alpha = worked_lts();
    let start = Instant::now();
    let star = alpha.saturate().map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let s = Label::visible(0);
    let t = Label::TAU;
    let expected = LtsMorphism::from_triples(
        3,
        alpha.alphabet().clone(),
        [(0, t, 0), (0, t, 1), (0, s, 1), (1, t, 1), (1, s, 1), (2, t, 2), (2, s, 0), (2, s, 1)],
    )
    .unwrap();
    ensure(star == expected, || format!("got {star:?}"))?;
    ensure(alpha.saturate_monadic().map_err(|e| e.to_string())? == expected, || "monadic route differs".into())?;
    ensure(elapsed < Duration::from_millis(1), || format!("took {elapsed:?}"))?;
    Ok(format!("8 transitions, {elapsed:?}"))
}

fn worked_segala() -> SegalaSystem {
    let mut s = SegalaSystem::new(vec!["x1".into(), "x2".into(), "x3".into()], ab());
    s.add_step(0, a(), Distribution::new([(1, rat(1, 3)), (2, rat(2, 3))]).unwrap()).unwrap();
    s.add_step(0, b(), Distribution::dirac(2)).unwrap();
    s.add_step(1, a(), Distribution::dirac(0)).unwrap();
    s
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let s = worked_segala();
    let alpha = s.embed();
    let at = |l: Label, x: usize| s.atom(l, x);
    let x1 = ConvexSet::hull([
        Expr::zero(),
        Expr::from_terms([(at(a(), 1), rat(1, 3)), (at(a(), 2), rat(2, 3))]).unwrap(),
        Expr::unit(at(b(), 2)),
    ])
    .unwrap();
    let x2 = ConvexSet::hull([Expr::zero(), Expr::unit(at(a(), 0))]).unwrap();
    ensure(alpha.value(0) == &x1, || format!("x1 ↦ {:?}", alpha.value(0)))?;
    ensure(alpha.value(1) == &x2, || format!("x2 ↦ {:?}", alpha.value(1)))?;
    ensure(alpha.value(2) == &ConvexSet::zero(), || format!("x3 ↦ {:?}", alpha.value(2)))?;
    let (p, limited) = largest_prob_weak_bisim(&s, 3).map_err(|e| e.to_string())?;
    ensure(p == Partition::finest(3), || format!("partition {p:?}"))?;
    ensure(!limited, || "depth-limited".into())?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("3 singleton classes, {elapsed:?}"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let instance = LtsInstance::new(ab());
    let mut rng = StdRng::seed_from_u64(3);
    for trial in 0..300 {
        let size = rng.gen_range(1..=8);
        let lts = instance.random(&mut rng, size);
        let p = lts.largest_weak_bisim().map_err(|e| e.to_string())?;
        let violation = lts.check_milner_weak_bisim(&p.to_relation()).map_err(|e| e.to_string())?;
        ensure(violation.is_none(), || format!("trial {trial}: {violation:?} on {lts:?}"))?;
        let by_words = lts.largest_weak_bisim_by_words(size).map_err(|e| e.to_string())?;
        ensure(by_words == p, || format!("trial {trial}: word partition {by_words:?} vs {p:?}"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("300 systems, {elapsed:?}"))
}

fn routes_agree<I: SaturationInstance>(instance: &I, seed: u64) -> Result<(), String> {
    let mut rng = StdRng::seed_from_u64(seed);
    for trial in 0..300 {
        let size = rng.gen_range(1..=6);
        let alpha = instance.random(&mut rng, size);
        let depth = instance.default_depth(&alpha);
        let powers = saturate_by_powers(instance, &alpha, depth).map_err(|e| e.to_string())?;
        let lfp = saturate_by_lfp(instance, &alpha, depth).map_err(|e| e.to_string())?;
        ensure(powers.converged && lfp.converged, || format!("{} trial {trial}: unconverged", instance.name()))?;
        ensure(powers.result == lfp.result, || format!("{} trial {trial}: {alpha:?}", instance.name()))?;
    }
    Ok(())
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    routes_agree(&RelInstance, 4)?;
    routes_agree(&LtsInstance::standard(), 4)?;
    routes_agree(&NfaInstance::standard(), 4)?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("3 × 300 instances, {elapsed:?}"))
}

fn fuzz<I: SaturationInstance>(instance: &I, allow_skips: bool) -> Result<String, String> {
    let report = fuzz_laws(instance, &FuzzConfig::new(42, 1000));
    ensure(report.success(), || report.to_string())?;
    ensure(allow_skips || report.skipped == 0, || report.to_string())?;
    Ok(format!("{} {}/{}", report.instance, report.passed, report.trials))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let parts = [
        fuzz(&RelInstance, false)?,
        fuzz(&LtsInstance::standard(), false)?,
        fuzz(&NfaInstance::standard(), false)?,
        fuzz(&CmInstance, true)?,
    ];
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{}, {elapsed:?}", parts.join(", ")))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let instance = NfaInstance::standard();
    let mut rng = StdRng::seed_from_u64(6);
    let mut pairs = 0;
    for trial in 0..300 {
        let size = rng.gen_range(1..=6);
        let nfa = instance.random(&mut rng, size);
        let traces: Vec<_> =
            (0..size).map(|x| nfa.enumerate_weak_traces(x, 6)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        for x in 0..size {
            for y in 0..size {
                pairs += 1;
                let equiv = nfa.wtrace_equiv(x, y).map_err(|e| e.to_string())?;
                let sat_x = nfa.saturated_visible_behaviour(x).map_err(|e| e.to_string())?;
                let sat_y = nfa.saturated_visible_behaviour(y).map_err(|e| e.to_string())?;
                let sat_equiv = sat_x.equivalent(&sat_y).map_err(|e| e.to_string())?;
                ensure(equiv == sat_equiv, || format!("trial {trial} ({x},{y}): saturated behaviour disagrees"))?;
                if traces[x] != traces[y] {
                    ensure(!equiv, || format!("trial {trial} ({x},{y}): enumeration differs"))?;
                } else if !equiv {
                    // Equal up to length 6, so the shortest witness must be longer.
                    let word = nfa.wtrace_counterexample(x, y).map_err(|e| e.to_string())?;
                    ensure(word.is_some_and(|w| w.len() > 6), || format!("trial {trial} ({x},{y}): no long witness"))?;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("300 automata, {pairs} state pairs, {elapsed:?}"))
}

/// All partitions of `0..n`, as restricted growth strings.
fn all_partitions(n: usize) -> Vec<Partition> {
    fn go(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Partition>) {
        if prefix.len() == n {
            out.push(Partition::from_labels(prefix.iter().copied()));
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for c in 0..=next {
            prefix.push(c);
            go(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), n, &mut out);
    out
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(7);
    let (mut checked, mut related) = (0, 0);
    let mut unconverged = 0;
    for trial in 0..50 {
        let n = rng.gen_range(1..=4);
        let s = SegalaSystem::random(&mut rng, n, ab(), &[1, 2, 3]);
        let sat = s.saturate(10);
        if !sat.converged() {
            unconverged += 1;
            continue;
        }
        for p in all_partitions(n) {
            let prob = check_prob_weak_bisim_with(&s, &sat, &p).map_err(|e| e.to_string())?.holds();
            let coalg = check_coalgebraic_weak_bisim_with(&s, &sat, &p).map_err(|e| e.to_string())?;
            ensure(prob == coalg, || format!("trial {trial}: {p:?} prob={prob} coalgebraic={coalg} on {s:?}"))?;
            checked += 1;
            related += usize::from(prob);
        }
    }
    ensure(unconverged == 0, || format!("{unconverged} systems did not converge at depth 10"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(600), || format!("took {elapsed:?}"))?;
    Ok(format!("50 systems, {checked} equivalences ({related} bisimulations), {elapsed:?}"))
}

fn random_weight(rng: &mut StdRng) -> Rat {
    let d = rng.gen_range(1..=6);
    rat(rng.gen_range(0..=d), d)
}

/// A random point of the hull of `set`.
fn random_point(rng: &mut StdRng, set: &ConvexSet) -> Expr {
    let gens = set.generators();
    let weights: Vec<i64> = gens.iter().map(|_| rng.gen_range(0..=3)).collect();
    let total: i64 = weights.iter().sum();
    if total == 0 {
        return gens.choose(rng).expect("non-empty").clone();
    }
    gens.iter().zip(&weights).fold(Expr::zero(), |acc, (g, &w)| acc.add(&g.scale(&rat(w, total)).expect("non-negative")))
}

/// Some `ψ` with `atom ⇒ⁿ ψ`, built by the inductive rules.
fn derive(rng: &mut StdRng, beta: &saturn_core::CmMorphism, atom: usize, n: usize) -> Expr {
    if n == 0 {
        return Expr::unit(atom);
    }
    let rest = derive(rng, beta, atom, n - 1);
    if rng.gen_bool(0.25) {
        return rest;
    }
    let psi = random_point(rng, beta.value(atom));
    let mut moved = Expr::zero();
    for (y, r) in psi.terms() {
        moved = moved.add(&derive(rng, beta, y, n - 1).scale(r).expect("non-negative"));
    }
    let p = random_weight(rng);
    let q = Rat::from_integer(1.into()) - &p;
    moved.scale(&p).expect("p ≥ 0").add(&rest.scale(&q).expect("1-p ≥ 0"))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(8);
    let (mut members, mut outside) = (0, 0);
    while members < 500 || outside < 100 {
        let n = rng.gen_range(1..=4);
        let s = SegalaSystem::random(&mut rng, n, ab(), &[1, 2, 3]);
        let sat = s.saturate(3);
        let beta = build_beta(SigmaShape::new(s.alphabet()), &s.embed());
        for _ in 0..10 {
            let depth = rng.gen_range(0..=3);
            let atom = rng.gen_range(0..s.num_atoms());
            let stage = &sat.stages()[depth.min(sat.stages().len() - 1)];
            let psi = derive(&mut rng, &beta, atom, depth);
            ensure(stage.value(atom).member(&psi), || format!("{psi:?} ∉ γ{depth}({atom}) of {s:?}"))?;
            members += 1;
            if outside < 100 {
                // Push total mass above 1 on one coordinate.
                let target = rng.gen_range(0..s.num_atoms());
                let extra = Rat::from_integer(1.into()) - psi.mass() + rat(1, rng.gen_range(2..=9));
                let far = psi.add(&Expr::term(target, extra));
                ensure(!stage.value(atom).member(&far), || format!("{far:?} ∈ γ{depth}({atom}) of {s:?}"))?;
                outside += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{members} members, {outside} non-members, {elapsed:?}"))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    // a.τ.b.0 on 0..=3, a.b.0 on 4..=6
    let chains = read_aut("des (0,5,7)\n(0,\"a\",1)\n(1,\"tau\",2)\n(2,\"b\",3)\n(4,\"a\",5)\n(5,\"b\",6)\n").unwrap().lts;
    let p = chains.largest_weak_bisim().map_err(|e| e.to_string())?;
    ensure(p.same_class(0, 4), || format!("a.τ.b vs a.b: {p:?}"))?;

    // a.0 + τ.b.0 on 0..=3, a.0 + b.0 on 4..=5
    let branches =
        read_aut("des (0,5,6)\n(0,\"a\",1)\n(0,\"tau\",2)\n(2,\"b\",3)\n(4,\"a\",5)\n(4,\"b\",5)\n").unwrap().lts;
    let p = branches.largest_weak_bisim().map_err(|e| e.to_string())?;
    ensure(!p.same_class(0, 4), || format!("a.0 + τ.b.0 vs a.0 + b.0: {p:?}"))?;

    // x →τ δy, y →a δu, w →a δu'
    let mut stutter = SegalaSystem::new(["x", "y", "u", "w", "u2"].map(String::from).to_vec(), ab());
    stutter.add_step(0, Label::TAU, Distribution::dirac(1)).unwrap();
    stutter.add_step(1, a(), Distribution::dirac(2)).unwrap();
    stutter.add_step(3, a(), Distribution::dirac(4)).unwrap();
    let (p, limited) = largest_prob_weak_bisim(&stutter, 4).map_err(|e| e.to_string())?;
    ensure(p.same_class(0, 3) && !limited, || format!("stutter pair: {p:?}"))?;

    // x →a δy | δz, v →a δy | δz | ½y+½z, y →b δy, z deadlocked
    let mut combined = SegalaSystem::new(["x", "v", "y", "z"].map(String::from).to_vec(), ab());
    for src in [0, 1] {
        combined.add_step(src, a(), Distribution::dirac(2)).unwrap();
        combined.add_step(src, a(), Distribution::dirac(3)).unwrap();
    }
    combined.add_step(1, a(), Distribution::new([(2, rat(1, 2)), (3, rat(1, 2))]).unwrap()).unwrap();
    combined.add_step(2, b(), Distribution::dirac(2)).unwrap();
    let (p, limited) = largest_prob_weak_bisim(&combined, 4).map_err(|e| e.to_string())?;
    ensure(p.same_class(0, 1) && !p.same_class(2, 3) && !limited, || format!("combined step: {p:?}"))?;
    // Without combination x has only the two Dirac steps to offer.
    let sat = combined.saturate(4);
    let poly = sat.weak_sigma_polytope(0, a()).map_err(|e| e.to_string())?;
    let half = Distribution::new([(2, rat(1, 2)), (3, rat(1, 2))]).unwrap();
    let pure: Vec<&Distribution> = combined.steps(0).iter().map(|(_, mu)| mu).collect();
    ensure(poly.reaches(&half) && !pure.contains(&&half), || "combined step not needed".into())?;

    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("4 verdicts, {elapsed:?}"))
}

fn criterion_10() -> Outcome {
    let mut rng = StdRng::seed_from_u64(10);
    let alphabet = Alphabet::new(["a", "b", "c"]).unwrap();
    let labels: Vec<Label> = alphabet.labels().collect();
    let mut seen = HashSet::new();
    while seen.len() < 10_000 {
        seen.insert((rng.gen_range(0..1000), *labels.choose(&mut rng).unwrap(), rng.gen_range(0..1000)));
    }
    let lts = LtsMorphism::from_triples(1000, alphabet, seen).unwrap();
    let start = Instant::now();
    let star = lts.saturate().map_err(|e| e.to_string())?;
    let p = star.largest_strong_bisim();
    let elapsed = start.elapsed();
    ensure(p == lts.largest_weak_bisim().map_err(|e| e.to_string())?, || "partitions differ".into())?;
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("{} saturated transitions, {} classes, {elapsed:?}", star.num_transitions(), p.num_classes()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("LTS worked example", criterion_1),
        ("Segala worked example", criterion_2),
        ("weak bisimulation differential", criterion_3),
        ("powers route = lfp route", criterion_4),
        ("saturation law fuzz", criterion_5),
        ("weak-trace identity", criterion_6),
        ("probabilistic = coalgebraic", criterion_7),
        ("⇒ⁿ membership oracle", criterion_8),
        ("classic pairs", criterion_9),
        ("1000-state performance", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
