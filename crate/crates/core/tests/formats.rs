use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use saturn_core::syntax::{
    ccs_to_lts, lts_to_dot, parse_ccs, read_aut, read_nfa, read_pa, segala_to_dot, write_aut, write_nfa, write_pa,
    Action, ProcessTerm,
};
use saturn_core::{Alphabet, Label, LtsMorphism, Nfa, SegalaSystem};

fn lts_strategy() -> impl Strategy<Value = (usize, LtsMorphism)> {
    (1usize..7).prop_flat_map(|n| {
        let triple = (0..n, 0usize..3, 0..n);
        (0..n, prop::collection::vec(triple, 0..15)).prop_map(move |(init, triples)| {
            let alphabet = Alphabet::new(["a", "b"]).unwrap();
            let triples = triples.into_iter().map(|(x, l, y)| (x, Label::from_index(l), y));
            (init, LtsMorphism::from_triples(n, alphabet, triples).unwrap())
        })
    })
}

fn action() -> impl Strategy<Value = Action> {
    prop_oneof![
        Just(Action::Tau),
        prop::sample::select(vec!["a", "b", "c"]).prop_map(|a| Action::Input(a.into())),
        prop::sample::select(vec!["a", "b", "c"]).prop_map(|a| Action::Output(a.into())),
    ]
}

fn term() -> impl Strategy<Value = ProcessTerm> {
    let leaf = prop_oneof![Just(ProcessTerm::Nil), Just(ProcessTerm::Var("Q".into()))];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (action(), inner.clone()).prop_map(|(a, t)| ProcessTerm::prefix(a, t)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ProcessTerm::sum(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ProcessTerm::par(a, b)),
            (inner, prop::collection::btree_set(prop::sample::select(vec!["a", "b"]), 1..3)).prop_map(|(t, names)| {
                ProcessTerm::Restrict(Box::new(t), names.into_iter().map(String::from).collect::<BTreeSet<_>>())
            }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn aut_round_trip((init, lts) in lts_strategy()) {
        let text = write_aut(init, &lts);
        let file = read_aut(&text).unwrap();
        prop_assert_eq!(file.init, init);
        prop_assert_eq!(write_aut(file.init, &file.lts), text);
        prop_assert_eq!(file.lts.num_transitions(), lts.num_transitions());
    }

    #[test]
    fn nfa_round_trip((init, lts) in lts_strategy(), bits in prop::collection::vec(any::<bool>(), 7)) {
        let n = lts.num_states();
        let nfa = Nfa::from_lts(lts, bits[..n].to_vec()).unwrap();
        let text = write_nfa(init, &nfa);
        let file = read_nfa(&text).unwrap();
        prop_assert_eq!(write_nfa(file.init, &file.nfa), text);
    }

    #[test]
    fn ccs_print_parse((body, guard) in (term(), action())) {
        // Q is guarded by construction: its body is a prefix.
        let text = format!("P = {body};\nQ = {guard}.P;\n");
        let program = parse_ccs(&text).unwrap();
        prop_assert_eq!(&program.definitions[0].1, &body);
        prop_assert_eq!(program.to_string(), text);
    }
}

#[test]
fn pa_round_trip() {
    let mut rng = StdRng::seed_from_u64(1);
    for n in 1..=5 {
        for _ in 0..20 {
            let s = SegalaSystem::random(&mut rng, n, Alphabet::new(["a", "b"]).unwrap(), &[1, 2, 3, 4]);
            let text = write_pa(&s);
            assert_eq!(write_pa(&read_pa(&text).unwrap()), text);
        }
    }
}

#[test]
fn ccs_generation_is_deterministic() {
    let text = "P = (a.Q | 'a.R) \\ {a};\nQ = b.Q + tau.0;\nR = c.R + 'b.0;";
    let program = parse_ccs(text).unwrap();
    let first = ccs_to_lts(&program, 1000).unwrap();
    assert!(first.lts.num_states() > 3);
    for _ in 0..5 {
        assert_eq!(ccs_to_lts(&parse_ccs(text).unwrap(), 1000).unwrap(), first);
    }
}

#[test]
fn ccs_chains_are_weakly_bisimilar() {
    let left = ccs_to_lts(&parse_ccs("P = a.tau.b.0;").unwrap(), 10).unwrap();
    let right = ccs_to_lts(&parse_ccs("Q = a.b.0;").unwrap(), 10).unwrap();
    assert_eq!(left.lts.num_states(), 4);
    assert_eq!(right.lts.num_states(), 3);
    let alphabet = left.lts.alphabet().clone();
    let both = left.lts.disjoint_union(&right.lts.with_alphabet(&alphabet).unwrap()).unwrap();
    let p = both.largest_weak_bisim().unwrap();
    assert!(p.same_class(0, 4));
    // {roots}, {τ.b.0, b.0, b.0'}, {0, 0'}
    assert_eq!(both.quotient(&p).unwrap().num_states(), 3);
}

#[test]
fn ccs_errors_are_positioned() {
    let e = parse_ccs("P = Q;").unwrap_err();
    assert!(e.message.contains("Q"), "{e}");
    assert_eq!((e.line, e.col), (1, 5));
    let e = parse_ccs("P = P + a.0;").unwrap_err();
    assert!(e.message.contains("unguarded"), "{e}");
    let e = parse_ccs("P = a.\n  + 0;").unwrap_err();
    assert_eq!(e.line, 2);
}

#[test]
fn dot_outputs() {
    let lts = read_aut("des (0,1,1)\n(0,\"tau\",0)\n").unwrap().lts;
    let dot = lts_to_dot(&lts, None);
    assert_eq!(dot.matches("->").count(), 1);
    assert!(dot.contains("label=\"τ\""));
    let s = read_pa("states: x1 x2 x3;\nx1 -a-> 1/3 x2, 2/3 x3;\nx1 -b-> 1 x3;\nx2 -a-> 1 x1;\n").unwrap();
    let dot = segala_to_dot(&s);
    assert!(dot.contains("a:1/3") && dot.contains("a:2/3"));
}
