//! Automata with silent moves as Kleisli arrows of `P(Στ × Id + 1)`.
//!
//! A state `x` is accepting when `✓ ∈ α(x)`. Composition is the LTS
//! composition on transitions, and `✓ ∈ (g·f)(x)` iff `✓ ∈ f(x)` or
//! `x →τ_f y` with `✓ ∈ g(y)`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use rand::rngs::StdRng;
use rand::Rng;

use crate::error::{Error, Result};
use crate::kernel::SaturationInstance;
use crate::lts::{random_steps, Alphabet, Label, LtsMorphism};
use crate::rel::Relation;

/// Determinization gives up beyond this many subset states.
pub const SUBSET_LIMIT: usize = 1 << 16;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Nfa {
    transitions: LtsMorphism,
    accepting: Vec<bool>,
}

impl Nfa {
    pub fn new(domain: usize, codomain: usize, alphabet: Alphabet) -> Self {
        Nfa { transitions: LtsMorphism::new(domain, codomain, alphabet), accepting: vec![false; domain] }
    }

    pub fn endo(n: usize, alphabet: Alphabet) -> Self {
        Self::new(n, n, alphabet)
    }

    pub fn from_parts(
        n: usize,
        alphabet: Alphabet,
        triples: impl IntoIterator<Item = (usize, Label, usize)>,
        accepting: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let transitions = LtsMorphism::from_triples(n, alphabet, triples)?;
        let mut nfa = Nfa { transitions, accepting: vec![false; n] };
        for x in accepting {
            nfa.set_accepting(x, true)?;
        }
        Ok(nfa)
    }

    /// An automaton with the transitions of `lts` and the given acceptance.
    pub fn from_lts(lts: LtsMorphism, accepting: Vec<bool>) -> Result<Self> {
        if accepting.len() != lts.domain() {
            return Err(Error::CarrierMismatch("acceptance vector length".into()));
        }
        Ok(Nfa { transitions: lts, accepting })
    }

    /// The unit: `x ↦ {(τ, x)}`, nothing accepting.
    pub fn unit(n: usize, alphabet: Alphabet) -> Self {
        Nfa { transitions: LtsMorphism::unit(n, alphabet), accepting: vec![false; n] }
    }

    pub fn add_step(&mut self, x: usize, label: Label, y: usize) -> Result<()> {
        self.transitions.add_step(x, label, y)
    }

    pub fn set_accepting(&mut self, x: usize, accepting: bool) -> Result<()> {
        let slot = self.accepting.get_mut(x).ok_or_else(|| Error::UnknownState(x.to_string()))?;
        *slot = accepting;
        Ok(())
    }

    pub fn is_accepting(&self, x: usize) -> bool {
        self.accepting[x]
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.accepting.iter().enumerate().filter(|(_, &a)| a).map(|(x, _)| x)
    }

    pub fn domain(&self) -> usize {
        self.accepting.len()
    }

    pub fn codomain(&self) -> usize {
        self.transitions.codomain()
    }

    pub fn num_states(&self) -> usize {
        self.domain()
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.transitions.alphabet()
    }

    pub fn steps(&self, x: usize) -> &[(Label, usize)] {
        self.transitions.steps(x)
    }

    /// The transition part, forgetting acceptance.
    pub fn lts(&self) -> &LtsMorphism {
        &self.transitions
    }

    fn check_state(&self, x: usize) -> Result<()> {
        if x < self.num_states() && self.transitions.is_endo() {
            Ok(())
        } else {
            Err(Error::UnknownState(x.to_string()))
        }
    }

    pub fn compose(g: &Nfa, f: &Nfa) -> Result<Nfa> {
        let transitions = LtsMorphism::compose(&g.transitions, &f.transitions)?;
        Ok(Self::compose_with(g, f, transitions))
    }

    fn compose_with(g: &Nfa, f: &Nfa, transitions: LtsMorphism) -> Nfa {
        let accepting = (0..f.domain())
            .map(|x| {
                f.accepting[x] || f.steps(x).iter().any(|&(l, y)| l.is_tau() && g.accepting[y])
            })
            .collect();
        Nfa { transitions, accepting }
    }

    pub fn join(&self, other: &Nfa) -> Result<Nfa> {
        let transitions = self.transitions.join(&other.transitions)?;
        let accepting = self.accepting.iter().zip(&other.accepting).map(|(a, b)| *a || *b).collect();
        Ok(Nfa { transitions, accepting })
    }

    pub fn is_subset(&self, other: &Nfa) -> bool {
        self.transitions.is_subset(&other.transitions)
            && self.accepting.iter().zip(&other.accepting).all(|(a, b)| !a || *b)
    }

    /// The closed form
    /// `α*(x) = {(τ,x)} ∪ {(σ,x') | x (→τ)* ∘ →σ ∘ (→τ)* x'} ∪ {✓ | x (→τ)* x', ✓ ∈ α(x')}`
    /// with `σ` ranging over all of `Στ`.
    pub fn saturate(&self) -> Result<Nfa> {
        let transitions = self.transitions.saturate_direct()?;
        let tau_star = self.transitions.tau_relation().rtc()?;
        Ok(Nfa { transitions, accepting: self.closed_acceptance(&tau_star) })
    }

    fn closed_acceptance(&self, tau_star: &Relation) -> Vec<bool> {
        (0..self.num_states()).map(|x| tau_star.successors(x).any(|y| self.accepting[y])).collect()
    }

    /// `beh_α(x)`: words over `Στ`, with `τ` read as an ordinary letter.
    pub fn behaviour_language(&self, x: usize) -> Result<Language> {
        self.check_state(x)?;
        Ok(Language { automaton: self.clone(), start: x })
    }

    /// `tr_α(x)`: the automaton with `τ` erased (steps and acceptance closed
    /// under `(→τ)*`), started at `x`.
    pub fn weak_traces(&self, x: usize) -> Result<Language> {
        self.check_state(x)?;
        let tau_star = self.transitions.tau_relation().rtc()?;
        let accepting = self.closed_acceptance(&tau_star);
        let mut automaton = Nfa::endo(self.num_states(), self.alphabet().clone());
        for y in 0..self.num_states() {
            for z in tau_star.successors(y) {
                for &(l, w) in self.steps(z) {
                    if l.is_tau() {
                        continue;
                    }
                    for v in tau_star.successors(w) {
                        automaton.add_step(y, l, v)?;
                    }
                }
            }
        }
        automaton.accepting = accepting;
        Ok(Language { automaton, start: x })
    }

    /// `Σ* ∩ beh_{α*}(x)`: the saturated behaviour restricted to words
    /// without `τ`.
    pub fn saturated_visible_behaviour(&self, x: usize) -> Result<Language> {
        self.check_state(x)?;
        let saturated = self.saturate()?;
        let steps = (0..self.num_states())
            .map(|y| saturated.steps(y).iter().copied().filter(|(l, _)| !l.is_tau()).collect())
            .collect();
        let transitions = LtsMorphism::from_raw(self.num_states(), self.alphabet().clone(), steps);
        Ok(Language { automaton: Nfa { transitions, accepting: saturated.accepting }, start: x })
    }

    /// Whether `x` and `y` have the same weak traces.
    pub fn wtrace_equiv(&self, x: usize, y: usize) -> Result<bool> {
        Ok(self.wtrace_counterexample(x, y)?.is_none())
    }

    /// A shortest word in exactly one of the weak-trace languages of `x` and
    /// `y`, if any.
    pub fn wtrace_counterexample(&self, x: usize, y: usize) -> Result<Option<Vec<Label>>> {
        self.weak_traces(x)?.distinguishing_word(&self.weak_traces(y)?)
    }

    /// Every weak trace of `x` of length at most `max_len`, by explicit path
    /// enumeration.
    pub fn enumerate_weak_traces(&self, x: usize, max_len: usize) -> Result<BTreeSet<Vec<Label>>> {
        self.check_state(x)?;
        let mut closure_memo: HashMap<usize, BTreeSet<usize>> = HashMap::new();
        let mut closure = |s: usize| -> BTreeSet<usize> {
            closure_memo
                .entry(s)
                .or_insert_with(|| {
                    let mut seen = BTreeSet::from([s]);
                    let mut stack = vec![s];
                    while let Some(u) = stack.pop() {
                        for &(l, v) in self.steps(u) {
                            if l.is_tau() && seen.insert(v) {
                                stack.push(v);
                            }
                        }
                    }
                    seen
                })
                .clone()
        };
        let mut traces = BTreeSet::new();
        let mut frontier: BTreeMap<Vec<Label>, BTreeSet<usize>> = BTreeMap::from([(Vec::new(), closure(x))]);
        for len in 0..=max_len {
            for (word, states) in &frontier {
                if states.iter().any(|&s| self.accepting[s]) {
                    traces.insert(word.clone());
                }
            }
            if len == max_len {
                break;
            }
            let mut next: BTreeMap<Vec<Label>, BTreeSet<usize>> = BTreeMap::new();
            for (word, states) in &frontier {
                for &s in states {
                    for &(l, t) in self.steps(s) {
                        if l.is_tau() {
                            continue;
                        }
                        let mut longer = word.clone();
                        longer.push(l);
                        next.entry(longer).or_default().extend(closure(t));
                    }
                }
            }
            frontier = next;
        }
        Ok(traces)
    }
}

impl fmt::Debug for Nfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let accepting: Vec<usize> = self.accepting_states().collect();
        write!(f, "Nfa{{{:?}, accepting {:?}}}", self.transitions, accepting)
    }
}

/// A regular language given by an automaton and a start state. Every label,
/// `τ` included, is read as an ordinary letter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Language {
    automaton: Nfa,
    start: usize,
}

impl Language {
    pub fn automaton(&self) -> &Nfa {
        &self.automaton
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.automaton.alphabet()
    }

    pub fn accepts(&self, word: &[Label]) -> bool {
        let mut current = BTreeSet::from([self.start]);
        for &letter in word {
            current = current
                .iter()
                .flat_map(|&s| self.automaton.steps(s).iter().filter(move |(l, _)| *l == letter).map(|&(_, t)| t))
                .collect();
            if current.is_empty() {
                return false;
            }
        }
        current.iter().any(|&s| self.automaton.accepting[s])
    }

    /// Subset construction over all of `Στ`. The empty subset is kept as a
    /// rejecting sink, so the result is complete.
    pub fn determinize(&self) -> Result<Dfa> {
        let letters: Vec<Label> = self.alphabet().labels().collect();
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut subsets: Vec<Vec<usize>> = Vec::new();
        let mut next: Vec<Vec<usize>> = Vec::new();
        let start = vec![self.start];
        index.insert(start.clone(), 0);
        subsets.push(start);
        let mut i = 0;
        while i < subsets.len() {
            let mut row = Vec::with_capacity(letters.len());
            for &letter in &letters {
                let mut target: Vec<usize> = subsets[i]
                    .iter()
                    .flat_map(|&s| self.automaton.steps(s).iter().filter(move |(l, _)| *l == letter).map(|&(_, t)| t))
                    .collect();
                target.sort_unstable();
                target.dedup();
                let id = match index.get(&target) {
                    Some(&id) => id,
                    None => {
                        if subsets.len() >= SUBSET_LIMIT {
                            return Err(Error::SubsetLimit(SUBSET_LIMIT));
                        }
                        index.insert(target.clone(), subsets.len());
                        subsets.push(target);
                        subsets.len() - 1
                    }
                };
                row.push(id);
            }
            next.push(row);
            i += 1;
        }
        let accepting = subsets.iter().map(|s| s.iter().any(|&x| self.automaton.accepting[x])).collect();
        Ok(Dfa { letters, next, accepting })
    }

    /// A shortest word accepted by exactly one of the two languages, or `None`
    /// when they are equal. Both sides are determinized and compared by the
    /// Hopcroft–Karp union-find procedure.
    pub fn distinguishing_word(&self, other: &Language) -> Result<Option<Vec<Label>>> {
        if self.alphabet() != other.alphabet() {
            return Err(Error::AlphabetMismatch);
        }
        Ok(self.determinize()?.distinguishing_word(&other.determinize()?))
    }

    pub fn equivalent(&self, other: &Language) -> Result<bool> {
        Ok(self.distinguishing_word(other)?.is_none())
    }
}

/// A complete deterministic automaton with start state 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    letters: Vec<Label>,
    next: Vec<Vec<usize>>,
    accepting: Vec<bool>,
}

impl Dfa {
    pub fn num_states(&self) -> usize {
        self.next.len()
    }

    pub fn accepts(&self, word: &[Label]) -> bool {
        let mut s = 0;
        for l in word {
            match self.letters.iter().position(|x| x == l) {
                Some(i) => s = self.next[s][i],
                None => return false,
            }
        }
        self.accepting[s]
    }

    /// Hopcroft–Karp: merge the start states, then merge successor pairs
    /// breadth first; a pair with different acceptance refutes equivalence.
    pub fn distinguishing_word(&self, other: &Dfa) -> Option<Vec<Label>> {
        debug_assert_eq!(self.letters, other.letters);
        let offset = self.num_states();
        let mut sets = UnionFind::new(offset + other.num_states());
        let mut queue = VecDeque::from([(0usize, 0usize, Vec::new())]);
        sets.union(0, offset);
        while let Some((p, q, word)) = queue.pop_front() {
            if self.accepting[p] != other.accepting[q] {
                return Some(word);
            }
            for (i, &letter) in self.letters.iter().enumerate() {
                let (p2, q2) = (self.next[p][i], other.next[q][i]);
                if sets.union(p2, q2 + offset) {
                    let mut longer = word.clone();
                    longer.push(letter);
                    queue.push_back((p2, q2, longer));
                }
            }
        }
        None
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns whether the two were in different sets.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[rb] = ra;
        true
    }
}

/// The automaton monad as a saturation instance over a fixed alphabet.
#[derive(Clone, Debug)]
pub struct NfaInstance {
    pub alphabet: Alphabet,
}

impl NfaInstance {
    pub fn new(alphabet: Alphabet) -> Self {
        NfaInstance { alphabet }
    }

    pub fn standard() -> Self {
        Self::new(Alphabet::new(["a", "b"]).expect("valid alphabet"))
    }
}

impl SaturationInstance for NfaInstance {
    type Arrow = Nfa;

    fn name(&self) -> &'static str {
        "nfa"
    }

    fn carrier(&self, f: &Nfa) -> (usize, usize) {
        (f.domain(), f.codomain())
    }

    fn compose(&self, g: &Nfa, f: &Nfa) -> Nfa {
        let transitions = LtsMorphism::compose(&g.transitions, &f.transitions).expect("composable arrows");
        Nfa::compose_with(g, f, transitions)
    }

    fn identity(&self, like: &Nfa) -> Nfa {
        Nfa::unit(like.domain(), like.alphabet().clone())
    }

    fn leq(&self, f: &Nfa, g: &Nfa) -> bool {
        f.is_subset(g)
    }

    fn join(&self, f: &Nfa, g: &Nfa) -> Result<Nfa> {
        f.join(g)
    }

    fn bottom(&self, like: &Nfa) -> Result<Nfa> {
        Ok(Nfa::endo(like.domain(), like.alphabet().clone()))
    }

    fn is_kleene(&self) -> bool {
        true
    }

    // ✓ passes through `⊥`, so `⊥ · f` keeps the acceptance of `f`.
    fn bottom_absorbs_left(&self) -> bool {
        false
    }

    fn random(&self, rng: &mut StdRng, size: usize) -> Nfa {
        let steps = random_steps(rng, size, size, &self.alphabet);
        let transitions = LtsMorphism::from_raw(size, self.alphabet.clone(), steps);
        let accepting = (0..size).map(|_| rng.gen_bool(0.3)).collect();
        Nfa { transitions, accepting }
    }

    fn lift_map(&self, map: &[usize], target: &Nfa) -> Nfa {
        let steps = map.iter().map(|&y| vec![(Label::TAU, y)]).collect();
        let transitions = LtsMorphism::from_raw(target.domain(), target.alphabet().clone(), steps);
        Nfa { transitions, accepting: vec![false; map.len()] }
    }

    fn leq_witness(&self, f: &Nfa, g: &Nfa) -> Option<String> {
        if let Some(x) = f.accepting_states().find(|&x| !g.accepting.get(x).copied().unwrap_or(false)) {
            return Some(format!("✓ ∈ f({x})"));
        }
        f.transitions
            .transitions()
            .find(|&(x, l, y)| x >= g.domain() || !g.transitions.has_step(x, l, y))
            .map(|(x, l, y)| format!("{x} -{}-> {y}", f.alphabet().name(l)))
    }

    fn shrink(&self, f: &Nfa) -> Vec<Nfa> {
        let mut out: Vec<Nfa> = f
            .accepting_states()
            .map(|x| {
                let mut smaller = f.clone();
                smaller.accepting[x] = false;
                smaller
            })
            .collect();
        for (x, l, y) in f.transitions.transitions() {
            let mut steps: Vec<Vec<(Label, usize)>> =
                (0..f.domain()).map(|z| f.steps(z).to_vec()).collect();
            steps[x].retain(|&s| s != (l, y));
            let transitions = LtsMorphism::from_raw(f.codomain(), f.alphabet().clone(), steps);
            out.push(Nfa { transitions, accepting: f.accepting.clone() });
        }
        out
    }
}
