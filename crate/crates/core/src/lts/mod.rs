//! Labelled transition systems with a silent action, as Kleisli arrows of the
//! monad `P(Στ × Id)`.
//!
//! Composition fuses a silent step with any step and discards pairs of
//! visible steps, so `e_X(x) = {(τ, x)}` is the identity. Saturation is
//! computed along two routes that must agree: the monadic one (close the
//! relation `m_X · Σ̄τ α` on `Στ × X` reflexively and transitively, then
//! precompose `e_X`) and the direct one (`⇒σ = (→τ)* ∘ →σ ∘ (→τ)*`,
//! `⇒τ = (→τ)*`).

mod partition;

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use rand::rngs::StdRng;
use rand::Rng;

use crate::error::{Error, Result};
use crate::kernel::SaturationInstance;
use crate::rel::Relation;

pub use partition::Partition;

/// An action: the silent action `τ` or a visible label, by index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(u32);

impl Label {
    pub const TAU: Label = Label(0);

    pub fn visible(index: usize) -> Label {
        Label(index as u32 + 1)
    }

    pub fn is_tau(self) -> bool {
        self.0 == 0
    }

    /// Position in `Στ`, with `τ` first.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(index: usize) -> Label {
        Label(index as u32)
    }

    pub fn visible_index(self) -> Option<usize> {
        (self.0 > 0).then(|| self.0 as usize - 1)
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.visible_index() {
            None => f.write_str("τ"),
            Some(i) => write!(f, "#{i}"),
        }
    }
}

/// The spelling of `τ` in every text format.
pub const TAU_NAME: &str = "tau";

/// The visible labels `Σ`; `τ` is always implicitly present.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Alphabet {
    visible: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut visible: Vec<String> = Vec::new();
        for name in names {
            let name = name.into();
            if name == TAU_NAME {
                return Err(Error::ReservedTau);
            }
            if visible.contains(&name) {
                return Err(Error::DuplicateLabel(name));
            }
            visible.push(name);
        }
        Ok(Alphabet { visible })
    }

    /// Number of visible labels.
    pub fn num_visible(&self) -> usize {
        self.visible.len()
    }

    /// `|Στ|`.
    pub fn size(&self) -> usize {
        self.visible.len() + 1
    }

    /// All of `Στ`, `τ` first.
    pub fn labels(&self) -> impl Iterator<Item = Label> {
        (0..self.size()).map(Label::from_index)
    }

    pub fn visible_labels(&self) -> impl Iterator<Item = Label> {
        (0..self.visible.len()).map(Label::visible)
    }

    pub fn lookup(&self, name: &str) -> Option<Label> {
        if name == TAU_NAME {
            return Some(Label::TAU);
        }
        self.visible.iter().position(|v| v == name).map(Label::visible)
    }

    pub fn name(&self, label: Label) -> &str {
        match label.visible_index() {
            None => TAU_NAME,
            Some(i) => &self.visible[i],
        }
    }

    pub fn contains(&self, label: Label) -> bool {
        label.index() < self.size()
    }

    pub fn visible_names(&self) -> &[String] {
        &self.visible
    }
}

/// A Kleisli arrow `X -> P(Στ × Y)`. An LTS is the endo case.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LtsMorphism {
    codomain: usize,
    alphabet: Alphabet,
    /// Per source state, sorted and duplicate-free.
    steps: Vec<Vec<(Label, usize)>>,
}

/// A labelled transition system `α: X -> P(Στ × X)`.
pub type Lts = LtsMorphism;

impl LtsMorphism {
    pub fn new(domain: usize, codomain: usize, alphabet: Alphabet) -> Self {
        LtsMorphism { codomain, alphabet, steps: vec![Vec::new(); domain] }
    }

    /// An LTS without transitions.
    pub fn endo(n: usize, alphabet: Alphabet) -> Self {
        Self::new(n, n, alphabet)
    }

    pub fn from_triples(
        n: usize,
        alphabet: Alphabet,
        triples: impl IntoIterator<Item = (usize, Label, usize)>,
    ) -> Result<Self> {
        let mut lts = Self::endo(n, alphabet);
        for (x, l, y) in triples {
            lts.add_step(x, l, y)?;
        }
        Ok(lts)
    }

    /// Builds an arrow from unsorted step lists, trusting the caller on ranges.
    pub(crate) fn from_raw(codomain: usize, alphabet: Alphabet, mut steps: Vec<Vec<(Label, usize)>>) -> Self {
        for s in &mut steps {
            s.sort_unstable();
            s.dedup();
        }
        LtsMorphism { codomain, alphabet, steps }
    }

    /// The unit `e_X(x) = {(τ, x)}`.
    pub fn unit(n: usize, alphabet: Alphabet) -> Self {
        let steps = (0..n).map(|x| vec![(Label::TAU, x)]).collect();
        LtsMorphism { codomain: n, alphabet, steps }
    }

    pub fn add_step(&mut self, x: usize, label: Label, y: usize) -> Result<()> {
        if x >= self.domain() {
            return Err(Error::UnknownState(x.to_string()));
        }
        if y >= self.codomain {
            return Err(Error::UnknownState(y.to_string()));
        }
        if !self.alphabet.contains(label) {
            return Err(Error::UnknownLabel(format!("{label:?}")));
        }
        let row = &mut self.steps[x];
        if let Err(pos) = row.binary_search(&(label, y)) {
            row.insert(pos, (label, y));
        }
        Ok(())
    }

    pub fn domain(&self) -> usize {
        self.steps.len()
    }

    pub fn codomain(&self) -> usize {
        self.codomain
    }

    /// Number of states of an LTS.
    pub fn num_states(&self) -> usize {
        self.steps.len()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn is_endo(&self) -> bool {
        self.domain() == self.codomain
    }

    /// `α(x)`, sorted.
    pub fn steps(&self, x: usize) -> &[(Label, usize)] {
        &self.steps[x]
    }

    pub fn has_step(&self, x: usize, label: Label, y: usize) -> bool {
        self.steps[x].binary_search(&(label, y)).is_ok()
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, Label, usize)> + '_ {
        self.steps.iter().enumerate().flat_map(|(x, s)| s.iter().map(move |&(l, y)| (x, l, y)))
    }

    pub fn num_transitions(&self) -> usize {
        self.steps.iter().map(Vec::len).sum()
    }

    /// Kleisli composition `g · f`:
    /// `(σ, z) ∈ (g·f)(x)` iff `x →σ_f y →τ_g z` or `x →τ_f y →σ_g z`.
    pub fn compose(g: &LtsMorphism, f: &LtsMorphism) -> Result<LtsMorphism> {
        if f.codomain != g.domain() {
            return Err(Error::CarrierMismatch(format!(
                "cannot compose an arrow into {} states with one out of {}",
                f.codomain,
                g.domain()
            )));
        }
        if f.alphabet != g.alphabet {
            return Err(Error::AlphabetMismatch);
        }
        Ok(Self::compose_unchecked(g, f))
    }

    fn compose_unchecked(g: &LtsMorphism, f: &LtsMorphism) -> LtsMorphism {
        let steps = f
            .steps
            .iter()
            .map(|row| {
                let mut out = Vec::new();
                for &(first, y) in row {
                    for &(second, z) in &g.steps[y] {
                        if first.is_tau() {
                            out.push((second, z));
                        } else if second.is_tau() {
                            out.push((first, z));
                        }
                    }
                }
                out
            })
            .collect();
        Self::from_raw(g.codomain, f.alphabet.clone(), steps)
    }

    pub fn join(&self, other: &LtsMorphism) -> Result<LtsMorphism> {
        self.same_shape(other)?;
        let steps = self
            .steps
            .iter()
            .zip(&other.steps)
            .map(|(a, b)| a.iter().chain(b).copied().collect())
            .collect();
        Ok(Self::from_raw(self.codomain, self.alphabet.clone(), steps))
    }

    pub fn is_subset(&self, other: &LtsMorphism) -> bool {
        self.same_shape(other).is_ok()
            && self.steps.iter().zip(&other.steps).all(|(a, b)| a.iter().all(|s| b.binary_search(s).is_ok()))
    }

    fn same_shape(&self, other: &LtsMorphism) -> Result<()> {
        if self.domain() != other.domain() || self.codomain != other.codomain {
            return Err(Error::CarrierMismatch(format!(
                "{}→{} vs {}→{}",
                self.domain(),
                self.codomain,
                other.domain(),
                other.codomain
            )));
        }
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch);
        }
        Ok(())
    }

    /// `→σ` as a relation.
    pub fn label_relation(&self, label: Label) -> Relation {
        let mut r = Relation::empty(self.domain(), self.codomain);
        for (x, l, y) in self.transitions() {
            if l == label {
                r.insert(x, y).expect("targets are in range");
            }
        }
        r
    }

    pub fn tau_relation(&self) -> Relation {
        self.label_relation(Label::TAU)
    }

    fn require_endo(&self) -> Result<()> {
        if self.is_endo() {
            Ok(())
        } else {
            Err(Error::CarrierMismatch(format!(
                "expected an LTS, got an arrow {}→{}",
                self.domain(),
                self.codomain
            )))
        }
    }

    /// Saturation along the monadic route: `(m_X · Σ̄τ α)* · e_X`.
    pub fn saturate_monadic(&self) -> Result<Lts> {
        self.require_endo()?;
        let n = self.num_states();
        let k = self.alphabet.size();
        let node = |label: Label, x: usize| label.index() * n + x;
        // m_X · Σ̄τ α on Στ × X: (σ, x) → (σ, x') when x →τ x', and
        // (τ, x) → (σ', x') when x →σ' x'. Visible-visible pairs vanish.
        let mut lifted = Relation::empty(k * n, k * n);
        for (x, l, y) in self.transitions() {
            for sigma in self.alphabet.labels() {
                if l.is_tau() {
                    lifted.insert(node(sigma, x), node(sigma, y))?;
                } else if sigma.is_tau() {
                    lifted.insert(node(Label::TAU, x), node(l, y))?;
                }
            }
        }
        let closed = lifted.rtc()?;
        let steps = (0..n)
            .map(|x| {
                closed
                    .successors(node(Label::TAU, x))
                    .map(|v| (Label::from_index(v / n), v % n))
                    .collect()
            })
            .collect();
        Ok(Self::from_raw(n, self.alphabet.clone(), steps))
    }

    /// The weak transition relations `⇒σ` for every `σ ∈ Στ`, indexed by
    /// label position.
    pub fn weak_relations(&self) -> Result<Vec<Relation>> {
        self.require_endo()?;
        let tau_star = self.tau_relation().rtc()?;
        let mut weak = vec![tau_star.clone()];
        for sigma in self.alphabet.visible_labels() {
            let strong = self.label_relation(sigma);
            let after = Relation::compose_unchecked(&strong, &tau_star);
            weak.push(Relation::compose_unchecked(&tau_star, &after));
        }
        Ok(weak)
    }

    /// Saturation along the direct route: `⇒σ = (→τ)* ∘ →σ ∘ (→τ)*` for
    /// visible `σ` and `⇒τ = (→τ)*`.
    pub fn saturate_direct(&self) -> Result<Lts> {
        let weak = self.weak_relations()?;
        Ok(Self::from_relations(&self.alphabet, &weak))
    }

    fn from_relations(alphabet: &Alphabet, per_label: &[Relation]) -> Lts {
        let n = per_label[0].domain();
        let steps = (0..n)
            .map(|x| {
                per_label
                    .iter()
                    .enumerate()
                    .flat_map(|(l, r)| r.successors(x).map(move |y| (Label::from_index(l), y)))
                    .collect()
            })
            .collect();
        LtsMorphism { codomain: n, alphabet: alphabet.clone(), steps }
    }

    /// The saturated system `α*`, computed along both routes; a disagreement
    /// is reported as [`Error::RouteMismatch`].
    pub fn saturate(&self) -> Result<Lts> {
        let monadic = self.saturate_monadic()?;
        let direct = self.saturate_direct()?;
        if monadic != direct {
            let x = (0..self.num_states()).find(|&x| monadic.steps[x] != direct.steps[x]).unwrap_or(0);
            return Err(Error::RouteMismatch(format!(
                "state {x}: monadic {:?} vs direct {:?}",
                monadic.steps[x], direct.steps[x]
            )));
        }
        Ok(direct)
    }

    /// Looks up a word of visible label names.
    pub fn word(&self, names: &[&str]) -> Result<Vec<Label>> {
        names
            .iter()
            .map(|n| match self.alphabet.lookup(n) {
                Some(l) if !l.is_tau() => Ok(l),
                _ => Err(Error::UnknownLabel(n.to_string())),
            })
            .collect()
    }

    /// `⇒s = (→τ)* ∘ →σ1 ∘ (→τ)* ∘ … ∘ →σn ∘ (→τ)*`; the empty word gives
    /// `(→τ)*`.
    pub fn weak_word_step(&self, word: &[Label]) -> Result<Relation> {
        self.require_endo()?;
        for &l in word {
            if l.is_tau() || !self.alphabet.contains(l) {
                return Err(Error::UnknownLabel(format!("{l:?}")));
            }
        }
        let tau_star = self.tau_relation().rtc()?;
        let mut r = tau_star.clone();
        for &sigma in word {
            let stepped = Relation::compose_unchecked(&self.label_relation(sigma), &r);
            r = Relation::compose_unchecked(&tau_star, &stepped);
        }
        Ok(r)
    }

    /// Milner's condition: `(x, y) ∈ R` and `x →σ x'` imply `y ⇒σ y'` for
    /// some `y'` with `(x', y') ∈ R`. `Ok(None)` when it holds.
    pub fn check_milner_weak_bisim(&self, r: &Relation) -> Result<Option<StepViolation>> {
        self.check_symmetric(r)?;
        let weak = self.weak_relations()?;
        Ok(self.first_unmatched(self, &weak, r))
    }

    /// The same condition with `→σ` replaced by `⇒σ` on both sides, i.e.
    /// strong bisimulation on the saturated system.
    pub fn check_saturated_weak_bisim(&self, r: &Relation) -> Result<Option<StepViolation>> {
        self.check_symmetric(r)?;
        let weak = self.weak_relations()?;
        let saturated = Self::from_relations(&self.alphabet, &weak);
        Ok(self.first_unmatched(&saturated, &weak, r))
    }

    fn check_symmetric(&self, r: &Relation) -> Result<()> {
        self.require_endo()?;
        if r.domain() != self.num_states() || !r.is_endo() {
            return Err(Error::CarrierMismatch("relation does not live on the LTS states".into()));
        }
        match r.asymmetry() {
            Some((x, y)) => Err(Error::NotSymmetric(x, y)),
            None => Ok(()),
        }
    }

    fn first_unmatched(&self, moves: &Lts, answers: &[Relation], r: &Relation) -> Option<StepViolation> {
        for (x, y) in r.pairs() {
            for &(sigma, x2) in moves.steps(x) {
                let reachable = answers[sigma.index()].row(y);
                if reachable.is_disjoint(r.row(x2)) {
                    return Some(StepViolation { pair: (x, y), label: sigma, target: x2 });
                }
            }
        }
        None
    }

    /// The coarsest strong bisimulation, by signature refinement. Each round
    /// splits classes by the set of `(label, class of target)` pairs; class
    /// indices follow the lowest member.
    pub fn largest_strong_bisim(&self) -> Partition {
        let n = self.num_states();
        let mut class_of = vec![0usize; n];
        let mut count = usize::from(n > 0);
        loop {
            let mut ids: HashMap<(usize, Vec<(Label, usize)>), usize> = HashMap::new();
            let next: Vec<usize> = (0..n)
                .map(|x| {
                    let mut sig: Vec<(Label, usize)> =
                        self.steps[x].iter().map(|&(l, y)| (l, class_of[y])).collect();
                    sig.sort_unstable();
                    sig.dedup();
                    let fresh = ids.len();
                    *ids.entry((class_of[x], sig)).or_insert(fresh)
                })
                .collect();
            let new_count = ids.len();
            class_of = next;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        Partition::from_labels(class_of)
    }

    /// The largest weak bisimulation: strong bisimilarity on `α*`.
    pub fn largest_weak_bisim(&self) -> Result<Partition> {
        Ok(self.saturate()?.largest_strong_bisim())
    }

    /// Weak bisimilarity with words as observations: the coarsest partition
    /// in which related states answer each other's `⇒s` moves, for every word
    /// `s` over `Σ` of length at most `max_len`.
    pub fn largest_weak_bisim_by_words(&self, max_len: usize) -> Result<Partition> {
        let relations = self.word_relations(max_len)?;
        let n = self.num_states();
        let mut class_of = vec![0usize; n];
        let mut count = usize::from(n > 0);
        loop {
            let mut ids: HashMap<(usize, Vec<Vec<usize>>), usize> = HashMap::new();
            let next: Vec<usize> = (0..n)
                .map(|x| {
                    let sig: Vec<Vec<usize>> = relations
                        .iter()
                        .map(|r| {
                            let mut classes: Vec<usize> = r.successors(x).map(|y| class_of[y]).collect();
                            classes.sort_unstable();
                            classes.dedup();
                            classes
                        })
                        .collect();
                    let fresh = ids.len();
                    *ids.entry((class_of[x], sig)).or_insert(fresh)
                })
                .collect();
            let new_count = ids.len();
            class_of = next;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        Ok(Partition::from_labels(class_of))
    }

    /// The distinct relations `⇒s` for `|s| ≤ max_len`. Words whose relation
    /// repeats an earlier one are not extended, since `⇒(s·a) = ⇒a ∘ ⇒s`.
    fn word_relations(&self, max_len: usize) -> Result<Vec<Relation>> {
        let mut seen: HashSet<Relation> = HashSet::new();
        let mut found = Vec::new();
        let tau_star = self.weak_word_step(&[])?;
        let letters: Vec<Relation> = self.alphabet.visible_labels().map(|l| self.label_relation(l)).collect();
        let mut queue = VecDeque::from([(tau_star.clone(), 0usize)]);
        seen.insert(tau_star);
        while let Some((r, len)) = queue.pop_front() {
            found.push(r.clone());
            if len == max_len {
                continue;
            }
            for letter in &letters {
                let stepped = Relation::compose_unchecked(letter, &r);
                let next = Relation::compose_unchecked(&found[0], &stepped);
                if seen.insert(next.clone()) {
                    queue.push_back((next, len + 1));
                }
            }
        }
        Ok(found)
    }

    /// States are the classes of `p`; `C →σ C'` iff `x →σ x'` for some
    /// `x ∈ C`, `x' ∈ C'`.
    pub fn quotient(&self, p: &Partition) -> Result<Lts> {
        self.require_endo()?;
        if p.len() != self.num_states() {
            return Err(Error::NotAPartition(format!(
                "partition has {} states, LTS has {}",
                p.len(),
                self.num_states()
            )));
        }
        let mut steps = vec![Vec::new(); p.num_classes()];
        for (x, l, y) in self.transitions() {
            steps[p.class_of(x)].push((l, p.class_of(y)));
        }
        Ok(Self::from_raw(p.num_classes(), self.alphabet.clone(), steps))
    }

    /// `self ⊎ other`, with `other`'s states shifted past `self`'s.
    pub fn disjoint_union(&self, other: &Lts) -> Result<Lts> {
        self.require_endo()?;
        other.require_endo()?;
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch);
        }
        let shift = self.num_states();
        let mut steps = self.steps.clone();
        steps.extend(other.steps.iter().map(|row| row.iter().map(|&(l, y)| (l, y + shift)).collect()));
        Ok(LtsMorphism { codomain: shift + other.num_states(), alphabet: self.alphabet.clone(), steps })
    }

    /// The same transitions over a larger alphabet that extends this one.
    pub fn with_alphabet(&self, alphabet: &Alphabet) -> Result<Lts> {
        let mut map = Vec::new();
        for l in self.alphabet.labels() {
            map.push(alphabet.lookup(self.alphabet.name(l)).ok_or(Error::AlphabetMismatch)?);
        }
        let steps = self.steps.iter().map(|row| row.iter().map(|&(l, y)| (map[l.index()], y)).collect()).collect();
        Ok(Self::from_raw(self.codomain, alphabet.clone(), steps))
    }
}

impl fmt::Debug for LtsMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lts[{}→{}]{{", self.domain(), self.codomain)?;
        let mut first = true;
        for (x, l, y) in self.transitions() {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{x}-{}->{y}", self.alphabet.name(l))?;
        }
        f.write_str("}")
    }
}

/// A transition `x →σ x'` of the first state of `pair` that the second
/// cannot answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepViolation {
    pub pair: (usize, usize),
    pub label: Label,
    pub target: usize,
}

/// The LTS monad as a saturation instance over a fixed alphabet.
#[derive(Clone, Debug)]
pub struct LtsInstance {
    pub alphabet: Alphabet,
}

impl LtsInstance {
    pub fn new(alphabet: Alphabet) -> Self {
        LtsInstance { alphabet }
    }

    /// Two visible labels `a`, `b`.
    pub fn standard() -> Self {
        Self::new(Alphabet::new(["a", "b"]).expect("valid alphabet"))
    }
}

pub(crate) fn random_steps(rng: &mut StdRng, n: usize, codomain: usize, alphabet: &Alphabet) -> Vec<Vec<(Label, usize)>> {
    let density = rng.gen_range(0.05..0.35);
    (0..n)
        .map(|_| {
            let mut row = Vec::new();
            for l in alphabet.labels() {
                for y in 0..codomain {
                    if rng.gen_bool(density) {
                        row.push((l, y));
                    }
                }
            }
            row
        })
        .collect()
}

impl SaturationInstance for LtsInstance {
    type Arrow = LtsMorphism;

    fn name(&self) -> &'static str {
        "lts"
    }

    fn carrier(&self, f: &Lts) -> (usize, usize) {
        (f.domain(), f.codomain())
    }

    fn compose(&self, g: &Lts, f: &Lts) -> Lts {
        LtsMorphism::compose_unchecked(g, f)
    }

    fn identity(&self, like: &Lts) -> Lts {
        LtsMorphism::unit(like.domain(), like.alphabet.clone())
    }

    fn leq(&self, f: &Lts, g: &Lts) -> bool {
        f.is_subset(g)
    }

    fn join(&self, f: &Lts, g: &Lts) -> Result<Lts> {
        f.join(g)
    }

    fn bottom(&self, like: &Lts) -> Result<Lts> {
        Ok(LtsMorphism::endo(like.domain(), like.alphabet.clone()))
    }

    fn is_kleene(&self) -> bool {
        true
    }

    fn random(&self, rng: &mut StdRng, size: usize) -> Lts {
        let steps = random_steps(rng, size, size, &self.alphabet);
        LtsMorphism::from_raw(size, self.alphabet.clone(), steps)
    }

    fn lift_map(&self, map: &[usize], target: &Lts) -> Lts {
        let steps = map.iter().map(|&y| vec![(Label::TAU, y)]).collect();
        LtsMorphism::from_raw(target.domain(), target.alphabet.clone(), steps)
    }

    fn leq_witness(&self, f: &Lts, g: &Lts) -> Option<String> {
        f.transitions()
            .find(|&(x, l, y)| x >= g.domain() || !g.has_step(x, l, y))
            .map(|(x, l, y)| format!("{x} -{}-> {y}", f.alphabet.name(l)))
    }

    fn shrink(&self, f: &Lts) -> Vec<Lts> {
        f.transitions()
            .map(|(x, l, y)| {
                let mut smaller = f.clone();
                smaller.steps[x].retain(|&s| s != (l, y));
                smaller
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b"]).unwrap()
    }

    const A: Label = Label(1);
    const B: Label = Label(2);
    const T: Label = Label::TAU;

    #[test]
    fn alphabet_rejects_tau_and_duplicates() {
        assert_eq!(Alphabet::new(["a", "tau"]), Err(Error::ReservedTau));
        assert!(matches!(Alphabet::new(["a", "a"]), Err(Error::DuplicateLabel(_))));
        let sigma = ab();
        assert_eq!(sigma.lookup("tau"), Some(Label::TAU));
        assert_eq!(sigma.lookup("b"), Some(B));
        assert_eq!(sigma.name(A), "a");
    }

    #[test]
    fn compose_visible_then_silent() {
        let mut f = LtsMorphism::new(1, 1, ab());
        f.add_step(0, A, 0).unwrap();
        let mut g = LtsMorphism::new(1, 1, ab());
        g.add_step(0, T, 0).unwrap();
        let h = LtsMorphism::compose(&g, &f).unwrap();
        assert_eq!(h.steps(0), &[(A, 0)]);
    }

    #[test]
    fn compose_kills_visible_visible() {
        let mut f = LtsMorphism::new(1, 1, ab());
        f.add_step(0, A, 0).unwrap();
        let mut g = LtsMorphism::new(1, 1, ab());
        g.add_step(0, B, 0).unwrap();
        assert!(LtsMorphism::compose(&g, &f).unwrap().steps(0).is_empty());
    }

    #[test]
    fn unit_is_neutral() {
        let f = LtsMorphism::from_triples(3, ab(), [(0, A, 1), (1, T, 2), (2, B, 0)]).unwrap();
        let e = LtsMorphism::unit(3, ab());
        assert_eq!(LtsMorphism::compose(&e, &f).unwrap(), f);
        assert_eq!(LtsMorphism::compose(&f, &e).unwrap(), f);
    }

    #[test]
    fn saturation_without_tau_adds_loops_only() {
        let alpha = LtsMorphism::from_triples(3, ab(), [(0, A, 1), (1, B, 2)]).unwrap();
        let sat = alpha.saturate().unwrap();
        let expected = alpha.join(&LtsMorphism::unit(3, ab())).unwrap();
        assert_eq!(sat, expected);
    }

    #[test]
    fn saturation_of_unit_is_unit() {
        let e = LtsMorphism::unit(4, ab());
        assert_eq!(e.saturate().unwrap(), e);
    }

    #[test]
    fn word_step_rejects_tau() {
        let alpha = LtsMorphism::endo(2, ab());
        assert!(matches!(alpha.weak_word_step(&[T]), Err(Error::UnknownLabel(_))));
        assert!(matches!(alpha.word(&["c"]), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn milner_rejects_asymmetric_relation() {
        let alpha = LtsMorphism::endo(2, ab());
        let r = Relation::from_pairs(2, 2, [(0, 1)]).unwrap();
        assert_eq!(alpha.check_milner_weak_bisim(&r), Err(Error::NotSymmetric(0, 1)));
    }

    #[test]
    fn milner_reports_unanswerable_step() {
        // x -a-> x', y -b-> y' with states x=0, x'=1, y=2, y'=3
        let alpha = LtsMorphism::from_triples(4, ab(), [(0, A, 1), (2, B, 3)]).unwrap();
        let mut r = Relation::identity(4);
        r.insert(0, 2).unwrap();
        r.insert(2, 0).unwrap();
        let v = alpha.check_milner_weak_bisim(&r).unwrap().unwrap();
        assert_eq!(v, StepViolation { pair: (0, 2), label: A, target: 1 });
    }

    #[test]
    fn strong_bisim_of_deadlocks_is_one_class() {
        let alpha = LtsMorphism::endo(4, ab());
        assert_eq!(alpha.largest_strong_bisim().num_classes(), 1);
    }

    #[test]
    fn quotient_by_single_class() {
        let alpha = LtsMorphism::from_triples(3, ab(), [(0, A, 1), (1, T, 2), (2, A, 0)]).unwrap();
        let q = alpha.quotient(&Partition::coarsest(3)).unwrap();
        assert_eq!(q.num_states(), 1);
        assert_eq!(q.steps(0), &[(T, 0), (A, 0)]);
        let fine = alpha.quotient(&Partition::finest(3)).unwrap();
        assert_eq!(fine, alpha);
    }
}
