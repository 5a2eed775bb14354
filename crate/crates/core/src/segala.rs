//! Simple Segala systems as coalgebras `X → CM(Στ × X)`.
//!
//! `CM` sends a set to the non-empty convex sets of finitely supported
//! valuations on it. Atoms of `Στ × X` are numbered label-major:
//! `(σ, x) ↦ σ.index() · |X| + x`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::convex::lp::{Cmp, LinearProgram};
use crate::convex::{format_rat, ConvexSet, Expr, Rat};
use crate::error::{Error, Result};
use crate::kernel::SaturationInstance;
use crate::lts::{Alphabet, Label, Partition};

/// A finitely supported probability distribution on states.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Distribution {
    probs: BTreeMap<usize, Rat>,
}

impl Distribution {
    /// Coefficients must be positive and sum to exactly 1. Repeated states
    /// are summed.
    pub fn new(terms: impl IntoIterator<Item = (usize, Rat)>) -> Result<Self> {
        let mut probs: BTreeMap<usize, Rat> = BTreeMap::new();
        for (x, p) in terms {
            if p <= Rat::zero() {
                return Err(Error::InvalidDistribution(format!("non-positive weight {}", format_rat(&p))));
            }
            *probs.entry(x).or_insert_with(Rat::zero) += p;
        }
        let total: Rat = probs.values().sum();
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!("weights sum to {}", format_rat(&total))));
        }
        Ok(Distribution { probs })
    }

    pub fn dirac(x: usize) -> Self {
        Distribution { probs: BTreeMap::from([(x, Rat::one())]) }
    }

    pub fn prob(&self, x: usize) -> Rat {
        self.probs.get(&x).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rat)> + '_ {
        self.probs.iter().map(|(x, p)| (*x, p))
    }

    pub fn is_dirac(&self) -> bool {
        self.probs.len() == 1
    }

    /// `Σ μ(x)·x` as an expression over states.
    pub fn to_expr(&self) -> Expr {
        Expr::from_terms(self.iter().map(|(x, p)| (x, p.clone()))).expect("positive weights")
    }

    /// The mass given to each class of `p`.
    pub fn class_masses(&self, p: &Partition) -> BTreeMap<usize, Rat> {
        let mut out: BTreeMap<usize, Rat> = BTreeMap::new();
        for (x, q) in self.iter() {
            *out.entry(p.class_of(x)).or_insert_with(Rat::zero) += q;
        }
        out
    }
}

impl fmt::Debug for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr().display_with(|x| format!("x{x}")))
    }
}

/// A simple probabilistic automaton: each state offers a finite set of
/// label-tagged distributions.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SegalaSystem {
    names: Vec<String>,
    alphabet: Alphabet,
    steps: Vec<Vec<(Label, Distribution)>>,
}

impl SegalaSystem {
    pub fn new(names: Vec<String>, alphabet: Alphabet) -> Self {
        let steps = vec![Vec::new(); names.len()];
        SegalaSystem { names, alphabet, steps }
    }

    /// States named `s0, s1, …`.
    pub fn with_states(n: usize, alphabet: Alphabet) -> Self {
        Self::new((0..n).map(|i| format!("s{i}")).collect(), alphabet)
    }

    pub fn add_step(&mut self, x: usize, label: Label, mu: Distribution) -> Result<()> {
        let n = self.num_states();
        if x >= n {
            return Err(Error::UnknownState(x.to_string()));
        }
        if let Some(y) = mu.support().find(|&y| y >= n) {
            return Err(Error::UnknownState(y.to_string()));
        }
        if !self.alphabet.contains(label) {
            return Err(Error::UnknownLabel(format!("{label:?}")));
        }
        let row = &mut self.steps[x];
        let step = (label, mu);
        if let Err(pos) = row.binary_search(&step) {
            row.insert(pos, step);
        }
        Ok(())
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn steps(&self, x: usize) -> &[(Label, Distribution)] {
        &self.steps[x]
    }

    pub fn num_steps(&self) -> usize {
        self.steps.iter().map(Vec::len).sum()
    }

    pub fn atom(&self, label: Label, x: usize) -> usize {
        label.index() * self.num_states() + x
    }

    pub fn split_atom(&self, atom: usize) -> (Label, usize) {
        let n = self.num_states();
        (Label::from_index(atom / n), atom % n)
    }

    pub fn num_atoms(&self) -> usize {
        self.alphabet.size() * self.num_states()
    }

    /// `(σ,x)` rendered as `(name-of-σ,name-of-x)`.
    pub fn atom_name(&self, atom: usize) -> String {
        let (l, x) = self.split_atom(atom);
        format!("({},{})", self.alphabet.name(l), self.names[x])
    }

    /// `x ↦ hull({0} ∪ {Σ μ(x')·(σ,x') | x →σ μ})`.
    pub fn embed(&self) -> CmMorphism {
        let values = (0..self.num_states())
            .map(|x| {
                let points = self.steps[x]
                    .iter()
                    .map(|(l, mu)| mu.to_expr().map_atoms(|y| self.atom(*l, y)))
                    .chain(std::iter::once(Expr::zero()));
                ConvexSet::hull(points).expect("contains 0")
            })
            .collect();
        CmMorphism { atoms: self.num_atoms(), values }
    }

    /// The system read back from a coalgebra `X → CM(Στ × X)`: one step per
    /// generator that is a simple expression over a single label.
    pub fn from_coalgebra(&self, c: &CmMorphism) -> SegalaSystem {
        let mut out = SegalaSystem::new(self.names.clone(), self.alphabet.clone());
        for x in 0..c.domain().min(self.num_states()) {
            for g in c.value(x).generators() {
                if let Some((label, mu)) = self.as_simple(g) {
                    out.add_step(x, label, mu).expect("well-formed step");
                }
            }
        }
        out
    }

    /// `Some((σ, μ))` when `g = Σ μ(x)·(σ,x)` for a distribution `μ`.
    pub fn as_simple(&self, g: &Expr) -> Option<(Label, Distribution)> {
        let mut label = None;
        let mut terms = Vec::new();
        for (a, c) in g.terms() {
            let (l, x) = self.split_atom(a);
            if *label.get_or_insert(l) != l {
                return None;
            }
            terms.push((x, c.clone()));
        }
        let label = label?;
        Distribution::new(terms).ok().map(|mu| (label, mu))
    }

    /// Saturates the embedded coalgebra with at most `depth` rounds.
    pub fn saturate(&self, depth: usize) -> Saturation {
        saturate_cm(self, &self.embed(), depth)
    }

    /// A default bound for [`SegalaSystem::saturate`]: `2·|X| + 2`.
    pub fn default_depth(&self) -> usize {
        2 * self.num_states() + 2
    }

    /// A random system. τ-steps only lead to strictly larger states, which
    /// keeps the saturation chain finite; visible steps are unrestricted.
    pub fn random(rng: &mut StdRng, n: usize, alphabet: Alphabet, denominators: &[i64]) -> SegalaSystem {
        let mut s = SegalaSystem::with_states(n, alphabet);
        let labels: Vec<Label> = s.alphabet.labels().collect();
        for x in 0..n {
            let count = rng.gen_range(0..=2);
            for _ in 0..count {
                let label = *labels.choose(rng).expect("non-empty alphabet");
                let targets: Vec<usize> = if label.is_tau() { (x + 1..n).collect() } else { (0..n).collect() };
                if targets.is_empty() {
                    continue;
                }
                let d = *denominators.choose(rng).expect("some denominator");
                let mu = random_distribution(rng, &targets, d);
                s.add_step(x, label, mu).expect("valid step");
            }
        }
        s
    }
}

fn random_distribution(rng: &mut StdRng, targets: &[usize], denominator: i64) -> Distribution {
    let mut terms = Vec::new();
    let mut left = denominator;
    while left > 0 {
        let k = rng.gen_range(1..=left);
        let y = *targets.choose(rng).expect("non-empty targets");
        terms.push((y, Rat::new(k.into(), denominator.into())));
        left -= k;
    }
    Distribution::new(terms).expect("weights sum to one")
}

/// A Kleisli arrow `X → CM(A)` for a finite atom set `A = 0..atoms`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CmMorphism {
    atoms: usize,
    values: Vec<ConvexSet>,
}

impl CmMorphism {
    pub fn new(atoms: usize, values: Vec<ConvexSet>) -> Result<Self> {
        for set in &values {
            for g in set.generators() {
                if let Some(a) = g.support().find(|&a| a >= atoms) {
                    return Err(Error::UnknownState(a.to_string()));
                }
            }
        }
        Ok(CmMorphism { atoms, values })
    }

    /// The unit `x ↦ {1·x}`.
    pub fn unit(n: usize) -> Self {
        CmMorphism { atoms: n, values: (0..n).map(|x| ConvexSet::point(Expr::unit(x))).collect() }
    }

    pub fn domain(&self) -> usize {
        self.values.len()
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn value(&self, x: usize) -> &ConvexSet {
        &self.values[x]
    }

    pub fn values(&self) -> &[ConvexSet] {
        &self.values
    }

    /// `g·f(x) = ⋃_{φ ∈ f(x)} Σ_y φ(y)·g(y)`, evaluated on generators of
    /// `f(x)` and of each `g(y)`.
    pub fn compose(g: &CmMorphism, f: &CmMorphism) -> Result<CmMorphism> {
        if f.atoms != g.domain() {
            return Err(Error::CarrierMismatch(format!(
                "cannot compose an arrow into {} atoms with one out of {} states",
                f.atoms,
                g.domain()
            )));
        }
        Ok(Self::compose_unchecked(g, f))
    }

    fn compose_unchecked(g: &CmMorphism, f: &CmMorphism) -> CmMorphism {
        let values = f
            .values
            .iter()
            .map(|set| {
                let mut points: Vec<Expr> = Vec::new();
                for phi in set.generators() {
                    let mut acc = ConvexSet::zero();
                    for (y, c) in phi.terms() {
                        let scaled = g.values[y].scale_set(c).expect("non-negative coefficient");
                        acc = acc.minkowski_sum(&scaled);
                    }
                    points.extend(acc.generators().iter().cloned());
                }
                ConvexSet::hull(points).expect("non-empty value")
            })
            .collect();
        CmMorphism { atoms: g.atoms, values }
    }

    pub fn join(&self, other: &CmMorphism) -> Result<CmMorphism> {
        self.same_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a.join_sets(b)).collect();
        Ok(CmMorphism { atoms: self.atoms, values })
    }

    /// Pointwise containment.
    pub fn leq(&self, other: &CmMorphism) -> bool {
        self.leq_witness(other).is_none()
    }

    /// A state and a generator of `self` at it outside `other`.
    pub fn leq_witness(&self, other: &CmMorphism) -> Option<(usize, Expr)> {
        if self.same_shape(other).is_err() {
            return Some((self.domain().min(other.domain()), Expr::zero()));
        }
        for (x, (a, b)) in self.values.iter().zip(&other.values).enumerate() {
            if let Some(g) = a.generators().iter().find(|g| !b.member(g)) {
                return Some((x, g.clone()));
            }
        }
        None
    }

    /// Relabels atoms through `f` (the functor action on the codomain).
    pub fn map_atoms(&self, atoms: usize, mut f: impl FnMut(usize) -> usize) -> CmMorphism {
        CmMorphism { atoms, values: self.values.iter().map(|v| v.map_atoms(&mut f)).collect() }
    }

    fn same_shape(&self, other: &CmMorphism) -> Result<()> {
        if self.domain() != other.domain() || self.atoms != other.atoms {
            return Err(Error::CarrierMismatch(format!(
                "{}→{} vs {}→{}",
                self.domain(),
                self.atoms,
                other.domain(),
                other.atoms
            )));
        }
        Ok(())
    }
}

impl fmt::Debug for CmMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cm[{}→{}]", self.domain(), self.atoms)?;
        f.debug_list().entries(&self.values).finish()
    }
}

/// Label bookkeeping for arrows `X → CM(Στ × Y)` with label-major atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SigmaShape {
    /// `|Στ|`.
    pub labels: usize,
}

impl SigmaShape {
    pub fn new(alphabet: &Alphabet) -> Self {
        SigmaShape { labels: alphabet.size() }
    }

    /// `|Y|` for an arrow into `CM(Στ × Y)`.
    pub fn states_of(&self, h: &CmMorphism) -> usize {
        h.atoms() / self.labels
    }

    /// `e(x) = {1·(τ,x)}`.
    pub fn unit(&self, n: usize) -> CmMorphism {
        CmMorphism { atoms: self.labels * n, values: (0..n).map(|x| ConvexSet::point(Expr::unit(x))).collect() }
    }

    /// `f♯` for a plain map `f: X → Y`: `x ↦ {1·(τ,f(x))}`.
    pub fn lift_map(&self, map: &[usize], codomain: usize) -> CmMorphism {
        CmMorphism {
            atoms: self.labels * codomain,
            values: map.iter().map(|&y| ConvexSet::point(Expr::unit(y))).collect(),
        }
    }

    /// `m_Y · Σ̄τ h : Στ × X → CM(Στ × Y)`. On `(σ,x)` the label `σ` is pushed
    /// through `h(x)` by the strength, and each pair of labels is collapsed by
    /// `m`: `(σ,τ) ↦ σ`, `(τ,σ') ↦ σ'`, visible pairs are sent to `0`.
    pub fn lift(&self, h: &CmMorphism) -> CmMorphism {
        let nx = h.domain();
        let ny = self.states_of(h);
        let mut values = Vec::with_capacity(self.labels * nx);
        for sigma in 0..self.labels {
            for x in 0..nx {
                let points = h.value(x).generators().iter().map(|g| {
                    let kept = g.restrict(|a| sigma == 0 || a < ny);
                    kept.map_atoms(|a| if a < ny { sigma * ny + a } else { a })
                });
                values.push(ConvexSet::hull(points).expect("non-empty value"));
            }
        }
        CmMorphism { atoms: h.atoms(), values }
    }

    /// Kleisli composition for the monad `Σ̄τ` on `Kl(CM)`: `h ⋆ f = (m · Σ̄τ h) · f`.
    pub fn compose(&self, h: &CmMorphism, f: &CmMorphism) -> Result<CmMorphism> {
        CmMorphism::compose(&self.lift(h), f)
    }
}

/// `β = m_X · Σ̄τ α` for a coalgebra `α: X → CM(Στ × X)`.
pub fn build_beta(shape: SigmaShape, alpha: &CmMorphism) -> CmMorphism {
    shape.lift(alpha)
}

/// The chain `γ_n = (β ∨ 1)ⁿ` of a coalgebra, with `γ_0 = 1`.
#[derive(Clone, Debug)]
pub struct Saturation {
    shape: SigmaShape,
    states: usize,
    stages: Vec<CmMorphism>,
    converged: bool,
}

/// Computes `γ_0, …, γ_depth`, stopping early once `γ_n = γ_{n+1}`.
pub fn saturate_cm(system: &SegalaSystem, alpha: &CmMorphism, depth: usize) -> Saturation {
    let shape = SigmaShape::new(system.alphabet());
    let beta = build_beta(shape, alpha);
    let step = beta.join(&CmMorphism::unit(beta.domain())).expect("same shape");
    let mut stages = vec![CmMorphism::unit(beta.domain())];
    let mut converged = false;
    for _ in 0..depth {
        let last = stages.last().expect("non-empty");
        let next = CmMorphism::compose_unchecked(&step, last);
        if next == *last {
            converged = true;
            break;
        }
        stages.push(next);
    }
    Saturation { shape, states: alpha.domain(), stages, converged }
}

impl Saturation {
    pub fn stages(&self) -> &[CmMorphism] {
        &self.stages
    }

    pub fn last(&self) -> &CmMorphism {
        self.stages.last().expect("non-empty")
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Number of composition rounds that changed the chain.
    pub fn iterations(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn shape(&self) -> SigmaShape {
        self.shape
    }

    /// `α★ = γ · e_X`: the final stage restricted to the atoms `(τ, x)`.
    pub fn star(&self) -> CmMorphism {
        let last = self.last();
        CmMorphism { atoms: last.atoms(), values: last.values()[..self.states].to_vec() }
    }

    /// The polytope `γ(τ, y)` packaged for simple-`σ` queries.
    pub fn weak_sigma_polytope(&self, y: usize, sigma: Label) -> Result<WeakSigmaPolytope> {
        if y >= self.states {
            return Err(Error::UnknownState(y.to_string()));
        }
        if sigma.index() >= self.shape.labels {
            return Err(Error::UnknownLabel(format!("{sigma:?}")));
        }
        Ok(WeakSigmaPolytope { set: self.last().value(y).clone(), sigma, states: self.states })
    }
}

/// `γ(τ,y)` together with a label `σ`. Queries look for points of the set
/// that are simple over `σ`: all mass on atoms `(σ, ·)`, total mass 1.
#[derive(Clone, Debug)]
pub struct WeakSigmaPolytope {
    set: ConvexSet,
    sigma: Label,
    states: usize,
}

impl WeakSigmaPolytope {
    pub fn set(&self) -> &ConvexSet {
        &self.set
    }

    /// A distribution `μ'` with `(τ,y) ⇒ Σ μ'(x)·(σ,x)` giving every class
    /// of `p` the mass `masses` prescribes (absent classes get 0).
    pub fn match_class_masses(&self, p: &Partition, masses: &BTreeMap<usize, Rat>) -> Option<Distribution> {
        let base = self.sigma.index() * self.states;
        let pure: Vec<&Expr> = self
            .set
            .generators()
            .iter()
            .filter(|g| g.support().all(|a| a >= base && a < base + self.states))
            .collect();
        if pure.is_empty() {
            return None;
        }
        let mut lp = LinearProgram::new();
        let vars: Vec<usize> = (0..pure.len()).map(|i| lp.var(format!("l{i}"))).collect();
        lp.constrain(vars.iter().map(|&v| (v, Rat::one())), Cmp::Eq, Rat::one());
        for c in 0..p.num_classes() {
            let terms: Vec<(usize, Rat)> = pure
                .iter()
                .zip(&vars)
                .map(|(g, &v)| {
                    let mass: Rat = g.terms().filter(|(a, _)| p.class_of(a - base) == c).map(|(_, q)| q.clone()).sum();
                    (v, mass)
                })
                .collect();
            lp.constrain(terms, Cmp::Eq, masses.get(&c).cloned().unwrap_or_else(Rat::zero));
        }
        let w = lp.feasible()?;
        let mut point = Expr::zero();
        for (g, v) in pure.iter().zip(&vars) {
            point = point.add(&g.scale_nonneg(w.value(*v)));
        }
        let terms: Vec<(usize, Rat)> = point.terms().map(|(a, q)| (a - base, q.clone())).collect();
        Distribution::new(terms).ok()
    }

    /// Whether `(τ,y) ⇒ Σ μ(x)·(σ,x)` for exactly this `μ`.
    pub fn reaches(&self, mu: &Distribution) -> bool {
        let base = self.sigma.index() * self.states;
        self.set.member(&mu.to_expr().map_atoms(|x| base + x))
    }
}

/// A step `x →σ μ` of a related pair `(x, y)` that `y` cannot match.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbViolation {
    pub pair: (usize, usize),
    pub label: Label,
    pub target: Distribution,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbCheck {
    pub violations: Vec<ProbViolation>,
    /// The saturation chain had not stabilised, so a failure may be an
    /// artefact of the depth bound.
    pub depth_limited: bool,
}

impl ProbCheck {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

fn check_partition(system: &SegalaSystem, p: &Partition) -> Result<()> {
    if p.len() != system.num_states() {
        return Err(Error::NotAPartition(format!(
            "partition of {} states for a system with {}",
            p.len(),
            system.num_states()
        )));
    }
    Ok(())
}

/// For every related `(x, y)` and `x →σ μ`, looks for `y ⇝σ μ'` with the
/// same class masses as `μ`.
pub fn check_prob_weak_bisim(system: &SegalaSystem, p: &Partition, depth: usize) -> Result<ProbCheck> {
    check_partition(system, p)?;
    let sat = system.saturate(depth);
    check_prob_weak_bisim_with(system, &sat, p)
}

/// As [`check_prob_weak_bisim`] with a precomputed saturation.
pub fn check_prob_weak_bisim_with(system: &SegalaSystem, sat: &Saturation, p: &Partition) -> Result<ProbCheck> {
    check_partition(system, p)?;
    let mut violations = Vec::new();
    for x in 0..system.num_states() {
        for y in 0..system.num_states() {
            if x == y || !p.same_class(x, y) {
                continue;
            }
            for (label, mu) in system.steps(x) {
                if matching_step(sat, p, y, *label, mu)?.is_none() {
                    violations.push(ProbViolation { pair: (x, y), label: *label, target: mu.clone() });
                }
            }
        }
    }
    Ok(ProbCheck { violations, depth_limited: !sat.converged() })
}

fn matching_step(sat: &Saturation, p: &Partition, y: usize, label: Label, mu: &Distribution) -> Result<Option<Distribution>> {
    let polytope = sat.weak_sigma_polytope(y, label)?;
    Ok(polytope.match_class_masses(p, &mu.class_masses(p)))
}

/// Whether `y` matches every step of `x` with respect to `p`.
fn matches_all(system: &SegalaSystem, sat: &Saturation, p: &Partition, x: usize, y: usize) -> Result<bool> {
    for (label, mu) in system.steps(x) {
        if matching_step(sat, p, y, *label, mu)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Refines from the one-class partition. On the least violating pair
/// `(x, y)`, the class of `x` is split into the states that match every step
/// of `x` and the rest; `y` always lands in the second part.
pub fn largest_prob_weak_bisim(system: &SegalaSystem, depth: usize) -> Result<(Partition, bool)> {
    let sat = system.saturate(depth);
    let n = system.num_states();
    let mut p = Partition::coarsest(n);
    loop {
        let check = check_prob_weak_bisim_with(system, &sat, &p)?;
        let Some(v) = check.violations.first() else {
            return Ok((p, check.depth_limited));
        };
        let (x, _) = v.pair;
        let class = p.class_of(x);
        let mut labels: Vec<usize> = p.class_indices().to_vec();
        for (z, label) in labels.iter_mut().enumerate() {
            if *label == class && !matches_all(system, &sat, &p, x, z)? {
                *label = usize::MAX;
            }
        }
        p = Partition::from_labels(labels);
    }
}

/// A coalgebra `γ: R → CM(Στ × R)` on the pairs of an equivalence.
#[derive(Clone, Debug)]
pub struct PairCoalgebra {
    pub pairs: Vec<(usize, usize)>,
    pub gamma: CmMorphism,
}

/// Builds `γ(x,y) = hull({0} ∪ {r⃗ | x →σ μ})`, where each `r⃗` couples `μ`
/// with a matching `μ'` of `y` class by class, or `None` when some step has
/// no match.
pub fn build_pair_coalgebra(system: &SegalaSystem, sat: &Saturation, p: &Partition) -> Result<Option<PairCoalgebra>> {
    check_partition(system, p)?;
    let n = system.num_states();
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).filter(|&(x, y)| p.same_class(x, y)).collect();
    let index: BTreeMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(i, &pq)| (pq, i)).collect();
    let r = pairs.len();
    let mut values = Vec::with_capacity(r);
    for &(x, y) in &pairs {
        let mut points = vec![Expr::zero()];
        for (label, mu) in system.steps(x) {
            let Some(nu) = matching_step(sat, p, y, *label, mu)? else {
                return Ok(None);
            };
            let masses = mu.class_masses(p);
            let mut terms = Vec::new();
            for (x2, a) in mu.iter() {
                for (y2, b) in nu.iter() {
                    if p.same_class(x2, y2) {
                        let m = &masses[&p.class_of(x2)];
                        terms.push((label.index() * r + index[&(x2, y2)], a * b / m));
                    }
                }
            }
            points.push(Expr::from_terms(terms)?);
        }
        values.push(ConvexSet::hull(points)?);
    }
    Ok(Some(PairCoalgebra { pairs, gamma: CmMorphism { atoms: system.alphabet().size() * r, values } }))
}

/// Constructs `γ` and verifies `α · π₁♯ ≤ π₁♯ · γ` and `π₂♯ · γ ≤ α★ · π₂♯`
/// with composition in the Kleisli category of `Σ̄τ` over `Kl(CM)`.
pub fn check_coalgebraic_weak_bisim(system: &SegalaSystem, p: &Partition, depth: usize) -> Result<bool> {
    check_partition(system, p)?;
    let sat = system.saturate(depth);
    check_coalgebraic_weak_bisim_with(system, &sat, p)
}

pub fn check_coalgebraic_weak_bisim_with(system: &SegalaSystem, sat: &Saturation, p: &Partition) -> Result<bool> {
    let Some(pc) = build_pair_coalgebra(system, sat, p)? else {
        return Ok(false);
    };
    let shape = sat.shape();
    let n = system.num_states();
    let first: Vec<usize> = pc.pairs.iter().map(|&(x, _)| x).collect();
    let second: Vec<usize> = pc.pairs.iter().map(|&(_, y)| y).collect();
    let pi1 = shape.lift_map(&first, n);
    let pi2 = shape.lift_map(&second, n);
    let alpha = system.embed();
    let lower = shape.compose(&alpha, &pi1)?.leq(&shape.compose(&pi1, &pc.gamma)?);
    let upper = shape.compose(&pi2, &pc.gamma)?.leq(&shape.compose(&sat.star(), &pi2)?);
    Ok(lower && upper)
}

/// The monad `CM` itself as a saturation instance on plain endomorphisms
/// `X → CM(X)`. It has binary joins but no least arrow, since every value
/// is non-empty.
#[derive(Clone, Copy, Debug, Default)]
pub struct CmInstance;

impl SaturationInstance for CmInstance {
    type Arrow = CmMorphism;

    fn name(&self) -> &'static str {
        "cm"
    }

    fn carrier(&self, f: &CmMorphism) -> (usize, usize) {
        (f.domain(), f.atoms())
    }

    fn compose(&self, g: &CmMorphism, f: &CmMorphism) -> CmMorphism {
        CmMorphism::compose_unchecked(g, f)
    }

    fn identity(&self, like: &CmMorphism) -> CmMorphism {
        CmMorphism::unit(like.domain())
    }

    fn leq(&self, f: &CmMorphism, g: &CmMorphism) -> bool {
        f.leq(g)
    }

    fn join(&self, f: &CmMorphism, g: &CmMorphism) -> Result<CmMorphism> {
        f.join(g)
    }

    fn is_kleene(&self) -> bool {
        false
    }

    /// Either every generator is `0` or a point mass (any target), or
    /// generators only reach strictly larger states. Both shapes give a
    /// stabilising power chain.
    fn random(&self, rng: &mut StdRng, size: usize) -> CmMorphism {
        let layered = rng.gen_bool(0.5);
        let values = (0..size)
            .map(|x| {
                let count = rng.gen_range(1..=3);
                let points = (0..count).map(|_| {
                    if !layered {
                        return if rng.gen_bool(0.2) { Expr::zero() } else { Expr::unit(rng.gen_range(0..size)) };
                    }
                    let targets: Vec<usize> = (x + 1..size).collect();
                    if targets.is_empty() || rng.gen_bool(0.2) {
                        return Expr::zero();
                    }
                    let d = rng.gen_range(1..=3);
                    let mut e = Expr::zero();
                    for _ in 0..rng.gen_range(1..=2) {
                        let y = *targets.choose(rng).expect("non-empty");
                        e = e.add(&Expr::term(y, Rat::new(rng.gen_range(1..=d).into(), d.into())));
                    }
                    e
                });
                ConvexSet::hull(points.collect::<Vec<_>>()).expect("non-empty")
            })
            .collect();
        CmMorphism { atoms: size, values }
    }

    fn lift_map(&self, map: &[usize], target: &CmMorphism) -> CmMorphism {
        CmMorphism { atoms: target.domain(), values: map.iter().map(|&y| ConvexSet::point(Expr::unit(y))).collect() }
    }

    fn leq_witness(&self, f: &CmMorphism, g: &CmMorphism) -> Option<String> {
        f.leq_witness(g).map(|(x, e)| format!("state {x}, point {e:?}"))
    }

    fn shrink(&self, f: &CmMorphism) -> Vec<CmMorphism> {
        let mut out = Vec::new();
        for (x, v) in f.values.iter().enumerate() {
            let gens = v.generators();
            if gens.len() < 2 {
                continue;
            }
            for i in 0..gens.len() {
                let mut smaller = f.clone();
                let rest = gens.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, g)| g.clone());
                smaller.values[x] = ConvexSet::hull(rest.collect::<Vec<_>>()).expect("non-empty");
                out.push(smaller);
            }
        }
        out
    }

    fn default_depth(&self, alpha: &CmMorphism) -> usize {
        2 * alpha.domain() + 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::rat;

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b"]).unwrap()
    }

    fn a() -> Label {
        Label::visible(0)
    }

    fn b() -> Label {
        Label::visible(1)
    }

    fn dist(terms: &[(usize, i64, i64)]) -> Distribution {
        Distribution::new(terms.iter().map(|&(x, n, d)| (x, rat(n, d)))).unwrap()
    }

    fn worked_system() -> SegalaSystem {
        let mut s = SegalaSystem::new(vec!["x1".into(), "x2".into(), "x3".into()], ab());
        s.add_step(0, a(), dist(&[(1, 1, 3), (2, 2, 3)])).unwrap();
        s.add_step(0, b(), Distribution::dirac(2)).unwrap();
        s.add_step(1, a(), Distribution::dirac(0)).unwrap();
        s
    }

    #[test]
    fn distributions_must_sum_to_one() {
        assert!(Distribution::new([(0, rat(1, 2))]).is_err());
        assert!(Distribution::new([(0, rat(1, 2)), (1, rat(0, 1)), (1, rat(1, 2))]).is_err());
        assert!(Distribution::new([(0, rat(1, 2)), (0, rat(1, 2))]).unwrap().is_dirac());
    }

    #[test]
    fn embeds_worked_example() {
        let s = worked_system();
        let alpha = s.embed();
        let at = |l: Label, x: usize| s.atom(l, x);
        let x1 = ConvexSet::hull([
            Expr::zero(),
            Expr::from_terms([(at(a(), 1), rat(1, 3)), (at(a(), 2), rat(2, 3))]).unwrap(),
            Expr::unit(at(b(), 2)),
        ])
        .unwrap();
        assert_eq!(alpha.value(0), &x1);
        assert_eq!(alpha.value(1), &ConvexSet::hull([Expr::zero(), Expr::unit(at(a(), 0))]).unwrap());
        assert_eq!(alpha.value(2), &ConvexSet::zero());
    }

    #[test]
    fn compose_by_generator_products() {
        let f = CmMorphism::new(3, vec![ConvexSet::point(Expr::unit(1)), ConvexSet::zero(), ConvexSet::zero()]).unwrap();
        let half = Expr::from_terms([(1, rat(1, 2)), (2, rat(1, 2))]).unwrap();
        let g_val = ConvexSet::hull([half.clone(), Expr::zero()]).unwrap();
        let g = CmMorphism::new(3, vec![ConvexSet::zero(), g_val.clone(), ConvexSet::zero()]).unwrap();
        assert_eq!(CmMorphism::compose(&g, &f).unwrap().value(0), &g_val);
        assert_eq!(CmMorphism::compose(&CmMorphism::unit(3), &f).unwrap(), f);
        assert_eq!(CmMorphism::compose(&f, &CmMorphism::unit(3)).unwrap(), f);
    }

    #[test]
    fn compose_with_a_deadlocked_branch() {
        let f = CmMorphism::new(3, vec![ConvexSet::hull([Expr::unit(1), Expr::unit(2)]).unwrap(), ConvexSet::zero(), ConvexSet::zero()])
            .unwrap();
        let g = CmMorphism::new(3, vec![ConvexSet::zero(), ConvexSet::point(Expr::unit(0)), ConvexSet::zero()]).unwrap();
        let h = CmMorphism::compose(&g, &f).unwrap();
        assert_eq!(h.value(0), &ConvexSet::hull([Expr::unit(0), Expr::zero()]).unwrap());
    }

    #[test]
    fn join_and_order() {
        let f = CmMorphism::new(1, vec![ConvexSet::point(Expr::term(0, rat(1, 2)))]).unwrap();
        let g = CmMorphism::new(1, vec![ConvexSet::hull([Expr::zero(), Expr::unit(0)]).unwrap()]).unwrap();
        assert!(f.leq(&g));
        assert!(!g.leq(&f));
        assert!(f.leq(&f.join(&g).unwrap()));
        assert_eq!(f.join(&f).unwrap(), f);
    }

    #[test]
    fn beta_tags_and_kills() {
        let mut s = SegalaSystem::with_states(2, ab());
        s.add_step(0, Label::TAU, Distribution::dirac(1)).unwrap();
        s.add_step(1, b(), Distribution::dirac(0)).unwrap();
        let shape = SigmaShape::new(s.alphabet());
        let beta = build_beta(shape, &s.embed());
        // β(τ,x) = α(x)
        assert_eq!(beta.value(s.atom(Label::TAU, 0)), s.embed().value(0));
        // β(a,x) with α(x) ∋ 1·(τ,y) gives 1·(a,y)
        assert_eq!(
            beta.value(s.atom(a(), 0)),
            &ConvexSet::hull([Expr::zero(), Expr::unit(s.atom(a(), 1))]).unwrap()
        );
        // β(a,y) with α(y) ∋ 1·(b,x) collapses to 0
        assert_eq!(beta.value(s.atom(a(), 1)), &ConvexSet::zero());
    }

    #[test]
    fn saturation_without_tau() {
        let s = worked_system();
        let sat = s.saturate(10);
        assert!(sat.converged());
        let star = sat.star();
        let expected = s.embed().value(0).join_sets(&ConvexSet::point(Expr::unit(s.atom(Label::TAU, 0))));
        assert!(star.value(0).contains_set(&expected));
        // A visible step followed by the 0 of a visible-visible collapse
        // leaves part of a distribution behind.
        assert!(star.value(0).member(&Expr::term(s.atom(a(), 2), rat(2, 3))));
        assert_eq!(s.from_coalgebra(&star).steps(0).len(), 3);
    }

    #[test]
    fn saturation_of_tau_loop() {
        let mut s = SegalaSystem::with_states(1, ab());
        s.add_step(0, Label::TAU, Distribution::dirac(0)).unwrap();
        let sat = s.saturate(5);
        assert!(sat.converged());
        assert_eq!(sat.star().value(0), &ConvexSet::hull([Expr::zero(), Expr::unit(0)]).unwrap());
    }

    #[test]
    fn probabilistic_tau_cycle_does_not_converge() {
        let mut s = SegalaSystem::with_states(2, ab());
        s.add_step(0, Label::TAU, dist(&[(0, 1, 2), (1, 1, 2)])).unwrap();
        let sat = s.saturate(4);
        assert!(!sat.converged());
        assert_eq!(sat.stages().len(), 5);
    }

    #[test]
    fn combined_weak_step() {
        // x →τ ½y+½z, y →a δu, z →a δu
        let mut s = SegalaSystem::with_states(4, ab());
        s.add_step(0, Label::TAU, dist(&[(1, 1, 2), (2, 1, 2)])).unwrap();
        s.add_step(1, a(), Distribution::dirac(3)).unwrap();
        s.add_step(2, a(), Distribution::dirac(3)).unwrap();
        let sat = s.saturate(2);
        let poly = sat.weak_sigma_polytope(0, a()).unwrap();
        assert!(poly.reaches(&Distribution::dirac(3)));
        let dead = sat.weak_sigma_polytope(3, a()).unwrap();
        assert!(!dead.reaches(&Distribution::dirac(3)));
        assert!(sat.weak_sigma_polytope(9, a()).is_err());
    }

    #[test]
    fn worked_example_partition() {
        let s = worked_system();
        let (p, limited) = largest_prob_weak_bisim(&s, 3).unwrap();
        assert!(!limited);
        assert_eq!(p.num_classes(), 3);
    }

    #[test]
    fn stutter_pair() {
        // x →τ δy, y →a δu, w →a δu'
        let mut s = SegalaSystem::new(["x", "y", "u", "w", "u2"].map(String::from).to_vec(), ab());
        s.add_step(0, Label::TAU, Distribution::dirac(1)).unwrap();
        s.add_step(1, a(), Distribution::dirac(2)).unwrap();
        s.add_step(3, a(), Distribution::dirac(4)).unwrap();
        let p = Partition::from_classes(5, &[vec![0, 1, 3], vec![2, 4]]).unwrap();
        let check = check_prob_weak_bisim(&s, &p, 2).unwrap();
        assert!(check.holds(), "{check:?}");
        assert!(check_coalgebraic_weak_bisim(&s, &p, 2).unwrap());
        let (q, _) = largest_prob_weak_bisim(&s, 4).unwrap();
        assert_eq!(q, p);
    }

    #[test]
    fn unmatched_split() {
        // x →τ ½y+½z, y and z apart, w deadlocked
        let mut s = SegalaSystem::with_states(4, ab());
        s.add_step(0, Label::TAU, dist(&[(1, 1, 2), (2, 1, 2)])).unwrap();
        s.add_step(1, a(), Distribution::dirac(1)).unwrap();
        let p = Partition::from_classes(4, &[vec![0, 3], vec![1], vec![2]]).unwrap();
        let check = check_prob_weak_bisim(&s, &p, 4).unwrap();
        assert!(!check.holds());
        assert_eq!(check.violations[0].pair, (0, 3));
        assert!(!check_coalgebraic_weak_bisim(&s, &p, 4).unwrap());
    }

    #[test]
    fn saturated_system_keeps_simple_points() {
        let s = worked_system();
        let sat = s.saturate(5);
        let t = s.from_coalgebra(&sat.star());
        assert!(t.steps(0).contains(&(Label::TAU, Distribution::dirac(0))));
        assert!(t.steps(0).contains(&(b(), Distribution::dirac(2))));
        assert_eq!(t.steps(2), &[(Label::TAU, Distribution::dirac(2))]);
    }
}
