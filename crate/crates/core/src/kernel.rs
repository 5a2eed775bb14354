//! The generic saturation engine.
//!
//! An instance supplies an order-enriched Kleisli category: arrows `X -> T Y`
//! with composition `g · f` (apply `f`, then `g`), the Kleisli identity, the
//! hom-set order and, where available, binary joins and least arrows. The
//! engine computes `alpha*` in two ways (as the join of the powers of
//! `1 ∨ alpha`, and as the least fixpoint of `x ↦ 1 ∨ x · alpha`) and checks
//! the ordered-saturation axioms and the Kleene laws on random arrows.

use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};

/// An order-enriched Kleisli category restricted to finite carriers.
pub trait SaturationInstance {
    type Arrow: Clone + PartialEq + fmt::Debug;

    fn name(&self) -> &'static str;

    /// `(domain, codomain)` sizes of an arrow.
    fn carrier(&self, f: &Self::Arrow) -> (usize, usize);

    /// Kleisli composition `g · f`. Callers guarantee composability.
    fn compose(&self, g: &Self::Arrow, f: &Self::Arrow) -> Self::Arrow;

    /// The Kleisli identity on the domain of `like`.
    fn identity(&self, like: &Self::Arrow) -> Self::Arrow;

    fn leq(&self, f: &Self::Arrow, g: &Self::Arrow) -> bool;

    fn join(&self, _f: &Self::Arrow, _g: &Self::Arrow) -> Result<Self::Arrow> {
        Err(Error::NoJoin(self.name()))
    }

    /// The least endomorphism on the domain of `like`.
    fn bottom(&self, _like: &Self::Arrow) -> Result<Self::Arrow> {
        Err(Error::NoBottom(self.name()))
    }

    /// Whether composition distributes over joins on both sides and
    /// `f · ⊥ = ⊥`.
    fn is_kleene(&self) -> bool;

    /// Whether `⊥ · f = ⊥`. `f · ⊥ = ⊥` is checked for every Kleene instance.
    fn bottom_absorbs_left(&self) -> bool {
        self.is_kleene()
    }

    /// A random endomorphism on `size` states.
    fn random(&self, rng: &mut StdRng, size: usize) -> Self::Arrow;

    /// The lifting `f♯ = unit ∘ f` of a plain map `f: X -> Y`, where `Y` is the
    /// domain of `target`.
    fn lift_map(&self, map: &[usize], target: &Self::Arrow) -> Self::Arrow;

    /// Something in `f` that is not below `g`, if any.
    fn leq_witness(&self, f: &Self::Arrow, g: &Self::Arrow) -> Option<String>;

    /// Smaller variants of `f`, used to shrink fuzz counterexamples.
    fn shrink(&self, _f: &Self::Arrow) -> Vec<Self::Arrow> {
        Vec::new()
    }

    /// Iteration bound used when the caller does not pick one.
    fn default_depth(&self, alpha: &Self::Arrow) -> usize {
        let n = self.carrier(alpha).0.max(1);
        2 * n * n + 2
    }
}

/// Outcome of a saturation run.
#[derive(Clone, Debug, PartialEq)]
pub struct SaturationReport<A> {
    pub result: A,
    pub iterations: usize,
    pub converged: bool,
}

/// The chain `1, (1 ∨ α), (1 ∨ α)², …` up to the first repetition or
/// `max_depth` compositions, whichever comes first. The last element repeats
/// the one before it iff the chain stabilised.
pub fn power_chain<I: SaturationInstance>(
    instance: &I,
    alpha: &I::Arrow,
    max_depth: usize,
) -> Result<Vec<I::Arrow>> {
    let step = instance.join(&instance.identity(alpha), alpha)?;
    let mut chain = vec![instance.identity(alpha)];
    for _ in 0..max_depth {
        let last = chain.last().expect("chain is never empty");
        let next = instance.compose(last, &step);
        let done = &next == last;
        chain.push(next);
        if done {
            break;
        }
    }
    Ok(chain)
}

/// `α* = ⋁ₙ (1 ∨ α)ⁿ`. The powers form an ascending chain, so the join is the
/// last power computed.
pub fn saturate_by_powers<I: SaturationInstance>(
    instance: &I,
    alpha: &I::Arrow,
    max_depth: usize,
) -> Result<SaturationReport<I::Arrow>> {
    let max_depth = max_depth.max(1);
    let mut chain = power_chain(instance, alpha, max_depth)?;
    let iterations = chain.len() - 1;
    let converged = chain.len() >= 2 && chain[chain.len() - 1] == chain[chain.len() - 2];
    Ok(SaturationReport {
        result: chain.pop().expect("chain is never empty"),
        iterations,
        converged,
    })
}

/// `α* = μx. (1 ∨ x · α)`, by Kleene iteration from the least arrow.
pub fn saturate_by_lfp<I: SaturationInstance>(
    instance: &I,
    alpha: &I::Arrow,
    max_depth: usize,
) -> Result<SaturationReport<I::Arrow>> {
    let one = instance.identity(alpha);
    let mut x = instance.bottom(alpha)?;
    for iteration in 1..=max_depth.max(1) {
        let next = instance.join(&one, &instance.compose(&x, alpha))?;
        if next == x {
            return Ok(SaturationReport { result: x, iterations: iteration, converged: true });
        }
        x = next;
    }
    Ok(SaturationReport { result: x, iterations: max_depth.max(1), converged: false })
}

/// The defining conditions of a saturation operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axiom {
    /// `1 ≤ α*`
    Reflexive,
    /// `α ≤ α*`
    Extensive,
    /// `α* · α* ≤ α*`
    Transitive,
    /// `α* ≤ β` for every `β` with `1 ≤ β`, `α ≤ β`, `β · β ≤ β`
    Least,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::Reflexive => "(1) 1 ≤ α*",
            Axiom::Extensive => "(2) α ≤ α*",
            Axiom::Transitive => "(3) α*·α* ≤ α*",
            Axiom::Least => "(4) α* ≤ β for closed β ≥ α",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    pub witness: String,
}

/// Checks conditions (1)–(3) for `alpha_star`, and condition (4) against each
/// of the supplied candidate closures.
pub fn verify_saturation_axioms<I: SaturationInstance>(
    instance: &I,
    alpha: &I::Arrow,
    alpha_star: &I::Arrow,
    candidates: &[I::Arrow],
) -> Vec<AxiomViolation> {
    let mut violations = Vec::new();
    let mut check = |axiom, f: &I::Arrow, g: &I::Arrow| {
        if let Some(witness) = instance.leq_witness(f, g) {
            violations.push(AxiomViolation { axiom, witness });
        }
    };
    check(Axiom::Reflexive, &instance.identity(alpha), alpha_star);
    check(Axiom::Extensive, alpha, alpha_star);
    check(Axiom::Transitive, &instance.compose(alpha_star, alpha_star), alpha_star);
    for beta in candidates {
        let closed = instance.leq(&instance.identity(beta), beta)
            && instance.leq(alpha, beta)
            && instance.leq(&instance.compose(beta, beta), beta);
        if closed {
            check(Axiom::Least, alpha_star, beta);
        }
    }
    violations
}

/// Condition (5): for `□ ∈ {≤, ≥}`, `f♯ · α □ β · f♯` implies
/// `f♯ · α* □ β* · f♯`. Returns `false` on a counterexample.
pub fn verify_condition5<I: SaturationInstance>(
    instance: &I,
    alpha: &I::Arrow,
    beta: &I::Arrow,
    map: &[usize],
    max_depth: usize,
) -> Result<bool> {
    let alpha_star = converged_star(instance, alpha, max_depth)?;
    let beta_star = converged_star(instance, beta, max_depth)?;
    let lifted = instance.lift_map(map, beta);
    let left = instance.compose(&lifted, alpha);
    let right = instance.compose(beta, &lifted);
    let left_star = instance.compose(&lifted, &alpha_star);
    let right_star = instance.compose(&beta_star, &lifted);
    if instance.leq(&left, &right) && !instance.leq(&left_star, &right_star) {
        return Ok(false);
    }
    if instance.leq(&right, &left) && !instance.leq(&right_star, &left_star) {
        return Ok(false);
    }
    Ok(true)
}

fn converged_star<I: SaturationInstance>(
    instance: &I,
    alpha: &I::Arrow,
    max_depth: usize,
) -> Result<I::Arrow> {
    let report = saturate_by_powers(instance, alpha, max_depth)?;
    if report.converged {
        Ok(report.result)
    } else {
        Err(Error::NotConverged(max_depth))
    }
}

/// A law that failed during fuzzing, with the (shrunk) arrow that breaks it.
#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub trial: usize,
    pub law: String,
    pub witness: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FuzzReport {
    pub instance: &'static str,
    pub seed: u64,
    pub trials: usize,
    pub passed: usize,
    /// Trials whose saturation did not stabilise within the depth bound.
    pub skipped: usize,
    pub failure: Option<Counterexample>,
}

impl FuzzReport {
    pub fn success(&self) -> bool {
        self.failure.is_none()
    }
}

impl fmt::Display for FuzzReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => write!(
                f,
                "{}: {} trials (seed {}): {} passed, {} skipped (unconverged)",
                self.instance, self.trials, self.seed, self.passed, self.skipped
            ),
            Some(c) => write!(
                f,
                "{}: law `{}` failed at trial {} (seed {}); shrunk witness: {}",
                self.instance, c.law, c.trial, self.seed, c.witness
            ),
        }
    }
}

/// Knobs for [`fuzz_laws`].
#[derive(Clone, Debug)]
pub struct FuzzConfig {
    pub seed: u64,
    pub trials: usize,
    /// Largest carrier drawn; sizes are uniform in `1..=max_size`.
    pub max_size: usize,
    /// Iteration bound; `None` uses the instance default.
    pub depth: Option<usize>,
}

impl FuzzConfig {
    pub fn new(seed: u64, trials: usize) -> Self {
        FuzzConfig { seed, trials, max_size: 5, depth: None }
    }
}

/// Random testing of the saturation axioms (1)–(3), `α** = α*`, monotonicity
/// of the power chain and, for Kleene instances, `α · α* = α* · α`,
/// `(α* · α)* = α*` and distributivity of composition over joins on both
/// sides.
pub fn fuzz_laws<I: SaturationInstance>(instance: &I, config: &FuzzConfig) -> FuzzReport {
    let mut rng = StdRng::seed_from_u64(config.seed);
    let mut report = FuzzReport {
        instance: instance.name(),
        seed: config.seed,
        trials: config.trials,
        passed: 0,
        skipped: 0,
        failure: None,
    };
    for trial in 0..config.trials {
        let size = rng.gen_range(1..=config.max_size.max(1));
        let alpha = instance.random(&mut rng, size);
        let g = instance.random(&mut rng, size);
        let h = instance.random(&mut rng, size);
        match check_laws(instance, &alpha, &g, &h, config.depth) {
            LawOutcome::Pass => report.passed += 1,
            LawOutcome::Skip => report.skipped += 1,
            LawOutcome::Fail(law) => {
                let witness = shrink_failure(instance, alpha, &g, &h, config.depth, &law);
                report.failure = Some(Counterexample { trial, law, witness: format!("{witness:?}") });
                return report;
            }
        }
    }
    report
}

enum LawOutcome {
    Pass,
    Skip,
    Fail(String),
}

fn check_laws<I: SaturationInstance>(
    instance: &I,
    alpha: &I::Arrow,
    g: &I::Arrow,
    h: &I::Arrow,
    depth: Option<usize>,
) -> LawOutcome {
    let depth = depth.unwrap_or_else(|| instance.default_depth(alpha));
    let chain = match power_chain(instance, alpha, depth) {
        Ok(chain) => chain,
        Err(_) => return LawOutcome::Fail("join capability".into()),
    };
    let converged = chain.len() >= 2 && chain[chain.len() - 1] == chain[chain.len() - 2];
    if !converged {
        return LawOutcome::Skip;
    }
    if chain.windows(2).any(|w| !instance.leq(&w[0], &w[1])) {
        return LawOutcome::Fail("(1∨α)ⁿ ≤ (1∨α)ⁿ⁺¹".into());
    }
    let star = chain.last().expect("non-empty").clone();
    if let Some(v) = verify_saturation_axioms(instance, alpha, &star, &[]).into_iter().next() {
        return LawOutcome::Fail(v.axiom.to_string());
    }
    match saturate_by_powers(instance, &star, depth) {
        Ok(r) if r.converged && r.result == star => {}
        _ => return LawOutcome::Fail("α** = α*".into()),
    }
    if !instance.is_kleene() {
        return LawOutcome::Pass;
    }
    if instance.compose(alpha, &star) != instance.compose(&star, alpha) {
        return LawOutcome::Fail("α·α* = α*·α".into());
    }
    match saturate_by_powers(instance, &instance.compose(&star, alpha), depth) {
        Ok(r) if r.converged && r.result == star => {}
        _ => return LawOutcome::Fail("(α*·α)* = α*".into()),
    }
    let (Ok(fg), Ok(bottom)) = (instance.join(alpha, g), instance.bottom(alpha)) else {
        return LawOutcome::Fail("join/bottom capability".into());
    };
    let right = instance.join(&instance.compose(alpha, h), &instance.compose(g, h));
    if right.as_ref() != Ok(&instance.compose(&fg, h)) {
        return LawOutcome::Fail("(f∨g)·h = f·h ∨ g·h".into());
    }
    let left = instance.join(&instance.compose(h, alpha), &instance.compose(h, g));
    if left.as_ref() != Ok(&instance.compose(h, &fg)) {
        return LawOutcome::Fail("h·(f∨g) = h·f ∨ h·g".into());
    }
    if instance.compose(alpha, &bottom) != bottom {
        return LawOutcome::Fail("f·⊥ = ⊥".into());
    }
    if instance.bottom_absorbs_left() && instance.compose(&bottom, alpha) != bottom {
        return LawOutcome::Fail("⊥·f = ⊥".into());
    }
    LawOutcome::Pass
}

fn shrink_failure<I: SaturationInstance>(
    instance: &I,
    mut alpha: I::Arrow,
    g: &I::Arrow,
    h: &I::Arrow,
    depth: Option<usize>,
    law: &str,
) -> I::Arrow {
    let same_law = |candidate: &I::Arrow| {
        matches!(check_laws(instance, candidate, g, h, depth), LawOutcome::Fail(l) if l == law)
    };
    'outer: loop {
        for candidate in instance.shrink(&alpha) {
            if same_law(&candidate) {
                alpha = candidate;
                continue 'outer;
            }
        }
        return alpha;
    }
}
