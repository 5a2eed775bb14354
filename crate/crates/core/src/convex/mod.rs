//! Exact rationals, finitely supported formal sums and finitely generated
//! convex sets of them.
//!
//! An [`Expr`] is an element of `MX`: a map from atoms (dense indices) to
//! non-negative rationals with finite support. A [`ConvexSet`] is the convex
//! hull of a non-empty finite list of expressions, kept as its list of
//! extreme points in ascending order.

pub mod lp;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use lp::{Cmp, LinearProgram};

pub type Rat = num_rational::BigRational;

/// `n/d` as an exact rational. Panics when `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `p/q` or `p`, with an optional sign.
pub fn parse_rat(text: &str) -> Option<Rat> {
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text.trim(), "1"),
    };
    let valid = |s: &str| {
        let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid(num) || !valid(den) {
        return None;
    }
    let n: BigInt = num.parse().ok()?;
    let d: BigInt = den.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rat::new(n, d))
}

/// `p/q`, or `p` when the denominator is 1.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A formal sum `Σ φ(a)·a` with non-negative coefficients. Zero
/// coefficients are never stored, so equality is structural.
///
/// The derived order compares the sorted `(atom, coefficient)` lists
/// lexicographically.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expr {
    coeffs: BTreeMap<usize, Rat>,
}

impl Expr {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `1·atom`.
    pub fn unit(atom: usize) -> Self {
        Self::term(atom, Rat::one())
    }

    pub fn term(atom: usize, coeff: Rat) -> Self {
        let mut e = Self::zero();
        e.add_term(atom, coeff);
        e
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (usize, Rat)>) -> Result<Self> {
        let mut e = Self::zero();
        for (atom, coeff) in terms {
            if coeff.is_negative() {
                return Err(Error::NegativeScalar(format_rat(&coeff)));
            }
            e.add_term(atom, coeff);
        }
        Ok(e)
    }

    fn add_term(&mut self, atom: usize, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(atom).or_insert_with(Rat::zero);
        *slot += coeff;
    }

    pub fn coeff(&self, atom: usize) -> Rat {
        self.coeffs.get(&atom).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &Rat)> + '_ {
        self.coeffs.iter().map(|(a, c)| (*a, c))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Total mass `Σ φ(a)`.
    pub fn mass(&self) -> Rat {
        self.coeffs.values().sum()
    }

    pub fn add(&self, other: &Expr) -> Expr {
        let mut out = self.clone();
        for (a, c) in other.terms() {
            out.add_term(a, c.clone());
        }
        out
    }

    pub fn scale(&self, a: &Rat) -> Result<Expr> {
        if a.is_negative() {
            return Err(Error::NegativeScalar(format_rat(a)));
        }
        Ok(self.scale_nonneg(a))
    }

    pub(crate) fn scale_nonneg(&self, a: &Rat) -> Expr {
        if a.is_zero() {
            return Expr::zero();
        }
        Expr { coeffs: self.coeffs.iter().map(|(k, c)| (*k, c * a)).collect() }
    }

    /// The functor action: relabel atoms, summing coefficients that collide.
    pub fn map_atoms(&self, mut f: impl FnMut(usize) -> usize) -> Expr {
        let mut out = Expr::zero();
        for (a, c) in self.terms() {
            out.add_term(f(a), c.clone());
        }
        out
    }

    /// Drops every atom for which `keep` is false.
    pub fn restrict(&self, mut keep: impl FnMut(usize) -> bool) -> Expr {
        Expr { coeffs: self.coeffs.iter().filter(|(a, _)| keep(**a)).map(|(a, c)| (*a, c.clone())).collect() }
    }

    /// Renders as `1/3·a + 2/3·b` using `name` for atoms, `0` when empty.
    pub fn display_with(&self, mut name: impl FnMut(usize) -> String) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.terms().map(|(a, c)| format!("{}·{}", format_rat(c), name(a))).collect::<Vec<_>>().join(" + ")
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(|a| format!("@{a}")))
    }
}

/// The convex hull of finitely many expressions, stored as its extreme
/// points in ascending order. Two sets are equal iff their generator lists
/// are.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConvexSet {
    gens: Vec<Expr>,
}

impl ConvexSet {
    /// `{0}`.
    pub fn zero() -> Self {
        ConvexSet { gens: vec![Expr::zero()] }
    }

    pub fn point(e: Expr) -> Self {
        ConvexSet { gens: vec![e] }
    }

    pub fn hull(gens: impl IntoIterator<Item = Expr>) -> Result<Self> {
        let mut gens: Vec<Expr> = gens.into_iter().collect();
        if gens.is_empty() {
            return Err(Error::EmptyHull);
        }
        gens.sort();
        gens.dedup();
        Ok(ConvexSet { gens: prune(gens) })
    }

    pub fn generators(&self) -> &[Expr] {
        &self.gens
    }

    pub fn is_zero(&self) -> bool {
        self.gens.len() == 1 && self.gens[0].is_zero()
    }

    pub fn member(&self, psi: &Expr) -> bool {
        self.member_witness(psi).is_some()
    }

    /// Convex weights `λ`, one per generator, with `Σ λᵢ·gᵢ = ψ`.
    pub fn member_witness(&self, psi: &Expr) -> Option<Vec<Rat>> {
        if let Some(i) = self.gens.iter().position(|g| g == psi) {
            let mut w = vec![Rat::zero(); self.gens.len()];
            w[i] = Rat::one();
            return Some(w);
        }
        combination_of(&self.gens, psi)
    }

    /// Whether `other ⊆ self`.
    pub fn contains_set(&self, other: &ConvexSet) -> bool {
        other.gens.iter().all(|g| self.member(g))
    }

    /// `U + V = {x + y | x ∈ U, y ∈ V}`.
    pub fn minkowski_sum(&self, other: &ConvexSet) -> ConvexSet {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        // Translating by a single point keeps extreme points extreme.
        if let [p] = other.gens.as_slice() {
            return self.translate(p);
        }
        if let [p] = self.gens.as_slice() {
            return other.translate(p);
        }
        let sums = self.gens.iter().flat_map(|a| other.gens.iter().map(move |b| a.add(b)));
        ConvexSet::hull(sums).expect("non-empty operands")
    }

    fn translate(&self, p: &Expr) -> ConvexSet {
        let mut gens: Vec<Expr> = self.gens.iter().map(|g| g.add(p)).collect();
        gens.sort();
        ConvexSet { gens }
    }

    /// `a·U = {a·x | x ∈ U}`.
    pub fn scale_set(&self, a: &Rat) -> Result<ConvexSet> {
        if a.is_negative() {
            return Err(Error::NegativeScalar(format_rat(a)));
        }
        if a.is_zero() {
            return Ok(ConvexSet::zero());
        }
        let mut gens: Vec<Expr> = self.gens.iter().map(|g| g.scale_nonneg(a)).collect();
        gens.sort();
        Ok(ConvexSet { gens })
    }

    /// The hull of the union.
    pub fn join_sets(&self, other: &ConvexSet) -> ConvexSet {
        if self.contains_set(other) {
            return self.clone();
        }
        ConvexSet::hull(self.gens.iter().chain(&other.gens).cloned()).expect("non-empty operands")
    }

    pub fn map_atoms(&self, mut f: impl FnMut(usize) -> usize) -> ConvexSet {
        ConvexSet::hull(self.gens.iter().map(|g| g.map_atoms(&mut f))).expect("non-empty operand")
    }

    pub fn display_with(&self, mut name: impl FnMut(usize) -> String) -> String {
        let parts: Vec<String> = self.gens.iter().map(|g| g.display_with(&mut name)).collect();
        format!("hull{{{}}}", parts.join(", "))
    }
}

impl fmt::Debug for ConvexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(|a| format!("@{a}")))
    }
}

/// Removes every generator lying in the hull of the remaining ones.
fn prune(mut gens: Vec<Expr>) -> Vec<Expr> {
    let mut i = 0;
    while i < gens.len() && gens.len() > 1 {
        let candidate = gens[i].clone();
        if obviously_extreme(&gens, i) {
            i += 1;
            continue;
        }
        let others: Vec<Expr> = gens.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, g)| g.clone()).collect();
        if combination_of(&others, &candidate).is_some() {
            gens.remove(i);
        } else {
            i += 1;
        }
    }
    gens
}

/// Cheap sufficient tests for `gens[i]` being an extreme point: it is the
/// origin, or it strictly exceeds every other generator on some atom or in
/// total mass, or it is strictly lighter than all of them.
fn obviously_extreme(gens: &[Expr], i: usize) -> bool {
    let g = &gens[i];
    if g.is_zero() {
        return true;
    }
    let others = || gens.iter().enumerate().filter(move |(j, _)| *j != i).map(|(_, h)| h);
    if g.terms().any(|(a, c)| others().all(|h| h.coeff(a) < *c)) {
        return true;
    }
    let m = g.mass();
    others().all(|h| h.mass() < m) || others().all(|h| h.mass() > m)
}

/// Convex weights expressing `psi` over `gens`, decided by LP.
fn combination_of(gens: &[Expr], psi: &Expr) -> Option<Vec<Rat>> {
    if gens.is_empty() {
        return None;
    }
    let mut atoms: BTreeMap<usize, Vec<(usize, Rat)>> = BTreeMap::new();
    for (i, g) in gens.iter().enumerate() {
        for (a, c) in g.terms() {
            atoms.entry(a).or_default().push((i, c.clone()));
        }
    }
    if psi.support().any(|a| !atoms.contains_key(&a)) {
        return None;
    }
    let mut program = LinearProgram::new();
    let vars: Vec<usize> = (0..gens.len()).map(|i| program.var(format!("l{i}"))).collect();
    program.constrain(vars.iter().map(|&v| (v, Rat::one())), Cmp::Eq, Rat::one());
    for (a, column) in atoms {
        program.constrain(column.into_iter().map(|(i, c)| (vars[i], c)), Cmp::Eq, psi.coeff(a));
    }
    program.feasible().map(|w| w.values().to_vec())
}
