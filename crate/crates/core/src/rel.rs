//! Finite relations as Kleisli arrows of the powerset monad.

use std::fmt;

use fixedbitset::FixedBitSet;
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use rand::rngs::StdRng;
use rand::Rng;

use crate::error::{Error, Result};
use crate::kernel::SaturationInstance;

/// A relation `R ⊆ X × Y` on dense state indices, stored as one successor
/// bitset per source state.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    codomain: usize,
    rows: Vec<FixedBitSet>,
}

impl Relation {
    pub fn empty(domain: usize, codomain: usize) -> Self {
        Relation { codomain, rows: vec![FixedBitSet::with_capacity(codomain); domain] }
    }

    pub fn identity(n: usize) -> Self {
        let mut r = Self::empty(n, n);
        for x in 0..n {
            r.rows[x].insert(x);
        }
        r
    }

    pub fn full(domain: usize, codomain: usize) -> Self {
        let mut r = Self::empty(domain, codomain);
        for row in &mut r.rows {
            row.insert_range(..);
        }
        r
    }

    pub fn from_pairs(
        domain: usize,
        codomain: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut r = Self::empty(domain, codomain);
        for (x, y) in pairs {
            r.insert(x, y)?;
        }
        Ok(r)
    }

    pub fn domain(&self) -> usize {
        self.rows.len()
    }

    pub fn codomain(&self) -> usize {
        self.codomain
    }

    pub fn insert(&mut self, x: usize, y: usize) -> Result<()> {
        if x >= self.domain() {
            return Err(Error::UnknownState(x.to_string()));
        }
        if y >= self.codomain {
            return Err(Error::UnknownState(y.to_string()));
        }
        self.rows[x].insert(y);
        Ok(())
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x < self.domain() && y < self.codomain && self.rows[x].contains(y)
    }

    pub fn successors(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[x].ones()
    }

    pub fn row(&self, x: usize) -> &FixedBitSet {
        &self.rows[x]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows.iter().enumerate().flat_map(|(x, row)| row.ones().map(move |y| (x, y)))
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones(..)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|r| r.is_clear())
    }

    pub fn is_endo(&self) -> bool {
        self.domain() == self.codomain
    }

    pub fn union(&self, other: &Relation) -> Result<Relation> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (row, o) in out.rows.iter_mut().zip(&other.rows) {
            row.union_with(o);
        }
        Ok(out)
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.domain() == other.domain()
            && self.codomain == other.codomain
            && self.rows.iter().zip(&other.rows).all(|(a, b)| a.is_subset(b))
    }

    pub fn converse(&self) -> Relation {
        let mut out = Relation::empty(self.codomain, self.domain());
        for (x, y) in self.pairs() {
            out.rows[y].insert(x);
        }
        out
    }

    /// First pair `(x, y)` whose converse is missing.
    pub fn asymmetry(&self) -> Option<(usize, usize)> {
        if !self.is_endo() {
            return self.pairs().next();
        }
        self.pairs().find(|&(x, y)| !self.rows[y].contains(x))
    }

    pub fn is_symmetric(&self) -> bool {
        self.asymmetry().is_none()
    }

    /// Relational composition `s ∘ f`: `(x, z)` whenever `(x, y) ∈ f` and
    /// `(y, z) ∈ s` for some `y`.
    pub fn compose(s: &Relation, f: &Relation) -> Result<Relation> {
        if f.codomain != s.domain() {
            return Err(Error::CarrierMismatch(format!(
                "cannot compose a relation into {} states with one out of {}",
                f.codomain,
                s.domain()
            )));
        }
        Ok(Self::compose_unchecked(s, f))
    }

    pub(crate) fn compose_unchecked(s: &Relation, f: &Relation) -> Relation {
        let mut out = Relation::empty(f.domain(), s.codomain);
        for (x, row) in f.rows.iter().enumerate() {
            for y in row.ones() {
                out.rows[x].union_with(&s.rows[y]);
            }
        }
        out
    }

    /// Reflexive and transitive closure of an endo-relation.
    ///
    /// Strongly connected components are collapsed first; each component's
    /// reachability set is then the union of those of its successor components,
    /// visited in reverse topological order.
    pub fn rtc(&self) -> Result<Relation> {
        if !self.is_endo() {
            return Err(Error::CarrierMismatch("closure of a non-endo relation".into()));
        }
        let n = self.domain();
        let mut graph = DiGraph::<(), ()>::with_capacity(n, self.len());
        for _ in 0..n {
            graph.add_node(());
        }
        for (x, y) in self.pairs() {
            graph.add_edge(NodeIndex::new(x), NodeIndex::new(y), ());
        }
        // tarjan_scc yields components in reverse topological order: every
        // successor component precedes its predecessors.
        let components = tarjan_scc(&graph);
        let mut component_of = vec![0; n];
        for (c, members) in components.iter().enumerate() {
            for v in members {
                component_of[v.index()] = c;
            }
        }
        let mut reach: Vec<FixedBitSet> = Vec::with_capacity(components.len());
        for (c, members) in components.iter().enumerate() {
            let mut set = FixedBitSet::with_capacity(n);
            for v in members {
                set.insert(v.index());
            }
            for v in members {
                for y in self.rows[v.index()].ones() {
                    let d = component_of[y];
                    if d != c {
                        set.union_with(&reach[d]);
                    }
                }
            }
            reach.push(set);
        }
        let rows = (0..n).map(|x| reach[component_of[x]].clone()).collect();
        Ok(Relation { codomain: n, rows })
    }

    fn same_shape(&self, other: &Relation) -> Result<()> {
        if self.domain() != other.domain() || self.codomain != other.codomain {
            return Err(Error::CarrierMismatch(format!(
                "{}→{} vs {}→{}",
                self.domain(),
                self.codomain,
                other.domain(),
                other.codomain
            )));
        }
        Ok(())
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Relation[{}→{}]", self.domain(), self.codomain)?;
        f.debug_set().entries(self.pairs()).finish()
    }
}

/// The powerset monad: `Kl(P)` is the category of relations.
#[derive(Clone, Copy, Debug, Default)]
pub struct RelInstance;

impl SaturationInstance for RelInstance {
    type Arrow = Relation;

    fn name(&self) -> &'static str {
        "rel"
    }

    fn carrier(&self, f: &Relation) -> (usize, usize) {
        (f.domain(), f.codomain())
    }

    fn compose(&self, g: &Relation, f: &Relation) -> Relation {
        Relation::compose_unchecked(g, f)
    }

    fn identity(&self, like: &Relation) -> Relation {
        Relation::identity(like.domain())
    }

    fn leq(&self, f: &Relation, g: &Relation) -> bool {
        f.is_subset(g)
    }

    fn join(&self, f: &Relation, g: &Relation) -> Result<Relation> {
        f.union(g)
    }

    fn bottom(&self, like: &Relation) -> Result<Relation> {
        Ok(Relation::empty(like.domain(), like.domain()))
    }

    fn is_kleene(&self) -> bool {
        true
    }

    fn random(&self, rng: &mut StdRng, size: usize) -> Relation {
        let density = rng.gen_range(0.05..0.5);
        let mut r = Relation::empty(size, size);
        for x in 0..size {
            for y in 0..size {
                if rng.gen_bool(density) {
                    r.rows[x].insert(y);
                }
            }
        }
        r
    }

    fn lift_map(&self, map: &[usize], target: &Relation) -> Relation {
        let mut r = Relation::empty(map.len(), target.domain());
        for (x, &y) in map.iter().enumerate() {
            r.rows[x].insert(y);
        }
        r
    }

    fn leq_witness(&self, f: &Relation, g: &Relation) -> Option<String> {
        f.pairs().find(|&(x, y)| !g.contains(x, y)).map(|(x, y)| format!("pair ({x},{y})"))
    }

    fn shrink(&self, f: &Relation) -> Vec<Relation> {
        f.pairs()
            .map(|(x, y)| {
                let mut smaller = f.clone();
                smaller.rows[x].set(y, false);
                smaller
            })
            .collect()
    }
}
