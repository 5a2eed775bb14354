//! A CCS fragment: prefix, choice, parallel composition, restriction and
//! named recursive definitions.
//!
//! ```text
//! program := def+
//! def     := NAME "=" term ";"
//! term    := par ("+" par)*
//! par     := restr ("|" restr)*
//! restr   := prefix ("\" "{" NAME ("," NAME)* "}")*
//! prefix  := act "." prefix | "0" | NAME | "(" term ")"
//! act     := NAME | "'" NAME | "tau"
//! ```
//!
//! The first definition is the root. `\\` is accepted for `\`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use super::lexer::{Cursor, Tok, Token};
use super::ParseError;
use crate::error::{Error, Result};
use crate::lts::{Alphabet, Lts, LtsMorphism, TAU_NAME};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Tau,
    /// `a`
    Input(String),
    /// `'a`
    Output(String),
}

impl Action {
    fn channel(&self) -> Option<&str> {
        match self {
            Action::Tau => None,
            Action::Input(a) | Action::Output(a) => Some(a),
        }
    }

    fn complements(&self, other: &Action) -> bool {
        matches!((self, other), (Action::Input(a), Action::Output(b)) | (Action::Output(a), Action::Input(b)) if a == b)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Tau => write!(f, "{TAU_NAME}"),
            Action::Input(a) => write!(f, "{a}"),
            Action::Output(a) => write!(f, "'{a}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProcessTerm {
    Nil,
    Prefix(Action, Box<ProcessTerm>),
    Sum(Box<ProcessTerm>, Box<ProcessTerm>),
    Par(Box<ProcessTerm>, Box<ProcessTerm>),
    Restrict(Box<ProcessTerm>, BTreeSet<String>),
    Var(String),
}

use ProcessTerm::*;

impl ProcessTerm {
    pub fn prefix(a: Action, t: ProcessTerm) -> Self {
        Prefix(a, Box::new(t))
    }

    pub fn sum(a: ProcessTerm, b: ProcessTerm) -> Self {
        Sum(Box::new(a), Box::new(b))
    }

    pub fn par(a: ProcessTerm, b: ProcessTerm) -> Self {
        Par(Box::new(a), Box::new(b))
    }

    /// Binding strength used by the printer: sum 0, par 1, restriction 2,
    /// prefix and atoms 3.
    fn level(&self) -> u8 {
        match self {
            Sum(..) => 0,
            Par(..) => 1,
            Restrict(..) => 2,
            _ => 3,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.level() < min {
            write!(f, "(")?;
            self.fmt_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Nil => write!(f, "0"),
            Var(x) => write!(f, "{x}"),
            Prefix(a, t) => {
                write!(f, "{a}.")?;
                t.fmt_at(f, 3)
            }
            Sum(a, b) => {
                a.fmt_at(f, 0)?;
                write!(f, " + ")?;
                b.fmt_at(f, 1)
            }
            Par(a, b) => {
                a.fmt_at(f, 1)?;
                write!(f, " | ")?;
                b.fmt_at(f, 2)
            }
            Restrict(t, names) => {
                t.fmt_at(f, 2)?;
                let names: Vec<&str> = names.iter().map(String::as_str).collect();
                write!(f, " \\ {{{}}}", names.join(", "))
            }
        }
    }

    /// Flattens and sorts the operands of nested sums and parallel
    /// compositions, rebuilding them left-nested.
    pub fn canonical(&self) -> ProcessTerm {
        match self {
            Nil | Var(_) => self.clone(),
            Prefix(a, t) => Prefix(a.clone(), Box::new(t.canonical())),
            Restrict(t, names) => Restrict(Box::new(t.canonical()), names.clone()),
            Sum(..) => {
                let mut ops = Vec::new();
                self.collect(&mut ops, true);
                rebuild(ops, ProcessTerm::sum)
            }
            Par(..) => {
                let mut ops = Vec::new();
                self.collect(&mut ops, false);
                rebuild(ops, ProcessTerm::par)
            }
        }
    }

    fn collect(&self, ops: &mut Vec<ProcessTerm>, sum: bool) {
        match (self, sum) {
            (Sum(a, b), true) | (Par(a, b), false) => {
                a.collect(ops, sum);
                b.collect(ops, sum);
            }
            _ => ops.push(self.canonical()),
        }
    }
}

fn rebuild(mut ops: Vec<ProcessTerm>, join: fn(ProcessTerm, ProcessTerm) -> ProcessTerm) -> ProcessTerm {
    ops.sort();
    let mut it = ops.into_iter();
    let first = it.next().expect("at least two operands");
    it.fold(first, join)
}

impl fmt::Display for ProcessTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

/// Definitions in source order; the first one is the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CcsProgram {
    pub definitions: Vec<(String, ProcessTerm)>,
}

impl CcsProgram {
    pub fn root(&self) -> &str {
        &self.definitions[0].0
    }

    pub fn definition(&self, name: &str) -> Option<&ProcessTerm> {
        self.definitions.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

impl fmt::Display for CcsProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, t) in &self.definitions {
            writeln!(f, "{name} = {t};")?;
        }
        Ok(())
    }
}

struct Parser {
    cur: Cursor,
    uses: Vec<(String, usize, usize)>,
}

pub fn parse_ccs(text: &str) -> Result<CcsProgram, ParseError> {
    let mut p = Parser { cur: Cursor::new(text)?, uses: Vec::new() };
    let mut definitions: Vec<(String, ProcessTerm)> = Vec::new();
    let mut positions = Vec::new();
    while !p.cur.at_end() {
        let (name, line, col) = p.cur.expect_ident("a definition name")?;
        if name == TAU_NAME {
            return Err(ParseError::new(line, col, "`tau` cannot be defined"));
        }
        if definitions.iter().any(|(n, _)| *n == name) {
            return Err(ParseError::new(line, col, format!("`{name}` is defined twice")));
        }
        p.cur.expect_sym("=")?;
        let body = p.term()?;
        p.cur.expect_sym(";")?;
        definitions.push((name, body));
        positions.push((line, col));
    }
    if definitions.is_empty() {
        return Err(p.cur.error("expected a definition"));
    }
    for (name, line, col) in &p.uses {
        if !definitions.iter().any(|(n, _)| n == name) {
            return Err(ParseError::new(*line, *col, format!("undefined name `{name}`")));
        }
    }
    let program = CcsProgram { definitions };
    if let Some(i) = unguarded_cycle(&program) {
        let (line, col) = positions[i];
        return Err(ParseError::new(
            line,
            col,
            format!("unguarded recursion through `{}`", program.definitions[i].0),
        ));
    }
    Ok(program)
}

impl Parser {
    fn term(&mut self) -> Result<ProcessTerm, ParseError> {
        let mut t = self.par()?;
        while self.cur.eat_sym("+") {
            t = ProcessTerm::sum(t, self.par()?);
        }
        Ok(t)
    }

    fn par(&mut self) -> Result<ProcessTerm, ParseError> {
        let mut t = self.restr()?;
        while self.cur.eat_sym("|") {
            t = ProcessTerm::par(t, self.restr()?);
        }
        Ok(t)
    }

    fn restr(&mut self) -> Result<ProcessTerm, ParseError> {
        let mut t = self.prefix()?;
        while self.cur.eat_sym("\\") || self.cur.eat_sym("\\\\") {
            self.cur.expect_sym("{")?;
            let mut names = BTreeSet::new();
            loop {
                let (n, line, col) = self.cur.expect_ident("a channel name")?;
                if n == TAU_NAME {
                    return Err(ParseError::new(line, col, "`tau` cannot be restricted"));
                }
                names.insert(n);
                if !self.cur.eat_sym(",") {
                    break;
                }
            }
            self.cur.expect_sym("}")?;
            t = Restrict(Box::new(t), names);
        }
        Ok(t)
    }

    fn prefix(&mut self) -> Result<ProcessTerm, ParseError> {
        if self.cur.eat_sym("(") {
            let t = self.term()?;
            self.cur.expect_sym(")")?;
            return Ok(t);
        }
        if self.cur.eat_sym("'") {
            let (a, line, col) = self.cur.expect_ident("a channel name")?;
            if a == TAU_NAME {
                return Err(ParseError::new(line, col, "`tau` has no co-action"));
            }
            self.cur.expect_sym(".")?;
            return Ok(ProcessTerm::prefix(Action::Output(a), self.prefix()?));
        }
        match self.cur.peek().cloned() {
            Some(Token { tok: Tok::Number(n), .. }) if n == "0" => {
                self.cur.next();
                Ok(Nil)
            }
            Some(Token { tok: Tok::Ident(name), line, col }) => {
                self.cur.next();
                let is_prefix = self.cur.is_sym(".");
                if name == TAU_NAME && !is_prefix {
                    return Err(self.cur.error("expected `.` after `tau`"));
                }
                if is_prefix {
                    self.cur.next();
                    let act = if name == TAU_NAME { Action::Tau } else { Action::Input(name) };
                    return Ok(ProcessTerm::prefix(act, self.prefix()?));
                }
                self.uses.push((name.clone(), line, col));
                Ok(Var(name))
            }
            _ => Err(self.cur.error("expected a process")),
        }
    }
}

/// Index of a definition lying on a cycle of references that are not under
/// any prefix.
fn unguarded_cycle(program: &CcsProgram) -> Option<usize> {
    let index: HashMap<&str, usize> = program.definitions.iter().enumerate().map(|(i, (n, _))| (n.as_str(), i)).collect();
    let edges: Vec<Vec<usize>> = program
        .definitions
        .iter()
        .map(|(_, t)| {
            let mut out = Vec::new();
            unguarded_refs(t, &mut |n| out.push(index[n]));
            out
        })
        .collect();
    // Depth-first search for a back edge.
    let mut colour = vec![0u8; edges.len()];
    fn visit(v: usize, edges: &[Vec<usize>], colour: &mut [u8]) -> Option<usize> {
        colour[v] = 1;
        for &w in &edges[v] {
            if colour[w] == 1 {
                return Some(w);
            }
            if colour[w] == 0 {
                if let Some(c) = visit(w, edges, colour) {
                    return Some(c);
                }
            }
        }
        colour[v] = 2;
        None
    }
    (0..edges.len()).find_map(|v| if colour[v] == 0 { visit(v, &edges, &mut colour) } else { None })
}

fn unguarded_refs<'a>(t: &'a ProcessTerm, f: &mut impl FnMut(&'a str)) {
    match t {
        Nil | Prefix(..) => {}
        Var(x) => f(x),
        Sum(a, b) | Par(a, b) => {
            unguarded_refs(a, f);
            unguarded_refs(b, f);
        }
        Restrict(a, _) => unguarded_refs(a, f),
    }
}

/// The generated system: state `i` is the canonical term `names[i]`, and
/// state 0 is the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CcsLts {
    pub lts: Lts,
    pub names: Vec<String>,
}

/// Explores the reachable canonical terms breadth first. Successors are
/// visited ordered by action and then by printed term, so numbering is
/// deterministic.
pub fn ccs_to_lts(program: &CcsProgram, state_limit: usize) -> Result<CcsLts> {
    let defs: HashMap<&str, &ProcessTerm> = program.definitions.iter().map(|(n, t)| (n.as_str(), t)).collect();
    let root = Var(program.root().to_string());
    let mut index: HashMap<ProcessTerm, usize> = HashMap::from([(root.clone(), 0)]);
    let mut states = vec![root];
    let mut triples: Vec<(usize, String, usize)> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    if state_limit == 0 {
        return Err(Error::StateLimit(0));
    }
    while let Some(i) = queue.pop_front() {
        let mut succ: Vec<(Action, ProcessTerm)> =
            transitions(&states[i], &defs).into_iter().map(|(a, t)| (a, t.canonical())).collect();
        succ.sort_by_cached_key(|(a, t)| (a.to_string(), t.to_string()));
        succ.dedup();
        for (a, t) in succ {
            let j = match index.get(&t) {
                Some(&j) => j,
                None => {
                    if states.len() >= state_limit {
                        return Err(Error::StateLimit(state_limit));
                    }
                    index.insert(t.clone(), states.len());
                    states.push(t);
                    queue.push_back(states.len() - 1);
                    states.len() - 1
                }
            };
            triples.push((i, a.to_string(), j));
        }
    }
    let visible: BTreeSet<&str> = triples.iter().map(|(_, a, _)| a.as_str()).filter(|a| *a != TAU_NAME).collect();
    let alphabet = Alphabet::new(visible)?;
    let labelled: Vec<_> = triples
        .iter()
        .map(|(i, a, j)| (*i, alphabet.lookup(a).expect("collected above"), *j))
        .collect();
    let lts = LtsMorphism::from_triples(states.len(), alphabet, labelled)?;
    Ok(CcsLts { lts, names: states.iter().map(|t| t.to_string()).collect() })
}

fn transitions(t: &ProcessTerm, defs: &HashMap<&str, &ProcessTerm>) -> Vec<(Action, ProcessTerm)> {
    match t {
        Nil => Vec::new(),
        Prefix(a, p) => vec![(a.clone(), (**p).clone())],
        Sum(p, q) => {
            let mut out = transitions(p, defs);
            out.extend(transitions(q, defs));
            out
        }
        Par(p, q) => {
            let left = transitions(p, defs);
            let right = transitions(q, defs);
            let mut out = Vec::new();
            for (a, p2) in &left {
                out.push((a.clone(), ProcessTerm::par(p2.clone(), (**q).clone())));
            }
            for (b, q2) in &right {
                out.push((b.clone(), ProcessTerm::par((**p).clone(), q2.clone())));
            }
            for (a, p2) in &left {
                for (b, q2) in &right {
                    if a.complements(b) {
                        out.push((Action::Tau, ProcessTerm::par(p2.clone(), q2.clone())));
                    }
                }
            }
            out
        }
        Restrict(p, names) => transitions(p, defs)
            .into_iter()
            .filter(|(a, _)| a.channel().is_none_or(|c| !names.contains(c)))
            .map(|(a, p2)| (a, Restrict(Box::new(p2), names.clone())))
            .collect(),
        Var(x) => transitions(defs[x.as_str()], defs),
    }
}

/// The state names as `# i name` comment lines.
pub fn name_table(names: &[String]) -> String {
    let mut out = String::new();
    for (i, n) in names.iter().enumerate() {
        out.push_str(&format!("# {i} {n}\n"));
    }
    out
}
