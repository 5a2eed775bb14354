use std::collections::BTreeSet;
use std::fmt::Write;

use super::lexer::{describe, Cursor, Tok, Token};
use super::ParseError;
use crate::convex::{format_rat, parse_rat, Rat};
use crate::lts::{Alphabet, TAU_NAME};
use crate::segala::{Distribution, SegalaSystem};

struct RawStep {
    src: usize,
    label: String,
    terms: Vec<(usize, Rat)>,
}

/// Reads a `.pa` file. The visible alphabet is the set of labels used,
/// ordered by name.
pub fn read_pa(text: &str) -> Result<SegalaSystem, ParseError> {
    let mut cur = Cursor::new(text)?;
    let (kw, line, col) = cur.expect_ident("`states:`")?;
    if kw != "states" {
        return Err(ParseError::new(line, col, format!("expected `states:`, found `{kw}`")));
    }
    cur.expect_sym(":")?;
    let mut names: Vec<String> = Vec::new();
    while !cur.is_sym(";") {
        let (name, line, col) = cur.expect_ident("a state name or `;`")?;
        if names.contains(&name) {
            return Err(ParseError::new(line, col, format!("state `{name}` declared twice")));
        }
        names.push(name);
    }
    cur.expect_sym(";")?;
    let state = |name: &str, line: usize, col: usize| -> Result<usize, ParseError> {
        names.iter().position(|n| n == name).ok_or_else(|| ParseError::new(line, col, format!("unknown state `{name}`")))
    };
    let mut steps = Vec::new();
    while !cur.at_end() {
        let (src_name, line, col) = cur.expect_ident("a state name")?;
        let src = state(&src_name, line, col)?;
        cur.expect_sym("-")?;
        let (label, _, _) = cur.expect_ident("a label")?;
        cur.expect_sym("->")?;
        let mut terms = Vec::new();
        let mut total = Rat::from_integer(0.into());
        loop {
            let p = match cur.next() {
                Some(Token { tok: Tok::Number(text), line, col }) => match parse_rat(&text) {
                    Some(p) if p > Rat::from_integer(0.into()) => p,
                    _ => return Err(ParseError::new(line, col, format!("malformed probability `{text}`"))),
                },
                Some(t) => {
                    return Err(ParseError::new(t.line, t.col, format!("expected a probability, found {}", describe(&t.tok))))
                }
                None => return Err(cur.error("expected a probability")),
            };
            let (target, tline, tcol) = cur.expect_ident("a target state")?;
            terms.push((state(&target, tline, tcol)?, p.clone()));
            total += p;
            if cur.eat_sym(",") {
                continue;
            }
            if !cur.is_sym(";") {
                return Err(cur.error("expected `,` or `;`"));
            }
            if total != Rat::from_integer(1.into()) {
                let (l, c) = cur.here();
                return Err(ParseError::new(l, c, format!("probabilities sum to {}, not 1", format_rat(&total))));
            }
            cur.next();
            break;
        }
        steps.push(RawStep { src, label, terms });
    }
    let visible: BTreeSet<&str> = steps.iter().map(|s| s.label.as_str()).filter(|l| *l != TAU_NAME).collect();
    let alphabet = Alphabet::new(visible).expect("distinct names");
    let mut system = SegalaSystem::new(names.clone(), alphabet.clone());
    for s in steps {
        let label = alphabet.lookup(&s.label).expect("collected above");
        let mu = Distribution::new(s.terms).expect("checked mass and signs");
        system.add_step(s.src, label, mu).expect("indices checked");
    }
    Ok(system)
}

/// Writes one line per step, in state order and then label order.
pub fn write_pa(system: &SegalaSystem) -> String {
    let mut out = format!("states: {};\n", system.names().join(" "));
    for x in 0..system.num_states() {
        for (label, mu) in system.steps(x) {
            let terms: Vec<String> =
                mu.iter().map(|(y, p)| format!("{} {}", format_rat(p), system.name(y))).collect();
            writeln!(out, "{} -{}-> {};", system.name(x), system.alphabet().name(*label), terms.join(", "))
                .expect("write to string");
        }
    }
    out
}
