use std::collections::BTreeSet;
use std::fmt::Write;

use super::ParseError;
use crate::lts::{Alphabet, Label, Lts, LtsMorphism, TAU_NAME};
use crate::nfa::Nfa;

/// An `.aut` file: the initial state and the transition system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutFile {
    pub init: usize,
    pub lts: Lts,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NfaFile {
    pub init: usize,
    pub nfa: Nfa,
}

struct Body {
    init: usize,
    states: usize,
    triples: Vec<(usize, String, usize, usize)>,
    accepting: Option<(Vec<usize>, usize)>,
}

/// Reads an `.aut` file. The visible alphabet is the set of labels used,
/// ordered by name. Blank lines and lines starting with `#` are skipped.
pub fn read_aut(text: &str) -> Result<AutFile, ParseError> {
    let body = read_body(text, false)?;
    let lts = build(&body)?;
    Ok(AutFile { init: body.init, lts })
}

/// Reads an `.nfa` file: an `.aut` body and an optional final
/// `accepting: …;` line.
pub fn read_nfa(text: &str) -> Result<NfaFile, ParseError> {
    let body = read_body(text, true)?;
    let lts = build(&body)?;
    let mut accepting = vec![false; body.states];
    if let Some((states, line)) = &body.accepting {
        for &x in states {
            if x >= body.states {
                return Err(ParseError::new(*line, 1, format!("accepting state {x} out of range")));
            }
            accepting[x] = true;
        }
    }
    let nfa = Nfa::from_lts(lts, accepting).expect("acceptance has one entry per state");
    Ok(NfaFile { init: body.init, nfa })
}

fn build(body: &Body) -> Result<Lts, ParseError> {
    let names: BTreeSet<&str> =
        body.triples.iter().map(|(_, l, _, _)| l.as_str()).filter(|l| *l != TAU_NAME).collect();
    let alphabet = Alphabet::new(names).expect("names are distinct and not tau");
    let mut lts = LtsMorphism::endo(body.states, alphabet.clone());
    for (src, label, dst, line) in &body.triples {
        for (x, what) in [(src, "source"), (dst, "target")] {
            if *x >= body.states {
                return Err(ParseError::new(*line, 1, format!("{what} state {x} out of range")));
            }
        }
        let l = alphabet.lookup(label).expect("label collected above");
        lts.add_step(*src, l, *dst).expect("indices checked");
    }
    Ok(lts)
}

fn read_body(text: &str, with_accepting: bool) -> Result<Body, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let Some((hline, header)) = lines.next() else {
        return Err(ParseError::new(1, 1, "missing `des` header"));
    };
    let (init, count, states) = parse_header(hline, header)?;
    if states == 0 {
        return Err(ParseError::new(hline, 1, "a system needs at least one state"));
    }
    if init >= states {
        return Err(ParseError::new(hline, 1, format!("initial state {init} out of range")));
    }
    let mut triples = Vec::new();
    let mut accepting = None;
    for (lno, line) in lines {
        if accepting.is_some() {
            return Err(ParseError::new(lno, 1, "nothing may follow the `accepting:` line"));
        }
        let trimmed = line.trim();
        if with_accepting && trimmed.starts_with("accepting") {
            accepting = Some((parse_accepting(lno, line)?, lno));
            continue;
        }
        let (src, label, dst) = parse_transition(lno, line)?;
        triples.push((src, label, dst, lno));
    }
    if triples.len() != count {
        return Err(ParseError::new(
            hline,
            1,
            format!("header declares {count} transitions but {} were given", triples.len()),
        ));
    }
    Ok(Body { init, states, triples, accepting })
}

fn col_of(line: &str, rest: &str) -> usize {
    line[..line.len() - rest.len()].chars().count() + 1
}

fn parse_header(lno: usize, line: &str) -> Result<(usize, usize, usize), ParseError> {
    let rest = line.trim_start();
    let Some(rest) = rest.strip_prefix("des") else {
        return Err(ParseError::new(lno, col_of(line, line.trim_start()), "expected `des (init,transitions,states)`"));
    };
    let inner = parenthesised(lno, line, rest)?;
    let parts: Vec<&str> = inner.split(',').collect();
    if parts.len() != 3 {
        return Err(ParseError::new(lno, col_of(line, rest), "header needs three numbers"));
    }
    let mut nums = [0usize; 3];
    for (k, p) in parts.iter().enumerate() {
        nums[k] = p
            .trim()
            .parse()
            .map_err(|_| ParseError::new(lno, col_of(line, p), format!("expected a number, found `{}`", p.trim())))?;
    }
    Ok((nums[0], nums[1], nums[2]))
}

/// The text between `(` and the final `)`, which must end the line.
fn parenthesised<'a>(lno: usize, line: &'a str, rest: &'a str) -> Result<&'a str, ParseError> {
    let rest = rest.trim();
    let Some(inner) = rest.strip_prefix('(') else {
        return Err(ParseError::new(lno, col_of(line, rest), "expected `(`"));
    };
    match inner.strip_suffix(')') {
        Some(inner) => Ok(inner),
        None => Err(ParseError::new(lno, line.trim_end().chars().count() + 1, "expected `)` at end of line")),
    }
}

fn parse_transition(lno: usize, line: &str) -> Result<(usize, String, usize), ParseError> {
    let inner = parenthesised(lno, line, line)?;
    let Some((src, rest)) = inner.split_once(',') else {
        return Err(ParseError::new(lno, col_of(line, inner), "expected `(src,\"label\",dst)`"));
    };
    let Some((label, dst)) = rest.rsplit_once(',') else {
        return Err(ParseError::new(lno, col_of(line, rest), "expected `(src,\"label\",dst)`"));
    };
    let number = |s: &str| -> Result<usize, ParseError> {
        s.trim().parse().map_err(|_| ParseError::new(lno, col_of(line, s), format!("expected a state index, found `{}`", s.trim())))
    };
    let src = number(src)?;
    let dst = number(dst)?;
    let trimmed = label.trim();
    let name = match trimmed.strip_prefix('"') {
        Some(q) => q
            .strip_suffix('"')
            .ok_or_else(|| ParseError::new(lno, col_of(line, label), "unterminated label string"))?,
        None => trimmed,
    };
    if name.is_empty() || name.contains('"') {
        return Err(ParseError::new(lno, col_of(line, label), "malformed label"));
    }
    Ok((src, name.to_string(), dst))
}

fn parse_accepting(lno: usize, line: &str) -> Result<Vec<usize>, ParseError> {
    let rest = line.trim_start().strip_prefix("accepting").expect("checked by caller").trim_start();
    let Some(rest) = rest.strip_prefix(':') else {
        return Err(ParseError::new(lno, col_of(line, rest), "expected `:` after `accepting`"));
    };
    let Some(list) = rest.trim_end().strip_suffix(';') else {
        return Err(ParseError::new(lno, line.trim_end().chars().count() + 1, "expected `;`"));
    };
    list.split_whitespace()
        .map(|w| w.parse().map_err(|_| ParseError::new(lno, col_of(line, w), format!("expected a state index, found `{w}`"))))
        .collect()
}

/// Writes an `.aut` file with transitions sorted by source, label, target.
pub fn write_aut(init: usize, lts: &Lts) -> String {
    let mut out = format!("des ({},{},{})\n", init, lts.num_transitions(), lts.num_states());
    for (x, l, y) in sorted_transitions(lts) {
        writeln!(out, "({},\"{}\",{})", x, lts.alphabet().name(l), y).expect("write to string");
    }
    out
}

pub fn write_nfa(init: usize, nfa: &Nfa) -> String {
    let mut out = write_aut(init, nfa.lts());
    let accepting: Vec<String> = nfa.accepting_states().map(|x| x.to_string()).collect();
    if accepting.is_empty() {
        out.push_str("accepting: ;\n");
    } else {
        writeln!(out, "accepting: {};", accepting.join(" ")).expect("write to string");
    }
    out
}

fn sorted_transitions(lts: &Lts) -> Vec<(usize, Label, usize)> {
    let mut ts: Vec<(usize, Label, usize)> = lts.transitions().collect();
    ts.sort_by(|a, b| (a.0, lts.alphabet().name(a.1), a.2).cmp(&(b.0, lts.alphabet().name(b.1), b.2)));
    ts
}
