use std::fmt::Write;

use crate::convex::format_rat;
use crate::lts::{Alphabet, Label, Lts};
use crate::nfa::Nfa;
use crate::segala::SegalaSystem;

fn label_text(alphabet: &Alphabet, l: Label) -> String {
    if l.is_tau() {
        "τ".into()
    } else {
        escape(alphabet.name(l))
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn node_name(names: Option<&[String]>, x: usize) -> String {
    match names {
        Some(n) => escape(&n[x]),
        None => x.to_string(),
    }
}

fn graph(body: impl FnOnce(&mut String)) -> String {
    let mut out = String::from("digraph {\n    rankdir=LR;\n    node [shape=circle];\n");
    body(&mut out);
    out.push_str("}\n");
    out
}

pub fn lts_to_dot(lts: &Lts, names: Option<&[String]>) -> String {
    graph(|out| {
        for x in 0..lts.num_states() {
            writeln!(out, "    {x} [label=\"{}\"];", node_name(names, x)).expect("write to string");
        }
        for (x, l, y) in lts.transitions() {
            writeln!(out, "    {x} -> {y} [label=\"{}\"];", label_text(lts.alphabet(), l)).expect("write to string");
        }
    })
}

/// Accepting states are drawn as double circles.
pub fn nfa_to_dot(nfa: &Nfa) -> String {
    graph(|out| {
        for x in 0..nfa.num_states() {
            let shape = if nfa.is_accepting(x) { ", shape=doublecircle" } else { "" };
            writeln!(out, "    {x} [label=\"{x}\"{shape}];").expect("write to string");
        }
        for (x, l, y) in nfa.lts().transitions() {
            writeln!(out, "    {x} -> {y} [label=\"{}\"];", label_text(nfa.alphabet(), l)).expect("write to string");
        }
    })
}

/// Each step gets a point node; its outgoing edges carry `σ:p`.
pub fn segala_to_dot(system: &SegalaSystem) -> String {
    graph(|out| {
        for x in 0..system.num_states() {
            writeln!(out, "    {x} [label=\"{}\"];", escape(system.name(x))).expect("write to string");
        }
        for x in 0..system.num_states() {
            for (i, (l, mu)) in system.steps(x).iter().enumerate() {
                let point = format!("p{x}_{i}");
                let label = label_text(system.alphabet(), *l);
                writeln!(out, "    {point} [shape=point];").expect("write to string");
                writeln!(out, "    {x} -> {point} [arrowhead=none];").expect("write to string");
                for (y, p) in mu.iter() {
                    writeln!(out, "    {point} -> {y} [label=\"{label}:{}\"];", format_rat(p)).expect("write to string");
                }
            }
        }
    })
}
