//! Text formats and the CCS frontend.
//!
//! * `.aut` (Aldebaran): `des (init,transitions,states)` then one
//!   `(src,"label",dst)` per line; `tau` is the silent action.
//! * `.nfa`: an `.aut` body followed by `accepting: i j …;`.
//! * `.pa`: `states: x y z;` then `x -a-> 1/3 y, 2/3 z;` per step.
//! * `.ccs`: definitions `P = a.Q + tau.0;`, see [`ccs`].
//!
//! Readers report the line and column of the first problem.

pub mod aut;
pub mod ccs;
pub mod dot;
mod lexer;
pub mod pa;

use thiserror::Error;

pub use aut::{read_aut, read_nfa, write_aut, write_nfa, AutFile, NfaFile};
pub use ccs::{ccs_to_lts, parse_ccs, Action, CcsLts, CcsProgram, ProcessTerm};
pub use dot::{lts_to_dot, nfa_to_dot, segala_to_dot};
pub use pa::{read_pa, write_pa};

/// A positioned syntax or format error. Lines and columns count from 1.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError { line, col, message: message.into() }
    }
}
