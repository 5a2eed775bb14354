use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use saturn_core::syntax::{self, ParseError};
use saturn_core::{Lts, Nfa, SegalaSystem};

/// Default bound on states explored when compiling CCS.
pub const CCS_LIMIT: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Aut,
    Nfa,
    Pa,
    Ccs,
}

pub fn kind_of(path: &Path) -> Result<Kind> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("aut") => Ok(Kind::Aut),
        Some("nfa") => Ok(Kind::Nfa),
        Some("pa") => Ok(Kind::Pa),
        Some("ccs") => Ok(Kind::Ccs),
        _ => bail!("{}: unrecognised file type (expected .aut, .nfa, .pa or .ccs)", path.display()),
    }
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn positioned(path: &Path, e: ParseError) -> anyhow::Error {
    anyhow!("{}:{e}", path.display())
}

/// A transition system with its initial state and optional state names.
pub struct LoadedLts {
    pub init: usize,
    pub lts: Lts,
    pub names: Option<Vec<String>>,
}

impl LoadedLts {
    /// A state given by index or, for compiled CCS, by its printed term.
    pub fn state(&self, text: &str) -> Result<usize> {
        if let Some(i) = self.names.as_ref().and_then(|n| n.iter().position(|s| s == text)) {
            return Ok(i);
        }
        index(text, self.lts.num_states())
    }
}

pub fn index(text: &str, n: usize) -> Result<usize> {
    match text.parse::<usize>() {
        Ok(i) if i < n => Ok(i),
        Ok(i) => bail!("state {i} out of range (the system has {n} states)"),
        Err(_) => bail!("unknown state `{text}`"),
    }
}

pub fn load_lts(path: &Path, ccs_limit: usize) -> Result<LoadedLts> {
    let text = read(path)?;
    match kind_of(path)? {
        Kind::Aut => {
            let file = syntax::read_aut(&text).map_err(|e| positioned(path, e))?;
            Ok(LoadedLts { init: file.init, lts: file.lts, names: None })
        }
        Kind::Ccs => {
            let program = syntax::parse_ccs(&text).map_err(|e| positioned(path, e))?;
            let compiled = syntax::ccs_to_lts(&program, ccs_limit)?;
            Ok(LoadedLts { init: 0, lts: compiled.lts, names: Some(compiled.names) })
        }
        _ => bail!("{}: expected an .aut or .ccs file", path.display()),
    }
}

pub fn load_nfa(path: &Path) -> Result<(usize, Nfa)> {
    if kind_of(path)? != Kind::Nfa {
        bail!("{}: expected an .nfa file", path.display());
    }
    let file = syntax::read_nfa(&read(path)?).map_err(|e| positioned(path, e))?;
    Ok((file.init, file.nfa))
}

pub fn load_pa(path: &Path) -> Result<SegalaSystem> {
    if kind_of(path)? != Kind::Pa {
        bail!("{}: expected a .pa file", path.display());
    }
    syntax::read_pa(&read(path)?).map_err(|e| positioned(path, e))
}

/// A state of a probabilistic system, by name or by index.
pub fn pa_state(system: &SegalaSystem, text: &str) -> Result<usize> {
    match system.state_index(text) {
        Some(i) => Ok(i),
        None => index(text, system.num_states()),
    }
}
