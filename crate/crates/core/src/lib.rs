//! Weak bisimulation through saturation.
//!
//! Transition systems are treated as coalgebras whose type is a monad with an
//! order-enriched Kleisli category. Saturating a coalgebra `alpha` yields the
//! least reflexive and transitive `alpha*` above it, and weak bisimilarity on
//! `alpha` is strong bisimilarity on `alpha*`. The crate ships four concrete
//! instances of the generic [`kernel`]:
//!
//! * [`rel`]: finite relations (the powerset monad),
//! * [`lts`]: labelled transition systems with a silent action,
//! * [`nfa`]: non-deterministic automata with silent moves,
//! * [`segala`]: simple probabilistic automata, via convex sets of
//!   finitely supported valuations built on [`convex`].
//!
//! [`syntax`] holds the text formats and a small CCS frontend.

pub mod convex;
pub mod error;
pub mod kernel;
pub mod lts;
pub mod nfa;
pub mod rel;
pub mod segala;
pub mod syntax;

pub use error::{Error, Result};
pub use lts::{Alphabet, Label, Lts, LtsMorphism, Partition};
pub use nfa::Nfa;
pub use rel::Relation;
pub use segala::{CmMorphism, Distribution, SegalaSystem};
