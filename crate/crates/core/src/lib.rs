//! Ground propositional formulas, entailment, logic-DAG generation with
//! exhaustive ground truth, and symbolic scoring of candidate proofs.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod catalog;
pub mod client;
pub mod dag;
pub mod entail;
pub mod eval;
pub mod fixtures;
pub mod forms;
pub mod formula;
pub mod instance;
pub mod instantiate;
pub mod metrics;
pub mod render;
mod sat;
pub mod validate;

pub use entail::{
    entails, minimal_supports, minimize_support, satisfiable, MinimalSupport, PremiseSet,
};
pub use forms::{instantiate_form, ArgumentForm, FormKind};
pub use formula::{atoms_of, format_formula, parse_formula, Atom, Formula, ParseError};
