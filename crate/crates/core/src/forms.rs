//! The seven basic argument forms and schema instantiation.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Formula;

/// Schema-level metavariable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Meta {
    P,
    Q,
    R,
    S,
}

impl fmt::Display for Meta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Meta::P => "p",
            Meta::Q => "q",
            Meta::R => "r",
            Meta::S => "s",
        })
    }
}

pub type Bindings = BTreeMap<Meta, Formula>;

/// A formula over metavariables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Schema {
    Var(Meta),
    Not(Box<Schema>),
    Implies(Box<Schema>, Box<Schema>),
    Or(Box<Schema>, Box<Schema>),
}

use Meta::*;

fn v(m: Meta) -> Schema {
    Schema::Var(m)
}

fn not(s: Schema) -> Schema {
    Schema::Not(Box::new(s))
}

fn imp(a: Schema, b: Schema) -> Schema {
    Schema::Implies(Box::new(a), Box::new(b))
}

fn or(a: Schema, b: Schema) -> Schema {
    Schema::Or(Box::new(a), Box::new(b))
}

impl Schema {
    pub fn instantiate(&self, bindings: &Bindings) -> Result<Formula, FormError> {
        Ok(match self {
            Schema::Var(m) => bindings
                .get(m)
                .cloned()
                .ok_or(FormError::MissingBinding(*m))?,
            Schema::Not(a) => a.instantiate(bindings)?.negate(),
            Schema::Implies(a, b) => a.instantiate(bindings)?.implies(b.instantiate(bindings)?),
            Schema::Or(a, b) => a.instantiate(bindings)?.or(b.instantiate(bindings)?),
        })
    }

    /// One-way matching of the schema against a concrete formula, extending
    /// `bindings`. On failure `bindings` may hold partial extensions, so callers
    /// match against a clone.
    pub fn match_formula(&self, f: &Formula, bindings: &mut Bindings) -> bool {
        match (self, f) {
            (Schema::Var(m), _) => match bindings.get(m) {
                Some(bound) => bound == f,
                None => {
                    bindings.insert(*m, f.clone());
                    true
                }
            },
            (Schema::Not(a), Formula::Not(x)) => a.match_formula(x, bindings),
            (Schema::Implies(a, b), Formula::Implies(x, y))
            | (Schema::Or(a, b), Formula::Or(x, y)) => {
                a.match_formula(x, bindings) && b.match_formula(y, bindings)
            }
            _ => false,
        }
    }

    pub fn metas(&self, out: &mut Vec<Meta>) {
        match self {
            Schema::Var(m) => {
                if !out.contains(m) {
                    out.push(*m);
                }
            }
            Schema::Not(a) => a.metas(out),
            Schema::Implies(a, b) | Schema::Or(a, b) => {
                a.metas(out);
                b.metas(out);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("no binding for metavariable {0}")]
    MissingBinding(Meta),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FormKind {
    #[serde(rename = "MP")]
    ModusPonens,
    #[serde(rename = "MT")]
    ModusTollens,
    #[serde(rename = "HS")]
    HypotheticalSyllogism,
    #[serde(rename = "DS")]
    DisjunctiveSyllogism,
    #[serde(rename = "CD")]
    ConstructiveDilemma,
    #[serde(rename = "RAA")]
    ReductioAdAbsurdum,
    #[serde(rename = "DE")]
    DisjunctionElimination,
}

impl FormKind {
    pub const ALL: [FormKind; 7] = [
        FormKind::ModusPonens,
        FormKind::ModusTollens,
        FormKind::HypotheticalSyllogism,
        FormKind::DisjunctiveSyllogism,
        FormKind::ConstructiveDilemma,
        FormKind::ReductioAdAbsurdum,
        FormKind::DisjunctionElimination,
    ];

    pub fn abbrev(self) -> &'static str {
        match self {
            FormKind::ModusPonens => "MP",
            FormKind::ModusTollens => "MT",
            FormKind::HypotheticalSyllogism => "HS",
            FormKind::DisjunctiveSyllogism => "DS",
            FormKind::ConstructiveDilemma => "CD",
            FormKind::ReductioAdAbsurdum => "RAA",
            FormKind::DisjunctionElimination => "DE",
        }
    }

    pub fn from_abbrev(s: &str) -> Option<FormKind> {
        FormKind::ALL
            .into_iter()
            .find(|k| k.abbrev().eq_ignore_ascii_case(s))
    }

    pub fn form(self) -> ArgumentForm {
        let (premises, conclusion) = match self {
            FormKind::ModusPonens => (Vec::from([imp(v(P), v(Q)), v(P)]), v(Q)),
            FormKind::ModusTollens => (Vec::from([imp(v(P), v(Q)), not(v(Q))]), not(v(P))),
            FormKind::HypotheticalSyllogism => (
                Vec::from([imp(v(P), v(Q)), imp(v(Q), v(R))]),
                imp(v(P), v(R)),
            ),
            FormKind::DisjunctiveSyllogism => (Vec::from([or(v(P), v(Q)), not(v(P))]), v(Q)),
            FormKind::ConstructiveDilemma => (
                Vec::from([imp(v(P), v(Q)), imp(v(R), v(S)), or(v(P), v(R))]),
                or(v(Q), v(S)),
            ),
            FormKind::ReductioAdAbsurdum => (
                Vec::from([imp(v(P), v(Q)), imp(v(P), not(v(Q)))]),
                not(v(P)),
            ),
            FormKind::DisjunctionElimination => (
                Vec::from([or(v(P), v(Q)), imp(v(P), v(R)), imp(v(Q), v(R))]),
                v(R),
            ),
        };
        ArgumentForm {
            kind: self,
            premises,
            conclusion,
        }
    }
}

impl fmt::Display for FormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.abbrev())
    }
}

/// An inference schema: premises entail the conclusion under every binding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArgumentForm {
    pub kind: FormKind,
    pub premises: Vec<Schema>,
    pub conclusion: Schema,
}

impl ArgumentForm {
    /// Metavariables in order of first appearance across premises.
    pub fn metas(&self) -> Vec<Meta> {
        let mut out = Vec::new();
        for p in &self.premises {
            p.metas(&mut out);
        }
        self.conclusion.metas(&mut out);
        out
    }

    pub fn instantiate(&self, bindings: &Bindings) -> Result<(Vec<Formula>, Formula), FormError> {
        let premises = self
            .premises
            .iter()
            .map(|s| s.instantiate(bindings))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((premises, self.conclusion.instantiate(bindings)?))
    }

    /// Whether `premises` (in schema order) and `conclusion` are an instance of
    /// this form under a single binding.
    pub fn matches(&self, premises: &[&Formula], conclusion: &Formula) -> bool {
        if premises.len() != self.premises.len() {
            return false;
        }
        let mut b = Bindings::new();
        self.conclusion.match_formula(conclusion, &mut b)
            && self
                .premises
                .iter()
                .zip(premises)
                .all(|(s, f)| s.match_formula(f, &mut b))
    }
}

pub fn instantiate_form(
    form: &ArgumentForm,
    bindings: &Bindings,
) -> Result<(Vec<Formula>, Formula), FormError> {
    form.instantiate(bindings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn modus_ponens_instance() {
        let b = Bindings::from([(P, f("a")), (Q, f("b"))]);
        let (ps, c) = FormKind::ModusPonens.form().instantiate(&b).unwrap();
        assert_eq!(ps, [f("a -> b"), f("a")]);
        assert_eq!(c, f("b"));
    }

    #[test]
    fn degenerate_self_binding() {
        let b = Bindings::from([(P, f("a")), (Q, f("a"))]);
        let (ps, c) = FormKind::ModusPonens.form().instantiate(&b).unwrap();
        assert_eq!(ps, [f("a -> a"), f("a")]);
        assert_eq!(c, f("a"));
    }

    #[test]
    fn reductio_instance() {
        let b = Bindings::from([(P, f("x")), (Q, f("y"))]);
        let (ps, c) = FormKind::ReductioAdAbsurdum.form().instantiate(&b).unwrap();
        assert_eq!(ps, [f("x -> y"), f("x -> -y")]);
        assert_eq!(c, f("-x"));
    }

    #[test]
    fn missing_binding_is_reported() {
        let b = Bindings::from([(P, f("a"))]);
        assert_eq!(
            FormKind::ConstructiveDilemma.form().instantiate(&b),
            Err(FormError::MissingBinding(Q))
        );
    }

    #[test]
    fn conclusion_metas_occur_in_premises() {
        for k in FormKind::ALL {
            let form = k.form();
            let mut prem = Vec::new();
            for p in &form.premises {
                p.metas(&mut prem);
            }
            let mut concl = Vec::new();
            form.conclusion.metas(&mut concl);
            assert!(concl.iter().all(|m| prem.contains(m)), "{k}");
        }
    }

    #[test]
    fn matching_recovers_the_binding() {
        let form = FormKind::ConstructiveDilemma.form();
        let ps = [f("-q -> -p"), f("-s -> -r"), f("-q | -s")];
        let refs: Vec<&Formula> = ps.iter().collect();
        assert!(form.matches(&refs, &f("-p | -r")));
        assert!(!form.matches(&refs, &f("-p | -q")));
    }

    #[test]
    fn abbreviations_round_trip() {
        for k in FormKind::ALL {
            assert_eq!(FormKind::from_abbrev(k.abbrev()), Some(k));
        }
    }
}
