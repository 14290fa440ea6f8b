//! Semantic instantiation: abstract DAG atoms to themed predicates, and
//! formulas to English sentences.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{DomainProfile, EntityCatalog};
use crate::client::{
    complete_text, ClientError, CompletionRequest, RetryPolicy, Sleeper, TextClient,
};
use crate::dag::LogicDag;
use crate::formula::{parse_formula, Atom, Formula};
use crate::render::{mechanical_gloss, normalize, render_sentence, GlossIndex};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Symbol {
    pub atom: Atom,
    /// Sentence fragment stating the atom, e.g. "Emma has a security escort".
    pub gloss: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolError {
    #[error("atoms {0} and {1} map to the same instantiated atom")]
    Collision(Atom, Atom),
    #[error("atoms {0} and {1} share a gloss")]
    GlossCollision(Atom, Atom),
    #[error("gloss for {0} is empty or contains parentheses")]
    BadGloss(Atom),
    #[error("no mapping for atom {0}")]
    Unmapped(Atom),
}

/// Bijection from abstract atoms to instantiated atoms with glosses.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolMap {
    pub entries: BTreeMap<Atom, Symbol>,
}

impl SymbolMap {
    pub fn new(entries: BTreeMap<Atom, Symbol>) -> Result<Self, SymbolError> {
        let map = Self { entries };
        map.validate()?;
        Ok(map)
    }

    pub fn validate(&self) -> Result<(), SymbolError> {
        let mut targets: BTreeMap<&Atom, &Atom> = BTreeMap::new();
        let mut glosses: BTreeMap<String, &Atom> = BTreeMap::new();
        for (src, sym) in &self.entries {
            if let Some(prev) = targets.insert(&sym.atom, src) {
                return Err(SymbolError::Collision(prev.clone(), src.clone()));
            }
            let g = normalize(&sym.gloss);
            if g.is_empty() || g.contains(['(', ')']) {
                return Err(SymbolError::BadGloss(src.clone()));
            }
            if let Some(prev) = glosses.insert(g, src) {
                return Err(SymbolError::GlossCollision(prev.clone(), src.clone()));
            }
        }
        Ok(())
    }

    pub fn covers(&self, atoms: &BTreeSet<Atom>) -> Result<(), SymbolError> {
        match atoms.iter().find(|a| !self.entries.contains_key(a)) {
            Some(a) => Err(SymbolError::Unmapped(a.clone())),
            None => Ok(()),
        }
    }

    pub fn apply(&self, f: &Formula) -> Formula {
        f.map_atoms(&mut |a| {
            self.entries
                .get(a)
                .map_or_else(|| a.clone(), |s| s.atom.clone())
        })
    }

    pub fn apply_dag(&self, dag: &LogicDag) -> LogicDag {
        dag.map_atoms(|a| {
            self.entries
                .get(a)
                .map_or_else(|| a.clone(), |s| s.atom.clone())
        })
    }

    /// Gloss of an instantiated atom.
    pub fn gloss_of(&self, atom: &Atom) -> Option<&str> {
        self.entries
            .values()
            .find(|s| &s.atom == atom)
            .map(|s| s.gloss.as_str())
    }

    /// Parser over instantiated glosses.
    pub fn gloss_index(&self) -> GlossIndex {
        GlossIndex::new(self.entries.values().map(|s| (&s.atom, s.gloss.as_str())))
    }

    pub fn vocabulary(&self) -> BTreeSet<Atom> {
        self.entries.values().map(|s| s.atom.clone()).collect()
    }
}

/// Same connective tree and a consistent atom bijection between `a` and `b`.
pub fn isomorphic(a: &Formula, b: &Formula, map: &mut BTreeMap<Atom, Atom>) -> bool {
    match (a, b) {
        (Formula::Atom(x), Formula::Atom(y)) => match map.get(x) {
            Some(z) => z == y,
            None => {
                if map.values().any(|z| z == y) {
                    return false;
                }
                map.insert(x.clone(), y.clone());
                true
            }
        },
        (Formula::Not(x), Formula::Not(y)) => isomorphic(x, y, map),
        (Formula::Implies(a1, a2), Formula::Implies(b1, b2))
        | (Formula::Or(a1, a2), Formula::Or(b1, b2))
        | (Formula::And(a1, a2), Formula::And(b1, b2)) => {
            isomorphic(a1, b1, map) && isomorphic(a2, b2, map)
        }
        _ => false,
    }
}

/// Whether `inst` is node-for-node the image of `dag` under one atom bijection.
pub fn dag_isomorphic(dag: &LogicDag, inst: &LogicDag) -> bool {
    if dag.formulas.len() != inst.formulas.len() {
        return false;
    }
    let mut map = BTreeMap::new();
    dag.formulas.iter().all(|(id, f)| {
        inst.formulas
            .get(id)
            .is_some_and(|g| isomorphic(f, g, &mut map))
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstantiationError {
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error("assistant output rejected after {rounds} rounds: {reason}")]
    Rejected { rounds: u32, reason: String },
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}

/// Optional assistant used for naming and verbalization.
pub struct Assist<'a> {
    pub client: &'a dyn TextClient,
    pub sleeper: &'a dyn Sleeper,
    pub retry: RetryPolicy,
    /// Re-prompts allowed after a response fails validation.
    pub max_rounds: u32,
}

impl Assist<'_> {
    fn ask(&self, req: &CompletionRequest) -> Result<String, ClientError> {
        complete_text(self.client, &self.retry, self.sleeper, req).map(|c| c.text)
    }
}

/// Mechanical names: atom `#n` (in sorted order) gets a seeded entity type
/// `t` from the profile and becomes `t_prop_n(t_1)`.
pub fn fallback_symbols(
    dag: &LogicDag,
    profile: &DomainProfile,
    catalog: &EntityCatalog,
    seed: u64,
) -> SymbolMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_5EED_0000_0001);
    let types: Vec<String> = profile
        .entity_types
        .iter()
        .filter_map(|t| catalog.get(t).map(|e| e.ident()))
        .collect();
    let mut entries = BTreeMap::new();
    for (i, atom) in dag.atoms().into_iter().enumerate() {
        let t = types
            .choose(&mut rng)
            .cloned()
            .unwrap_or_else(|| String::from("entity"));
        let inst = Atom::new(format!("{t}_prop_{}", i + 1), [format!("{t}_1")])
            .expect("identifier by construction");
        let gloss = mechanical_gloss(&inst);
        entries.insert(atom, Symbol { atom: inst, gloss });
    }
    SymbolMap { entries }
}

const NAMING_SYSTEM: &str = "You instantiate abstract propositional symbols into domain predicates. \
Reply with a single JSON object mapping every abstract symbol to {\"atom\": \"predicate(constant)\", \
\"gloss\": \"short English clause\"}. Predicates and constants are lowercase identifiers \
([a-z][a-z0-9_]*). Every symbol needs a distinct atom and a distinct gloss without parentheses.";

fn naming_prompt(dag: &LogicDag, profile: &DomainProfile, catalog: &EntityCatalog) -> String {
    let mut s = format!(
        "Domain: {}\nBackground: {}\nConstants: {}\nEntity types: ",
        profile.name,
        profile.background,
        profile.constant_pool.join(", ")
    );
    let types: Vec<String> = profile
        .entity_types
        .iter()
        .filter_map(|t| catalog.get(t))
        .map(|e| format!("{} ({})", e.name, e.description))
        .collect();
    s.push_str(&types.join("; "));
    s.push_str("\nFormulas:\n");
    for id in &dag.premise_order {
        s.push_str(&format!("- {}\n", dag.formula(*id)));
    }
    s.push_str(&format!("Goal: {}\nSymbols: ", dag.goal_formula()));
    let atoms: Vec<String> = dag.atoms().iter().map(|a| a.to_string()).collect();
    s.push_str(&atoms.join(", "));
    s
}

#[derive(Deserialize)]
struct NamedSymbol {
    atom: String,
    gloss: String,
}

fn json_object(text: &str) -> Option<&str> {
    let start = text.find('{')?;
    let end = text.rfind('}')?;
    (start < end).then(|| &text[start..=end])
}

fn parse_naming(text: &str, dag: &LogicDag) -> Result<SymbolMap, String> {
    let body = json_object(text).ok_or("no JSON object in response")?;
    let raw: BTreeMap<String, NamedSymbol> =
        serde_json::from_str(body).map_err(|e| e.to_string())?;
    let mut entries = BTreeMap::new();
    for atom in dag.atoms() {
        let named = raw
            .get(&atom.to_string())
            .ok_or_else(|| format!("missing symbol {atom}"))?;
        let inst = match parse_formula(&named.atom) {
            Ok(Formula::Atom(a)) => a,
            _ => return Err(format!("`{}` is not an atom", named.atom)),
        };
        entries.insert(
            atom,
            Symbol {
                atom: inst,
                gloss: named.gloss.trim().to_string(),
            },
        );
    }
    SymbolMap::new(entries).map_err(|e| e.to_string())
}

/// Maps every DAG atom to a themed atom. Without an assistant the mapping
/// is mechanical; with one, responses are validated and re-requested up to
/// `max_rounds` times.
pub fn assign_semantics(
    dag: &LogicDag,
    profile: &DomainProfile,
    catalog: &EntityCatalog,
    assist: Option<&Assist<'_>>,
    seed: u64,
) -> Result<SymbolMap, InstantiationError> {
    let Some(assist) = assist else {
        return Ok(fallback_symbols(dag, profile, catalog, seed));
    };
    let mut user = naming_prompt(dag, profile, catalog);
    let mut reason = String::new();
    let rounds = assist.max_rounds.max(1);
    for _ in 0..rounds {
        let text = assist.ask(&CompletionRequest::new(NAMING_SYSTEM, user.clone()))?;
        match parse_naming(&text, dag) {
            Ok(map) => return Ok(map),
            Err(e) => {
                user.push_str(&format!(
                    "\nYour previous answer was rejected: {e}. Answer again."
                ));
                reason = e;
            }
        }
    }
    Err(InstantiationError::Rejected { rounds, reason })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerbalizedInstance {
    pub context: String,
    pub premise_sentences: Vec<String>,
    pub goal_sentence: String,
    /// Canonical formula text, premises in order followed by the goal.
    pub prover9_forms: Vec<String>,
}

/// Template rendering of the instantiated `dag` (atoms already mapped).
pub fn fallback_verbalize(
    dag: &LogicDag,
    symbols: &SymbolMap,
    profile: &DomainProfile,
) -> VerbalizedInstance {
    let gloss = |a: &Atom| {
        symbols
            .gloss_of(a)
            .map_or_else(|| mechanical_gloss(a), ToString::to_string)
    };
    let premise_sentences = dag
        .premise_order
        .iter()
        .map(|n| render_sentence(dag.formula(*n), gloss))
        .collect();
    VerbalizedInstance {
        context: profile.background.clone(),
        premise_sentences,
        goal_sentence: render_sentence(dag.goal_formula(), gloss),
        prover9_forms: forms_of(dag),
    }
}

fn forms_of(dag: &LogicDag) -> Vec<String> {
    dag.premise_order
        .iter()
        .chain(core::iter::once(&dag.goal))
        .map(|n| dag.formula(*n).to_string())
        .collect()
}

const VERBAL_SYSTEM: &str =
    "You turn formal premises into a short, coherent story. Keep every logical \
relation exactly, add no facts. Reply with a JSON object {\"context\": string, \"premises\": [one \
sentence per premise, same order], \"goal\": string}.";

#[derive(Deserialize)]
struct Verbal {
    context: String,
    premises: Vec<String>,
    goal: String,
}

/// Sentences for the instantiated `dag`. With an assistant, its prose is
/// used when well-formed; otherwise the templates are.
pub fn verbalize(
    dag: &LogicDag,
    symbols: &SymbolMap,
    profile: &DomainProfile,
    assist: Option<&Assist<'_>>,
) -> Result<VerbalizedInstance, InstantiationError> {
    let fallback = fallback_verbalize(dag, symbols, profile);
    let Some(assist) = assist else {
        return Ok(fallback);
    };
    let mut user = format!("Background: {}\nPremises:\n", profile.background);
    for (i, s) in fallback.premise_sentences.iter().enumerate() {
        user.push_str(&format!(
            "{}. {} [{}]\n",
            i + 1,
            s,
            fallback.prover9_forms[i]
        ));
    }
    user.push_str(&format!("Goal: {}", fallback.goal_sentence));
    let mut reason = String::new();
    let rounds = assist.max_rounds.max(1);
    for _ in 0..rounds {
        let text = assist.ask(&CompletionRequest::new(VERBAL_SYSTEM, user.clone()))?;
        let parsed = json_object(&text)
            .ok_or_else(|| String::from("no JSON object"))
            .and_then(|b| serde_json::from_str::<Verbal>(b).map_err(|e| e.to_string()));
        match parsed {
            Ok(v) if v.premises.len() == fallback.premise_sentences.len() => {
                return Ok(VerbalizedInstance {
                    context: v.context,
                    premise_sentences: v.premises,
                    goal_sentence: v.goal,
                    prover9_forms: fallback.prover9_forms,
                });
            }
            Ok(v) => {
                reason = format!(
                    "expected {} premise sentences, got {}",
                    fallback.premise_sentences.len(),
                    v.premises.len()
                )
            }
            Err(e) => reason = e,
        }
        user.push_str(&format!(
            "\nYour previous answer was rejected: {reason}. Answer again."
        ));
    }
    Err(InstantiationError::Rejected { rounds, reason })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin_profiles;
    use crate::client::{Completion, NoSleep, TokenUsage};
    use crate::dag::{generate_instance, GenerationConfig};
    use core::cell::RefCell;

    struct Scripted(RefCell<Vec<String>>);

    impl TextClient for Scripted {
        fn complete(&self, _: &CompletionRequest) -> Result<Completion, ClientError> {
            let text = self.0.borrow_mut().remove(0);
            Ok(Completion {
                text,
                usage: TokenUsage::default(),
            })
        }
    }

    fn small() -> LogicDag {
        let cfg = GenerationConfig {
            seed: 3,
            ..Default::default()
        };
        generate_instance(&cfg).unwrap().0
    }

    #[test]
    fn fallback_is_bijective_and_isomorphic() {
        let dag = small();
        let profile = &builtin_profiles()[0];
        let map = fallback_symbols(&dag, profile, &EntityCatalog::builtin(), 9);
        map.validate().unwrap();
        map.covers(&dag.atoms()).unwrap();
        let inst = map.apply_dag(&dag);
        assert!(dag_isomorphic(&dag, &inst));
        inst.check_invariants().unwrap();
        assert_eq!(
            map,
            fallback_symbols(&dag, profile, &EntityCatalog::builtin(), 9)
        );
        let v = fallback_verbalize(&inst, &map, profile);
        assert_eq!(v.premise_sentences.len(), inst.premise_order.len());
        let idx = map.gloss_index();
        for (i, n) in inst.premise_order.iter().enumerate() {
            assert_eq!(
                &parse_formula(&v.prover9_forms[i]).unwrap(),
                inst.formula(*n)
            );
            assert_eq!(
                idx.parse(&v.premise_sentences[i]).as_ref(),
                Some(inst.formula(*n))
            );
        }
    }

    #[test]
    fn mechanical_atom_shape() {
        let dag = small();
        let map = fallback_symbols(&dag, &builtin_profiles()[0], &EntityCatalog::builtin(), 1);
        let third = map.entries.values().nth(2).unwrap();
        let t = third.atom.args()[0].trim_end_matches("_1").to_string();
        assert_eq!(third.atom.predicate(), format!("{t}_prop_3"));
    }

    #[test]
    fn assistant_naming_is_validated() {
        let dag = crate::fixtures::vault_dag();
        let atoms: Vec<String> = dag.atoms().iter().map(|a| a.to_string()).collect();
        let colliding: Vec<String> = atoms
            .iter()
            .map(|a| format!("\"{a}\": {{\"atom\": \"x\", \"gloss\": \"g {a}\"}}"))
            .collect();
        let good: Vec<String> = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| {
                format!("\"{a}\": {{\"atom\": \"p{i}(emma)\", \"gloss\": \"Emma does thing {i}\"}}")
            })
            .collect();
        let client = Scripted(RefCell::new(Vec::from([
            format!("{{{}}}", colliding.join(",")),
            format!("Here you go: {{{}}}", good.join(",")),
        ])));
        let assist = Assist {
            client: &client,
            sleeper: &NoSleep,
            retry: RetryPolicy::default(),
            max_rounds: 3,
        };
        let map = assign_semantics(
            &dag,
            &builtin_profiles()[0],
            &EntityCatalog::builtin(),
            Some(&assist),
            0,
        )
        .unwrap();
        assert_eq!(map.entries.len(), 5);
        assert!(client.0.borrow().is_empty());
    }
}
