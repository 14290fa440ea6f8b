//! Symbolic logic DAGs: formula nodes wired to the goal through inference
//! nodes, each an instance of one of the basic argument forms.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entail::{entails, EntailError, PremiseId, PremiseSet};
use crate::forms::FormKind;
use crate::formula::{Atom, Formula};

mod config;
mod generate;
mod truth;

pub use config::{ConfigError, DepthRange, GenerationConfig, Tier};
pub use generate::{add_branch, generate_chain, generate_instance, instance_seed};
pub use truth::{dag_stats, derive_ground_truth, DagStats, GroundTruth, Ratio, Solution};

pub type NodeId = u32;
pub type InferenceId = u32;

/// One rule instance deriving `conclusion` from `premises`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferenceNode {
    pub id: InferenceId,
    pub form: FormKind,
    pub premises: Vec<NodeId>,
    pub conclusion: NodeId,
}

/// An existing node used as a premise of a newly built inference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareEvent {
    pub inference: InferenceId,
    pub node: NodeId,
}

/// Generation bookkeeping used to audit the fresh-atom discipline.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationTrace {
    /// Inference that created each non-goal node.
    pub origin: BTreeMap<NodeId, InferenceId>,
    /// Inference that minted each atom; absent for the goal atom.
    pub minted_by: BTreeMap<Atom, InferenceId>,
    pub shares: Vec<ShareEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicDag {
    pub formulas: BTreeMap<NodeId, Formula>,
    /// Given premises in presentation order; premise id `i` is entry `i - 1`.
    pub premise_order: Vec<NodeId>,
    pub goal: NodeId,
    pub inferences: Vec<InferenceNode>,
    pub seed: u64,
    pub config: GenerationConfig,
    #[serde(default)]
    pub trace: GenerationTrace,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DagError {
    #[error("cycle through node {0}")]
    Cycle(NodeId),
    #[error("node {0} is referenced but has no formula")]
    MissingNode(NodeId),
    #[error("node {0} is neither a given premise nor derived")]
    Underived(NodeId),
    #[error("given premise {0} is the conclusion of an inference")]
    DerivedLeaf(NodeId),
    #[error("node {0} does not lie on a path to the goal")]
    Orphan(NodeId),
    #[error("inference {0} does not instantiate its argument form")]
    BadInference(InferenceId),
    #[error("inference {0} is not truth-preserving")]
    UnsoundInference(InferenceId),
    #[error("nodes {0} and {1} carry the same formula")]
    DuplicateFormula(NodeId, NodeId),
    #[error("branch rejected after {0} attempts")]
    BranchRejected(u32),
    #[error("no {0:?}-tier instance within {1} attempts")]
    TierUnreachable(Tier, u32),
    #[error("dag has no inference node")]
    NoInference,
    #[error("solution {0} does not entail the goal")]
    Inconsistent(usize),
    #[error("proof subgraph enumeration exceeded {0}")]
    TooManyProofs(usize),
    #[error(transparent)]
    Entail(#[from] EntailError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

impl LogicDag {
    pub fn formula(&self, id: NodeId) -> &Formula {
        &self.formulas[&id]
    }

    pub fn goal_formula(&self) -> &Formula {
        self.formula(self.goal)
    }

    /// # Panics
    /// If no inference has this id.
    pub fn inference(&self, id: InferenceId) -> &InferenceNode {
        match self.inferences.get((id as usize).wrapping_sub(1)) {
            Some(inf) if inf.id == id => inf,
            _ => self
                .inferences
                .iter()
                .find(|i| i.id == id)
                .expect("known inference id"),
        }
    }

    pub fn leaves(&self) -> BTreeSet<NodeId> {
        self.premise_order.iter().copied().collect()
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        !self.inferences.iter().any(|i| i.conclusion == id)
    }

    /// Node id behind premise id `pid`.
    pub fn premise_node(&self, pid: PremiseId) -> Option<NodeId> {
        (pid as usize)
            .checked_sub(1)
            .and_then(|i| self.premise_order.get(i))
            .copied()
    }

    pub fn premise_id(&self, node: NodeId) -> Option<PremiseId> {
        self.premise_order
            .iter()
            .position(|&n| n == node)
            .map(|i| i as PremiseId + 1)
    }

    pub fn premise_set(&self) -> Result<PremiseSet, EntailError> {
        PremiseSet::new(
            self.premise_order
                .iter()
                .map(|n| self.formulas[n].clone())
                .collect(),
        )
    }

    /// Inferences deriving `node`.
    pub fn derivations(&self, node: NodeId) -> impl Iterator<Item = &InferenceNode> {
        self.inferences.iter().filter(move |i| i.conclusion == node)
    }

    /// Nodes that (transitively) consume `node` as a premise, excluding itself.
    pub fn downstream(&self, node: NodeId) -> BTreeSet<NodeId> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([node]);
        while let Some(n) = queue.pop_front() {
            for inf in self.inferences.iter().filter(|i| i.premises.contains(&n)) {
                if seen.insert(inf.conclusion) {
                    queue.push_back(inf.conclusion);
                }
            }
        }
        seen
    }

    /// Inference ids in an order where every premise is produced before use.
    pub fn topo_inferences(&self) -> Result<Vec<InferenceId>, DagError> {
        self.topo_of(self.inferences.iter().map(|i| i.id).collect())
    }

    /// Topological order of a subset of the inferences, using only their
    /// own conclusions as intermediate results.
    pub fn topo_within(&self, ids: &BTreeSet<InferenceId>) -> Result<Vec<InferenceId>, DagError> {
        self.topo_of(ids.clone())
    }

    fn topo_of(&self, ids: BTreeSet<InferenceId>) -> Result<Vec<InferenceId>, DagError> {
        let mut ready: BTreeSet<NodeId> = self.leaves();
        let mut done = BTreeSet::new();
        let mut order = Vec::new();
        loop {
            let mut progressed = false;
            for inf in self.inferences.iter().filter(|i| ids.contains(&i.id)) {
                if done.contains(&inf.id) {
                    continue;
                }
                if inf.premises.iter().all(|p| ready.contains(p)) {
                    done.insert(inf.id);
                    order.push(inf.id);
                    ready.insert(inf.conclusion);
                    progressed = true;
                }
            }
            if !progressed {
                break;
            }
        }
        if let Some(stuck) = self
            .inferences
            .iter()
            .find(|i| ids.contains(&i.id) && !done.contains(&i.id))
        {
            return Err(DagError::Cycle(stuck.conclusion));
        }
        Ok(order)
    }

    /// Structural invariants: acyclic, leaves exactly the underived nodes,
    /// no orphans, unique formulas, every inference a sound form instance.
    pub fn check_invariants(&self) -> Result<(), DagError> {
        for inf in &self.inferences {
            for n in inf.premises.iter().chain(core::iter::once(&inf.conclusion)) {
                if !self.formulas.contains_key(n) {
                    return Err(DagError::MissingNode(*n));
                }
            }
        }
        let derived: BTreeSet<NodeId> = self.inferences.iter().map(|i| i.conclusion).collect();
        let leaves = self.leaves();
        if let Some(&n) = leaves.intersection(&derived).next() {
            return Err(DagError::DerivedLeaf(n));
        }
        for &n in self.formulas.keys() {
            if !leaves.contains(&n) && !derived.contains(&n) {
                return Err(DagError::Underived(n));
            }
        }
        self.topo_inferences()?;
        for &n in self.formulas.keys() {
            if n != self.goal && !self.downstream(n).contains(&self.goal) {
                return Err(DagError::Orphan(n));
            }
        }
        let mut by_formula: BTreeMap<&Formula, NodeId> = BTreeMap::new();
        for (&id, f) in &self.formulas {
            if let Some(&other) = by_formula.get(f) {
                return Err(DagError::DuplicateFormula(other, id));
            }
            by_formula.insert(f, id);
        }
        for inf in &self.inferences {
            let prem: Vec<&Formula> = inf.premises.iter().map(|p| &self.formulas[p]).collect();
            let concl = &self.formulas[&inf.conclusion];
            if !inf.form.form().matches(&prem, concl) {
                return Err(DagError::BadInference(inf.id));
            }
            if !entails(prem.iter().copied(), concl) {
                return Err(DagError::UnsoundInference(inf.id));
            }
        }
        Ok(())
    }

    fn lineage(&self, node: NodeId) -> Vec<InferenceId> {
        let mut out = Vec::new();
        let mut cur = node;
        while let Some(&inf) = self.trace.origin.get(&cur) {
            out.push(inf);
            cur = self.inference(inf).conclusion;
        }
        out
    }

    /// Leaf/atom pairs where an atom shows up in a leaf outside the lineage of
    /// the inference that minted it, with no share event on that lineage
    /// bringing it in. Empty for a well-formed generated DAG.
    pub fn fresh_atom_violations(&self) -> Vec<(NodeId, Atom)> {
        let mut out = Vec::new();
        for &leaf in &self.premise_order {
            let lineage = self.lineage(leaf);
            let shared_atoms: BTreeSet<Atom> = self
                .trace
                .shares
                .iter()
                .filter(|s| lineage.contains(&s.inference))
                .flat_map(|s| self.formulas[&s.node].atoms())
                .collect();
            for atom in self.formulas[&leaf].atoms() {
                let Some(&mint) = self.trace.minted_by.get(&atom) else {
                    continue;
                };
                if !lineage.contains(&mint) && !shared_atoms.contains(&atom) {
                    out.push((leaf, atom));
                }
            }
        }
        out
    }

    /// Atoms of all formula nodes.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        for f in self.formulas.values() {
            f.collect_atoms(&mut out);
        }
        out
    }

    /// Same graph with every atom renamed through `f`.
    pub fn map_atoms<F: FnMut(&Atom) -> Atom>(&self, mut f: F) -> LogicDag {
        let mut renamed = BTreeMap::new();
        for a in self.atoms() {
            let b = f(&a);
            renamed.insert(a, b);
        }
        let mut lookup = |a: &Atom| renamed[a].clone();
        let formulas = self
            .formulas
            .iter()
            .map(|(&k, v)| (k, v.map_atoms(&mut lookup)))
            .collect();
        let mut trace = self.trace.clone();
        trace.minted_by = trace
            .minted_by
            .into_iter()
            .map(|(a, i)| (renamed[&a].clone(), i))
            .collect();
        LogicDag {
            formulas,
            trace,
            ..self.clone()
        }
    }

    /// Graphviz rendering: one record node per inference labelled with its
    /// form, edges premise -> inference -> conclusion.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph logic_dag {\n  rankdir=BT;\n");
        for (id, f) in &self.formulas {
            let shape = if *id == self.goal {
                "doubleoctagon"
            } else if self.premise_order.contains(id) {
                "box"
            } else {
                "ellipse"
            };
            let label = match self.premise_id(*id) {
                Some(pid) => format!("P{pid}: {f}"),
                None => format!("{f}"),
            };
            let _ = writeln!(s, "  n{id} [shape={shape}, label=\"{}\"];", escape(&label));
        }
        for inf in &self.inferences {
            let _ = writeln!(
                s,
                "  i{} [shape=record, label=\"{{#{}|{}}}\"];",
                inf.id, inf.id, inf.form
            );
            for p in &inf.premises {
                let _ = writeln!(s, "  n{p} -> i{};", inf.id);
            }
            let _ = writeln!(s, "  i{} -> n{};", inf.id, inf.conclusion);
        }
        s.push_str("}\n");
        s
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' | '\\' | '{' | '}' | '|' | '<' | '>' => {
                out.push('\\');
                out.push(c);
            }
            _ => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn vault_dag_is_well_formed() {
        let dag = fixtures::vault_dag();
        dag.check_invariants().unwrap();
        assert_eq!(dag.premise_order.len(), 7);
        assert_eq!(dag.topo_inferences().unwrap().len(), 4);
    }

    #[test]
    fn detects_cycles_and_orphans() {
        let mut dag = fixtures::vault_dag();
        // make the goal a premise of the badge rule
        let goal = dag.goal;
        dag.inferences[0].premises[0] = goal;
        assert!(dag.check_invariants().is_err());

        let mut dag = fixtures::vault_dag();
        dag.formulas.insert(99, Formula::prop("stray"));
        dag.premise_order.push(99);
        assert_eq!(dag.check_invariants(), Err(DagError::Orphan(99)));
    }

    #[test]
    fn detects_bad_inference() {
        let mut dag = fixtures::vault_dag();
        dag.inferences[0].form = FormKind::ModusTollens;
        assert_eq!(dag.check_invariants(), Err(DagError::BadInference(1)));
    }

    #[test]
    fn dot_lists_every_inference() {
        let dot = fixtures::vault_dag().to_dot();
        assert!(dot.starts_with("digraph"));
        assert_eq!(dot.matches("shape=record").count(), 4);
        assert!(dot.contains("{#1|MP}"));
    }
}
