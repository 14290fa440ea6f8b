//! Benchmark instances: formal and English premises, goal, ground truth,
//! and the answer format candidate reasoners are asked to follow.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{DomainProfile, EntityCatalog};
use crate::dag::{
    derive_ground_truth, generate_instance, DagError, GenerationConfig, GroundTruth, InferenceId,
    LogicDag, NodeId, Tier,
};
use crate::entail::PremiseId;
use crate::formula::{Atom, Formula};
use crate::instantiate::{
    assign_semantics, dag_isomorphic, verbalize, Assist, InstantiationError, SymbolMap,
    VerbalizedInstance,
};
use crate::render::{mechanical_gloss, render_sentence};
use crate::validate::{check_consistency, check_global, check_stepwise, ValidationReport};

pub const SCHEMA_ID: &str = "multipath-instance/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LabelKind {
    Fact,
    Rule,
}

/// How a premise is cited in answers: literals are facts, everything else
/// is a rule, each numbered from 1 in premise order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PremiseLabel {
    pub kind: LabelKind,
    pub number: u32,
}

impl fmt::Display for PremiseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            LabelKind::Fact => "Fact",
            LabelKind::Rule => "Rule",
        };
        write!(f, "{k} {}", self.number)
    }
}

/// Labels for formulas in premise order.
pub fn premise_labels<'f, I: IntoIterator<Item = &'f Formula>>(formulas: I) -> Vec<PremiseLabel> {
    let (mut facts, mut rules) = (0, 0);
    formulas
        .into_iter()
        .map(|f| {
            if f.is_literal() {
                facts += 1;
                PremiseLabel {
                    kind: LabelKind::Fact,
                    number: facts,
                }
            } else {
                rules += 1;
                PremiseLabel {
                    kind: LabelKind::Rule,
                    number: rules,
                }
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error(transparent)]
    Dag(#[from] DagError),
    #[error(transparent)]
    Instantiation(#[from] InstantiationError),
    #[error("instantiated formulas do not mirror the dag")]
    NotIsomorphic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PremiseEntry {
    pub id: PremiseId,
    pub label: PremiseLabel,
    pub formal: Formula,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub formal: Formula,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub config_hash: String,
    pub catalog_version: String,
    pub generator_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkInstance {
    pub schema: String,
    pub instance_id: String,
    /// Absent for hand-built fixtures whose path count fits no band.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tier: Option<Tier>,
    pub domain: String,
    pub context: String,
    pub premises: Vec<PremiseEntry>,
    pub goal: Statement,
    pub ground_truth: GroundTruth,
    /// The DAG over instantiated atoms.
    pub dag: LogicDag,
    pub symbols: SymbolMap,
    pub provenance: Provenance,
}

impl BenchmarkInstance {
    /// Assembles an instance from an instantiated DAG and its rendering.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        instance_id: String,
        tier: Option<Tier>,
        domain: String,
        dag: LogicDag,
        ground_truth: GroundTruth,
        symbols: SymbolMap,
        verbal: VerbalizedInstance,
        provenance: Provenance,
    ) -> Self {
        let formulas: Vec<&Formula> = dag.premise_order.iter().map(|n| dag.formula(*n)).collect();
        let labels = premise_labels(formulas.iter().copied());
        let premises = formulas
            .iter()
            .zip(labels)
            .zip(verbal.premise_sentences)
            .enumerate()
            .map(|(i, ((f, label), text))| PremiseEntry {
                id: i as PremiseId + 1,
                label,
                formal: (*f).clone(),
                text,
            })
            .collect();
        let goal = Statement {
            formal: dag.goal_formula().clone(),
            text: verbal.goal_sentence,
        };
        Self {
            schema: SCHEMA_ID.to_string(),
            instance_id,
            tier,
            domain,
            context: verbal.context,
            premises,
            goal,
            ground_truth,
            dag,
            symbols,
            provenance,
        }
    }

    /// Generates, instantiates and verbalizes one instance. Without an
    /// assistant every step is offline and deterministic in the seed.
    pub fn build(
        instance_id: String,
        config: &GenerationConfig,
        profile: &DomainProfile,
        catalog: &EntityCatalog,
        assist: Option<&Assist<'_>>,
        config_hash: String,
        generator_version: &str,
    ) -> Result<Self, BuildError> {
        let (dag, _) = generate_instance(config)?;
        let symbols = assign_semantics(&dag, profile, catalog, assist, config.seed)?;
        let inst = symbols.apply_dag(&dag);
        if !dag_isomorphic(&dag, &inst) {
            return Err(BuildError::NotIsomorphic);
        }
        let gt = derive_ground_truth(&inst)?;
        let verbal = verbalize(&inst, &symbols, profile, assist)?;
        let provenance = Provenance {
            seed: config.seed,
            config_hash,
            catalog_version: catalog.version.clone(),
            generator_version: generator_version.to_string(),
        };
        Ok(Self::assemble(
            instance_id,
            Some(config.tier),
            profile.name.clone(),
            inst,
            gt,
            symbols,
            verbal,
            provenance,
        ))
    }

    /// [`BenchmarkInstance::build`] with fallback naming and templates.
    pub fn generate_offline(
        instance_id: String,
        config: &GenerationConfig,
        profile: &DomainProfile,
        catalog: &EntityCatalog,
        config_hash: String,
        generator_version: &str,
    ) -> Result<Self, BuildError> {
        Self::build(
            instance_id,
            config,
            profile,
            catalog,
            None,
            config_hash,
            generator_version,
        )
    }

    pub fn premise(&self, id: PremiseId) -> Option<&PremiseEntry> {
        (id as usize)
            .checked_sub(1)
            .and_then(|i| self.premises.get(i))
    }

    pub fn by_label(&self, label: PremiseLabel) -> Option<&PremiseEntry> {
        self.premises.iter().find(|p| p.label == label)
    }

    pub fn gloss(&self, atom: &Atom) -> String {
        self.symbols
            .gloss_of(atom)
            .map_or_else(|| mechanical_gloss(atom), ToString::to_string)
    }

    pub fn sentence(&self, f: &Formula) -> String {
        render_sentence(f, |a: &Atom| self.gloss(a))
    }

    /// Mismatches between the stored fields and the DAG they came from.
    pub fn structure_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.schema != SCHEMA_ID {
            errs.push(format!("unknown schema `{}`", self.schema));
        }
        if let Err(e) = self.dag.topo_inferences() {
            errs.push(format!("dag: {e}"));
            return errs;
        }
        if self.premises.len() != self.dag.premise_order.len() {
            errs.push(String::from("premise list does not match the dag leaves"));
        }
        let labels = premise_labels(self.premises.iter().map(|p| &p.formal));
        for ((i, p), label) in self.premises.iter().enumerate().zip(labels) {
            let node = self
                .dag
                .premise_order
                .get(i)
                .and_then(|n| self.dag.formulas.get(n));
            if p.id != i as PremiseId + 1 || node != Some(&p.formal) || p.label != label {
                errs.push(format!("premise {} is stale", p.id));
            }
        }
        if self.dag.formulas.get(&self.dag.goal) != Some(&self.goal.formal) {
            errs.push(String::from("goal does not match the dag"));
        }
        match derive_ground_truth(&self.dag) {
            Ok(gt) if gt == self.ground_truth => {}
            Ok(_) => errs.push(String::from("stored ground truth differs from the dag")),
            Err(e) => errs.push(format!("ground truth: {e}")),
        }
        let n = self.ground_truth.n_paths();
        if let Some(tier) = self.tier {
            let (lo, hi) = tier.band(self.dag.config.large_max);
            if !(lo as usize..=hi as usize).contains(&n) {
                errs.push(format!("tier {tier} does not fit {n} solutions"));
            }
        }
        errs
    }

    pub fn validate(&self) -> ValidationReport {
        ValidationReport::from_checks(
            self.instance_id.clone(),
            check_stepwise(&self.dag),
            check_global(&self.dag),
            check_consistency(&self.dag),
            self.structure_errors(),
        )
    }

    /// Question text given to a reasoner, including the answer format.
    pub fn render_prompt(&self) -> String {
        let mut s = format!("{}\n\n", self.context);
        for p in &self.premises {
            s.push_str(&format!("{}: {}\n", p.label, p.text));
        }
        s.push_str(&format!(
            "\nQuestion: using only the facts and rules above, show that the following holds: {}\n\n",
            self.goal.text
        ));
        s.push_str(ANSWER_FORMAT);
        s
    }

    /// Every ground-truth solution written as a templated answer.
    pub fn render_ground_truth_response(&self) -> String {
        let mut s = String::new();
        for sol in &self.ground_truth.solutions {
            s.push_str(&format!("### Solution {}\n", sol.id));
            s.push_str(&self.render_proof(&sol.inference_ids));
            s.push('\n');
        }
        s
    }

    fn render_proof(&self, inference_ids: &alloc::collections::BTreeSet<InferenceId>) -> String {
        let order = self.dag.topo_within(inference_ids).unwrap_or_default();
        let mut step_of: BTreeMap<NodeId, usize> = BTreeMap::new();
        let mut s = String::new();
        for (t, id) in order.iter().enumerate() {
            let inf = self.dag.inference(*id);
            let refs: Vec<String> = inf
                .premises
                .iter()
                .map(|n| match step_of.get(n) {
                    Some(k) => format!("Step {k}"),
                    None => {
                        let pid = self.dag.premise_id(*n).expect("leaf of the proof");
                        self.premises[pid as usize - 1].label.to_string()
                    }
                })
                .collect();
            step_of.insert(inf.conclusion, t + 1);
            let stmt = self.sentence(self.dag.formula(inf.conclusion));
            s.push_str(&format!(
                "Step {}: {} [uses: {}; by {}]\n",
                t + 1,
                stmt,
                refs.join(", "),
                inf.form
            ));
        }
        s.push_str(&format!("Conclusion: {}\n", self.goal.text));
        s
    }
}

pub const ANSWER_FORMAT: &str =
    "Find as many independent derivations as you can. Write each one as:\n\
### Solution k\n\
Step t: <statement>. [uses: <refs>]\n\
Conclusion: <goal statement>\n\
where each ref is `Fact n`, `Rule n` or `Step m` for an earlier step of the same solution.\n";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{builtin_profiles, EntityCatalog};

    pub(crate) fn sample(seed: u64) -> BenchmarkInstance {
        let cfg = GenerationConfig {
            seed,
            ..Default::default()
        };
        let profile = &builtin_profiles()[1];
        BenchmarkInstance::generate_offline(
            "t".into(),
            &cfg,
            profile,
            &EntityCatalog::builtin(),
            "test".into(),
            "test",
        )
        .unwrap()
    }

    #[test]
    fn assembled_instance_validates() {
        let inst = sample(5);
        let r = inst.validate();
        assert!(r.accepted(), "{r:?}");
        assert!(inst.render_prompt().contains("Fact 1:"));
    }

    #[test]
    fn ground_truth_response_has_one_block_per_solution() {
        let inst = sample(8);
        let text = inst.render_ground_truth_response();
        assert_eq!(
            text.matches("### Solution").count(),
            inst.ground_truth.n_paths()
        );
    }

    #[test]
    fn labels_number_facts_and_rules_separately() {
        let (ps, _) = crate::fixtures::vault();
        let labels: Vec<String> = premise_labels(ps.formulas())
            .iter()
            .map(|l| l.to_string())
            .collect();
        assert_eq!(
            labels,
            ["Fact 1", "Fact 2", "Fact 3", "Rule 1", "Rule 2", "Rule 3", "Rule 4"]
        );
    }
}
