//! Acceptance gate for generated instances and the external prover job format.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dag::{InferenceId, LogicDag};
use crate::entail::{entails, satisfiable};
use crate::formula::Formula;

/// Per-inference entailment of the conclusion by its local premises.
pub fn check_stepwise(dag: &LogicDag) -> Vec<(InferenceId, bool)> {
    dag.inferences
        .iter()
        .map(|inf| {
            let prem = inf.premises.iter().filter_map(|p| dag.formulas.get(p));
            let ok = dag
                .formulas
                .get(&inf.conclusion)
                .is_some_and(|c| entails(prem, c));
            (inf.id, ok)
        })
        .collect()
}

/// In topological order, each conclusion follows from the leaves plus the
/// conclusions established before it, and the goal follows from everything.
pub fn check_global(dag: &LogicDag) -> bool {
    let Ok(order) = dag.topo_inferences() else {
        return false;
    };
    let mut known: Vec<&Formula> = dag
        .premise_order
        .iter()
        .filter_map(|n| dag.formulas.get(n))
        .collect();
    for id in order {
        let inf = dag.inference(id);
        let Some(c) = dag.formulas.get(&inf.conclusion) else {
            return false;
        };
        if !entails(known.iter().copied(), c) {
            return false;
        }
        known.push(c);
    }
    dag.formulas
        .get(&dag.goal)
        .is_some_and(|g| entails(known.iter().copied(), g))
}

/// All given premises are jointly satisfiable.
pub fn check_consistency(dag: &LogicDag) -> bool {
    satisfiable(dag.premise_order.iter().filter_map(|n| dag.formulas.get(n)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    Structure,
    Stepwise,
    Global,
    Consistency,
}

impl RejectReason {
    pub fn code(self) -> &'static str {
        match self {
            RejectReason::Structure => "structure",
            RejectReason::Stepwise => "stepwise",
            RejectReason::Global => "global",
            RejectReason::Consistency => "consistency",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "reason", rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub instance_id: String,
    pub stepwise: Vec<(InferenceId, bool)>,
    pub global_pass: bool,
    pub consistency_pass: bool,
    /// Extra structural problems found by the caller (malformed DAG, stale
    /// ground truth, tier mismatch).
    pub structure_errors: Vec<String>,
    pub verdict: Verdict,
}

impl ValidationReport {
    pub fn from_checks(
        instance_id: String,
        stepwise: Vec<(InferenceId, bool)>,
        global_pass: bool,
        consistency_pass: bool,
        structure_errors: Vec<String>,
    ) -> Self {
        let verdict = if !structure_errors.is_empty() {
            Verdict::Reject(RejectReason::Structure)
        } else if stepwise.iter().any(|(_, ok)| !ok) {
            Verdict::Reject(RejectReason::Stepwise)
        } else if !global_pass {
            Verdict::Reject(RejectReason::Global)
        } else if !consistency_pass {
            Verdict::Reject(RejectReason::Consistency)
        } else {
            Verdict::Accept
        };
        Self {
            instance_id,
            stepwise,
            global_pass,
            consistency_pass,
            structure_errors,
            verdict,
        }
    }

    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accept
    }

    /// Every check that failed, not only the one named by the verdict.
    pub fn failed_checks(&self) -> BTreeSet<RejectReason> {
        let mut out = BTreeSet::new();
        if !self.structure_errors.is_empty() {
            out.insert(RejectReason::Structure);
        }
        if self.stepwise.iter().any(|(_, ok)| !ok) {
            out.insert(RejectReason::Stepwise);
        }
        if !self.global_pass {
            out.insert(RejectReason::Global);
        }
        if !self.consistency_pass {
            out.insert(RejectReason::Consistency);
        }
        out
    }
}

/// Runs the three checks on `dag`.
pub fn validate_dag(instance_id: impl Into<String>, dag: &LogicDag) -> ValidationReport {
    let mut structure = Vec::new();
    if let Err(e) = dag.topo_inferences() {
        structure.push(alloc::format!("{e}"));
    }
    ValidationReport::from_checks(
        instance_id.into(),
        check_stepwise(dag),
        check_global(dag),
        check_consistency(dag),
        structure,
    )
}

/// Prover input: assumptions block, then goals block, `\n` line ends.
///
/// Prolog-style variables are switched on so lowercase constants such as
/// `victor` are not read as variables.
pub fn emit_prover9_job<'f, I>(premises: I, goal: &Formula) -> String
where
    I: IntoIterator<Item = &'f Formula>,
{
    let mut s = String::from("set(prolog_style_variables).\nformulas(assumptions).\n");
    for p in premises {
        let _ = writeln!(s, "{p}.");
    }
    s.push_str("end_of_list.\nformulas(goals).\n");
    let _ = writeln!(s, "{goal}.");
    s.push_str("end_of_list.\n");
    s
}
