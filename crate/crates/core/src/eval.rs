//! Scoring of reasoner answers: segmentation into candidate solutions,
//! formalization of steps, local and global verification, ground-truth
//! matching and error labelling.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::client::{complete_text, ClientError, CompletionRequest};
use crate::dag::GroundTruth;
use crate::entail::{entails, minimize_support, MinimalSupport, PremiseId, PremiseSet};
use crate::forms::FormKind;
use crate::formula::{parse_formula, Atom, Formula};
use crate::instance::{premise_labels, BenchmarkInstance, LabelKind, PremiseLabel};
use crate::instantiate::Assist;
use crate::render::{normalize, GlossIndex};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawResponse {
    pub instance_id: String,
    pub model_name: String,
    pub text: String,
    #[serde(default)]
    pub completion_tokens: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "n", rename_all = "snake_case")]
pub enum Reference {
    Fact(u32),
    Rule(u32),
    Step(u32),
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reference::Fact(n) => write!(f, "Fact {n}"),
            Reference::Rule(n) => write!(f, "Rule {n}"),
            Reference::Step(n) => write!(f, "Step {n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub index: u32,
    pub cited_refs: Vec<Reference>,
    pub nl_text: String,
    #[serde(default)]
    pub formal: Option<Formula>,
    #[serde(default)]
    pub form_hint: Option<FormKind>,
}

impl Step {
    pub fn new(index: u32, nl_text: impl Into<String>, cited_refs: Vec<Reference>) -> Self {
        Self {
            index,
            cited_refs,
            nl_text: nl_text.into(),
            formal: None,
            form_hint: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSolution {
    pub solution_index: u32,
    pub steps: Vec<Step>,
    #[serde(default)]
    pub conclusion: Option<String>,
    #[serde(default)]
    pub concluded_goal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SegmentError {
    #[error("response does not follow the answer format")]
    Unparseable,
}

fn parse_ref(tok: &str) -> Option<Reference> {
    let tok = tok
        .trim()
        .trim_matches(|c: char| c == '*' || c == '(' || c == ')');
    let mut words = tok.split_whitespace();
    let kind = words.next()?.to_ascii_lowercase();
    let n: u32 = words.next()?.trim_end_matches(['.', ':']).parse().ok()?;
    if words.next().is_some() {
        return None;
    }
    match kind.as_str() {
        "fact" => Some(Reference::Fact(n)),
        "rule" => Some(Reference::Rule(n)),
        "step" => Some(Reference::Step(n)),
        _ => None,
    }
}

fn parse_header(line: &str) -> Option<u32> {
    let t = line.trim_start_matches('#').trim().trim_matches('*').trim();
    if !line.trim_start().starts_with('#') {
        return None;
    }
    let rest = t
        .strip_prefix("Solution")
        .or_else(|| t.strip_prefix("solution"))?;
    rest.trim().trim_end_matches([':', '.']).trim().parse().ok()
}

fn strip_ci<'a>(s: &'a str, prefix: &str) -> Option<&'a str> {
    (s.len() >= prefix.len()
        && s.is_char_boundary(prefix.len())
        && s[..prefix.len()].eq_ignore_ascii_case(prefix))
    .then(|| &s[prefix.len()..])
}

const PREVIOUS: &str = "from the previous step";

fn parse_step(line: &str) -> Option<Step> {
    let t = line
        .trim()
        .trim_start_matches(['-', '*', ' '])
        .trim_start_matches("**");
    let rest = strip_ci(t, "step ")?;
    let colon = rest.find([':', '.'])?;
    let index: u32 = rest[..colon].trim().trim_end_matches("**").parse().ok()?;
    let mut body = rest[colon + 1..].trim().trim_start_matches("**").trim();
    let mut refs = Vec::new();
    let mut hint = None;
    let lower = body.to_ascii_lowercase();
    if let Some(open) = lower.rfind("[uses:") {
        let close = body[open..].find(']').map_or(body.len(), |c| open + c);
        for tok in body[open + 6..close].split([',', ';']) {
            let tok = tok.trim();
            if let Some(r) = parse_ref(tok) {
                refs.push(r);
            } else if tok.eq_ignore_ascii_case("previous step")
                || tok.eq_ignore_ascii_case("the previous step")
            {
                refs.push(Reference::Step(index.saturating_sub(1)));
            } else if let Some(k) = FormKind::from_abbrev(tok.trim_start_matches("by ").trim()) {
                hint = Some(k);
            }
        }
        body = body[..open].trim();
    }
    if let Some(after) = strip_ci(body, PREVIOUS) {
        if index > 1 {
            refs.push(Reference::Step(index - 1));
        }
        body = after.trim_start_matches([',', ':']).trim();
    } else if body.to_ascii_lowercase().contains(PREVIOUS) && index > 1 {
        refs.push(Reference::Step(index - 1));
    }
    let mut seen = BTreeSet::new();
    refs.retain(|r| seen.insert(*r));
    Some(Step {
        index,
        cited_refs: refs,
        nl_text: body.to_string(),
        formal: None,
        form_hint: hint,
    })
}

/// Structural parse of a templated answer. Steps before any solution header
/// form an implicit first solution; solutions without steps are dropped.
pub fn segment_response(text: &str) -> Result<Vec<CandidateSolution>, SegmentError> {
    let mut out: Vec<CandidateSolution> = Vec::new();
    let mut current: Option<CandidateSolution> = None;
    let flush = |cur: Option<CandidateSolution>, out: &mut Vec<CandidateSolution>| {
        if let Some(c) = cur.filter(|c| !c.steps.is_empty()) {
            out.push(c);
        }
    };
    for line in text.lines() {
        if let Some(k) = parse_header(line) {
            flush(current.take(), &mut out);
            current = Some(CandidateSolution {
                solution_index: k,
                steps: Vec::new(),
                conclusion: None,
                concluded_goal: false,
            });
        } else if let Some(step) = parse_step(line) {
            let cur = current.get_or_insert_with(|| CandidateSolution {
                solution_index: out.len() as u32 + 1,
                steps: Vec::new(),
                conclusion: None,
                concluded_goal: false,
            });
            cur.steps.push(step);
        } else if let Some(c) = strip_ci(line.trim().trim_start_matches("**"), "conclusion") {
            if let Some(cur) = current.as_mut() {
                cur.conclusion = Some(c.trim_start_matches(['*', ':']).trim().to_string());
            }
        }
    }
    flush(current, &mut out);
    if out.is_empty() {
        Err(SegmentError::Unparseable)
    } else {
        Ok(out)
    }
}

const REPAIR_SYSTEM: &str = "Rewrite the reasoning below into the required format without changing its content. \
Use `### Solution k` headers, one `Step t: <statement>. [uses: Fact n, Rule n, Step m]` line per step, \
and a final `Conclusion: <statement>` line per solution. Output only the rewritten text.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segmentation {
    pub solutions: Vec<CandidateSolution>,
    pub unparseable: bool,
    pub repaired: bool,
}

/// Structural parse, then one assisted rewrite if that fails.
pub fn segment_with_repair(text: &str, assist: Option<&Assist<'_>>) -> Segmentation {
    if let Ok(solutions) = segment_response(text) {
        return Segmentation {
            solutions,
            unparseable: false,
            repaired: false,
        };
    }
    let rewritten = assist.and_then(|a| {
        complete_text(
            a.client,
            &a.retry,
            a.sleeper,
            &CompletionRequest::new(REPAIR_SYSTEM, text),
        )
        .ok()
    });
    match rewritten.map(|c| segment_response(&c.text)) {
        Some(Ok(solutions)) => Segmentation {
            solutions,
            unparseable: false,
            repaired: true,
        },
        _ => Segmentation {
            solutions: Vec::new(),
            unparseable: true,
            repaired: false,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextPremise {
    pub id: PremiseId,
    pub label: PremiseLabel,
    pub formula: Formula,
    pub text: String,
}

/// What the evaluator knows about one instance.
#[derive(Debug, Clone)]
pub struct EvalContext {
    pub premises: Vec<ContextPremise>,
    pub goal: Formula,
    pub goal_text: String,
    pub vocabulary: BTreeSet<Atom>,
    glosses: GlossIndex,
    sentences: BTreeMap<String, Formula>,
    premise_set: PremiseSet,
}

impl EvalContext {
    pub fn new(
        premises: Vec<(Formula, String)>,
        goal: Formula,
        goal_text: String,
        glosses: GlossIndex,
    ) -> Self {
        let labels = premise_labels(premises.iter().map(|(f, _)| f));
        let premises: Vec<ContextPremise> = premises
            .into_iter()
            .zip(labels)
            .enumerate()
            .map(|(i, ((formula, text), label))| ContextPremise {
                id: i as PremiseId + 1,
                label,
                formula,
                text,
            })
            .collect();
        let mut vocabulary = goal.atoms();
        let mut sentences = BTreeMap::new();
        for p in &premises {
            vocabulary.extend(p.formula.atoms());
            sentences.insert(normalize(&p.text), p.formula.clone());
        }
        sentences.insert(normalize(&goal_text), goal.clone());
        let premise_set = PremiseSet::new(premises.iter().map(|p| p.formula.clone()).collect())
            .unwrap_or_else(|_| PremiseSet::new(Vec::new()).expect("empty set"));
        Self {
            premises,
            goal,
            goal_text,
            vocabulary,
            glosses,
            sentences,
            premise_set,
        }
    }

    pub fn from_instance(inst: &BenchmarkInstance) -> Self {
        Self::new(
            inst.premises
                .iter()
                .map(|p| (p.formal.clone(), p.text.clone()))
                .collect(),
            inst.goal.formal.clone(),
            inst.goal.text.clone(),
            inst.symbols.gloss_index(),
        )
    }

    pub fn premise_by_ref(&self, r: Reference) -> Option<&ContextPremise> {
        let label = match r {
            Reference::Fact(n) => PremiseLabel {
                kind: LabelKind::Fact,
                number: n,
            },
            Reference::Rule(n) => PremiseLabel {
                kind: LabelKind::Rule,
                number: n,
            },
            Reference::Step(_) => return None,
        };
        self.premises.iter().find(|p| p.label == label)
    }

    pub fn premise_set(&self) -> &PremiseSet {
        &self.premise_set
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormalizeMethod {
    /// The text is a stored premise or goal sentence.
    Exact,
    /// The text is already a formula.
    Direct,
    /// The text is a mechanical rendering.
    Template,
    Assisted,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormalizeError {
    #[error("step text could not be formalized")]
    Unformalizable,
    #[error("assistant output is not a formula: {0}")]
    BadOutput(String),
    #[error(transparent)]
    Client(#[from] ClientError),
}

const FORMALIZE_SYSTEM: &str = "Translate the statement into one formula in Prover9 syntax using only the \
predicates shown in the examples. Connectives: - (not), & (and), | (or), -> (implies). Output only the formula.";

/// Formula for a step statement over the instance vocabulary.
pub fn formalize_step(
    text: &str,
    ctx: &EvalContext,
    assist: Option<&Assist<'_>>,
) -> Result<(Formula, FormalizeMethod), FormalizeError> {
    let key = normalize(text);
    if let Some(f) = ctx.sentences.get(&key) {
        return Ok((f.clone(), FormalizeMethod::Exact));
    }
    let bare = text.trim().trim_end_matches('.');
    if let Ok(f) = parse_formula(bare) {
        return Ok((f, FormalizeMethod::Direct));
    }
    if let Some(f) = ctx.glosses.parse(text) {
        return Ok((f, FormalizeMethod::Template));
    }
    let Some(a) = assist else {
        return Err(FormalizeError::Unformalizable);
    };
    let mut user = String::from("Examples:\n");
    for p in &ctx.premises {
        user.push_str(&format!("{} => {}\n", p.text, p.formula));
    }
    user.push_str(&format!(
        "{} => {}\nStatement: {}",
        ctx.goal_text, ctx.goal, text
    ));
    let out = complete_text(
        a.client,
        &a.retry,
        a.sleeper,
        &CompletionRequest::new(FORMALIZE_SYSTEM, user),
    )?;
    let line = out
        .text
        .lines()
        .map(|l| l.trim().trim_matches('`'))
        .find(|l| !l.is_empty())
        .unwrap_or("");
    parse_formula(line)
        .map(|f| (f, FormalizeMethod::Assisted))
        .map_err(|_| FormalizeError::BadOutput(line.to_string()))
}

/// Fills `formal` on every step that can be formalized.
pub fn formalize_solution(
    candidate: &mut CandidateSolution,
    ctx: &EvalContext,
    assist: Option<&Assist<'_>>,
) {
    for step in &mut candidate.steps {
        if step.formal.is_none() {
            step.formal = formalize_step(&step.nl_text, ctx, assist)
                .ok()
                .map(|(f, _)| f);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorLabel {
    SemanticMisinterpretation,
    InformationOmission,
    FactHallucination,
    InvalidDeduction,
    RuleMisapplication,
    InsufficientPremise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decidability {
    Symbolic,
    Assisted,
}

impl ErrorLabel {
    pub const ALL: [ErrorLabel; 6] = [
        ErrorLabel::SemanticMisinterpretation,
        ErrorLabel::InformationOmission,
        ErrorLabel::FactHallucination,
        ErrorLabel::InvalidDeduction,
        ErrorLabel::RuleMisapplication,
        ErrorLabel::InsufficientPremise,
    ];

    pub fn decidability(self) -> Decidability {
        match self {
            ErrorLabel::SemanticMisinterpretation | ErrorLabel::InformationOmission => {
                Decidability::Assisted
            }
            _ => Decidability::Symbolic,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorLabel::SemanticMisinterpretation => "semantic_misinterpretation",
            ErrorLabel::InformationOmission => "information_omission",
            ErrorLabel::FactHallucination => "fact_hallucination",
            ErrorLabel::InvalidDeduction => "invalid_deduction",
            ErrorLabel::RuleMisapplication => "rule_misapplication",
            ErrorLabel::InsufficientPremise => "insufficient_premise",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepLabel {
    pub step: u32,
    pub label: ErrorLabel,
    pub decidability: Decidability,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionVerdict {
    pub locally_valid: Vec<bool>,
    pub globally_valid: bool,
    /// Some step states a formula entailing the goal.
    pub concluded_goal: bool,
    /// Original premises cited anywhere in the solution.
    pub used_premises: BTreeSet<PremiseId>,
    pub matched_support: Option<MinimalSupport>,
    pub matched_solution: Option<u32>,
    pub length: usize,
    pub error_labels: Vec<StepLabel>,
}

impl SolutionVerdict {
    pub fn is_valid(&self) -> bool {
        self.globally_valid && self.locally_valid.iter().all(|&v| v)
    }
}

enum Resolved<'a> {
    Premise(&'a ContextPremise),
    Step(&'a Formula),
}

fn resolve<'a>(
    r: Reference,
    at: u32,
    candidate: &'a CandidateSolution,
    ctx: &'a EvalContext,
) -> Option<Resolved<'a>> {
    match r {
        Reference::Step(m) if m < at => candidate
            .steps
            .iter()
            .find(|s| s.index == m)
            .and_then(|s| s.formal.as_ref())
            .map(Resolved::Step),
        Reference::Step(_) => None,
        _ => ctx.premise_by_ref(r).map(Resolved::Premise),
    }
}

fn cited<'a>(
    step: &Step,
    candidate: &'a CandidateSolution,
    ctx: &'a EvalContext,
) -> Option<Vec<&'a Formula>> {
    step.cited_refs
        .iter()
        .map(|r| {
            resolve(*r, step.index, candidate, ctx).map(|x| match x {
                Resolved::Premise(p) => &p.formula,
                Resolved::Step(f) => f,
            })
        })
        .collect()
}

fn in_vocabulary(f: &Formula, ctx: &EvalContext) -> bool {
    f.atoms().is_subset(&ctx.vocabulary)
}

/// Local check per step, global check on the cited original premises.
pub fn verify_solution(candidate: &CandidateSolution, ctx: &EvalContext) -> SolutionVerdict {
    let mut locally_valid = Vec::with_capacity(candidate.steps.len());
    let mut used = BTreeSet::new();
    for step in &candidate.steps {
        for r in &step.cited_refs {
            if let Some(p) = ctx.premise_by_ref(*r) {
                used.insert(p.id);
            }
        }
        let ok = match (&step.formal, cited(step, candidate, ctx)) {
            (Some(f), Some(prem)) => in_vocabulary(f, ctx) && entails(prem, f),
            _ => false,
        };
        locally_valid.push(ok);
    }
    let concluded_goal = candidate
        .steps
        .iter()
        .filter_map(|s| s.formal.as_ref())
        .any(|f| entails([f], &ctx.goal));
    let premise_formulas = used.iter().filter_map(|&id| ctx.premise_set.get(id));
    let globally_valid = concluded_goal && entails(premise_formulas, &ctx.goal);
    SolutionVerdict {
        locally_valid,
        globally_valid,
        concluded_goal,
        used_premises: used,
        matched_support: None,
        matched_solution: None,
        length: candidate.steps.len(),
        error_labels: Vec::new(),
    }
}

/// Reduces the used premises to a minimal support and looks it up in the
/// ground truth. Fills `matched_support` for every valid verdict.
pub fn match_ground_truth(
    verdict: &mut SolutionVerdict,
    ctx: &EvalContext,
    gt: &GroundTruth,
) -> Option<u32> {
    if !verdict.is_valid() {
        return None;
    }
    let reduced = minimize_support(&verdict.used_premises, &ctx.premise_set, &ctx.goal).ok()?;
    let id = gt
        .solutions
        .iter()
        .find(|s| s.support == reduced)
        .map(|s| s.id);
    verdict.matched_support = Some(reduced);
    verdict.matched_solution = id;
    id
}

/// Symbolic label for each locally invalid step.
pub fn classify_errors(
    verdict: &SolutionVerdict,
    candidate: &CandidateSolution,
    ctx: &EvalContext,
) -> Vec<StepLabel> {
    let mut out = Vec::new();
    for (step, &ok) in candidate.steps.iter().zip(&verdict.locally_valid) {
        if ok {
            continue;
        }
        let label = classify_step(step, candidate, ctx);
        out.push(StepLabel {
            step: step.index,
            label,
            decidability: Decidability::Symbolic,
        });
    }
    out
}

fn classify_step(step: &Step, candidate: &CandidateSolution, ctx: &EvalContext) -> ErrorLabel {
    let (Some(goal), Some(prem)) = (&step.formal, cited(step, candidate, ctx)) else {
        return ErrorLabel::FactHallucination;
    };
    if !in_vocabulary(goal, ctx) {
        return ErrorLabel::FactHallucination;
    }
    let cited_ids: BTreeSet<PremiseId> = step
        .cited_refs
        .iter()
        .filter_map(|r| ctx.premise_by_ref(*r))
        .map(|p| p.id)
        .collect();
    let bridges = ctx
        .premises
        .iter()
        .filter(|p| p.label.kind == LabelKind::Rule && !cited_ids.contains(&p.id));
    for extra in bridges {
        if entails(prem.iter().copied().chain([&extra.formula]), goal) {
            return ErrorLabel::InsufficientPremise;
        }
    }
    for (i, f) in prem.iter().enumerate() {
        let Formula::Implies(ante, cons) = f else {
            continue;
        };
        let others: Vec<&Formula> = prem
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, g)| *g)
            .collect();
        if entails(others.iter().copied().chain([cons.as_ref()]), goal)
            && !entails(others.iter().copied(), ante)
        {
            return ErrorLabel::RuleMisapplication;
        }
    }
    ErrorLabel::InvalidDeduction
}

const LABEL_SYSTEM: &str = "Compare a reasoning step written in English with its formal reading. Answer with \
exactly one word: `misinterpretation` if the English distorts the meaning of the cited premises, `omission` \
if it ignores a condition stated in them, or `none`.";

/// Comprehension-level label from an assistant; never produced symbolically.
pub fn assisted_label(
    step: &Step,
    ctx: &EvalContext,
    assist: &Assist<'_>,
) -> Result<Option<StepLabel>, ClientError> {
    let mut user = String::from("Premises:\n");
    for p in &ctx.premises {
        user.push_str(&format!("{}: {}\n", p.label, p.text));
    }
    let formal = step
        .formal
        .as_ref()
        .map_or_else(|| String::from("(none)"), ToString::to_string);
    user.push_str(&format!(
        "Step: {}\nFormal reading: {}",
        step.nl_text, formal
    ));
    let out = complete_text(
        assist.client,
        &assist.retry,
        assist.sleeper,
        &CompletionRequest::new(LABEL_SYSTEM, user),
    )?;
    let word = out.text.trim().to_ascii_lowercase();
    let label = if word.starts_with("misinterpretation") {
        Some(ErrorLabel::SemanticMisinterpretation)
    } else if word.starts_with("omission") {
        Some(ErrorLabel::InformationOmission)
    } else {
        None
    };
    Ok(label.map(|label| StepLabel {
        step: step.index,
        label,
        decidability: Decidability::Assisted,
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub solution_index: u32,
    pub steps: Vec<Step>,
    pub verdict: SolutionVerdict,
    /// Earlier candidate of the same response that matched the same solution.
    pub duplicate_of: Option<u32>,
}

/// Everything the evaluator concluded about one response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseEvaluation {
    pub instance_id: String,
    pub model_name: String,
    pub candidates: Vec<CandidateRecord>,
    pub unparseable: bool,
    pub repaired: bool,
    pub completion_tokens: Option<u64>,
}

/// Full pipeline for one response.
pub fn evaluate_response(
    raw: &RawResponse,
    ctx: &EvalContext,
    gt: &GroundTruth,
    assist: Option<&Assist<'_>>,
) -> ResponseEvaluation {
    let seg = segment_with_repair(&raw.text, assist);
    let mut first_match: BTreeMap<u32, u32> = BTreeMap::new();
    let mut candidates = Vec::with_capacity(seg.solutions.len());
    for mut cand in seg.solutions {
        formalize_solution(&mut cand, ctx, assist);
        let mut verdict = verify_solution(&cand, ctx);
        cand.concluded_goal = verdict.concluded_goal;
        let matched = match_ground_truth(&mut verdict, ctx, gt);
        verdict.error_labels = classify_errors(&verdict, &cand, ctx);
        if let Some(a) = assist {
            for step in &cand.steps {
                if let Ok(Some(l)) = assisted_label(step, ctx, a) {
                    verdict.error_labels.push(l);
                }
            }
        }
        let duplicate_of = matched.and_then(|id| match first_match.get(&id) {
            Some(&prev) => Some(prev),
            None => {
                first_match.insert(id, cand.solution_index);
                None
            }
        });
        candidates.push(CandidateRecord {
            solution_index: cand.solution_index,
            steps: cand.steps,
            verdict,
            duplicate_of,
        });
    }
    ResponseEvaluation {
        instance_id: raw.instance_id.clone(),
        model_name: raw.model_name.clone(),
        candidates,
        unparseable: seg.unparseable,
        repaired: seg.repaired,
        completion_tokens: raw.completion_tokens,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn segments_two_solutions() {
        let text = "Some preamble.\n### Solution 1\nStep 1: Emma can enter the Vault. [uses: Fact 3, Rule 4]\nConclusion: Emma can enter the Vault.\n\n### Solution 2\nStep 1: badge(emma). [uses: Fact 1, Rule 1; by MP]\nStep 2: From the previous step, enter(emma). [uses: Rule 3]\nConclusion: done\n";
        let sols = segment_response(text).unwrap();
        assert_eq!(sols.len(), 2);
        assert_eq!(
            sols[0].steps[0].cited_refs,
            [Reference::Fact(3), Reference::Rule(4)]
        );
        assert_eq!(sols[1].steps[0].form_hint, Some(FormKind::ModusPonens));
        assert_eq!(
            sols[1].steps[1].cited_refs,
            [Reference::Rule(3), Reference::Step(1)]
        );
        assert_eq!(sols[1].steps[1].nl_text, "enter(emma).");
    }

    #[test]
    fn garbage_is_unparseable() {
        assert_eq!(
            segment_response("I think the answer is yes."),
            Err(SegmentError::Unparseable)
        );
        let seg = segment_with_repair("nothing here", None);
        assert!(seg.unparseable && seg.solutions.is_empty());
    }

    #[test]
    fn vault_escort_candidate_matches() {
        let ctx = fixtures::vault_context();
        let gt = crate::dag::derive_ground_truth(&fixtures::vault_dag()).unwrap();
        let text =
            "### Solution 1\nStep 1: Emma can enter the Vault. [uses: Fact 3, Rule 4, Fact 1]\n";
        let mut cand = segment_response(text).unwrap().remove(0);
        formalize_solution(&mut cand, &ctx, None);
        let mut v = verify_solution(&cand, &ctx);
        assert!(v.is_valid());
        assert_eq!(v.used_premises, BTreeSet::from([1, 3, 7]));
        assert_eq!(match_ground_truth(&mut v, &ctx, &gt), Some(1));
        assert_eq!(v.matched_support, Some(MinimalSupport::new([3, 7])));
    }

    #[test]
    fn affirming_the_consequent_is_invalid_deduction() {
        let p = parse_formula("p").unwrap();
        let q = parse_formula("q").unwrap();
        let pq = parse_formula("p -> q").unwrap();
        let ctx = EvalContext::new(
            Vec::from([(q.clone(), "q".into()), (pq, "if p then q".into())]),
            p.clone(),
            "p".into(),
            GlossIndex::default(),
        );
        let mut step = Step::new(1, "p", Vec::from([Reference::Rule(1), Reference::Fact(1)]));
        step.formal = Some(p);
        let cand = CandidateSolution {
            solution_index: 1,
            steps: Vec::from([step]),
            conclusion: None,
            concluded_goal: false,
        };
        let v = verify_solution(&cand, &ctx);
        assert_eq!(v.locally_valid, [false]);
        let labels = classify_errors(&v, &cand, &ctx);
        assert_eq!(labels[0].label, ErrorLabel::InvalidDeduction);
    }

    #[test]
    fn nonexistent_fact_is_hallucination() {
        let ctx = fixtures::vault_context();
        let text = "### Solution 1\nStep 1: Emma can enter the Vault. [uses: Fact 9, Rule 4]\n";
        let mut cand = segment_response(text).unwrap().remove(0);
        formalize_solution(&mut cand, &ctx, None);
        let v = verify_solution(&cand, &ctx);
        assert_eq!(
            classify_errors(&v, &cand, &ctx)[0].label,
            ErrorLabel::FactHallucination
        );
    }
}
