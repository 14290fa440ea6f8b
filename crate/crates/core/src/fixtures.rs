//! Small hand-built scenarios shared by tests and the acceptance suite.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::dag::{GenerationConfig, GenerationTrace, InferenceNode, LogicDag};
use crate::entail::PremiseSet;
use crate::eval::EvalContext;
use crate::forms::FormKind;
use crate::formula::{parse_formula, Atom, Formula};
use crate::instantiate::{Symbol, SymbolMap};
use crate::render::render_sentence;

pub const VAULT_PREMISES: [&str; 7] = [
    "pin_ok(emma)",
    "fingerprint_ok(emma)",
    "escort(emma)",
    "pin_ok(emma) -> badge(emma)",
    "fingerprint_ok(emma) -> badge(emma)",
    "badge(emma) -> enter(emma)",
    "escort(emma) -> enter(emma)",
];
pub const VAULT_GOAL: &str = "enter(emma)";

fn f(s: &str) -> Formula {
    parse_formula(s).expect("fixture formula")
}

/// Vault access: three routes to `enter(emma)`.
pub fn vault() -> (PremiseSet, Formula) {
    let ps = PremiseSet::new(VAULT_PREMISES.iter().map(|s| f(s)).collect()).expect("distinct");
    (ps, f(VAULT_GOAL))
}

/// The vault scenario as a DAG. Node 1 is the goal, node 2 the badge
/// lemma, nodes 3..=9 are premises P1..=P7.
pub fn vault_dag() -> LogicDag {
    let mut formulas = BTreeMap::from([(1, f(VAULT_GOAL)), (2, f("badge(emma)"))]);
    for (i, s) in VAULT_PREMISES.iter().enumerate() {
        formulas.insert(i as u32 + 3, f(s));
    }
    let mp = |id, premises: [u32; 2], conclusion| InferenceNode {
        id,
        form: FormKind::ModusPonens,
        premises: premises.to_vec(),
        conclusion,
    };
    LogicDag {
        formulas,
        premise_order: (3..=9).collect(),
        goal: 1,
        inferences: Vec::from([
            mp(1, [6, 3], 2),
            mp(2, [7, 4], 2),
            mp(3, [8, 2], 1),
            mp(4, [9, 5], 1),
        ]),
        seed: 0,
        config: GenerationConfig::default(),
        trace: GenerationTrace::default(),
    }
}

pub const DD_PREMISES: [&str; 3] = ["p -> q", "r -> s", "-q | -s"];
pub const DD_GOAL: &str = "-p | -r";

/// Destructive dilemma premises and conclusion.
pub fn destructive_dilemma() -> (PremiseSet, Formula) {
    let ps = PremiseSet::new(DD_PREMISES.iter().map(|s| f(s)).collect()).expect("distinct");
    (ps, f(DD_GOAL))
}

/// The dilemma as a DAG: contrapose each conditional, then combine by
/// constructive dilemma. The contrapositions carry the MT label but are not
/// schema instances, so only their entailment is meaningful.
pub fn dd_dag() -> LogicDag {
    let formulas = BTreeMap::from([
        (1, f(DD_GOAL)),
        (2, f("-q -> -p")),
        (3, f("-s -> -r")),
        (4, f(DD_PREMISES[0])),
        (5, f(DD_PREMISES[1])),
        (6, f(DD_PREMISES[2])),
    ]);
    let inf = |id, form, premises: &[u32], conclusion| InferenceNode {
        id,
        form,
        premises: premises.to_vec(),
        conclusion,
    };
    LogicDag {
        formulas,
        premise_order: Vec::from([4, 5, 6]),
        goal: 1,
        inferences: Vec::from([
            inf(1, FormKind::ModusTollens, &[4], 2),
            inf(2, FormKind::ModusTollens, &[5], 3),
            inf(3, FormKind::ConstructiveDilemma, &[2, 3, 6], 1),
        ]),
        seed: 0,
        config: GenerationConfig::default(),
        trace: GenerationTrace::default(),
    }
}

fn atom(s: &str) -> Atom {
    match f(s) {
        Formula::Atom(a) => a,
        _ => panic!("fixture atom"),
    }
}

/// Identity symbol map carrying English glosses.
pub fn glossed(pairs: &[(&str, &str)]) -> SymbolMap {
    let entries = pairs
        .iter()
        .map(|(a, g)| {
            (
                atom(a),
                Symbol {
                    atom: atom(a),
                    gloss: g.to_string(),
                },
            )
        })
        .collect();
    SymbolMap::new(entries).expect("fixture glosses")
}

pub const VAULT_GLOSSES: [(&str, &str); 5] = [
    ("pin_ok(emma)", "Emma entered a valid PIN"),
    ("fingerprint_ok(emma)", "Emma passed the fingerprint scan"),
    ("escort(emma)", "Emma has a security escort"),
    ("badge(emma)", "Emma is issued a badge"),
    ("enter(emma)", "Emma can enter the Vault"),
];

fn context(premises: &[&str], goal: &str, symbols: &SymbolMap) -> EvalContext {
    let gloss = |a: &Atom| {
        symbols
            .gloss_of(a)
            .map_or_else(|| a.to_string(), ToString::to_string)
    };
    let ps: Vec<(Formula, String)> = premises
        .iter()
        .map(|s| {
            let x = f(s);
            let text = render_sentence(&x, gloss);
            (x, text)
        })
        .collect();
    let g = f(goal);
    let goal_text = render_sentence(&g, gloss);
    EvalContext::new(ps, g, goal_text, symbols.gloss_index())
}

pub fn vault_symbols() -> SymbolMap {
    glossed(&VAULT_GLOSSES)
}

pub fn vault_context() -> EvalContext {
    context(&VAULT_PREMISES, VAULT_GOAL, &vault_symbols())
}

/// Dilemma premises are all rules (Rule 1..=3).
pub fn dd_context() -> EvalContext {
    context(&DD_PREMISES, DD_GOAL, &SymbolMap::default())
}

/// Contrapose both conditionals, then combine.
pub const DD_RESPONSE: &str = "### Solution 1
Step 1: -q -> -p. [uses: Rule 1; by MT]
Step 2: -s -> -r. [uses: Rule 2; by MT]
Step 3: -p | -r. [uses: Step 1, Step 2, Rule 3; by CD]
Conclusion: -p | -r.
";

/// Step 2 no longer cites the second conditional.
pub const DD_RESPONSE_MISSING_CITATION: &str = "### Solution 1
Step 1: -q -> -p. [uses: Rule 1; by MT]
Step 2: -s -> -r. [uses: ; by MT]
Step 3: -p | -r. [uses: Step 1, Step 2, Rule 3; by CD]
Conclusion: -p | -r.
";

pub const BRIDGE_PREMISES: [&str; 7] = [
    "power_restored",
    "dispensers",
    "power_restored -> operational",
    "operational -> monitored",
    "dispensers -> stocked",
    "monitored -> logged",
    "operational & dispensers -> controlled",
];
pub const BRIDGE_GOAL: &str = "controlled";
const BRIDGE_GLOSSES: [(&str, &str); 7] = [
    ("power_restored", "power to the plant has been restored"),
    ("dispensers", "the chlorine dispensers are installed"),
    ("operational", "the plant is operational"),
    ("monitored", "the plant is monitored"),
    ("stocked", "the dispensers are stocked"),
    ("logged", "the readings are logged"),
    ("controlled", "the outbreak is controlled"),
];

/// Two facts and five rules; Rule 5 bridges to the goal.
pub fn bridge_context() -> EvalContext {
    context(&BRIDGE_PREMISES, BRIDGE_GOAL, &glossed(&BRIDGE_GLOSSES))
}

/// Cites the bridging rule.
pub const BRIDGE_RESPONSE_VALID: &str = "### Solution 1
Step 1: The plant is operational. [uses: Fact 1, Rule 1]
Step 2: The outbreak is controlled. [uses: Step 1, Fact 2, Rule 5]
Conclusion: The outbreak is controlled.
";

/// Omits the bridging rule in step 2.
pub const BRIDGE_RESPONSE_MISSING_RULE: &str = "### Solution 1
Step 1: The plant is operational. [uses: Fact 1, Rule 1]
Step 2: The outbreak is controlled. [uses: Step 1, Fact 2]
Conclusion: The outbreak is controlled.
";

pub const DILEMMA_PREMISES: [&str; 4] = [
    "research_team -> -infected",
    "research_team | medicinal_plant",
    "medicinal_plant -> antiviral",
    "antiviral -> -infected",
];
pub const DILEMMA_GOAL: &str = "-infected";
const DILEMMA_GLOSSES: [(&str, &str); 4] = [
    ("research_team", "the research team collected the sample"),
    ("medicinal_plant", "the sample came from a medicinal plant"),
    ("antiviral", "the sample contains an antiviral compound"),
    ("infected", "the crew is infected"),
];

pub fn dilemma_context() -> EvalContext {
    context(&DILEMMA_PREMISES, DILEMMA_GOAL, &glossed(&DILEMMA_GLOSSES))
}

/// Step 2 folds a case split over both disjuncts into one step.
pub const DILEMMA_RESPONSE: &str = "### Solution 1
Step 1: If the sample came from a medicinal plant, then it is not the case that the crew is infected. [uses: Rule 3, Rule 4]
Step 2: It is not the case that the crew is infected. [uses: Rule 2, Rule 1, Step 1]
Conclusion: It is not the case that the crew is infected.
";
