use multipath_core::catalog::{builtin_profiles, EntityCatalog};
use multipath_core::dag::{derive_ground_truth, GenerationConfig, Tier};
use multipath_core::eval::{
    classify_errors, evaluate_response, formalize_solution, segment_response, verify_solution,
    ErrorLabel, EvalContext, RawResponse, SolutionVerdict,
};
use multipath_core::fixtures;
use multipath_core::instance::BenchmarkInstance;
use multipath_core::metrics::{
    aggregate_report, convergent_metrics, divergent_metrics, CaseResult, SpfMode,
};

fn check(text: &str, ctx: &EvalContext) -> (SolutionVerdict, Vec<(u32, ErrorLabel)>) {
    let mut cand = segment_response(text).unwrap().remove(0);
    formalize_solution(&mut cand, ctx, None);
    let v = verify_solution(&cand, ctx);
    let labels = classify_errors(&v, &cand, ctx)
        .into_iter()
        .map(|l| (l.step, l.label))
        .collect();
    (v, labels)
}

#[test]
fn dilemma_response_is_valid() {
    let (v, labels) = check(fixtures::DD_RESPONSE, &fixtures::dd_context());
    assert_eq!(v.locally_valid, [true, true, true]);
    assert!(v.globally_valid);
    assert!(labels.is_empty());
}

#[test]
fn dropping_a_citation_breaks_that_step() {
    let (v, _) = check(
        fixtures::DD_RESPONSE_MISSING_CITATION,
        &fixtures::dd_context(),
    );
    assert_eq!(v.locally_valid, [true, false, true]);
    assert!(!v.is_valid());
}

#[test]
fn bridge_with_rule_is_valid() {
    let (v, labels) = check(fixtures::BRIDGE_RESPONSE_VALID, &fixtures::bridge_context());
    assert!(v.is_valid(), "{v:?}");
    assert!(labels.is_empty());
}

#[test]
fn bridge_without_rule_is_insufficient() {
    let (v, labels) = check(
        fixtures::BRIDGE_RESPONSE_MISSING_RULE,
        &fixtures::bridge_context(),
    );
    assert_eq!(v.locally_valid, [true, false]);
    assert_eq!(labels, [(2, ErrorLabel::InsufficientPremise)]);
}

#[test]
fn folded_case_split_is_valid() {
    let (v, labels) = check(fixtures::DILEMMA_RESPONSE, &fixtures::dilemma_context());
    assert!(v.is_valid(), "{v:?}");
    assert!(labels.is_empty());
}

#[test]
fn vault_routes_match_each_solution() {
    let ctx = fixtures::vault_context();
    let gt = derive_ground_truth(&fixtures::vault_dag()).unwrap();
    let text = "### Solution 1
Step 1: Emma can enter the Vault. [uses: Fact 3, Rule 4]
### Solution 2
Step 1: Emma is issued a badge. [uses: Fact 1, Rule 1]
Step 2: Emma can enter the Vault. [uses: Step 1, Rule 3]
### Solution 3
Step 1: Emma is issued a badge. [uses: Fact 2, Rule 2]
Step 2: Emma can enter the Vault. [uses: Step 1, Rule 3]
### Solution 4
Step 1: Emma can enter the Vault. [uses: Fact 3, Rule 4]
";
    let raw = RawResponse {
        instance_id: "vault".into(),
        model_name: "m".into(),
        text: text.into(),
        completion_tokens: None,
    };
    let eval = evaluate_response(&raw, &ctx, &gt, None);
    let matched: Vec<Option<u32>> = eval
        .candidates
        .iter()
        .map(|c| c.verdict.matched_solution)
        .collect();
    assert_eq!(matched, [Some(1), Some(2), Some(3), Some(1)]);
    assert_eq!(eval.candidates[3].duplicate_of, Some(1));
}

#[test]
fn ground_truth_answers_score_perfectly() {
    let profiles = builtin_profiles();
    let catalog = EntityCatalog::builtin();
    let mut results = Vec::new();
    for (i, tier) in Tier::ALL.into_iter().enumerate() {
        for k in 0..3u64 {
            let seed = 100 * i as u64 + k;
            let cfg = GenerationConfig {
                seed,
                tier,
                ..Default::default()
            };
            let profile = &profiles[(seed % profiles.len() as u64) as usize];
            let inst = BenchmarkInstance::generate_offline(
                format!("i{seed}"),
                &cfg,
                profile,
                &catalog,
                "h".into(),
                "t",
            )
            .unwrap();
            let raw = RawResponse {
                instance_id: inst.instance_id.clone(),
                model_name: "oracle".into(),
                text: inst.render_ground_truth_response(),
                completion_tokens: Some(10),
            };
            let eval = evaluate_response(
                &raw,
                &EvalContext::from_instance(&inst),
                &inst.ground_truth,
                None,
            );
            results.push(CaseResult::from_evaluation(&eval, &inst));
        }
    }
    let c = convergent_metrics(&results, SpfMode::Case);
    let d = divergent_metrics(&results);
    assert_eq!(
        (c.success_rate, c.precision, c.spf_rate),
        (100.0, 100.0, 100.0)
    );
    assert_eq!((d.diversity, d.versatility), (100.0, 100.0));
    let report = aggregate_report("oracle", &results, None, Default::default()).unwrap();
    assert_eq!(report.tiers.len(), 3);
    assert_eq!(report.average.token_efficiency, Some(10.0));
}
