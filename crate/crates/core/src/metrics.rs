//! Convergent and divergent scores, token efficiency, and per-tier reports.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dag::Tier;
use crate::eval::ResponseEvaluation;
use crate::instance::BenchmarkInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSummary {
    pub valid: bool,
    pub matched: Option<u32>,
    pub length: usize,
}

/// One model's outcome on one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseResult {
    pub instance_id: String,
    pub tier: Option<Tier>,
    pub gt_solution_count: usize,
    pub families: Vec<Vec<u32>>,
    pub min_gt_length: usize,
    pub candidates: Vec<CandidateSummary>,
    pub completion_tokens: Option<u64>,
}

impl CaseResult {
    pub fn from_evaluation(eval: &ResponseEvaluation, inst: &BenchmarkInstance) -> Self {
        let candidates = eval
            .candidates
            .iter()
            .map(|c| CandidateSummary {
                valid: c.verdict.is_valid(),
                matched: c.verdict.matched_solution,
                length: c.verdict.length,
            })
            .collect();
        Self {
            instance_id: inst.instance_id.clone(),
            tier: inst.tier,
            gt_solution_count: inst.ground_truth.n_paths(),
            families: inst.ground_truth.families.clone(),
            min_gt_length: inst.ground_truth.min_length(),
            candidates,
            completion_tokens: eval.completion_tokens,
        }
    }

    pub fn matched_ids(&self) -> BTreeSet<u32> {
        self.candidates
            .iter()
            .filter(|c| c.valid)
            .filter_map(|c| c.matched)
            .collect()
    }

    fn has_valid(&self) -> bool {
        self.candidates.iter().any(|c| c.valid)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("originality needs the matches of every evaluated model")]
    MissingCrossModelContext,
    #[error("case {0} has no tier")]
    MissingTier(String),
    #[error("no cases to aggregate")]
    Empty,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpfMode {
    /// A case counts when it has at least one shortest valid candidate.
    #[default]
    Case,
    /// Share of valid candidates that are shortest.
    Candidate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Convergent {
    pub success_rate: f64,
    pub precision: f64,
    pub spf_rate: f64,
    /// No candidates at all, so precision was set to 0.
    pub precision_undefined: bool,
}

fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

pub fn convergent_metrics(results: &[CaseResult], spf: SpfMode) -> Convergent {
    let n = results.len();
    let success = results.iter().filter(|r| r.has_valid()).count();
    let total: usize = results.iter().map(|r| r.candidates.len()).sum();
    let valid: usize = results
        .iter()
        .map(|r| r.candidates.iter().filter(|c| c.valid).count())
        .sum();
    let shortest = |r: &CaseResult, c: &CandidateSummary| c.valid && c.length == r.min_gt_length;
    let spf_rate = match spf {
        SpfMode::Case => pct(
            results
                .iter()
                .filter(|r| r.candidates.iter().any(|c| shortest(r, c)))
                .count(),
            n,
        ),
        SpfMode::Candidate => pct(
            results
                .iter()
                .map(|r| r.candidates.iter().filter(|c| shortest(r, c)).count())
                .sum(),
            valid,
        ),
    };
    Convergent {
        success_rate: pct(success, n),
        precision: pct(valid, total),
        spf_rate,
        precision_undefined: total == 0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Divergent {
    pub diversity: f64,
    pub versatility: f64,
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for x in xs {
        sum += x;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

pub fn divergent_metrics(results: &[CaseResult]) -> Divergent {
    let diversity = mean(
        results
            .iter()
            .map(|r| pct(r.matched_ids().len(), r.gt_solution_count)),
    )
    .unwrap_or(0.0);
    let versatility = mean(results.iter().map(|r| {
        let m = r.matched_ids();
        let hit = r
            .families
            .iter()
            .filter(|f| f.iter().any(|s| m.contains(s)))
            .count();
        pct(hit, r.families.len())
    }))
    .unwrap_or(0.0);
    Divergent {
        diversity,
        versatility,
    }
}

/// How many models matched each solution of each case.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossModelContext {
    pub counts: BTreeMap<String, BTreeMap<u32, u32>>,
}

impl CrossModelContext {
    pub fn from_models<'a, I>(models: I) -> Self
    where
        I: IntoIterator<Item = &'a [CaseResult]>,
    {
        let mut counts: BTreeMap<String, BTreeMap<u32, u32>> = BTreeMap::new();
        for results in models {
            for r in results {
                let per_case = counts.entry(r.instance_id.clone()).or_default();
                for s in r.matched_ids() {
                    *per_case.entry(s).or_default() += 1;
                }
            }
        }
        Self { counts }
    }

    fn k(&self, case: &str, s: u32) -> u32 {
        self.counts
            .get(case)
            .and_then(|m| m.get(&s))
            .copied()
            .unwrap_or(1)
            .max(1)
    }
}

/// Mean over cases of `sum(1 / k(s)) / |S_GT|` for the matched solutions
/// `s`, where `k(s)` counts the models that matched `s` in that case.
pub fn originality(
    results: &[CaseResult],
    ctx: Option<&CrossModelContext>,
) -> Result<f64, MetricsError> {
    let ctx = ctx.ok_or(MetricsError::MissingCrossModelContext)?;
    Ok(mean(results.iter().map(|r| {
        let w: f64 = r
            .matched_ids()
            .iter()
            .map(|&s| 1.0 / ctx.k(&r.instance_id, s) as f64)
            .sum();
        if r.gt_solution_count == 0 {
            0.0
        } else {
            100.0 * w / r.gt_solution_count as f64
        }
    }))
    .unwrap_or(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TokenEfficiency {
    /// Mean completion tokens per response; `None` without any counts.
    pub mean: Option<f64>,
    pub missing: usize,
}

pub fn token_efficiency(results: &[CaseResult]) -> TokenEfficiency {
    let counts: Vec<f64> = results
        .iter()
        .filter_map(|r| r.completion_tokens)
        .map(|t| t as f64)
        .collect();
    TokenEfficiency {
        mean: mean(counts.iter().copied()),
        missing: results.len() - counts.len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricValues {
    pub success_rate: f64,
    pub precision: f64,
    pub spf_rate: f64,
    pub diversity: f64,
    pub versatility: f64,
    pub originality: Option<f64>,
    pub token_efficiency: Option<f64>,
}

impl MetricValues {
    pub const NAMES: [&'static str; 7] = [
        "success_rate",
        "precision",
        "spf_rate",
        "diversity",
        "versatility",
        "originality",
        "token_efficiency",
    ];

    pub fn named(&self) -> [(&'static str, Option<f64>); 7] {
        [
            ("success_rate", Some(self.success_rate)),
            ("precision", Some(self.precision)),
            ("spf_rate", Some(self.spf_rate)),
            ("diversity", Some(self.diversity)),
            ("versatility", Some(self.versatility)),
            ("originality", self.originality),
            ("token_efficiency", self.token_efficiency),
        ]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub spf: SpfMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model_name: String,
    pub tiers: BTreeMap<Tier, MetricValues>,
    /// Unweighted mean of the tier values.
    pub average: MetricValues,
    pub notes: Vec<String>,
}

fn values(
    results: &[CaseResult],
    ctx: Option<&CrossModelContext>,
    opts: ReportOptions,
) -> (MetricValues, bool) {
    let c = convergent_metrics(results, opts.spf);
    let d = divergent_metrics(results);
    let v = MetricValues {
        success_rate: c.success_rate,
        precision: c.precision,
        spf_rate: c.spf_rate,
        diversity: d.diversity,
        versatility: d.versatility,
        originality: originality(results, ctx).ok(),
        token_efficiency: token_efficiency(results).mean,
    };
    (v, c.precision_undefined)
}

/// Per-tier metrics and their unweighted average.
pub fn aggregate_report(
    model_name: &str,
    results: &[CaseResult],
    ctx: Option<&CrossModelContext>,
    opts: ReportOptions,
) -> Result<ModelReport, MetricsError> {
    if results.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut by_tier: BTreeMap<Tier, Vec<CaseResult>> = BTreeMap::new();
    for r in results {
        let t = r
            .tier
            .ok_or_else(|| MetricsError::MissingTier(r.instance_id.clone()))?;
        by_tier.entry(t).or_default().push(r.clone());
    }
    let mut notes = Vec::from([
        String::from("originality: sum of 1/k(s) over matched solutions, divided by the number of ground-truth solutions"),
        String::from("precision counts every emitted candidate, repeated ones included"),
    ]);
    if opts.spf == SpfMode::Candidate {
        notes.push(String::from("spf_rate is candidate-level"));
    }
    let mut tiers = BTreeMap::new();
    for (t, rs) in &by_tier {
        let (v, undefined) = values(rs, ctx, opts);
        if undefined {
            notes.push(alloc::format!(
                "{t}: no candidates, precision reported as 0"
            ));
        }
        tiers.insert(*t, v);
    }
    let avg = |get: fn(&MetricValues) -> f64| mean(tiers.values().map(get)).unwrap_or(0.0);
    let avg_opt = |get: fn(&MetricValues) -> Option<f64>| mean(tiers.values().filter_map(get));
    let average = MetricValues {
        success_rate: avg(|v| v.success_rate),
        precision: avg(|v| v.precision),
        spf_rate: avg(|v| v.spf_rate),
        diversity: avg(|v| v.diversity),
        versatility: avg(|v| v.versatility),
        originality: avg_opt(|v| v.originality),
        token_efficiency: avg_opt(|v| v.token_efficiency),
    };
    Ok(ModelReport {
        model_name: model_name.to_string(),
        tiers,
        average,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cand(valid: bool, matched: Option<u32>, length: usize) -> CandidateSummary {
        CandidateSummary {
            valid,
            matched,
            length,
        }
    }

    fn case(
        id: &str,
        n: usize,
        families: Vec<Vec<u32>>,
        candidates: Vec<CandidateSummary>,
    ) -> CaseResult {
        CaseResult {
            instance_id: id.into(),
            tier: Some(Tier::Small),
            gt_solution_count: n,
            families,
            min_gt_length: 2,
            candidates,
            completion_tokens: None,
        }
    }

    #[test]
    fn two_of_six_valid() {
        let mut cs = vec![cand(true, Some(1), 3), cand(true, Some(2), 2)];
        cs.extend((0..4).map(|_| cand(false, None, 4)));
        let r = case("c", 4, vec![vec![1], vec![2, 3], vec![4]], cs);
        let c = convergent_metrics(&[r], SpfMode::Case);
        assert_eq!(c.success_rate, 100.0);
        assert!((c.precision - 33.333).abs() < 0.01);
        assert_eq!(c.spf_rate, 100.0);
    }

    #[test]
    fn nothing_valid_scores_zero() {
        let r = case("c", 2, vec![vec![1, 2]], vec![]);
        let c = convergent_metrics(&[r], SpfMode::Case);
        assert_eq!((c.success_rate, c.precision, c.spf_rate), (0.0, 0.0, 0.0));
        assert!(c.precision_undefined);
    }

    #[test]
    fn diversity_and_versatility() {
        let fam = vec![vec![1, 2], vec![3], vec![4]];
        let strong = case(
            "c",
            4,
            fam.clone(),
            vec![
                cand(true, Some(1), 2),
                cand(true, Some(3), 2),
                cand(true, Some(4), 2),
            ],
        );
        let d = divergent_metrics(&[strong]);
        assert_eq!((d.diversity, d.versatility), (75.0, 100.0));
        let weak = case(
            "c",
            4,
            fam,
            vec![cand(true, Some(1), 2), cand(true, Some(1), 3)],
        );
        let d = divergent_metrics(&[weak]);
        assert_eq!(d.diversity, 25.0);
        assert!((d.versatility - 33.333).abs() < 0.01);
    }

    #[test]
    fn originality_weights() {
        let a = vec![case(
            "c",
            2,
            vec![vec![1], vec![2]],
            vec![cand(true, Some(1), 2), cand(true, Some(2), 2)],
        )];
        let b = vec![case(
            "c",
            2,
            vec![vec![1], vec![2]],
            vec![cand(true, Some(1), 2)],
        )];
        let ctx = CrossModelContext::from_models([a.as_slice(), b.as_slice()]);
        assert_eq!(originality(&a, Some(&ctx)), Ok(75.0));
        assert_eq!(originality(&b, Some(&ctx)), Ok(25.0));
        assert_eq!(
            originality(&a, None),
            Err(MetricsError::MissingCrossModelContext)
        );
    }

    #[test]
    fn token_mean_and_absence() {
        let mut a = case("a", 1, vec![vec![1]], vec![]);
        let mut b = a.clone();
        a.completion_tokens = Some(100);
        b.completion_tokens = Some(300);
        assert_eq!(token_efficiency(&[a.clone(), b]).mean, Some(200.0));
        a.completion_tokens = None;
        assert_eq!(
            token_efficiency(&[a]),
            TokenEfficiency {
                mean: None,
                missing: 1
            }
        );
    }

    #[test]
    fn average_is_unweighted_over_tiers() {
        let mk = |tier, valid: &[bool]| {
            let mut out = Vec::new();
            for (i, v) in valid.iter().enumerate() {
                let mut c = case(
                    &alloc::format!("{tier:?}{i}"),
                    1,
                    vec![vec![1]],
                    vec![cand(*v, v.then_some(1), 2)],
                );
                c.tier = Some(tier);
                out.push(c);
            }
            out
        };
        let mut all = mk(
            Tier::Small,
            &[
                true, false, false, false, false, false, false, false, false, false,
            ],
        );
        all.extend(mk(Tier::Medium, &[true, false, false, false, false]));
        all.extend(mk(
            Tier::Large,
            &[
                true, true, false, false, false, false, false, false, false, false,
            ],
        ));
        let r = aggregate_report("m", &all, None, ReportOptions::default()).unwrap();
        assert_eq!(r.tiers[&Tier::Small].success_rate, 10.0);
        assert_eq!(r.tiers[&Tier::Medium].success_rate, 20.0);
        assert!((r.average.success_rate - 50.0 / 3.0).abs() < 1e-9);
        let mut missing = all.clone();
        missing[0].tier = None;
        assert!(matches!(
            aggregate_report("m", &missing, None, ReportOptions::default()),
            Err(MetricsError::MissingTier(_))
        ));
    }
}
