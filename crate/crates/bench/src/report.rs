//! Per-model metric reports: CSV, an aligned text table and per-case detail.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use multipath_core::dag::Tier;
use multipath_core::eval::ErrorLabel;
use multipath_core::metrics::{
    aggregate_report, CaseResult, CrossModelContext, MetricValues, MetricsError, ModelReport,
    ReportOptions,
};
use serde::Serialize;

use crate::pipeline::VerdictRecord;

pub const AVG: &str = "avg";

/// One report per model, originality joined across all models present.
pub fn build_reports(
    records: &[VerdictRecord],
    opts: ReportOptions,
) -> Result<Vec<ModelReport>, MetricsError> {
    let mut by_model: BTreeMap<&str, Vec<CaseResult>> = BTreeMap::new();
    for r in records {
        by_model
            .entry(r.model_name.as_str())
            .or_default()
            .push(r.case.clone());
    }
    let ctx = CrossModelContext::from_models(by_model.values().map(Vec::as_slice));
    by_model
        .iter()
        .map(|(m, cases)| aggregate_report(m, cases, Some(&ctx), opts))
        .collect()
}

fn rows(report: &ModelReport) -> Vec<(String, &'static str, Option<f64>)> {
    let mut out = Vec::new();
    let mut push = |tier: String, v: &MetricValues| {
        for (name, value) in v.named() {
            out.push((tier.clone(), name, value));
        }
    };
    push(AVG.into(), &report.average);
    for (t, v) in &report.tiers {
        push(t.to_string(), v);
    }
    out
}

/// `model,tier,metric,value`; metrics without a value are omitted.
pub fn to_csv(reports: &[ModelReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["model", "tier", "metric", "value"])
        .expect("in-memory write");
    for r in reports {
        for (tier, metric, value) in rows(r) {
            if let Some(v) = value {
                w.write_record([
                    r.model_name.as_str(),
                    tier.as_str(),
                    metric,
                    &format!("{v:.4}"),
                ])
                .expect("in-memory write");
            }
        }
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// Fixed-width table, one row per model and tier.
pub fn to_table(reports: &[ModelReport]) -> String {
    let headers = [
        "model",
        "tier",
        "success",
        "precision",
        "spf",
        "diversity",
        "versatility",
        "originality",
        "tokens",
    ];
    let mut body: Vec<Vec<String>> = Vec::new();
    for r in reports {
        let mut tiers: Vec<(String, &MetricValues)> = vec![(AVG.into(), &r.average)];
        tiers.extend(
            Tier::ALL
                .iter()
                .filter_map(|t| r.tiers.get(t).map(|v| (t.to_string(), v))),
        );
        for (tier, v) in tiers {
            let mut row = vec![r.model_name.clone(), tier];
            row.extend(
                v.named()
                    .iter()
                    .map(|(_, x)| x.map_or_else(|| "-".into(), |x| format!("{x:.1}"))),
            );
            body.push(row);
        }
    }
    let widths: Vec<usize> = (0..headers.len())
        .map(|c| {
            body.iter()
                .map(|r| r[c].len())
                .chain([headers[c].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut s = String::new();
    let line = |s: &mut String, cells: &[&str]| {
        for (c, cell) in cells.iter().enumerate() {
            let sep = if c + 1 == cells.len() { "\n" } else { "  " };
            if c < 2 {
                let _ = write!(s, "{cell:<w$}{sep}", w = widths[c]);
            } else {
                let _ = write!(s, "{cell:>w$}{sep}", w = widths[c]);
            }
        }
    };
    line(&mut s, &headers);
    for row in &body {
        line(&mut s, &row.iter().map(String::as_str).collect::<Vec<_>>());
    }
    for r in reports {
        for n in &r.notes {
            let _ = writeln!(s, "# {}: {n}", r.model_name);
        }
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateDetail {
    pub solution_index: u32,
    pub valid: bool,
    pub matched_solution: Option<u32>,
    pub duplicate_of: Option<u32>,
    pub length: usize,
    pub used_premises: Vec<u32>,
    pub labels: Vec<(u32, ErrorLabel)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseDetail {
    pub instance_id: String,
    pub model_name: String,
    pub tier: Option<Tier>,
    pub gt_solutions: usize,
    pub matched: Vec<u32>,
    pub unparseable: bool,
    pub candidates: Vec<CandidateDetail>,
}

pub fn case_details(records: &[VerdictRecord]) -> Vec<CaseDetail> {
    records
        .iter()
        .map(|r| CaseDetail {
            instance_id: r.instance_id.clone(),
            model_name: r.model_name.clone(),
            tier: r.case.tier,
            gt_solutions: r.case.gt_solution_count,
            matched: r.case.matched_ids().into_iter().collect(),
            unparseable: r.evaluation.unparseable,
            candidates: r
                .evaluation
                .candidates
                .iter()
                .map(|c| CandidateDetail {
                    solution_index: c.solution_index,
                    valid: c.verdict.is_valid(),
                    matched_solution: c.verdict.matched_solution,
                    duplicate_of: c.duplicate_of,
                    length: c.verdict.length,
                    used_premises: c.verdict.used_premises.iter().copied().collect(),
                    labels: c
                        .verdict
                        .error_labels
                        .iter()
                        .map(|l| (l.step, l.label))
                        .collect(),
                })
                .collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use multipath_core::eval::ResponseEvaluation;
    use multipath_core::metrics::CandidateSummary;

    fn record(model: &str, id: &str, matched: &[u32]) -> VerdictRecord {
        let candidates = matched
            .iter()
            .map(|&m| CandidateSummary {
                valid: true,
                matched: Some(m),
                length: 2,
            })
            .collect();
        VerdictRecord {
            instance_id: id.into(),
            model_name: model.into(),
            case: CaseResult {
                instance_id: id.into(),
                tier: Some(Tier::Small),
                gt_solution_count: 4,
                families: vec![vec![1], vec![2, 3], vec![4]],
                min_gt_length: 2,
                candidates,
                completion_tokens: None,
            },
            evaluation: ResponseEvaluation {
                instance_id: id.into(),
                model_name: model.into(),
                candidates: vec![],
                unparseable: false,
                repaired: false,
                completion_tokens: None,
            },
        }
    }

    #[test]
    fn csv_rows_and_values() {
        let recs = vec![
            record("strong", "c1", &[1, 2, 4]),
            record("weak", "c1", &[1]),
        ];
        let reports = build_reports(&recs, ReportOptions::default()).unwrap();
        let csv = to_csv(&reports);
        assert!(csv.starts_with("model,tier,metric,value\n"));
        assert!(csv.contains("strong,avg,diversity,75.0000\n"));
        assert!(csv.contains("strong,small,versatility,100.0000\n"));
        assert!(csv.contains("weak,small,diversity,25.0000\n"));
        assert!(csv.contains("weak,small,versatility,33.3333\n"));
        // solution 1 is shared by both models
        assert!(csv.contains("strong,small,originality,62.5000\n"));
        assert!(!csv.contains("token_efficiency"));
        let table = to_table(&reports);
        assert_eq!(table.lines().filter(|l| l.starts_with("strong")).count(), 2);
    }

    #[test]
    fn single_case_single_model() {
        let reports = build_reports(&[record("m", "c", &[1])], ReportOptions::default()).unwrap();
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].tiers.len(), 1);
        assert_eq!(reports[0].average, reports[0].tiers[&Tier::Small]);
    }
}
