//! Generate, validate and evaluate stages with a bounded worker pool.
//! Results come back in input order; writing them is the caller's job.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use multipath_core::catalog::{builtin_profiles, EntityCatalog};
use multipath_core::client::{RetryPolicy, TextClient};
use multipath_core::dag::{instance_seed, GenerationConfig, Tier};
use multipath_core::eval::{evaluate_response, EvalContext, RawResponse, ResponseEvaluation};
use multipath_core::instance::{BenchmarkInstance, BuildError};
use multipath_core::instantiate::{Assist, InstantiationError};
use multipath_core::metrics::CaseResult;
use multipath_core::validate::{RejectReason, ValidationReport};
use serde::{Deserialize, Serialize};

use crate::http::ThreadSleeper;

pub const GENERATOR_VERSION: &str = concat!("multipath/", env!("CARGO_PKG_VERSION"));

/// Maps `f` over `items` on up to `workers` threads, preserving order.
pub fn par_map<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new(items.iter().map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers.clamp(1, items.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else { break };
                let r = f(item);
                slots.lock().expect("result sink")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("result sink")
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect()
}

/// Client plus retry settings shared by all workers.
#[derive(Clone, Copy)]
pub struct Online<'a> {
    pub client: &'a (dyn TextClient + Sync),
    pub retry: RetryPolicy,
    pub max_rounds: u32,
}

impl Online<'_> {
    fn with_assist<R>(&self, f: impl FnOnce(&Assist<'_>) -> R) -> R {
        let sleeper = ThreadSleeper;
        let client: &dyn TextClient = self.client;
        f(&Assist {
            client,
            sleeper: &sleeper,
            retry: self.retry,
            max_rounds: self.max_rounds,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Job {
    pub instance_id: String,
    pub tier: Tier,
    pub seed: u64,
}

/// Seeds depend on the tier and the position within it only.
pub fn plan(master_seed: u64, counts: &[(Tier, usize)]) -> Vec<Job> {
    let mut jobs = Vec::new();
    for &(tier, n) in counts {
        let tier_seed = instance_seed(master_seed, tier as u64);
        for i in 0..n {
            jobs.push(Job {
                instance_id: format!("{tier}-{:04}", i + 1),
                tier,
                seed: instance_seed(tier_seed, i as u64),
            });
        }
    }
    jobs
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub instance_id: String,
    pub seed: u64,
    pub reasons: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientFailure {
    pub instance_id: String,
    pub message: String,
}

#[derive(Debug, Default)]
pub struct GenerateOutcome {
    pub accepted: Vec<BenchmarkInstance>,
    pub rejected: Vec<Rejection>,
    pub client_failures: Vec<ClientFailure>,
}

enum JobResult {
    Accepted(Box<BenchmarkInstance>),
    Rejected(Rejection),
    Client(ClientFailure),
}

fn run_job(
    job: &Job,
    base: &GenerationConfig,
    config_hash: &str,
    online: Option<Online<'_>>,
) -> JobResult {
    let profiles = builtin_profiles();
    let catalog = EntityCatalog::builtin();
    let profile = &profiles[(job.seed % profiles.len() as u64) as usize];
    let cfg = GenerationConfig {
        seed: job.seed,
        tier: job.tier,
        ..base.clone()
    };
    let build = |assist: Option<&Assist<'_>>| {
        BenchmarkInstance::build(
            job.instance_id.clone(),
            &cfg,
            profile,
            &catalog,
            assist,
            config_hash.into(),
            GENERATOR_VERSION,
        )
    };
    let built = match online {
        Some(o) => o.with_assist(|a| build(Some(a))),
        None => build(None),
    };
    let reject = |reasons| {
        JobResult::Rejected(Rejection {
            instance_id: job.instance_id.clone(),
            seed: job.seed,
            reasons,
        })
    };
    match built {
        Ok(inst) => {
            let report = inst.validate();
            if report.accepted() {
                JobResult::Accepted(Box::new(inst))
            } else {
                reject(
                    report
                        .failed_checks()
                        .into_iter()
                        .map(|r| r.code().to_string())
                        .collect(),
                )
            }
        }
        Err(BuildError::Instantiation(InstantiationError::Client(e))) => {
            JobResult::Client(ClientFailure {
                instance_id: job.instance_id.clone(),
                message: e.to_string(),
            })
        }
        Err(e) => reject(vec![format!("generation: {e}")]),
    }
}

/// Builds and validates every planned instance; only accepted ones are kept.
pub fn generate(
    jobs: &[Job],
    base: &GenerationConfig,
    config_hash: &str,
    workers: usize,
    online: Option<Online<'_>>,
) -> GenerateOutcome {
    let mut out = GenerateOutcome::default();
    for r in par_map(jobs, workers, |j| run_job(j, base, config_hash, online)) {
        match r {
            JobResult::Accepted(i) => out.accepted.push(*i),
            JobResult::Rejected(r) => out.rejected.push(r),
            JobResult::Client(c) => out.client_failures.push(c),
        }
    }
    out
}

#[derive(Debug, Default)]
pub struct ValidateOutcome {
    pub survivors: Vec<BenchmarkInstance>,
    pub reports: Vec<ValidationReport>,
}

impl ValidateOutcome {
    /// Instances failing each check (a report may count under several).
    pub fn failure_table(&self) -> BTreeMap<RejectReason, usize> {
        let mut t: BTreeMap<RejectReason, usize> = BTreeMap::new();
        for r in &self.reports {
            for c in r.failed_checks() {
                *t.entry(c).or_default() += 1;
            }
        }
        t
    }

    pub fn rejected(&self) -> usize {
        self.reports.iter().filter(|r| !r.accepted()).count()
    }
}

pub fn validate(instances: Vec<BenchmarkInstance>, workers: usize) -> ValidateOutcome {
    let reports = par_map(&instances, workers, BenchmarkInstance::validate);
    let survivors = instances
        .into_iter()
        .zip(&reports)
        .filter(|(_, r)| r.accepted())
        .map(|(i, _)| i)
        .collect();
    ValidateOutcome { survivors, reports }
}

/// One line of the verdict store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub instance_id: String,
    pub model_name: String,
    pub case: CaseResult,
    pub evaluation: ResponseEvaluation,
}

#[derive(Debug, Default)]
pub struct EvaluateOutcome {
    pub records: Vec<VerdictRecord>,
    /// (instance, model) pairs with no response.
    pub missing: Vec<(String, String)>,
    /// Responses naming an instance absent from the dataset.
    pub unknown: Vec<(String, String)>,
}

pub fn evaluate(
    instances: &[BenchmarkInstance],
    responses: Vec<RawResponse>,
    workers: usize,
    online: Option<Online<'_>>,
) -> EvaluateOutcome {
    let by_id: BTreeMap<&str, &BenchmarkInstance> = instances
        .iter()
        .map(|i| (i.instance_id.as_str(), i))
        .collect();
    let mut out = EvaluateOutcome::default();
    let models: BTreeSet<String> = responses.iter().map(|r| r.model_name.clone()).collect();
    let present: BTreeSet<(String, String)> = responses
        .iter()
        .map(|r| (r.instance_id.clone(), r.model_name.clone()))
        .collect();
    for inst in instances {
        for m in &models {
            if !present.contains(&(inst.instance_id.clone(), m.clone())) {
                out.missing.push((inst.instance_id.clone(), m.clone()));
            }
        }
    }
    let (known, unknown): (Vec<RawResponse>, Vec<RawResponse>) = responses
        .into_iter()
        .partition(|r| by_id.contains_key(r.instance_id.as_str()));
    out.unknown = unknown
        .into_iter()
        .map(|r| (r.instance_id, r.model_name))
        .collect();
    out.records = par_map(&known, workers, |raw| {
        let inst = by_id[raw.instance_id.as_str()];
        let ctx = EvalContext::from_instance(inst);
        let evaluation = match online {
            Some(o) => o.with_assist(|a| evaluate_response(raw, &ctx, &inst.ground_truth, Some(a))),
            None => evaluate_response(raw, &ctx, &inst.ground_truth, None),
        };
        VerdictRecord {
            instance_id: raw.instance_id.clone(),
            model_name: raw.model_name.clone(),
            case: CaseResult::from_evaluation(&evaluation, inst),
            evaluation,
        }
    });
    out
}

/// Every ground-truth proof of each instance, as a response from `model`.
pub fn ground_truth_responses(instances: &[BenchmarkInstance], model: &str) -> Vec<RawResponse> {
    instances
        .iter()
        .map(|i| RawResponse {
            instance_id: i.instance_id.clone(),
            model_name: model.to_string(),
            text: i.render_ground_truth_response(),
            completion_tokens: None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_map_keeps_order() {
        let xs: Vec<u32> = (0..100).collect();
        assert_eq!(
            par_map(&xs, 7, |x| x * 2),
            xs.iter().map(|x| x * 2).collect::<Vec<_>>()
        );
        assert!(par_map(&Vec::<u32>::new(), 3, |x| *x).is_empty());
    }

    #[test]
    fn plan_is_stable_per_tier() {
        let a = plan(1, &[(Tier::Small, 2), (Tier::Large, 1)]);
        let b = plan(1, &[(Tier::Large, 1)]);
        assert_eq!(a[2].seed, b[0].seed);
        assert_eq!(a[0].instance_id, "small-0001");
        assert_ne!(a[0].seed, a[1].seed);
    }

    #[test]
    fn generated_instances_validate() {
        let jobs = plan(3, &[(Tier::Small, 3)]);
        let out = generate(&jobs, &GenerationConfig::default(), "h", 2, None);
        assert_eq!(out.accepted.len(), 3);
        let v = validate(out.accepted, 2);
        assert_eq!(v.survivors.len(), 3);
        assert!(v.failure_table().is_empty());
    }
}
