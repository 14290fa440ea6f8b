use std::path::{Path, PathBuf};
use std::process;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use multipath_bench::config::{ClientConfig, RunConfig};
use multipath_bench::dataset::{
    read_instances, read_jsonl, read_responses, stratified_sample, write_jsonl,
};
use multipath_bench::http::HttpClient;
use multipath_bench::pipeline::{self, Online, VerdictRecord};
use multipath_bench::prover::{discover, external_prove};
use multipath_bench::report::{build_reports, case_details, to_csv, to_table};
use multipath_bench::{BenchError, ExitCode};
use multipath_core::dag::Tier;
use multipath_core::metrics::{ReportOptions, SpfMode};
use multipath_core::validate::emit_prover9_job;

#[derive(Parser)]
#[command(
    name = "multipath",
    version,
    about = "Multi-path deductive reasoning benchmark toolkit"
)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ClientFlags {
    /// Never call the text-generation service (default).
    #[arg(long)]
    offline: bool,
    /// Text-generation endpoint; enables client-backed mode unless --offline.
    #[arg(long)]
    endpoint: Option<String>,
    /// Model name sent to the endpoint.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate, validate and write benchmark instances.
    Generate {
        #[arg(long)]
        seed: Option<u64>,
        /// Single tier to generate; requires --count.
        #[arg(long, requires = "count", conflicts_with = "per_tier")]
        tier: Option<Tier>,
        #[arg(long, requires = "tier")]
        count: Option<usize>,
        /// Instances for each of the three tiers.
        #[arg(long)]
        per_tier: Option<usize>,
        #[command(flatten)]
        client: ClientFlags,
        /// Output dataset (JSON lines).
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run the validity gate on a dataset and keep the survivors.
    Validate {
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Per-instance validation reports (JSON lines).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also ask an external prover whether each goal follows.
        #[arg(long)]
        cross_check: bool,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Stratified sample of a dataset.
    Sample {
        pool: PathBuf,
        #[arg(long)]
        per_tier: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score model responses against a dataset.
    Evaluate {
        dataset: PathBuf,
        /// JSON-lines file or a directory of `<instance_id>/<model>.txt`.
        #[arg(long)]
        responses: PathBuf,
        #[command(flatten)]
        client: ClientFlags,
        /// Verdict store (JSON lines).
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate a verdict store into reports.
    Report {
        verdicts: PathBuf,
        /// Output directory for report.csv, report.txt and cases.json.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "case")]
        spf: SpfArg,
        /// Dataset used to export DAGs named by --dot.
        #[arg(long, requires = "dot")]
        dataset: Option<PathBuf>,
        /// Instance ids whose DAG is written as `<id>.dot`.
        #[arg(long, requires = "dataset")]
        dot: Vec<String>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum SpfArg {
    Case,
    Candidate,
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, BenchError> {
    Ok(match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    })
}

fn apply_client_flags(cfg: &mut RunConfig, flags: &ClientFlags) {
    if let Some(e) = &flags.endpoint {
        let client = cfg.client.get_or_insert_with(ClientConfig::default);
        client.endpoint = e.clone();
        cfg.offline = false;
    }
    if let (Some(m), Some(c)) = (&flags.model, cfg.client.as_mut()) {
        c.model = m.clone();
    }
    if flags.offline {
        cfg.offline = true;
    }
    if let Some(w) = flags.workers {
        cfg.workers = w;
    }
}

fn http_client(cfg: &RunConfig) -> Result<Option<HttpClient>, BenchError> {
    Ok(match cfg.online_client() {
        Some(c) => Some(HttpClient::from_config(c)?),
        None => None,
    })
}

fn online<'a>(client: &'a Option<HttpClient>) -> Option<Online<'a>> {
    client.as_ref().map(|c| Online {
        client: c,
        retry: c.config().retry,
        max_rounds: c.config().max_rounds,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), BenchError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| BenchError::io(path, e))
}

fn run(cli: Cli) -> Result<ExitCode, BenchError> {
    let mut cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Generate {
            seed,
            tier,
            count,
            per_tier,
            client,
            out,
        } => {
            apply_client_flags(&mut cfg, &client);
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            let counts: Vec<(Tier, usize)> = match (tier, count, per_tier) {
                (Some(t), Some(n), None) => vec![(t, n)],
                (None, None, Some(n)) => Tier::ALL.iter().map(|t| (*t, n)).collect(),
                _ => {
                    return Err(BenchError::Usage(
                        "give --tier with --count, or --per-tier".into(),
                    ))
                }
            };
            let http = http_client(&cfg)?;
            let jobs = pipeline::plan(cfg.seed, &counts);
            let outcome = pipeline::generate(
                &jobs,
                &cfg.generation,
                &cfg.config_hash(),
                cfg.workers,
                online(&http),
            );
            write_jsonl(&out, &outcome.accepted)?;
            for r in &outcome.rejected {
                eprintln!(
                    "rejected {} (seed {}): {}",
                    r.instance_id,
                    r.seed,
                    r.reasons.join(", ")
                );
            }
            for f in &outcome.client_failures {
                eprintln!("client failure on {}: {}", f.instance_id, f.message);
            }
            eprintln!(
                "wrote {} instances to {} ({} rejected, {} client failures)",
                outcome.accepted.len(),
                out.display(),
                outcome.rejected.len(),
                outcome.client_failures.len()
            );
            Ok(if !outcome.client_failures.is_empty() {
                ExitCode::Io
            } else if !outcome.rejected.is_empty() {
                ExitCode::ValidationFailures
            } else {
                ExitCode::Success
            })
        }
        Command::Validate {
            dataset,
            out,
            report,
            cross_check,
            workers,
        } => {
            if let Some(w) = workers {
                cfg.workers = w;
            }
            cfg.validate()?;
            let instances = read_instances(&dataset)?;
            let total = instances.len();
            let prover = if cross_check {
                discover(&cfg.prover)
            } else {
                None
            };
            if cross_check && prover.is_none() {
                eprintln!("warning: no external prover found, cross-check skipped");
            }
            if let Some(bin) = &prover {
                let timeout = Duration::from_millis(cfg.prover.timeout_ms);
                let mut disagree = 0;
                for inst in &instances {
                    let job = emit_prover9_job(
                        inst.premises.iter().map(|p| &p.formal),
                        &inst.goal.formal,
                    );
                    if external_prove(&job, bin, timeout).definite() == Some(false) {
                        disagree += 1;
                        eprintln!("external prover did not prove {}", inst.instance_id);
                    }
                }
                eprintln!("cross-check: {disagree} of {total} goals not proved externally");
            }
            let outcome = pipeline::validate(instances, cfg.workers);
            write_jsonl(&out, &outcome.survivors)?;
            if let Some(p) = report {
                write_jsonl(&p, &outcome.reports)?;
            }
            println!("{} of {} instances pass", outcome.survivors.len(), total);
            for (check, n) in outcome.failure_table() {
                println!("{:<12} {n}", check.code());
            }
            for r in outcome.reports.iter().filter(|r| !r.accepted()) {
                eprintln!("rejected {}: {:?}", r.instance_id, r.verdict);
            }
            Ok(if outcome.rejected() > 0 {
                ExitCode::ValidationFailures
            } else {
                ExitCode::Success
            })
        }
        Command::Sample {
            pool,
            per_tier,
            seed,
            out,
        } => {
            let instances = read_instances(&pool)?;
            let chosen = stratified_sample(&instances, per_tier, seed.unwrap_or(cfg.seed))
                .map_err(|e| BenchError::Usage(e.to_string()))?;
            write_jsonl(&out, &chosen)?;
            eprintln!("sampled {} instances", chosen.len());
            Ok(ExitCode::Success)
        }
        Command::Evaluate {
            dataset,
            responses,
            client,
            out,
        } => {
            apply_client_flags(&mut cfg, &client);
            cfg.validate()?;
            let instances = read_instances(&dataset)?;
            let raw = read_responses(&responses)?;
            if raw.is_empty() {
                eprintln!("warning: no responses found in {}", responses.display());
            }
            let http = http_client(&cfg)?;
            let outcome = pipeline::evaluate(&instances, raw, cfg.workers, online(&http));
            for (i, m) in &outcome.missing {
                eprintln!("missing response: {i}/{m}");
            }
            for (i, m) in &outcome.unknown {
                eprintln!("response for unknown instance: {i}/{m}");
            }
            write_jsonl(&out, &outcome.records)?;
            let valid: usize = outcome
                .records
                .iter()
                .map(|r| r.case.candidates.iter().filter(|c| c.valid).count())
                .sum();
            eprintln!(
                "evaluated {} responses, {valid} valid candidates",
                outcome.records.len()
            );
            Ok(ExitCode::Success)
        }
        Command::Report {
            verdicts,
            out,
            spf,
            dataset,
            dot,
        } => {
            let records: Vec<VerdictRecord> = read_jsonl(&verdicts)?;
            if records.is_empty() {
                return Err(BenchError::Usage(format!(
                    "{} holds no verdicts",
                    verdicts.display()
                )));
            }
            let spf = match spf {
                SpfArg::Case => SpfMode::Case,
                SpfArg::Candidate => SpfMode::Candidate,
            };
            let reports = build_reports(&records, ReportOptions { spf })?;
            let table = to_table(&reports);
            write_file(&out.join("report.csv"), &to_csv(&reports))?;
            write_file(&out.join("report.txt"), &table)?;
            let cases =
                serde_json::to_string_pretty(&case_details(&records)).expect("serializable");
            write_file(&out.join("cases.json"), &cases)?;
            if let Some(ds) = dataset {
                let instances = read_instances(&ds)?;
                for id in &dot {
                    let inst =
                        instances
                            .iter()
                            .find(|i| &i.instance_id == id)
                            .ok_or_else(|| {
                                BenchError::Usage(format!("no instance {id} in {}", ds.display()))
                            })?;
                    write_file(&out.join(format!("{id}.dot")), &inst.dag.to_dot())?;
                }
            }
            print!("{table}");
            Ok(ExitCode::Success)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    process::exit(code as i32);
}
