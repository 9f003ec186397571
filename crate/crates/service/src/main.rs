use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use caseforge_core::case_model::{DisorderType, GradeLevel};
use caseforge_core::orchestrator::GroupRequest;
use caseforge_core::persistence::{CaseFilter, ReportFilter};
use caseforge_service::app::{parse_group_by, AnalyzeBody, App, BatchBody, CaseRequest, PlanBody};
use caseforge_service::config::ServiceConfig;
use caseforge_service::error::ApiError;
use clap::{Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "caseforge", version, about = "Generate and review synthetic speech-language case files")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, env = "CASEFORGE_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate and store one case.
    Generate {
        /// Disorder names, e.g. articulation, fluency.
        #[arg(long = "disorder", required = true)]
        disorders: Vec<DisorderType>,
        #[arg(long)]
        grade: GradeLevel,
        #[arg(long, default_value = "")]
        population: String,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generate a batch from a JSON spec, a plain-language request, or a CSV roster.
    Batch {
        #[arg(long, conflicts_with_all = ["text", "roster"])]
        spec: Option<PathBuf>,
        #[arg(long, conflicts_with = "roster")]
        text: Option<String>,
        #[arg(long)]
        roster: Option<PathBuf>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compose therapy groups from stored cases.
    Group {
        #[command(subcommand)]
        action: GroupAction,
    },
    /// Score a stored case with the rubric, optionally with an LLM judge.
    Score {
        case_id: String,
        #[arg(long)]
        judge: Option<String>,
    },
    /// Quality or error-tag report.
    Report {
        #[arg(value_parser = ["quality", "errors"], default_value = "quality")]
        kind: String,
        #[arg(long)]
        group_by: Option<String>,
        #[arg(long)]
        scorer: Option<String>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        disorder: Option<DisorderType>,
    },
    /// Analyze a JSON-lines transcript.
    Analyze {
        #[arg(long)]
        transcript: PathBuf,
        #[arg(long)]
        deidentify: bool,
        /// Also request the sectioned clinical analysis.
        #[arg(long)]
        clinical: bool,
        #[arg(long)]
        model: Option<String>,
    },
    /// Export a stored case.
    Export {
        case_id: String,
        #[arg(long, default_value = "canonical_json")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search stored cases.
    Search {
        #[arg(long)]
        disorder: Option<String>,
        #[arg(long)]
        grade_min: Option<String>,
        #[arg(long)]
        grade_max: Option<String>,
        #[arg(long)]
        severity: Option<String>,
    },
    /// Add documents from a JSON-lines manifest to the knowledge base.
    Ingest { manifest: PathBuf },
    /// Run the HTTP API.
    Serve {
        #[arg(long)]
        bind: Option<String>,
    },
}

#[derive(Subcommand)]
enum GroupAction {
    /// Rank compatible stored cases for a group request (JSON file).
    Match { request: PathBuf },
    /// Plan a joint session for the given case ids.
    Plan {
        #[arg(required = true)]
        member_ids: Vec<String>,
        #[arg(long)]
        model: Option<String>,
    },
}

fn print<T: Serialize>(v: &T) -> Result<(), ApiError> {
    let text = serde_json::to_string_pretty(v).map_err(|e| ApiError::new("internal", e.to_string()))?;
    write_stdout(format!("{text}\n").as_bytes())
}

/// A closed pipe (e.g. `| head`) is not an error.
fn write_stdout(bytes: &[u8]) -> Result<(), ApiError> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(bytes) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(ApiError::new("io_error", e.to_string())),
        _ => Ok(()),
    }
}

fn read(path: &PathBuf) -> Result<String, ApiError> {
    std::fs::read_to_string(path).map_err(|e| ApiError::bad_request(format!("cannot read {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), ApiError> {
    let config = match &cli.config {
        Some(p) => ServiceConfig::load(p).map_err(|e| ApiError::bad_request(e.to_string()))?,
        None => ServiceConfig::default(),
    };
    let app = App::from_config(config)?;
    match cli.command {
        Command::Generate { disorders, grade, population, model, seed } => {
            print(&app.generate(&CaseRequest { disorders, grade, population_spec: population, model, seed })?)
        }
        Command::Batch { spec, text, roster, model, seed } => {
            let body = BatchBody {
                spec: spec
                    .map(|p| serde_json::from_str(&read(&p)?).map_err(|e| ApiError::bad_request(format!("batch spec: {e}"))))
                    .transpose()?,
                text,
                roster: roster.map(|p| read(&p)).transpose()?,
                model,
                seed,
            };
            let prepared = app.prepare_batch(&body)?;
            print(&app.run_batch(prepared)?)
        }
        Command::Group { action: GroupAction::Match { request } } => {
            let req: GroupRequest =
                serde_json::from_str(&read(&request)?).map_err(|e| ApiError::bad_request(format!("group request: {e}")))?;
            print(&app.match_group(&req)?)
        }
        Command::Group { action: GroupAction::Plan { member_ids, model } } => {
            print(&app.plan_group(&PlanBody { member_ids, model })?)
        }
        Command::Score { case_id, judge } => print(&app.score(&case_id, judge.as_deref())?),
        Command::Report { kind, group_by, scorer, model, disorder } => {
            let group_by = parse_group_by(group_by.as_deref())?;
            if kind == "quality" {
                print(&app.quality_report(group_by, scorer.as_deref())?)
            } else {
                print(&app.error_report(&ReportFilter { model_id: model, disorder, since: None, until: None, group_by })?)
            }
        }
        Command::Analyze { transcript, deidentify, clinical, model } => {
            let clinical_model = clinical.then(|| model.unwrap_or_else(|| app.config.default_model.clone()));
            let body = AnalyzeBody { jsonl: Some(read(&transcript)?), deidentify, clinical_model, ..AnalyzeBody::default() };
            print(&app.analyze(&body)?)
        }
        Command::Export { case_id, format, out } => {
            let (_, bytes) = app.export(&case_id, &format)?;
            match out {
                Some(p) => std::fs::write(&p, bytes).map_err(|e| ApiError::new("io_error", e.to_string())),
                None => write_stdout(&bytes),
            }
        }
        Command::Search { disorder, grade_min, grade_max, severity } => {
            let q = caseforge_service::app::CaseQuery { disorder, grade_min, grade_max, severity, model: None };
            let filter: CaseFilter = q.to_filter()?;
            print(&app.search(&filter)?)
        }
        Command::Ingest { manifest } => print(&app.ingest(&manifest)?),
        Command::Serve { bind } => {
            let bind = bind.unwrap_or_else(|| app.config.bind.clone());
            let rt = tokio::runtime::Runtime::new().map_err(|e| ApiError::new("internal", e.to_string()))?;
            rt.block_on(caseforge_service::api::serve(Arc::new(app), &bind))
                .map_err(|e| ApiError::new("io_error", e.to_string()))
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.code, e.message);
            ExitCode::FAILURE
        }
    }
}
