//! `hearth` — render house states, run single decisions, query the
//! preference store, and drive the full scenario benchmark.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/load error, 3
//! transport/config error. A failed decision is data, not an error: it
//! prints the default outcome and exits 0.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use hearth_core::actions::baseline_grade;
use hearth_core::bench::{
    aggregate, candidate_counts, emit_report, load_scenario_dir, run_benchmark, BenchConfig,
    BenchError, ReportFormat, RunRecord,
};
use hearth_core::engine::{decide, DecideRequest, PromptStyle, PromptTemplates};
use hearth_core::home::load_house;
use hearth_core::llm::{Backend, GenerationParams, HttpBackend, ScriptedBackend};
use hearth_core::prefs::{
    load_preferences, query_top_k, Embedder, HashEmbedder, HttpEmbedder, VectorIndex,
};
use hearth_core::render::{render, Representation};

const EXIT_USAGE: i32 = 1;
const EXIT_DATA: i32 = 2;
const EXIT_TRANSPORT: i32 = 3;

#[derive(Parser)]
#[command(name = "hearth", version, about = "LLM-centered smart home decision engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a house state rendering.
    Render {
        /// Path to a .house file.
        house: PathBuf,
        /// Representation: natural or json.
        #[arg(long, default_value = "natural")]
        rep: Representation,
    },
    /// Run one decision and print the outcome with a trace summary.
    Decide {
        /// Path to a .house file.
        house: PathBuf,
        /// User taking the decision.
        #[arg(long, default_value_t = 1)]
        user: i64,
        /// Prompting style: direct, directPref, OpenQuestion, ThreeQuestion.
        #[arg(long, default_value = "direct")]
        style: PromptStyle,
        #[arg(long, default_value = "natural")]
        rep: Representation,
        /// Preference database (sentence<TAB>TAG per line).
        #[arg(long)]
        prefs: Option<PathBuf>,
        #[command(flatten)]
        backend: BackendArgs,
        #[command(flatten)]
        sampling: SamplingArgs,
        /// Preferences retrieved per problem in the RAG styles.
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Directory overriding the built-in prompt templates.
        #[arg(long)]
        prompts: Option<PathBuf>,
    },
    /// Query the preference store by similarity.
    Retrieve {
        #[arg(long)]
        prefs: PathBuf,
        #[arg(long)]
        query: String,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[command(flatten)]
        embedder: EmbedderArgs,
    },
    /// Run the benchmark matrix and write CSV and markdown reports.
    Bench {
        /// Directory containing .scenario files (with their .house files).
        #[arg(long, default_value = "fixtures")]
        scenarios: PathBuf,
        #[arg(long)]
        prefs: Option<PathBuf>,
        #[command(flatten)]
        backend: BackendArgs,
        #[command(flatten)]
        sampling: SamplingArgs,
        /// Comma-separated styles to run.
        #[arg(long, value_delimiter = ',', default_values_t = PromptStyle::ALL)]
        styles: Vec<PromptStyle>,
        /// Comma-separated representations to run.
        #[arg(long = "representations", value_delimiter = ',',
              default_values_t = [Representation::Natural, Representation::Json])]
        representations: Vec<Representation>,
        /// Repetitions per scenario and style.
        #[arg(long, default_value_t = 10)]
        reps: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Concurrent (model, representation, style) cells.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Output directory for records and reports.
        #[arg(long, default_value = "reports")]
        out: PathBuf,
        /// Record processing time as 0.0 for byte-reproducible reports.
        #[arg(long, default_value_t = false)]
        zero_timing: bool,
        /// Print the random-baseline table and exit without any LLM calls.
        #[arg(long, default_value_t = false)]
        baseline_only: bool,
        #[arg(long)]
        prompts: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BackendArgs {
    /// `http` or `scripted:<file>` (a JSON array of canned replies, cycled).
    #[arg(long, default_value = "http")]
    backend: String,
    /// Chat-completions server base URL (http backend).
    #[arg(long, default_value = "http://127.0.0.1:5000")]
    endpoint: String,
    /// Model name sent to the server; also the report label.
    #[arg(long, default_value = "default")]
    model: String,
    /// Per-call timeout in seconds.
    #[arg(long, default_value_t = 120)]
    timeout: u64,
    #[command(flatten)]
    embedder: EmbedderArgs,
}

#[derive(Args)]
struct EmbedderArgs {
    /// `test-embedder` or the URL of an embedding server.
    #[arg(long, default_value = "test-embedder")]
    embedder: String,
    /// Embedding dimension expected from an HTTP embedder.
    #[arg(long, default_value_t = 256)]
    embed_dim: usize,
}

/// Error carrying the process exit code.
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn data(message: impl std::fmt::Display) -> Self {
        CliError {
            code: EXIT_DATA,
            message: message.to_string(),
        }
    }

    fn transport(message: impl std::fmt::Display) -> Self {
        CliError {
            code: EXIT_TRANSPORT,
            message: message.to_string(),
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(error) => {
            // --help/--version print and exit 0; everything else is usage.
            let code = if error.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = error.print();
            std::process::exit(code);
        }
    };
    if let Err(error) = run(cli) {
        eprintln!("error: {}", error.message);
        std::process::exit(error.code);
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Render { house, rep } => {
            let state = load_house(&house).map_err(CliError::data)?;
            print!("{}", render(&state, rep));
            Ok(())
        }
        Command::Decide {
            house,
            user,
            style,
            rep,
            prefs,
            backend,
            sampling,
            k,
            prompts,
        } => {
            let state = load_house(&house).map_err(CliError::data)?;
            let embedder = build_embedder(&backend.embedder, backend.timeout)?;
            let index = build_index(prefs.as_deref(), embedder.as_ref())?;
            let templates = load_templates(prompts.as_deref())?;
            let llm = build_backend(&backend)?;
            let params = sampling.params();
            let request = DecideRequest {
                style,
                state: &state,
                user_id: user,
                representation: rep,
                prefs: &index,
                backend: llm.as_ref(),
                embedder: embedder.as_ref(),
                params: &params,
                templates: &templates,
                top_k: k,
            };
            let (outcome, trace) = decide(&request).map_err(CliError::data)?;
            let summary = serde_json::json!({
                "outcome": outcome,
                "trace": {
                    "llm_calls": trace.llm_calls.len(),
                    "call_seconds": trace.llm_calls.iter().map(|c| c.seconds).collect::<Vec<_>>(),
                    "retrieval_queries": trace.retrieval_queries.iter().map(|q| q.query.clone()).collect::<Vec<_>>(),
                    "warnings": trace.warnings,
                    "transport_error": trace.transport_error,
                    "total_seconds": trace.total_seconds,
                },
            });
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            match trace.transport_error {
                Some(error) => Err(CliError::transport(error)),
                None => Ok(()),
            }
        }
        Command::Retrieve {
            prefs,
            query,
            k,
            embedder,
        } => {
            let embedder = build_embedder(&embedder, 120)?;
            let index = build_index(Some(&prefs), embedder.as_ref())?;
            let hits = query_top_k(&index, &query, k, embedder.as_ref())
                .map_err(CliError::transport)?;
            for (rank, entry) in hits.iter().enumerate() {
                println!("{}. [{}] {}", rank + 1, entry.tag.keyword(), entry.text);
            }
            Ok(())
        }
        Command::Bench {
            scenarios,
            prefs,
            backend,
            sampling,
            styles,
            representations,
            reps,
            seed,
            k,
            jobs,
            out,
            zero_timing,
            baseline_only,
            prompts,
        } => {
            let scenario_list = load_scenario_dir(&scenarios).map_err(CliError::data)?;
            if baseline_only {
                println!("| Scenario | Category | Candidates | Baseline grade |");
                println!("|---|---|---|---|");
                for scenario in &scenario_list {
                    let counts = candidate_counts(scenario).map_err(CliError::data)?;
                    let grade = baseline_grade(counts).map_err(CliError::data)?;
                    println!(
                        "| {} | {} | {} | {:.3} ({}/{}) |",
                        scenario.name,
                        scenario.category.as_str(),
                        counts.n_total,
                        *grade.numer() as f64 / *grade.denom() as f64,
                        grade.numer(),
                        grade.denom()
                    );
                }
                return Ok(());
            }
            let embedder = build_embedder(&backend.embedder, backend.timeout)?;
            let index = build_index(prefs.as_deref(), embedder.as_ref())?;
            let templates = load_templates(prompts.as_deref())?;
            let label = if backend.backend.starts_with("scripted:") {
                format!("scripted:{}", backend.model)
            } else {
                backend.model.clone()
            };
            let llm = build_backend(&backend)?;
            let config = BenchConfig {
                representations,
                styles,
                reps,
                seed,
                params: sampling.params(),
                top_k: k,
                jobs,
                zero_timing,
                ..BenchConfig::default()
            };
            let result = run_benchmark(
                &scenario_list,
                &[(label, llm)],
                &index,
                embedder.as_ref(),
                &templates,
                &config,
            );
            let records = match result {
                Ok(records) => records,
                Err(BenchError::BackendUnreachable {
                    model,
                    failures,
                    last_error,
                    partial,
                }) => {
                    write_records(&out, &partial, "records.partial.jsonl")?;
                    return Err(CliError::transport(format!(
                        "backend `{model}` unreachable after {failures} consecutive failures ({last_error}); partial records flushed"
                    )));
                }
                Err(other) => return Err(CliError::data(other)),
            };
            write_records(&out, &records, "records.jsonl")?;
            let report = aggregate(&records, &scenario_list).map_err(CliError::data)?;
            emit_report(&report, ReportFormat::Csv, &out).map_err(CliError::data)?;
            emit_report(&report, ReportFormat::Markdown, &out).map_err(CliError::data)?;
            for cell in &report.cells {
                println!(
                    "{} {} {}: avg_grade={:.3} avg_s={:.3} failure_ratio={:.3}",
                    cell.model_label,
                    cell.representation,
                    cell.style,
                    cell.avg_grade,
                    cell.avg_processing_seconds,
                    cell.failure_ratio
                );
            }
            println!("reports written to {}", out.display());
            Ok(())
        }
    }
}

#[derive(Args)]
struct SamplingArgs {
    #[arg(long, default_value_t = 300)]
    max_tokens: u32,
    #[arg(long, default_value_t = 0.05)]
    min_p: f64,
    #[arg(long, default_value_t = 0.2)]
    temperature: f64,
}

impl SamplingArgs {
    fn params(&self) -> GenerationParams {
        GenerationParams {
            max_tokens: self.max_tokens,
            min_p: self.min_p,
            temperature: self.temperature,
        }
    }
}

fn build_backend(args: &BackendArgs) -> Result<Arc<dyn Backend>, CliError> {
    if let Some(path) = args.backend.strip_prefix("scripted:") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("cannot read script `{path}`: {e}")))?;
        let replies: Vec<String> = serde_json::from_str(&text)
            .map_err(|e| CliError::data(format!("script `{path}` must be a JSON array of strings: {e}")))?;
        if replies.is_empty() {
            return Err(CliError::data(format!("script `{path}` is empty")));
        }
        return Ok(Arc::new(ScriptedBackend::cycling(replies)));
    }
    if args.backend != "http" {
        return Err(CliError {
            code: EXIT_USAGE,
            message: format!("unknown backend `{}` (http | scripted:<file>)", args.backend),
        });
    }
    if !args.endpoint.starts_with("http://") && !args.endpoint.starts_with("https://") {
        return Err(CliError::transport(format!(
            "endpoint `{}` is not an http(s) URL",
            args.endpoint
        )));
    }
    let api_key = std::env::var("HEARTH_API_KEY").ok();
    Ok(Arc::new(HttpBackend::new(
        &args.endpoint,
        &args.model,
        api_key,
        Duration::from_secs(args.timeout),
    )))
}

fn build_embedder(args: &EmbedderArgs, timeout: u64) -> Result<Box<dyn Embedder>, CliError> {
    if args.embedder == "test-embedder" {
        return Ok(Box::new(HashEmbedder::new(args.embed_dim)));
    }
    if args.embedder.starts_with("http://") || args.embedder.starts_with("https://") {
        return Ok(Box::new(HttpEmbedder::new(
            &args.embedder,
            args.embed_dim,
            Duration::from_secs(timeout),
        )));
    }
    Err(CliError {
        code: EXIT_USAGE,
        message: format!(
            "unknown embedder `{}` (test-embedder | http(s) URL)",
            args.embedder
        ),
    })
}

fn build_index(
    prefs: Option<&std::path::Path>,
    embedder: &dyn Embedder,
) -> Result<VectorIndex, CliError> {
    match prefs {
        None => Ok(VectorIndex::empty(embedder.dimension())),
        Some(path) => {
            let entries = load_preferences(path).map_err(CliError::data)?;
            VectorIndex::build(entries, embedder).map_err(CliError::transport)
        }
    }
}

fn load_templates(dir: Option<&std::path::Path>) -> Result<PromptTemplates, CliError> {
    match dir {
        None => Ok(PromptTemplates::default()),
        Some(dir) => PromptTemplates::from_dir(dir).map_err(CliError::data),
    }
}

fn write_records(
    out: &std::path::Path,
    records: &[RunRecord],
    name: &str,
) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(CliError::data)?;
    let lines: String = records
        .iter()
        .map(|record| {
            let mut line = serde_json::to_string(record).expect("record serializes");
            line.push('\n');
            line
        })
        .collect();
    std::fs::write(out.join(name), lines).map_err(CliError::data)
}
