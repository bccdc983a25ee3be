//! `hintlab`: benchmark runs, study-log analysis and the quiz server.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hintlab_core::analysis::{alignment_report, engagement_tables, study_stats, StudyLog};
use hintlab_core::assessment::{assessment_accuracy, load_labels, Assessor};
use hintlab_core::bench::table::{higher_is_better, parse_table_csv, METRIC_COLUMNS};
use hintlab_core::bench::{
    load_rows, pareto_front, pareto_points, render_table, run_benchmark, RunConfig, StrategySelection,
    TableFormat, ROWS_FILE, TABLE_CSV_FILE,
};
use hintlab_core::client::cache::ResponseCache;
use hintlab_core::client::{EndpointTable, ModelClient};
use hintlab_core::dataset::{load_sciq, quiz_set, DatasetStats, Question, SubjectMix};
use hintlab_core::metrics::CorpusMetricTable;
use hintlab_core::prompts::PromptSet;
use hintlab_quiz::simulate::{Observed, Participant};
use hintlab_quiz::{FileStore, MemoryStore, QuizClient, QuizService, ServiceConfig, SessionStore};

#[derive(Parser)]
#[command(name = "hintlab", version, about = "Hint-chain benchmarks, study analysis and the quiz server")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dataset summary: instances, subjects and mean word counts.
    Stats {
        /// SciQ-layout JSON lines.
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "dataset")]
        label: String,
    },
    #[command(subcommand)]
    Bench(BenchCommand),
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    #[command(subcommand)]
    Assess(AssessCommand),
    /// Serve the quiz over HTTP.
    Serve(ServeArgs),
    /// Play scripted participants against a running quiz server.
    Simulate {
        #[arg(long, default_value = "http://127.0.0.1:8080")]
        url: String,
        /// Quiz file, used for the participants' correct answers.
        #[arg(long)]
        quiz: PathBuf,
        #[arg(long, default_value_t = 1)]
        participants: usize,
    },
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Generate and score hint chains; writes rows and tables under the
    /// output directory.
    Run(RunArgs),
    /// Re-render the table of a finished run.
    Table {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "text")]
        format: TableFormat,
    },
    /// Pareto front between two table columns.
    Pareto {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "Leakage_EM")]
        x: String,
        #[arg(long, default_value = "InfoGain_comb")]
        y: String,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    strategy: Option<StrategySelection>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    resume: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    limit: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Csv,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Satisfaction, informativeness and leakage tests by strategy.
    Stats {
        #[arg(long)]
        log: PathBuf,
        /// Yates' continuity correction on the 2×2 tests.
        #[arg(long)]
        yates: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
    },
    /// Automatic metrics against participant feedback.
    Align {
        #[arg(long)]
        log: PathBuf,
        /// Metric rows (`rows.jsonl` of a benchmark run).
        #[arg(long)]
        metrics: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
    },
    /// Hint usage, attempts and ratings by condition.
    Engagement {
        #[arg(long)]
        log: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
    },
}

#[derive(Subcommand)]
enum AssessCommand {
    /// Agreement of the answer assessor with hand-labelled verdicts.
    Accuracy {
        /// Endpoint config; an `assessor` endpoint is required.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Questions the submissions refer to, in the quiz layout.
        #[arg(long)]
        questions: PathBuf,
        #[arg(long)]
        labels: PathBuf,
    },
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    quiz: PathBuf,
    /// Session store directory; sessions live in memory without one.
    #[arg(long)]
    store: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Endpoint config for hint generation and assessment; mock models
    /// without one.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replacement survey wording (JSON).
    #[arg(long)]
    survey_text: Option<PathBuf>,
}

fn write_out(body: &str) {
    print!("{body}");
}

fn client_from(config: Option<&Path>) -> Result<Arc<ModelClient>> {
    let Some(path) = config else {
        return Ok(Arc::new(ModelClient::from_table(EndpointTable::all_mock())));
    };
    let config = RunConfig::load(path).map_err(anyhow::Error::msg)?;
    let cache_dir = config.cache_dir();
    let cache = ResponseCache::open(&cache_dir).with_context(|| format!("opening cache {}", cache_dir.display()))?;
    Ok(Arc::new(
        ModelClient::from_table(config.endpoint_table())
            .cache(Arc::new(cache))
            .max_in_flight(config.concurrency),
    ))
}

fn load_table(out: &Path) -> Result<CorpusMetricTable> {
    let csv = out.join(TABLE_CSV_FILE);
    if csv.exists() {
        let text = std::fs::read_to_string(&csv)?;
        return parse_table_csv(&text).map_err(|e| anyhow::anyhow!("{}: {e}", csv.display()));
    }
    Ok(CorpusMetricTable::from_rows(&load_rows(&out.join(ROWS_FILE))?))
}

fn pareto_report(table: &CorpusMetricTable, x: &str, y: &str) -> Result<String> {
    for c in [x, y] {
        if !METRIC_COLUMNS.contains(&c) {
            bail!("unknown column {c:?}; expected one of {}", METRIC_COLUMNS.join(", "));
        }
    }
    let points = pareto_points(table, x, y);
    let front = pareto_front(&points, higher_is_better(x), higher_is_better(y));
    let mut out = format!("label,{x},{y},on_front\n");
    for p in &points {
        out.push_str(&format!("{},{:.6},{:.6},{}\n", p.label, p.x, p.y, front.contains(&p.label)));
    }
    Ok(out)
}

async fn bench(cmd: BenchCommand) -> Result<()> {
    match cmd {
        BenchCommand::Run(args) => {
            let mut config = RunConfig::load(&args.config).map_err(anyhow::Error::msg)?;
            if let Some(s) = args.strategy {
                config.strategy = s;
            }
            if let Some(seed) = args.seed {
                config.seed = seed;
            }
            if let Some(out) = args.out {
                config.output_dir = out;
            }
            if args.limit.is_some() {
                config.limit = args.limit;
            }
            config.resume |= args.resume;
            let outcome = run_benchmark(&config).await?;
            tracing::info!(
                computed = outcome.computed,
                resumed = outcome.resumed,
                out = %config.output_dir.display(),
                "benchmark finished"
            );
            write_out(&render_table(&outcome.table, TableFormat::Text));
        }
        BenchCommand::Table { out, format } => write_out(&render_table(&load_table(&out)?, format)),
        BenchCommand::Pareto { out, x, y } => write_out(&pareto_report(&load_table(&out)?, &x, &y)?),
    }
    Ok(())
}

fn analyze(cmd: AnalyzeCommand) -> Result<()> {
    let load = |p: &Path| StudyLog::load(p).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()));
    match cmd {
        AnalyzeCommand::Stats { log, yates, format } => {
            let stats = study_stats(&load(&log)?, yates);
            write_out(&match format {
                OutputFormat::Text => stats.render_text(),
                OutputFormat::Csv => stats.render_csv(),
            });
        }
        AnalyzeCommand::Align { log, metrics, format } => {
            let report = alignment_report(&load(&log)?, &load_rows(&metrics)?)?;
            write_out(&match format {
                OutputFormat::Text => report.render_text(),
                OutputFormat::Csv => report.render_csv(),
            });
        }
        AnalyzeCommand::Engagement { log, format } => {
            let tables = engagement_tables(&load(&log)?);
            write_out(&match format {
                OutputFormat::Text => tables.render_text(),
                OutputFormat::Csv => tables.render_csv(),
            });
        }
    }
    Ok(())
}

async fn assess(cmd: AssessCommand) -> Result<()> {
    let AssessCommand::Accuracy { config, questions, labels } = cmd;
    let client = client_from(config.as_deref())?;
    let assessor = Assessor::new(client, Arc::new(PromptSet::builtin()));
    let text = std::fs::read_to_string(&questions).with_context(|| questions.display().to_string())?;
    let questions = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str::<Question>)
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("parsing {}", questions.display()))?;
    let labels = load_labels(&labels).map_err(anyhow::Error::msg)?;
    let report = assessment_accuracy(&assessor, &questions, &labels).await;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

async fn serve(args: ServeArgs) -> Result<()> {
    let store: Arc<dyn SessionStore> = match &args.store {
        Some(dir) => Arc::new(FileStore::open(dir).with_context(|| format!("opening store {}", dir.display()))?),
        None => Arc::new(MemoryStore::new()),
    };
    let mut builder = QuizService::builder(client_from(args.config.as_deref())?)
        .quiz_file(&args.quiz, &SubjectMix::study_default())
        .store(store)
        .config(ServiceConfig { seed: args.seed, ..ServiceConfig::default() });
    if let Some(path) = &args.survey_text {
        builder = builder.survey_text_file(path)?;
    }
    let service = Arc::new(builder.build()?);
    let status = service.status().await;
    if !status.ready {
        tracing::warn!(reason = ?status.reason, "quiz not ready; sessions will be refused");
    }
    hintlab_quiz::http::serve(service, args.addr, |addr| tracing::info!(%addr, "listening")).await?;
    Ok(())
}

async fn simulate(url: &str, quiz: &Path, participants: usize) -> Result<()> {
    let questions = quiz_set(quiz, &SubjectMix::study_default())?;
    let client = QuizClient::new(url);
    let player = Participant::new(&client, &questions);
    let mut seen = Observed::default();
    for i in 0..participants {
        let id = player.join(&format!("sim-{i}"), None).await?;
        player.run(&id, None, &mut seen).await?;
        tracing::info!(session = %id, "participant finished");
    }
    println!("{}", serde_json::to_string_pretty(&seen)?);
    Ok(())
}

#[tokio::main]
async fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match Cli::parse().command {
        Command::Stats { dataset, label } => {
            let records = load_sciq(&dataset)?;
            write_out(&DatasetStats::of_records(&records).render(&label));
        }
        Command::Bench(cmd) => bench(cmd).await?,
        Command::Analyze(cmd) => analyze(cmd)?,
        Command::Assess(cmd) => assess(cmd).await?,
        Command::Serve(args) => serve(args).await?,
        Command::Simulate { url, quiz, participants } => simulate(&url, &quiz, participants).await?,
    }
    Ok(())
}
