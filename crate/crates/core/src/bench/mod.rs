//! Batch benchmark runs: generate chains over a dataset, score them and
//! write tables.

pub mod config;
pub mod table;

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use futures::stream::{self, StreamExt};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use config::{ConsistencyConfig, RunConfig, StrategySelection, REQUIRED_ROLES};
pub use table::{pareto_front, pareto_points, render_table, ParetoPoint, TableFormat, METRIC_COLUMNS};

use crate::client::cache::ResponseCache;
use crate::client::{ClientError, ModelClient, Role};
use crate::dataset::{load_sciq, to_freeform, DatasetError, Question, SimulatedAttempts};
use crate::hints::{AttemptHistory, HintChain, HintError, HintGenerator, HintStrategy};
use crate::metrics::{
    AlignmentScorer, ChainEvaluator, CorpusMetricTable, HttpAlignmentScorer, LexicalOverlapScorer, MetricError,
    MetricRow,
};
use crate::prompts::{PromptError, PromptSet};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid run config: {0}")]
    Config(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error("question {question} ({strategy}): {source}")]
    Hint {
        question: String,
        strategy: HintStrategy,
        source: HintError,
    },
    #[error("question {question} ({strategy}): {source}")]
    Metric {
        question: String,
        strategy: HintStrategy,
        source: MetricError,
    },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io { path: path.to_path_buf(), source }
}

pub const CHECKPOINT_FILE: &str = "checkpoint.jsonl";
pub const ROWS_FILE: &str = "rows.jsonl";
pub const TABLE_TEXT_FILE: &str = "table.txt";
pub const TABLE_CSV_FILE: &str = "table.csv";

/// Attempts shown before hint `i` (1-based): one after each of the first
/// three hints, so hint 4 sees all three distractors.
pub fn attempts_before(i: usize) -> usize {
    (i - 1).min(3)
}

/// Builds a dynamic chain against simulated learner attempts.
pub async fn dynamic_chain(
    generator: &HintGenerator,
    question: &Question,
    attempts: &SimulatedAttempts,
    k: usize,
) -> Result<HintChain, HintError> {
    let mut chain = HintChain::empty(&question.id);
    for i in 1..=k {
        let history = AttemptHistory::new(attempts.attempts[..attempts_before(i)].iter().cloned());
        let hint = generator.generate_next_dynamic_hint(question, &chain, &history).await?;
        chain.push(hint);
    }
    Ok(chain)
}

/// Selected questions in dataset order: the first `limit`, then a seeded
/// sample of `sample`.
pub fn select_questions(
    mut items: Vec<(Question, SimulatedAttempts)>,
    limit: Option<usize>,
    sample: Option<usize>,
    seed: u64,
) -> Vec<(Question, SimulatedAttempts)> {
    if let Some(n) = limit {
        items.truncate(n);
    }
    if let Some(n) = sample {
        if n < items.len() {
            let mut idx: Vec<usize> = (0..items.len()).collect();
            idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let mut keep: Vec<usize> = idx.into_iter().take(n).collect();
            keep.sort_unstable();
            let mut slots: Vec<Option<_>> = items.into_iter().map(Some).collect();
            items = keep.into_iter().map(|i| slots[i].take().unwrap()).collect();
        }
    }
    items
}

fn read_checkpoint(path: &Path) -> Result<BTreeMap<(String, HintStrategy), MetricRow>, BenchError> {
    let mut done = BTreeMap::new();
    if !path.exists() {
        return Ok(done);
    }
    let file = File::open(path).map_err(io_err(path))?;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(io_err(path))?;
        // A run killed mid-write leaves a torn last line; that question is redone.
        if let Ok(row) = serde_json::from_str::<MetricRow>(&line) {
            done.insert((row.question_id.clone(), row.strategy), row);
        }
    }
    Ok(done)
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub rows: Vec<MetricRow>,
    pub table: CorpusMetricTable,
    pub resumed: usize,
    pub computed: usize,
}

struct Pipeline {
    generator: HintGenerator,
    evaluator: ChainEvaluator,
    chain_length: usize,
    model_id: String,
}

impl Pipeline {
    async fn run_one(
        &self,
        question: &Question,
        attempts: &SimulatedAttempts,
        strategy: HintStrategy,
    ) -> Result<MetricRow, BenchError> {
        let hint_err = |source| BenchError::Hint { question: question.id.clone(), strategy, source };
        let chain = match strategy {
            HintStrategy::Static => self.generator.generate_static_chain(question).await.map_err(hint_err)?,
            HintStrategy::Dynamic => dynamic_chain(&self.generator, question, attempts, self.chain_length)
                .await
                .map_err(hint_err)?,
        };
        let (report, flags) = self
            .evaluator
            .evaluate(question, &chain)
            .await
            .map_err(|source| BenchError::Metric { question: question.id.clone(), strategy, source })?;
        Ok(MetricRow {
            question_id: question.id.clone(),
            session_id: None,
            hint_index: None,
            model_id: self.model_id.clone(),
            strategy,
            hints: chain.texts().iter().map(|s| s.to_string()).collect(),
            report,
            flags,
        })
    }
}

/// Runs the configured benchmark, checkpointing each finished
/// (question, strategy) pair. With `resume`, pairs already in the
/// checkpoint are not recomputed. On failure the checkpoint keeps every row
/// finished so far.
pub async fn run_benchmark(config: &RunConfig) -> Result<BenchOutcome, BenchError> {
    config.validate().map_err(BenchError::Config)?;
    let records = load_sciq(&config.dataset)?;
    let items = select_questions(
        records.iter().map(to_freeform).collect(),
        config.limit,
        config.sample,
        config.seed,
    );

    let out = &config.output_dir;
    std::fs::create_dir_all(out).map_err(io_err(out))?;
    let cache_dir = config.cache_dir();
    let cache = Arc::new(ResponseCache::open(&cache_dir).map_err(io_err(&cache_dir))?);
    let client = Arc::new(
        ModelClient::from_table(config.endpoint_table())
            .cache(cache)
            .max_in_flight(config.concurrency),
    );
    let prompts = Arc::new(match &config.prompts_dir {
        Some(dir) => PromptSet::load_dir(dir)?,
        None => PromptSet::builtin(),
    });
    let scorer: Arc<dyn AlignmentScorer> = match &config.consistency {
        ConsistencyConfig::Lexical => Arc::new(LexicalOverlapScorer),
        ConsistencyConfig::Http { url } => Arc::new(HttpAlignmentScorer::new(url.clone())),
    };
    let pipeline = Pipeline {
        generator: HintGenerator::new(client.clone(), prompts.clone()).chain_length(config.chain_length),
        evaluator: ChainEvaluator::new(client.clone(), prompts, scorer, config.info_gain_mode),
        chain_length: config.chain_length,
        model_id: client.endpoint(Role::Generator)?.model_id.clone(),
    };

    let checkpoint_path = out.join(CHECKPOINT_FILE);
    let mut done = if config.resume { read_checkpoint(&checkpoint_path)? } else { BTreeMap::new() };
    let resumed = done.len();
    let mut checkpoint = OpenOptions::new()
        .create(true)
        .append(config.resume)
        .write(true)
        .truncate(!config.resume)
        .open(&checkpoint_path)
        .map_err(io_err(&checkpoint_path))?;
    if config.resume {
        // Terminate a torn trailing line before appending.
        let bytes = std::fs::read(&checkpoint_path).map_err(io_err(&checkpoint_path))?;
        if bytes.last().is_some_and(|b| *b != b'\n') {
            checkpoint.write_all(b"\n").map_err(io_err(&checkpoint_path))?;
        }
    }

    let strategies = config.strategy.strategies();
    let jobs: Vec<(&Question, &SimulatedAttempts, HintStrategy)> = strategies
        .iter()
        .flat_map(|s| items.iter().map(move |(q, a)| (q, a, *s)))
        .filter(|(q, _, s)| !done.contains_key(&(q.id.clone(), *s)))
        .collect();
    let mut computed = 0;
    let mut results = stream::iter(jobs)
        .map(|(q, a, s)| pipeline.run_one(q, a, s))
        .buffer_unordered(config.concurrency);
    while let Some(result) = results.next().await {
        let row = result?;
        let mut line = serde_json::to_string(&row).expect("rows serialize");
        line.push('\n');
        checkpoint.write_all(line.as_bytes()).map_err(io_err(&checkpoint_path))?;
        checkpoint.flush().map_err(io_err(&checkpoint_path))?;
        done.insert((row.question_id.clone(), row.strategy), row);
        computed += 1;
    }
    drop(results);

    let mut rows = Vec::with_capacity(items.len() * strategies.len());
    for s in &strategies {
        for (q, _) in &items {
            if let Some(row) = done.remove(&(q.id.clone(), *s)) {
                rows.push(row);
            }
        }
    }
    let table = CorpusMetricTable::from_rows(&rows);
    write_outputs(out, &rows, &table)?;
    Ok(BenchOutcome { rows, table, resumed, computed })
}

/// `rows.jsonl`, `table.txt` and `table.csv` under `out`.
pub fn write_outputs(out: &Path, rows: &[MetricRow], table: &CorpusMetricTable) -> Result<(), BenchError> {
    let mut jsonl = String::new();
    for row in rows {
        jsonl.push_str(&serde_json::to_string(row).expect("rows serialize"));
        jsonl.push('\n');
    }
    for (name, body) in [
        (ROWS_FILE, jsonl),
        (TABLE_TEXT_FILE, render_table(table, TableFormat::Text)),
        (TABLE_CSV_FILE, render_table(table, TableFormat::Csv)),
    ] {
        let path = out.join(name);
        std::fs::write(&path, body).map_err(io_err(&path))?;
    }
    Ok(())
}

pub fn load_rows(path: &Path) -> Result<Vec<MetricRow>, BenchError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            serde_json::from_str(l).map_err(|e| BenchError::Io {
                path: path.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interleaving_schedule() {
        let seen: Vec<usize> = (1..=4).map(attempts_before).collect();
        assert_eq!(seen, [0, 1, 2, 3]);
    }
}
