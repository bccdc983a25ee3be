//! Static chains-of-hints, dynamic next hints and hint-list parsing.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::{Arc, LazyLock, Mutex};

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::client::{ClientError, ModelClient, Role};
use crate::dataset::Question;
use crate::prompts::{PromptError, PromptSet, RenderedPrompt};

/// Hints per chain in the static setting and the cap in the study protocol.
pub const MAX_HINTS: usize = 4;

/// Re-asks after an unparseable generator reply.
pub const FORMAT_RETRIES: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HintStrategy {
    Static,
    Dynamic,
}

impl HintStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            HintStrategy::Static => "static",
            HintStrategy::Dynamic => "dynamic",
        }
    }
}

impl fmt::Display for HintStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hint {
    /// 1-based position in its chain.
    pub index: usize,
    pub text: String,
    pub strategy: HintStrategy,
    pub model_id: String,
    pub prompt_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HintChain {
    pub question_id: String,
    pub hints: Vec<Hint>,
}

impl HintChain {
    pub fn empty(question_id: impl Into<String>) -> Self {
        Self { question_id: question_id.into(), hints: Vec::new() }
    }

    /// Chain from bare texts, mostly for tests and offline evaluation.
    pub fn from_texts<S: AsRef<str>>(
        question_id: impl Into<String>,
        strategy: HintStrategy,
        texts: &[S],
    ) -> Self {
        Self {
            question_id: question_id.into(),
            hints: texts
                .iter()
                .enumerate()
                .map(|(i, t)| Hint {
                    index: i + 1,
                    text: t.as_ref().to_string(),
                    strategy,
                    model_id: String::new(),
                    prompt_hash: String::new(),
                })
                .collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.hints.len()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.hints.iter().map(|h| h.text.as_str()).collect()
    }

    /// Appends a hint, renumbering it to keep indices contiguous.
    pub fn push(&mut self, mut hint: Hint) {
        hint.index = self.hints.len() + 1;
        self.hints.push(hint);
    }
}

/// A learner's incorrect submissions, verbatim and in submission order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptHistory {
    pub attempts: Vec<String>,
}

impl AttemptHistory {
    pub fn new<S: Into<String>>(attempts: impl IntoIterator<Item = S>) -> Self {
        Self { attempts: attempts.into_iter().map(Into::into).collect() }
    }
}

#[derive(Debug, Error)]
pub enum HintError {
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("expected {expected:?} hints, parsed {found}")]
    GenerationFormat {
        raw: String,
        expected: Option<usize>,
        found: usize,
    },
    #[error("hint budget of {limit} exhausted")]
    HintBudgetExhausted { limit: usize },
}

static THINK_BLOCK: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?is)<think>.*?</think>").unwrap());
static HINT_MARKER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^(?:[#>*_\s]*)hint\s*(?:#?\s*\d+)?\s*(?:\*\*|__)?\s*[:.)\-–]\s*(?:\*\*|__)?\s*")
        .unwrap()
});
static NUMBER_MARKER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(?:[*_\s]*)\d+\s*[.):]\s*(?:\*\*|__)?\s*").unwrap());
static BULLET_MARKER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[-*•]\s+").unwrap());

fn strip_reasoning(raw: &str) -> &str {
    // Unclosed reasoning or a closing tag without its opener: keep what
    // follows the last closing tag.
    match raw.rfind("</think>") {
        Some(pos) => &raw[pos + "</think>".len()..],
        None => raw,
    }
}

fn strip_marker(line: &str) -> Option<&str> {
    for re in [&*HINT_MARKER, &*NUMBER_MARKER, &*BULLET_MARKER] {
        if let Some(m) = re.find(line) {
            return Some(&line[m.end()..]);
        }
    }
    None
}

fn clean_hint(text: &str) -> String {
    let collapsed = text.split_whitespace().collect::<Vec<_>>().join(" ");
    let mut t = collapsed.as_str();
    loop {
        let before = t;
        t = t.trim();
        for wrap in ["**", "__", "\"", "“", "”", "*"] {
            t = t.strip_prefix(wrap).unwrap_or(t);
            t = t.strip_suffix(wrap).unwrap_or(t);
        }
        if t == before {
            break;
        }
    }
    t.to_string()
}

/// Extracts hints from raw model output.
///
/// Reasoning blocks and any preamble before the first marker are dropped.
/// Recognized markers are `Hint i:` (also `Hint:` and bold variants),
/// `1.` / `1)` and `-` / `*` bullets. A hint continues onto following lines
/// until a blank line or the next marker. When exactly one hint is expected
/// and no marker is present, the first paragraph is the hint.
pub fn parse_hints(raw: &str, expected: Option<usize>) -> Result<Vec<String>, HintError> {
    let without_blocks = THINK_BLOCK.replace_all(raw, "");
    let body = strip_reasoning(&without_blocks);

    let mut hints: Vec<String> = Vec::new();
    let mut open = false;
    for line in body.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            open = false;
            continue;
        }
        if let Some(rest) = strip_marker(trimmed) {
            hints.push(rest.to_string());
            open = true;
        } else if open {
            let last = hints.last_mut().expect("open implies a hint");
            last.push(' ');
            last.push_str(trimmed);
        }
    }
    let mut hints: Vec<String> = hints
        .iter()
        .map(|h| clean_hint(h))
        .filter(|h| !h.is_empty())
        .collect();

    if hints.is_empty() && expected == Some(1) {
        if let Some(paragraph) = body.split("\n\n").map(clean_hint).find(|p| !p.is_empty()) {
            hints.push(paragraph);
        }
    }

    match expected {
        Some(k) if hints.len() != k => Err(HintError::GenerationFormat {
            raw: raw.to_string(),
            expected,
            found: hints.len(),
        }),
        _ => Ok(hints),
    }
}

/// One generator call: what was asked, what came back, what was kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationLog {
    pub question_id: String,
    pub strategy: HintStrategy,
    pub attempt: u32,
    pub prompt_hash: String,
    pub raw_output: String,
    pub parsed_hints: Option<Vec<String>>,
}

/// Appends generation logs as JSON lines.
pub struct GenerationLogSink {
    file: Mutex<File>,
}

impl GenerationLogSink {
    pub fn open(path: &Path) -> std::io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self { file: Mutex::new(file) })
    }

    pub fn write(&self, log: &GenerationLog) {
        let mut line = serde_json::to_string(log).expect("log serializes");
        line.push('\n');
        if let Err(e) = self.file.lock().unwrap().write_all(line.as_bytes()) {
            tracing::warn!(error = %e, "could not write generation log");
        }
    }
}

fn numbered(label: &str, items: &[&str]) -> String {
    if items.is_empty() {
        return "(none)".to_string();
    }
    items
        .iter()
        .enumerate()
        .map(|(i, t)| format!("{label} {}: {t}", i + 1))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Generates hints through the generator endpoint.
pub struct HintGenerator {
    client: Arc<ModelClient>,
    prompts: Arc<PromptSet>,
    chain_length: usize,
    format_retries: u32,
    log: Option<Arc<GenerationLogSink>>,
}

impl HintGenerator {
    pub fn new(client: Arc<ModelClient>, prompts: Arc<PromptSet>) -> Self {
        Self {
            client,
            prompts,
            chain_length: MAX_HINTS,
            format_retries: FORMAT_RETRIES,
            log: None,
        }
    }

    pub fn chain_length(mut self, k: usize) -> Self {
        self.chain_length = k.max(1);
        self
    }

    pub fn format_retries(mut self, retries: u32) -> Self {
        self.format_retries = retries;
        self
    }

    pub fn log_to(mut self, sink: Arc<GenerationLogSink>) -> Self {
        self.log = Some(sink);
        self
    }

    pub fn client(&self) -> &Arc<ModelClient> {
        &self.client
    }

    pub fn static_prompt(&self, question: &Question) -> Result<RenderedPrompt, HintError> {
        let values = BTreeMap::from([
            ("question", question.text.clone()),
            ("answer", question.answer.clone()),
            ("k", self.chain_length.to_string()),
        ]);
        Ok(self.prompts.static_hints.render(&values)?)
    }

    /// The dynamic prompt carries every prior hint and every attempt
    /// verbatim. It does not mention the chain budget.
    pub fn dynamic_prompt(
        &self,
        question: &Question,
        prior: &HintChain,
        history: &AttemptHistory,
    ) -> Result<RenderedPrompt, HintError> {
        let attempts: Vec<&str> = history.attempts.iter().map(String::as_str).collect();
        let values = BTreeMap::from([
            ("question", question.text.clone()),
            ("answer", question.answer.clone()),
            ("prior_hints", numbered("Hint", &prior.texts())),
            ("attempts", numbered("Attempt", &attempts)),
        ]);
        Ok(self.prompts.dynamic_hint.render(&values)?)
    }

    async fn ask(
        &self,
        question: &Question,
        strategy: HintStrategy,
        prompt: &RenderedPrompt,
        expected: usize,
    ) -> Result<Vec<String>, HintError> {
        let prompt_hash = prompt.hash();
        let mut last = None;
        for attempt in 0..=self.format_retries {
            let raw = self
                .client
                .complete_parts(Role::Generator, prompt.system.as_deref(), &prompt.user, attempt)
                .await?;
            let parsed = parse_hints(&raw, Some(expected));
            if let Some(sink) = &self.log {
                sink.write(&GenerationLog {
                    question_id: question.id.clone(),
                    strategy,
                    attempt,
                    prompt_hash: prompt_hash.clone(),
                    raw_output: raw.clone(),
                    parsed_hints: parsed.as_ref().ok().cloned(),
                });
            }
            match parsed {
                Ok(hints) => return Ok(hints),
                Err(e) => {
                    tracing::warn!(question = %question.id, attempt, "unparseable generator output");
                    last = Some(e);
                }
            }
        }
        Err(last.expect("at least one attempt"))
    }

    fn model_id(&self) -> Result<String, HintError> {
        Ok(self.client.endpoint(Role::Generator)?.model_id.clone())
    }

    /// One generator call for the whole chain (plus format retries).
    pub async fn generate_static_chain(&self, question: &Question) -> Result<HintChain, HintError> {
        let prompt = self.static_prompt(question)?;
        let texts = self
            .ask(question, HintStrategy::Static, &prompt, self.chain_length)
            .await?;
        let model_id = self.model_id()?;
        let prompt_hash = prompt.hash();
        Ok(HintChain {
            question_id: question.id.clone(),
            hints: texts
                .into_iter()
                .enumerate()
                .map(|(i, text)| Hint {
                    index: i + 1,
                    text,
                    strategy: HintStrategy::Static,
                    model_id: model_id.clone(),
                    prompt_hash: prompt_hash.clone(),
                })
                .collect(),
        })
    }

    /// The hint at position `prior.k() + 1`, conditioned on the prior hints
    /// and the learner's wrong attempts.
    pub async fn generate_next_dynamic_hint(
        &self,
        question: &Question,
        prior: &HintChain,
        history: &AttemptHistory,
    ) -> Result<Hint, HintError> {
        if prior.k() >= MAX_HINTS {
            return Err(HintError::HintBudgetExhausted { limit: MAX_HINTS });
        }
        let prompt = self.dynamic_prompt(question, prior, history)?;
        let mut texts = self.ask(question, HintStrategy::Dynamic, &prompt, 1).await?;
        Ok(Hint {
            index: prior.k() + 1,
            text: texts.remove(0),
            strategy: HintStrategy::Dynamic,
            model_id: self.model_id()?,
            prompt_hash: prompt.hash(),
        })
    }
}
