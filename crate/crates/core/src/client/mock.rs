//! Deterministic offline models, one per role.
//!
//! The mock reads the fields it needs back out of the rendered prompt, so it
//! works with the built-in templates and with any override that keeps the
//! `Question:` / `Answer:` / `Hint i:` labels. Replies depend only on the
//! endpoint's model id and the prompt, which keeps benchmark runs
//! reproducible without network access.

use async_trait::async_trait;
use sha2::{Digest, Sha256};

use super::{
    ChatRequest, ChatResponse, EmbeddingDatum, EmbeddingRequest, EmbeddingResponse, EndpointRole,
    Role, Transport, TransportError,
};

pub const MOCK_EMBEDDING_DIM: usize = 64;

const STOPWORDS: &[&str] = &[
    "a", "an", "the", "of", "in", "on", "to", "is", "are", "was", "were", "what", "which", "who",
    "how", "why", "when", "where", "does", "do", "that", "this", "by", "for", "with", "and", "or",
    "as", "at", "from", "be", "it", "its", "called", "known", "type", "kind",
];

#[derive(Debug, Clone, Default)]
pub struct MockTransport;

impl MockTransport {
    pub fn new() -> Self {
        Self
    }

    pub fn reply(&self, endpoint: &EndpointRole, prompt: &str) -> String {
        match endpoint.role {
            Role::Generator => generate(&endpoint.model_id, prompt),
            Role::QaEvaluator => answer_question(prompt),
            Role::LeakageJudge => judge_leakage(prompt),
            Role::Assessor => judge_submission(prompt),
            Role::Embedder => String::new(),
        }
    }
}

#[async_trait]
impl Transport for MockTransport {
    async fn chat(
        &self,
        endpoint: &EndpointRole,
        request: &ChatRequest,
    ) -> Result<ChatResponse, TransportError> {
        Ok(ChatResponse::from_text(self.reply(endpoint, &request.prompt_text())))
    }

    async fn embed(
        &self,
        _endpoint: &EndpointRole,
        request: &EmbeddingRequest,
    ) -> Result<EmbeddingResponse, TransportError> {
        Ok(EmbeddingResponse {
            data: request
                .input
                .iter()
                .enumerate()
                .map(|(index, t)| EmbeddingDatum { index, embedding: hashed_bag_of_words(t) })
                .collect(),
        })
    }
}

fn digest(parts: &[&str]) -> [u8; 32] {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    h.finalize().into()
}

fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn content_words(text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for w in words(text) {
        if w.len() > 2 && !STOPWORDS.contains(&w.as_str()) && !out.contains(&w) {
            out.push(w);
        }
    }
    out
}

/// Value of the last line starting with `label`.
fn field<'a>(prompt: &'a str, label: &str) -> Option<&'a str> {
    prompt
        .lines()
        .rev()
        .find_map(|l| l.trim_start().strip_prefix(label))
        .map(str::trim)
}

/// Non-blank lines following a line equal to `header`, up to the next blank line.
fn block(prompt: &str, header: &str) -> Vec<String> {
    let mut lines = prompt.lines().skip_while(|l| l.trim() != header);
    if lines.next().is_none() {
        return Vec::new();
    }
    lines
        .take_while(|l| !l.trim().is_empty())
        .map(|l| l.trim().to_string())
        .collect()
}

fn hint_lines(prompt: &str) -> Vec<String> {
    prompt
        .lines()
        .filter_map(|l| {
            let l = l.trim();
            let rest = l.strip_prefix("Hint ")?;
            let (num, text) = rest.split_once(':')?;
            num.trim().parse::<usize>().ok()?;
            Some(text.trim().to_string())
        })
        .collect()
}

fn contains_phrase(haystack: &str, needle: &str) -> bool {
    let hay = words(haystack);
    let nee = words(needle);
    !nee.is_empty() && hay.windows(nee.len()).any(|w| w == nee.as_slice())
}

fn generate(model_id: &str, prompt: &str) -> String {
    let question = field(prompt, "Question:").unwrap_or("");
    let answer = field(prompt, "Answer:").unwrap_or("");
    let h = digest(&[model_id, question, answer]);
    let topic = content_words(question);
    let topic_at = |i: usize| topic.get(i % topic.len().max(1)).cloned().unwrap_or_else(|| "the topic".into());
    let answer_words = words(answer);
    let first = answer.chars().find(|c| c.is_alphanumeric()).unwrap_or('?').to_ascii_lowercase();
    let last = answer.chars().rev().find(|c| c.is_alphanumeric()).unwrap_or('?').to_ascii_lowercase();
    let n_words = answer_words.len().max(1);

    if prompt.contains("Hints already shown:") {
        let prior = block(prompt, "Hints already shown:")
            .into_iter()
            .filter(|l| l != "(none)")
            .count();
        let attempts: Vec<String> = block(prompt, "Incorrect attempts so far:")
            .into_iter()
            .filter(|l| l != "(none)")
            .map(|l| l.split_once(':').map(|(_, a)| a.trim().to_string()).unwrap_or(l))
            .collect();
        let hint = match (prior, attempts.last()) {
            (0, _) => format!("Think about what you already know about {}.", topic_at(h[0] as usize)),
            (_, Some(att)) if prior == 1 => format!(
                "{} is a reasonable guess, but the answer is {} word{} long and starts with \"{}\".",
                capitalize(att),
                n_words,
                if n_words == 1 { "" } else { "s" },
                first
            ),
            (_, Some(att)) if prior == 2 => format!(
                "Unlike {}, the answer ends with the letter \"{}\" and relates to {}.",
                att,
                last,
                topic_at(h[1] as usize + 1)
            ),
            (_, Some(att)) => {
                if h[2].is_multiple_of(3) {
                    format!("Not {}, but something close to {}.", att, answer)
                } else {
                    format!("Drop {} and reread the question, focusing on {}.", att, topic_at(h[3] as usize))
                }
            }
            (_, None) => format!("Look again at the key term {}.", topic_at(prior)),
        };
        return format!("Hint: {hint}");
    }

    let mut hints = [
        format!("Think about what you already know about {}.", topic_at(h[0] as usize)),
        format!(
            "The answer is {} word{} long.",
            n_words,
            if n_words == 1 { "" } else { "s" }
        ),
        format!("It starts with \"{}\" and is connected to {}.", first, topic_at(h[1] as usize + 1)),
        format!("It ends with the letter \"{}\".", last),
    ];
    // Some models leak on a fraction of questions.
    if h[2].is_multiple_of(4) {
        hints[3] = format!("It is something close to {}.", answer);
    }
    if h[4].is_multiple_of(5) {
        hints[2] = hints[1].clone();
    }
    hints
        .iter()
        .enumerate()
        .map(|(i, t)| format!("Hint {}: {}", i + 1, t))
        .collect::<Vec<_>>()
        .join("\n")
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Answers with whatever a hint says the answer is close to, otherwise
/// admits uncertainty.
fn answer_question(prompt: &str) -> String {
    for hint in hint_lines(prompt).iter().rev() {
        if let Some((_, rest)) = hint.split_once("close to ") {
            return rest.trim_end_matches('.').trim().to_string();
        }
    }
    "I am not sure".to_string()
}

fn judge_leakage(prompt: &str) -> String {
    let answer = field(prompt, "Correct answer:").unwrap_or("");
    let hints = block(prompt, "Hints:").join("\n");
    if contains_phrase(&hints, answer) { "YES" } else { "NO" }.to_string()
}

fn judge_submission(prompt: &str) -> String {
    let answer = field(prompt, "Correct answer:").unwrap_or("");
    let submission = field(prompt, "Student answer:").unwrap_or("");
    let ok = !words(submission).is_empty()
        && (contains_phrase(submission, answer) || contains_phrase(answer, submission));
    if ok { "CORRECT" } else { "INCORRECT" }.to_string()
}

/// Feature-hashed bag of words, L2-normalized. Empty text maps to the zero
/// vector.
pub fn hashed_bag_of_words(text: &str) -> Vec<f64> {
    let mut v = vec![0.0; MOCK_EMBEDDING_DIM];
    for w in content_words(text) {
        let d = digest(&[&w]);
        let slot = u64::from_le_bytes(d[..8].try_into().unwrap()) as usize % MOCK_EMBEDDING_DIM;
        v[slot] += 1.0;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}
