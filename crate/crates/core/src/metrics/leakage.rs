//! Answer leakage: literal string match and an LLM judge.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::MetricError;
use crate::assessment::{normalize, parse_verdict};
use crate::client::{ModelClient, Role};
use crate::dataset::Question;
use crate::hints::HintChain;
use crate::prompts::PromptSet;

/// True when `needle` occurs in `hay` with no letter or digit directly on
/// either side.
pub fn contains_word(hay: &str, needle: &str) -> bool {
    if needle.is_empty() {
        return false;
    }
    let mut from = 0;
    while let Some(pos) = hay[from..].find(needle) {
        let start = from + pos;
        let end = start + needle.len();
        let before = hay[..start].chars().next_back();
        let after = hay[end..].chars().next();
        let boundary = |c: Option<char>| c.is_none_or(|c| !c.is_alphanumeric());
        if boundary(before) && boundary(after) {
            return true;
        }
        from = start + hay[start..].chars().next().map_or(1, char::len_utf8);
    }
    false
}

fn hint_leaks(hint: &str, answer: &str) -> bool {
    contains_word(&normalize(hint), &normalize(answer))
}

/// 1 when any hint contains the normalized answer as a whole-word match.
pub fn leakage_em(chain: &HintChain, answer: &str) -> u8 {
    chain.hints.iter().any(|h| hint_leaks(&h.text, answer)) as u8
}

/// Fraction of hints that contain the answer; 0 for an empty chain.
pub fn leakage_em_hint_rate(chain: &HintChain, answer: &str) -> f64 {
    if chain.k() == 0 {
        return 0.0;
    }
    chain.hints.iter().filter(|h| hint_leaks(&h.text, answer)).count() as f64 / chain.k() as f64
}

pub struct LeakageJudge {
    client: Arc<ModelClient>,
    prompts: Arc<PromptSet>,
}

impl LeakageJudge {
    pub fn new(client: Arc<ModelClient>, prompts: Arc<PromptSet>) -> Self {
        Self { client, prompts }
    }

    /// Asks the judge about the whole chain. An unparseable reply is asked
    /// again once, bypassing the cached response.
    pub async fn judge(&self, question: &Question, chain: &HintChain) -> Result<u8, MetricError> {
        let hints = chain
            .texts()
            .iter()
            .enumerate()
            .map(|(i, t)| format!("Hint {}: {}", i + 1, t))
            .collect::<Vec<_>>()
            .join("\n");
        let values = BTreeMap::from([
            ("question", question.text.clone()),
            ("answer", question.answer.clone()),
            ("hints", hints),
        ]);
        let prompt = self
            .prompts
            .leakage
            .render(&values)
            .expect("leakage template validated at load");
        let mut raw = String::new();
        for attempt in 0..2 {
            raw = self
                .client
                .complete_parts(Role::LeakageJudge, prompt.system.as_deref(), &prompt.user, attempt)
                .await?;
            if let Some(v) = parse_verdict(&raw) {
                return Ok(v as u8);
            }
        }
        Err(MetricError::MetricJudgeError { raw })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::client::stub::StubTransport;
    use crate::client::{EndpointTable, RetryPolicy};
    use crate::dataset::Subject;
    use crate::hints::HintStrategy;

    fn chain(texts: &[&str]) -> HintChain {
        HintChain::from_texts("q", HintStrategy::Static, texts)
    }

    #[test]
    fn quoted_answer_leaks() {
        let c = chain(&["The term you're looking for involves \"ionization\"."]);
        assert_eq!(leakage_em(&c, "ionization"), 1);
    }

    #[test]
    fn inflected_form_is_not_an_exact_match() {
        let c = chain(&["Blood moves through tiny capillaries."]);
        assert_eq!(leakage_em(&c, "capillary"), 0);
    }

    #[test]
    fn empty_chain_does_not_leak() {
        assert_eq!(leakage_em(&HintChain::empty("q"), "x"), 0);
        assert_eq!(leakage_em_hint_rate(&HintChain::empty("q"), "x"), 0.0);
    }

    #[test]
    fn multiword_answers_and_case() {
        let c = chain(&["It is RED  Blood cells, mostly.", "nothing here"]);
        assert_eq!(leakage_em(&c, "red blood cells"), 1);
        assert_eq!(leakage_em_hint_rate(&c, "red blood cells"), 0.5);
        assert!(!contains_word("hydrogenation", "hydrogen"));
        assert!(contains_word("hydrogen-rich", "hydrogen"));
    }

    fn judge(stub: Arc<StubTransport>) -> LeakageJudge {
        let client = ModelClient::with_transport(EndpointTable::all_mock(), stub).retry(RetryPolicy::none());
        LeakageJudge::new(Arc::new(client), Arc::new(PromptSet::builtin()))
    }

    fn bohr() -> Question {
        Question {
            id: "q".into(),
            text: "Which element did the Bohr model first describe?".into(),
            answer: "hydrogen".into(),
            support: String::new(),
            subject: Subject::Chemistry,
        }
    }

    #[tokio::test]
    async fn scripted_yes_is_a_leak() {
        let stub = Arc::new(StubTransport::echo("YES"));
        let c = chain(&["It is the first element on the periodic table."]);
        assert_eq!(judge(stub.clone()).judge(&bohr(), &c).await.unwrap(), 1);
        let prompt = &stub.calls_for(Role::LeakageJudge)[0];
        assert!(prompt.contains("hydrogen") && prompt.contains("first element"));
    }

    #[tokio::test]
    async fn unparseable_twice_is_a_judge_error() {
        let stub = Arc::new(StubTransport::echo("perhaps"));
        let r = judge(stub.clone()).judge(&bohr(), &chain(&["h"])).await;
        assert!(matches!(r, Err(MetricError::MetricJudgeError { .. })));
        assert_eq!(stub.calls_for(Role::LeakageJudge).len(), 2);
    }

    #[tokio::test]
    async fn retry_recovers_a_verdict() {
        let n = std::sync::atomic::AtomicUsize::new(0);
        let stub = StubTransport::new().with_chat(move |_, _| {
            let i = n.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
            Ok(if i == 0 { "hmm" } else { "NO" }.into())
        });
        assert_eq!(judge(Arc::new(stub)).judge(&bohr(), &chain(&["h"])).await.unwrap(), 0);
    }
}
