//! Answer assessment: normalized exact match first, then an LLM judge.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::client::{ModelClient, Role};
use crate::dataset::Question;
use crate::prompts::PromptSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Correct,
    Incorrect,
}

impl Verdict {
    pub fn is_correct(self) -> bool {
        self == Verdict::Correct
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssessmentMethod {
    Exact,
    Llm,
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssessmentResult {
    pub verdict: Verdict,
    pub method: AssessmentMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_judge_output: Option<String>,
}

/// Lowercase, trim, collapse internal whitespace, drop trailing `.?!,`.
pub fn normalize(s: &str) -> String {
    let collapsed = s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    collapsed
        .trim_end_matches(['.', '?', '!', ','])
        .trim_end()
        .to_string()
}

pub fn exact_match(submission: &str, answer: &str) -> bool {
    normalize(submission) == normalize(answer)
}

/// Reads a binary verdict from judge output: the first word, compared
/// case-insensitively against correct/yes (true) and incorrect/no (false).
/// Reasoning blocks and surrounding punctuation are ignored.
pub fn parse_verdict(raw: &str) -> Option<bool> {
    let body = match raw.rfind("</think>") {
        Some(pos) => &raw[pos + "</think>".len()..],
        None => raw,
    };
    let first = body.split_whitespace().next()?;
    let word: String = first
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase();
    match word.as_str() {
        "correct" | "yes" => Some(true),
        "incorrect" | "no" => Some(false),
        _ => None,
    }
}

/// Exact match, then the assessor endpoint.
pub struct Assessor {
    client: Arc<ModelClient>,
    prompts: Arc<PromptSet>,
}

impl Assessor {
    pub fn new(client: Arc<ModelClient>, prompts: Arc<PromptSet>) -> Self {
        Self { client, prompts }
    }

    pub fn prompt(&self, question: &Question, submission: &str) -> String {
        let values = BTreeMap::from([
            ("question", question.text.clone()),
            ("answer", question.answer.clone()),
            ("submission", submission.trim().to_string()),
        ]);
        self.prompts
            .assessment
            .render(&values)
            .expect("assessment template validated at load")
            .full_text()
    }

    /// Never fails: an unreachable or unparseable judge yields an
    /// `incorrect` verdict with method `fallback`.
    pub async fn assess(&self, question: &Question, submission: &str) -> AssessmentResult {
        if normalize(submission).is_empty() {
            return AssessmentResult {
                verdict: Verdict::Incorrect,
                method: AssessmentMethod::Fallback,
                raw_judge_output: None,
            };
        }
        if exact_match(submission, &question.answer) {
            return AssessmentResult {
                verdict: Verdict::Correct,
                method: AssessmentMethod::Exact,
                raw_judge_output: None,
            };
        }
        let prompt = self.prompt(question, submission);
        match self.client.complete(Role::Assessor, &prompt).await {
            Ok(raw) => match parse_verdict(&raw) {
                Some(ok) => AssessmentResult {
                    verdict: if ok { Verdict::Correct } else { Verdict::Incorrect },
                    method: AssessmentMethod::Llm,
                    raw_judge_output: Some(raw),
                },
                None => {
                    tracing::warn!(question = %question.id, raw = %raw, "unparseable assessor verdict");
                    AssessmentResult {
                        verdict: Verdict::Incorrect,
                        method: AssessmentMethod::Fallback,
                        raw_judge_output: Some(raw),
                    }
                }
            },
            Err(e) => {
                tracing::error!(question = %question.id, error = %e, "assessor unavailable");
                AssessmentResult {
                    verdict: Verdict::Incorrect,
                    method: AssessmentMethod::Fallback,
                    raw_judge_output: None,
                }
            }
        }
    }
}

/// One line of a labeled-verdict file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSubmission {
    pub question_id: String,
    pub submission: String,
    pub gold_verdict: Verdict,
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<LabeledSubmission>, String> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("line {}: {e}", i + 1)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyReport {
    pub total: usize,
    pub agreed: usize,
    pub accuracy: f64,
    pub by_method: BTreeMap<AssessmentMethod, (usize, usize)>,
    pub unknown_questions: Vec<String>,
}

/// Runs [`Assessor::assess`] over labeled submissions and reports agreement
/// with the gold verdicts.
pub async fn assessment_accuracy(
    assessor: &Assessor,
    questions: &[Question],
    labels: &[LabeledSubmission],
) -> AccuracyReport {
    let by_id: BTreeMap<&str, &Question> = questions.iter().map(|q| (q.id.as_str(), q)).collect();
    let mut report = AccuracyReport {
        total: 0,
        agreed: 0,
        accuracy: 0.0,
        by_method: BTreeMap::new(),
        unknown_questions: Vec::new(),
    };
    for label in labels {
        let Some(question) = by_id.get(label.question_id.as_str()) else {
            report.unknown_questions.push(label.question_id.clone());
            continue;
        };
        let result = assessor.assess(question, &label.submission).await;
        let agreed = result.verdict == label.gold_verdict;
        report.total += 1;
        report.agreed += agreed as usize;
        let slot = report.by_method.entry(result.method).or_default();
        slot.0 += agreed as usize;
        slot.1 += 1;
    }
    if report.total > 0 {
        report.accuracy = report.agreed as f64 / report.total as f64;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::client::stub::StubTransport;
    use crate::client::{EndpointTable, RetryPolicy};
    use crate::dataset::Subject;

    fn q(answer: &str) -> Question {
        Question {
            id: "q".into(),
            text: "What gas do plants absorb?".into(),
            answer: answer.into(),
            support: String::new(),
            subject: Subject::Biology,
        }
    }

    fn assessor(stub: Arc<StubTransport>) -> Assessor {
        let client = ModelClient::with_transport(EndpointTable::all_mock(), stub).retry(RetryPolicy::none());
        Assessor::new(Arc::new(client), Arc::new(PromptSet::builtin()))
    }

    #[test]
    fn normalization_rules() {
        assert_eq!(normalize("  Mechanical. "), "mechanical");
        assert_eq!(normalize("CO2"), "co2");
        assert_eq!(normalize(""), "");
        assert_eq!(normalize("Red   blood\tcells?!"), "red blood cells");
    }

    #[test]
    fn exact_match_examples() {
        assert!(exact_match("Mechanical", "mechanical"));
        assert!(!exact_match("OH-", "hydroxide ions"));
        assert!(!exact_match("mechanical wave", "mechanical"));
    }

    #[test]
    fn verdict_parsing() {
        assert_eq!(parse_verdict("CORRECT"), Some(true));
        assert_eq!(parse_verdict("**Incorrect.** The student..."), Some(false));
        assert_eq!(parse_verdict("yes"), Some(true));
        assert_eq!(parse_verdict("No, because"), Some(false));
        assert_eq!(parse_verdict("<think>hmm correct?</think>\nINCORRECT"), Some(false));
        assert_eq!(parse_verdict("The answer is correct"), None);
        assert_eq!(parse_verdict(""), None);
    }

    #[tokio::test]
    async fn judge_accepts_equivalent_form() {
        let stub = Arc::new(StubTransport::echo("CORRECT"));
        let r = assessor(stub).assess(&q("carbon dioxide"), "CO2").await;
        assert_eq!(r.verdict, Verdict::Correct);
        assert_eq!(r.method, AssessmentMethod::Llm);
        assert_eq!(r.raw_judge_output.as_deref(), Some("CORRECT"));
    }

    #[tokio::test]
    async fn exact_match_short_circuits_the_judge() {
        let stub = Arc::new(StubTransport::echo("INCORRECT"));
        let r = assessor(stub.clone()).assess(&q("carbon dioxide"), "Carbon dioxide.").await;
        assert_eq!((r.verdict, r.method), (Verdict::Correct, AssessmentMethod::Exact));
        assert!(stub.chat_calls().is_empty());
    }

    #[tokio::test]
    async fn unreachable_judge_falls_back_to_incorrect() {
        let r = assessor(Arc::new(StubTransport::failing())).assess(&q("carbon dioxide"), "CO2").await;
        assert_eq!((r.verdict, r.method), (Verdict::Incorrect, AssessmentMethod::Fallback));
    }

    #[tokio::test]
    async fn unparseable_judge_falls_back_and_keeps_raw_output() {
        let r = assessor(Arc::new(StubTransport::echo("maybe")))
            .assess(&q("carbon dioxide"), "CO2")
            .await;
        assert_eq!((r.verdict, r.method), (Verdict::Incorrect, AssessmentMethod::Fallback));
        assert_eq!(r.raw_judge_output.as_deref(), Some("maybe"));
    }

    #[tokio::test]
    async fn empty_submission_is_never_correct() {
        let stub = Arc::new(StubTransport::echo("CORRECT"));
        let a = assessor(stub.clone());
        for s in ["", "   ", "?"] {
            assert_eq!(a.assess(&q("carbon dioxide"), s).await.verdict, Verdict::Incorrect);
        }
        assert!(stub.chat_calls().is_empty());
    }

    #[tokio::test]
    async fn judge_prompt_carries_question_gold_and_submission() {
        let stub = Arc::new(StubTransport::echo("CORRECT"));
        assessor(stub.clone()).assess(&q("carbon dioxide"), "CO2").await;
        let prompt = &stub.calls_for(Role::Assessor)[0];
        assert!(prompt.contains("What gas do plants absorb?"));
        assert!(prompt.contains("carbon dioxide"));
        assert!(prompt.contains("CO2"));
    }

    #[tokio::test]
    async fn accuracy_harness_counts_agreement() {
        let stub = Arc::new(StubTransport::new().with_chat(|_, p| {
            Ok(if p.contains("Student answer: CO2") { "CORRECT" } else { "INCORRECT" }.into())
        }));
        let a = assessor(stub);
        let labels = vec![
            LabeledSubmission { question_id: "q".into(), submission: "CO2".into(), gold_verdict: Verdict::Correct },
            LabeledSubmission { question_id: "q".into(), submission: "oxygen".into(), gold_verdict: Verdict::Incorrect },
            LabeledSubmission { question_id: "q".into(), submission: "carbon-dioxide".into(), gold_verdict: Verdict::Correct },
            LabeledSubmission { question_id: "zz".into(), submission: "x".into(), gold_verdict: Verdict::Correct },
        ];
        let report = assessment_accuracy(&a, &[q("carbon dioxide")], &labels).await;
        assert_eq!((report.total, report.agreed), (3, 2));
        assert!((report.accuracy - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(report.unknown_questions, ["zz"]);
    }
}
