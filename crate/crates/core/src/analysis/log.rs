//! Study-log records, as exported by the quiz service and read by the
//! analyses. One JSON object per line, tagged by `record`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assessment::{AssessmentMethod, Verdict};
use crate::hints::HintStrategy;

pub const STUDY_LOG_SCHEMA: &str = "hintlab.study-log/1";

/// The condition a quiz section runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Control,
    Static,
    Dynamic,
}

impl Condition {
    pub fn strategy(self) -> Option<HintStrategy> {
        match self {
            Condition::Control => None,
            Condition::Static => Some(HintStrategy::Static),
            Condition::Dynamic => Some(HintStrategy::Dynamic),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Control => "control",
            Condition::Static => "static",
            Condition::Dynamic => "dynamic",
        }
    }
}

impl From<HintStrategy> for Condition {
    fn from(s: HintStrategy) -> Self {
        match s {
            HintStrategy::Static => Condition::Static,
            HintStrategy::Dynamic => Condition::Dynamic,
        }
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HintFeedback {
    /// 1 to 5.
    pub satisfaction: u8,
    pub informative: bool,
    pub leaked: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreQuizSurvey {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub age_range: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub education: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_of_study: Option<String>,
    /// Subject name (biology, chemistry, geology, physics) to a 1–5 rating.
    pub familiarity: BTreeMap<String, u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionSurvey {
    /// 1 to 5.
    pub difficulty: u8,
    /// 1 to 5; not asked in the control section.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hint_quality: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positives: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negatives: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyPreference {
    Static,
    Dynamic,
    NoPreference,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostQuizSurvey {
    pub helpful_strategy: StrategyPreference,
    pub understanding_strategy: StrategyPreference,
    #[serde(default)]
    pub differences: String,
    #[serde(default)]
    pub general: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Correct,
    Exhausted,
    Open,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum StudyRecord {
    Header {
        schema: String,
        sessions: usize,
    },
    PreQuiz {
        session: String,
        participant: String,
        survey: PreQuizSurvey,
    },
    Hint {
        session: String,
        question: String,
        section: u8,
        strategy: HintStrategy,
        hint_index: usize,
        text: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        satisfaction: Option<u8>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        informative: Option<bool>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        leaked: Option<bool>,
        /// Wrong attempts submitted before this hint was shown.
        attempts_before_hint: usize,
    },
    Attempt {
        session: String,
        question: String,
        section: u8,
        condition: Condition,
        attempt_index: usize,
        text: String,
        verdict: Verdict,
        method: AssessmentMethod,
        /// Hints shown before this attempt.
        hints_before_attempt: usize,
    },
    SectionSurvey {
        session: String,
        section: u8,
        condition: Condition,
        survey: SectionSurvey,
    },
    PostQuiz {
        session: String,
        survey: PostQuizSurvey,
    },
    QuestionSummary {
        session: String,
        question: String,
        section: u8,
        condition: Condition,
        outcome: Outcome,
        attempts_used: usize,
        hints_shown: usize,
    },
}

impl StudyRecord {
    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("study records serialize");
        s.push('\n');
        s
    }
}

/// A parsed study log.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StudyLog {
    pub records: Vec<StudyRecord>,
}

impl StudyLog {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: StudyRecord =
                serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1))?;
            if let StudyRecord::Header { schema, .. } = &record {
                if schema != STUDY_LOG_SCHEMA {
                    return Err(format!("line {}: unsupported schema {schema:?}", i + 1));
                }
            }
            records.push(record);
        }
        Ok(Self { records })
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn render(&self) -> String {
        self.records.iter().map(StudyRecord::to_line).collect()
    }

    pub fn hints(&self) -> impl Iterator<Item = HintView<'_>> {
        self.records.iter().filter_map(|r| match r {
            StudyRecord::Hint {
                session,
                question,
                strategy,
                hint_index,
                satisfaction,
                informative,
                leaked,
                attempts_before_hint,
                ..
            } => Some(HintView {
                session,
                question,
                strategy: *strategy,
                hint_index: *hint_index,
                satisfaction: *satisfaction,
                informative: *informative,
                leaked: *leaked,
                attempts_before_hint: *attempts_before_hint,
            }),
            _ => None,
        })
    }

    pub fn summaries(&self) -> impl Iterator<Item = SummaryView<'_>> {
        self.records.iter().filter_map(|r| match r {
            StudyRecord::QuestionSummary {
                session,
                question,
                condition,
                outcome,
                attempts_used,
                hints_shown,
                ..
            } => Some(SummaryView {
                session,
                question,
                condition: *condition,
                outcome: *outcome,
                attempts_used: *attempts_used,
                hints_shown: *hints_shown,
            }),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HintView<'a> {
    pub session: &'a str,
    pub question: &'a str,
    pub strategy: HintStrategy,
    pub hint_index: usize,
    pub satisfaction: Option<u8>,
    pub informative: Option<bool>,
    pub leaked: Option<bool>,
    pub attempts_before_hint: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryView<'a> {
    pub session: &'a str,
    pub question: &'a str,
    pub condition: Condition,
    pub outcome: Outcome,
    pub attempts_used: usize,
    pub hints_shown: usize,
}
