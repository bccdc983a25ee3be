//! Response bodies. Strategy names stay hidden until the post-quiz survey
//! is in; before that a section only says whether it offers hints.

use std::collections::HashMap;

use chrono::{DateTime, Utc};
use hintlab_core::analysis::{Condition, HintFeedback, Outcome};
use hintlab_core::assessment::{AssessmentMethod, Verdict};
use hintlab_core::dataset::Question;
use serde::{Deserialize, Serialize};

use crate::plan::{Counterbalance, SECTIONS};
use crate::session::{Position, QuestionState, QuizSession};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionView {
    pub section: u8,
    pub hints_enabled: bool,
    /// Revealed once the post-quiz survey has been submitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<Condition>,
    pub complete: bool,
    pub survey_submitted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionProgress {
    pub question_id: String,
    pub section: u8,
    pub attempts_used: usize,
    pub attempts_left: usize,
    pub hints_shown: usize,
    pub hints_left: usize,
    pub outcome: Outcome,
    pub feedback_pending: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "screen", rename_all = "snake_case")]
pub enum PositionView {
    Question { section: u8, question_id: String },
    Feedback { section: u8, question_id: String },
    SectionSurvey { section: u8 },
    PostQuiz,
    Done,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub session_id: String,
    pub participant_id: String,
    pub position: PositionView,
    pub sections: Vec<SectionView>,
    pub questions: Vec<QuestionProgress>,
    pub post_quiz_submitted: bool,
    pub replay_available: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HintView {
    pub index: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptView {
    pub index: usize,
    pub text: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionView {
    pub section: u8,
    /// 1-based position within the section.
    pub number: usize,
    pub question_id: String,
    pub text: String,
    pub hints_enabled: bool,
    pub attempts_used: usize,
    pub attempts_left: usize,
    pub hints_left: usize,
    pub hints: Vec<HintView>,
    pub attempts: Vec<AttemptView>,
    pub outcome: Outcome,
    /// The gold answer, once the question is resolved.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<String>,
    pub feedback_pending: Vec<usize>,
}

/// What `GET .../questions/current` returns: the question on screen, or
/// the survey the participant owes next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "screen", rename_all = "snake_case")]
pub enum CurrentView {
    Question(QuestionView),
    Feedback(QuestionView),
    SectionSurvey { section: u8, asks_hint_quality: bool },
    PostQuiz,
    Done,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreatedView {
    pub session_id: String,
    pub state: SessionState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HintResponse {
    pub hint_index: usize,
    pub text: String,
    pub hints_left: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerResponse {
    pub verdict: Verdict,
    pub method: AssessmentMethod,
    pub attempts_used: usize,
    pub attempts_left: usize,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reveal: Option<String>,
    /// Hints that need feedback before the session moves on.
    pub feedback_pending: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ack {
    pub ok: bool,
    pub position: PositionView,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReplayEntry {
    Attempt { index: usize, text: String, verdict: Verdict, at: DateTime<Utc> },
    Hint {
        index: usize,
        text: String,
        at: DateTime<Utc>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        feedback: Option<HintFeedback>,
    },
}

impl ReplayEntry {
    fn at(&self) -> DateTime<Utc> {
        match self {
            ReplayEntry::Attempt { at, .. } | ReplayEntry::Hint { at, .. } => *at,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayQuestion {
    pub question_id: String,
    pub text: String,
    pub answer: String,
    pub outcome: Outcome,
    /// Attempts and hints in the order they happened.
    pub timeline: Vec<ReplayEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplaySection {
    pub section: u8,
    pub condition: Condition,
    pub questions: Vec<ReplayQuestion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replay {
    pub session_id: String,
    pub sections: Vec<ReplaySection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatusView {
    pub ready: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub questions: usize,
    pub counterbalance: Counterbalance,
}

pub fn position_view(s: &QuizSession) -> PositionView {
    match s.position() {
        Position::Question(i) => {
            let q = &s.questions[i];
            let (section, question_id) = (q.section, q.question_id.clone());
            if q.is_resolved() {
                PositionView::Feedback { section, question_id }
            } else {
                PositionView::Question { section, question_id }
            }
        }
        Position::SectionSurvey(section) => PositionView::SectionSurvey { section },
        Position::PostQuiz => PositionView::PostQuiz,
        Position::Done => PositionView::Done,
    }
}

fn progress(q: &QuestionState) -> QuestionProgress {
    QuestionProgress {
        question_id: q.question_id.clone(),
        section: q.section,
        attempts_used: q.attempts_used(),
        attempts_left: q.attempts_left(),
        hints_shown: q.hints_shown(),
        hints_left: q.hints_left(),
        outcome: q.outcome,
        feedback_pending: q.pending_feedback(),
    }
}

pub fn session_state(s: &QuizSession) -> SessionState {
    let revealed = s.replay_available();
    SessionState {
        session_id: s.id.clone(),
        participant_id: s.participant_id.clone(),
        position: position_view(s),
        sections: (1..=SECTIONS as u8)
            .map(|n| SectionView {
                section: n,
                hints_enabled: s.plan.condition(n) != Condition::Control,
                condition: revealed.then(|| s.plan.condition(n)),
                complete: s.section_complete(n),
                survey_submitted: s.section_surveys.contains_key(&n),
            })
            .collect(),
        questions: s.questions.iter().map(progress).collect(),
        post_quiz_submitted: s.post_quiz.is_some(),
        replay_available: revealed,
    }
}

pub fn question_view(s: &QuizSession, index: usize, question: &Question) -> QuestionView {
    let q = &s.questions[index];
    let number = s.questions[..index].iter().filter(|o| o.section == q.section).count() + 1;
    QuestionView {
        section: q.section,
        number,
        question_id: q.question_id.clone(),
        text: question.text.clone(),
        hints_enabled: q.condition != Condition::Control,
        attempts_used: q.attempts_used(),
        attempts_left: q.attempts_left(),
        hints_left: q.hints_left(),
        hints: q.hints.iter().map(|h| HintView { index: h.index, text: h.text.clone() }).collect(),
        attempts: q
            .attempts
            .iter()
            .map(|a| AttemptView { index: a.index, text: a.text.clone(), verdict: a.verdict })
            .collect(),
        outcome: q.outcome,
        answer: q.is_resolved().then(|| question.answer.clone()),
        feedback_pending: q.pending_feedback(),
    }
}

pub fn current_view(s: &QuizSession, questions: &HashMap<String, Question>) -> CurrentView {
    match s.position() {
        Position::Question(i) => {
            let q = &s.questions[i];
            let view = question_view(s, i, &questions[&q.question_id]);
            if q.is_resolved() { CurrentView::Feedback(view) } else { CurrentView::Question(view) }
        }
        Position::SectionSurvey(section) => CurrentView::SectionSurvey {
            section,
            asks_hint_quality: s.plan.condition(section) != Condition::Control,
        },
        Position::PostQuiz => CurrentView::PostQuiz,
        Position::Done => CurrentView::Done,
    }
}

pub fn replay(s: &QuizSession, questions: &HashMap<String, Question>) -> Replay {
    let sections = (1..=SECTIONS as u8)
        .map(|n| ReplaySection {
            section: n,
            condition: s.plan.condition(n),
            questions: s
                .questions
                .iter()
                .filter(|q| q.section == n)
                .map(|q| {
                    let source = &questions[&q.question_id];
                    let mut timeline: Vec<ReplayEntry> = q
                        .attempts
                        .iter()
                        .map(|a| ReplayEntry::Attempt {
                            index: a.index,
                            text: a.text.clone(),
                            verdict: a.verdict,
                            at: a.at,
                        })
                        .chain(q.hints.iter().map(|h| ReplayEntry::Hint {
                            index: h.index,
                            text: h.text.clone(),
                            at: h.at,
                            feedback: q.feedback.get(&h.index).copied(),
                        }))
                        .collect();
                    timeline.sort_by_key(ReplayEntry::at);
                    ReplayQuestion {
                        question_id: q.question_id.clone(),
                        text: source.text.clone(),
                        answer: source.answer.clone(),
                        outcome: q.outcome,
                        timeline,
                    }
                })
                .collect(),
        })
        .collect();
    Replay { session_id: s.id.clone(), sections }
}
