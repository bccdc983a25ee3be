//! Event-sourced session state. Every mutation is an event; the state is
//! the fold of its events, so a reloaded log reproduces the session exactly.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use hintlab_core::analysis::{Condition, HintFeedback, Outcome, PostQuizSurvey, PreQuizSurvey, SectionSurvey};
use hintlab_core::assessment::{AssessmentMethod, Verdict};
use hintlab_core::hints::{AttemptHistory, Hint, HintChain, HintStrategy, MAX_HINTS};
use serde::{Deserialize, Serialize};

use crate::plan::{SectionPlan, SECTIONS};
use crate::QuizError;

pub const MAX_ATTEMPTS: usize = 5;
pub const LIKERT: std::ops::RangeInclusive<u8> = 1..=5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShownHint {
    pub index: usize,
    pub text: String,
    pub at: DateTime<Utc>,
    /// Attempts already submitted when the hint was requested.
    pub attempts_before: usize,
    pub model_id: String,
    pub prompt_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptEntry {
    pub index: usize,
    pub text: String,
    pub verdict: Verdict,
    pub method: AssessmentMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_judge_output: Option<String>,
    pub at: DateTime<Utc>,
    pub hints_before: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionState {
    pub question_id: String,
    pub section: u8,
    pub condition: Condition,
    pub hints: Vec<ShownHint>,
    pub attempts: Vec<AttemptEntry>,
    pub feedback: BTreeMap<usize, HintFeedback>,
    pub outcome: Outcome,
}

impl QuestionState {
    fn new(question_id: &str, section: u8, condition: Condition) -> Self {
        Self {
            question_id: question_id.to_string(),
            section,
            condition,
            hints: Vec::new(),
            attempts: Vec::new(),
            feedback: BTreeMap::new(),
            outcome: Outcome::Open,
        }
    }

    pub fn attempts_used(&self) -> usize {
        self.attempts.len()
    }

    pub fn attempts_left(&self) -> usize {
        if self.is_resolved() { 0 } else { MAX_ATTEMPTS - self.attempts.len() }
    }

    pub fn hints_shown(&self) -> usize {
        self.hints.len()
    }

    pub fn hints_left(&self) -> usize {
        if self.condition == Condition::Control || self.is_resolved() {
            0
        } else {
            MAX_HINTS - self.hints.len()
        }
    }

    /// Answered correctly or out of attempts.
    pub fn is_resolved(&self) -> bool {
        self.outcome != Outcome::Open
    }

    /// Shown hints still waiting for feedback.
    pub fn pending_feedback(&self) -> Vec<usize> {
        self.hints.iter().map(|h| h.index).filter(|i| !self.feedback.contains_key(i)).collect()
    }

    /// Resolved and every shown hint rated: the session moves on.
    pub fn is_closed(&self) -> bool {
        self.is_resolved() && self.feedback.len() == self.hints.len()
    }

    pub fn wrong_attempts(&self) -> AttemptHistory {
        AttemptHistory::new(
            self.attempts.iter().filter(|a| a.verdict == Verdict::Incorrect).map(|a| a.text.clone()),
        )
    }

    /// The hints shown so far as a chain, for conditioning the next one.
    pub fn shown_chain(&self) -> HintChain {
        let strategy = self.condition.strategy().unwrap_or(HintStrategy::Static);
        let mut chain = HintChain::empty(&self.question_id);
        for h in &self.hints {
            chain.push(Hint {
                index: h.index,
                text: h.text.clone(),
                strategy,
                model_id: h.model_id.clone(),
                prompt_hash: h.prompt_hash.clone(),
            });
        }
        chain
    }
}

/// Where the participant is in the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    /// Index into [`QuizSession::questions`].
    Question(usize),
    SectionSurvey(u8),
    PostQuiz,
    Done,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SessionEvent {
    Created {
        session_id: String,
        participant_id: String,
        /// Creation order within the store.
        ordinal: usize,
        seed: u64,
        plan: SectionPlan,
        static_chains: BTreeMap<String, HintChain>,
        pre_quiz: PreQuizSurvey,
        at: DateTime<Utc>,
    },
    HintShown {
        question_id: String,
        hint: ShownHint,
    },
    AttemptRecorded {
        question_id: String,
        attempt: AttemptEntry,
    },
    FeedbackRecorded {
        question_id: String,
        hint_index: usize,
        feedback: HintFeedback,
        at: DateTime<Utc>,
    },
    SectionSurveyRecorded {
        section: u8,
        survey: SectionSurvey,
        at: DateTime<Utc>,
    },
    PostQuizRecorded {
        survey: PostQuizSurvey,
        at: DateTime<Utc>,
    },
}

impl SessionEvent {
    pub fn at(&self) -> DateTime<Utc> {
        match self {
            SessionEvent::Created { at, .. }
            | SessionEvent::FeedbackRecorded { at, .. }
            | SessionEvent::SectionSurveyRecorded { at, .. }
            | SessionEvent::PostQuizRecorded { at, .. } => *at,
            SessionEvent::HintShown { hint, .. } => hint.at,
            SessionEvent::AttemptRecorded { attempt, .. } => attempt.at,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuizSession {
    pub id: String,
    pub participant_id: String,
    pub ordinal: usize,
    pub seed: u64,
    pub plan: SectionPlan,
    pub created_at: DateTime<Utc>,
    pub pre_quiz: PreQuizSurvey,
    pub static_chains: BTreeMap<String, HintChain>,
    /// All 30 questions in plan order.
    pub questions: Vec<QuestionState>,
    pub section_surveys: BTreeMap<u8, SectionSurvey>,
    pub post_quiz: Option<PostQuizSurvey>,
    pub last_at: DateTime<Utc>,
    /// Number of events folded into this state.
    pub events_applied: usize,
}

/// What a validated hint request should reveal.
#[derive(Debug, Clone, PartialEq)]
pub enum HintSource {
    Static(Hint),
    Dynamic { prior: HintChain, history: AttemptHistory },
}

fn likert(name: &str, v: u8) -> Result<(), QuizError> {
    if LIKERT.contains(&v) {
        Ok(())
    } else {
        Err(QuizError::Validation(format!("{name} must be between 1 and 5, got {v}")))
    }
}

pub fn validate_pre_quiz(s: &PreQuizSurvey) -> Result<(), QuizError> {
    s.familiarity.iter().try_for_each(|(k, v)| likert(&format!("familiarity[{k}]"), *v))
}

pub fn validate_feedback(f: &HintFeedback) -> Result<(), QuizError> {
    likert("satisfaction", f.satisfaction)
}

pub fn validate_section_survey(section: u8, s: &SectionSurvey) -> Result<(), QuizError> {
    likert("difficulty", s.difficulty)?;
    if section == 1 {
        if s.hint_quality.is_some() || s.positives.is_some() || s.negatives.is_some() {
            return Err(QuizError::Validation(
                "the control-section survey only asks about difficulty".into(),
            ));
        }
        return Ok(());
    }
    match s.hint_quality {
        Some(q) => likert("hint_quality", q),
        None => Err(QuizError::Validation(format!("section {section} survey needs hint_quality"))),
    }
}

impl QuizSession {
    /// Builds the initial state from a `Created` event.
    pub fn from_created(event: &SessionEvent) -> Result<Self, QuizError> {
        let SessionEvent::Created {
            session_id,
            participant_id,
            ordinal,
            seed,
            plan,
            static_chains,
            pre_quiz,
            at,
        } = event
        else {
            return Err(QuizError::ServiceError("session log does not start with a created event".into()));
        };
        let questions = plan
            .question_ids()
            .map(|(section, q)| QuestionState::new(q, section, plan.condition(section)))
            .collect();
        Ok(Self {
            id: session_id.clone(),
            participant_id: participant_id.clone(),
            ordinal: *ordinal,
            seed: *seed,
            plan: plan.clone(),
            created_at: *at,
            pre_quiz: pre_quiz.clone(),
            static_chains: static_chains.clone(),
            questions,
            section_surveys: BTreeMap::new(),
            post_quiz: None,
            last_at: *at,
            events_applied: 1,
        })
    }

    /// Rebuilds a session from its full event log.
    pub fn replay(events: &[SessionEvent]) -> Result<Self, QuizError> {
        let (first, rest) = events
            .split_first()
            .ok_or_else(|| QuizError::ServiceError("empty session log".into()))?;
        let mut s = Self::from_created(first)?;
        for e in rest {
            s.apply(e)?;
        }
        Ok(s)
    }

    pub fn position(&self) -> Position {
        for section in 1..=SECTIONS as u8 {
            if let Some(i) = self.questions.iter().position(|q| q.section == section && !q.is_closed()) {
                return Position::Question(i);
            }
            if !self.section_surveys.contains_key(&section) {
                return Position::SectionSurvey(section);
            }
        }
        if self.post_quiz.is_none() { Position::PostQuiz } else { Position::Done }
    }

    pub fn section_complete(&self, section: u8) -> bool {
        self.questions.iter().filter(|q| q.section == section).all(QuestionState::is_closed)
    }

    pub fn replay_available(&self) -> bool {
        self.post_quiz.is_some()
    }

    pub fn question(&self, question_id: &str) -> Result<(usize, &QuestionState), QuizError> {
        self.questions
            .iter()
            .enumerate()
            .find(|(_, q)| q.question_id == question_id)
            .ok_or_else(|| QuizError::NotFound(format!("question {question_id} is not in this session")))
    }

    /// An open question that is the one currently being served.
    fn open_current(&self, question_id: &str) -> Result<usize, QuizError> {
        let (i, q) = self.question(question_id)?;
        if q.is_resolved() {
            return Err(QuizError::QuestionClosed(question_id.to_string()));
        }
        if self.position() != Position::Question(i) {
            return Err(QuizError::Conflict(format!("question {question_id} is not the current question")));
        }
        Ok(i)
    }

    pub fn check_hint(&self, question_id: &str) -> Result<HintSource, QuizError> {
        let i = self.open_current(question_id)?;
        let q = &self.questions[i];
        match q.condition {
            Condition::Control => Err(QuizError::HintsDisabled),
            _ if q.hints_shown() >= MAX_HINTS => Err(QuizError::HintBudgetExhausted(MAX_HINTS)),
            Condition::Static => self
                .static_chains
                .get(question_id)
                .and_then(|c| c.hints.get(q.hints_shown()))
                .cloned()
                .map(HintSource::Static)
                .ok_or(QuizError::HintBudgetExhausted(q.hints_shown())),
            Condition::Dynamic => {
                Ok(HintSource::Dynamic { prior: q.shown_chain(), history: q.wrong_attempts() })
            }
        }
    }

    pub fn check_answer(&self, question_id: &str) -> Result<usize, QuizError> {
        self.open_current(question_id)
    }

    pub fn check_feedback(
        &self,
        question_id: &str,
        hint_index: usize,
        feedback: &HintFeedback,
    ) -> Result<(), QuizError> {
        let (_, q) = self.question(question_id)?;
        if hint_index == 0 || hint_index > q.hints_shown() {
            return Err(QuizError::NotFound(format!(
                "hint {hint_index} was not shown for question {question_id}"
            )));
        }
        validate_feedback(feedback)?;
        if !q.is_resolved() {
            return Err(QuizError::Conflict(format!(
                "feedback for question {question_id} opens once it is answered or out of attempts"
            )));
        }
        if q.feedback.contains_key(&hint_index) {
            return Err(QuizError::Conflict(format!("hint {hint_index} already has feedback")));
        }
        Ok(())
    }

    pub fn check_section_survey(&self, section: u8, survey: &SectionSurvey) -> Result<(), QuizError> {
        if !(1..=SECTIONS as u8).contains(&section) {
            return Err(QuizError::NotFound(format!("there is no section {section}")));
        }
        validate_section_survey(section, survey)?;
        if self.section_surveys.contains_key(&section) {
            return Err(QuizError::Conflict(format!("section {section} survey already submitted")));
        }
        if !self.section_complete(section) {
            return Err(QuizError::SectionIncomplete(format!("section {section} has unfinished questions")));
        }
        Ok(())
    }

    pub fn check_post_quiz(&self) -> Result<(), QuizError> {
        if self.post_quiz.is_some() {
            return Err(QuizError::Conflict("post-quiz survey already submitted".into()));
        }
        match self.position() {
            Position::PostQuiz => Ok(()),
            Position::Question(i) => Err(QuizError::SectionIncomplete(format!(
                "section {} is not finished",
                self.questions[i].section
            ))),
            Position::SectionSurvey(s) => {
                Err(QuizError::SectionIncomplete(format!("section {s} survey is missing")))
            }
            Position::Done => unreachable!("done implies a post-quiz survey"),
        }
    }

    /// Folds one event into the state, re-checking every protocol rule so a
    /// tampered or reordered log is rejected rather than replayed.
    pub fn apply(&mut self, event: &SessionEvent) -> Result<(), QuizError> {
        let at = event.at();
        if at <= self.last_at {
            return Err(QuizError::ServiceError(format!(
                "event at {at} is not after the previous event at {}",
                self.last_at
            )));
        }
        match event {
            SessionEvent::Created { .. } => {
                return Err(QuizError::ServiceError("session already created".into()));
            }
            SessionEvent::HintShown { question_id, hint } => {
                let source = self.check_hint(question_id)?;
                let (i, q) = self.question(question_id)?;
                if hint.index != q.hints_shown() + 1 || hint.attempts_before != q.attempts_used() {
                    return Err(QuizError::ServiceError(format!(
                        "hint {} for {question_id} does not follow the recorded state",
                        hint.index
                    )));
                }
                if let HintSource::Static(expected) = &source {
                    if expected.text != hint.text {
                        return Err(QuizError::ServiceError(format!(
                            "static hint {} for {question_id} differs from the pre-generated chain",
                            hint.index
                        )));
                    }
                }
                self.questions[i].hints.push(hint.clone());
            }
            SessionEvent::AttemptRecorded { question_id, attempt } => {
                let i = self.check_answer(question_id)?;
                let q = &mut self.questions[i];
                if attempt.index != q.attempts_used() + 1 || attempt.hints_before != q.hints_shown() {
                    return Err(QuizError::ServiceError(format!(
                        "attempt {} for {question_id} does not follow the recorded state",
                        attempt.index
                    )));
                }
                q.attempts.push(attempt.clone());
                if attempt.verdict == Verdict::Correct {
                    q.outcome = Outcome::Correct;
                } else if q.attempts.len() >= MAX_ATTEMPTS {
                    q.outcome = Outcome::Exhausted;
                }
            }
            SessionEvent::FeedbackRecorded { question_id, hint_index, feedback, .. } => {
                self.check_feedback(question_id, *hint_index, feedback)?;
                let (i, _) = self.question(question_id)?;
                self.questions[i].feedback.insert(*hint_index, *feedback);
            }
            SessionEvent::SectionSurveyRecorded { section, survey, .. } => {
                self.check_section_survey(*section, survey)?;
                self.section_surveys.insert(*section, survey.clone());
            }
            SessionEvent::PostQuizRecorded { survey, .. } => {
                self.check_post_quiz()?;
                self.post_quiz = Some(survey.clone());
            }
        }
        self.last_at = at;
        self.events_applied += 1;
        Ok(())
    }

    /// Checks the standing invariants of a persisted state.
    pub fn check_invariants(&self) -> Result<(), String> {
        for q in &self.questions {
            if q.hints.len() > MAX_HINTS || q.attempts.len() > MAX_ATTEMPTS {
                return Err(format!("{} is over budget", q.question_id));
            }
            if q.condition == Condition::Control && !q.hints.is_empty() {
                return Err(format!("control question {} has hints", q.question_id));
            }
            if q.feedback.keys().any(|i| *i == 0 || *i > q.hints.len()) {
                return Err(format!("{} has feedback for unseen hints", q.question_id));
            }
            for h in &q.hints {
                let before = q.attempts.iter().filter(|a| a.at < h.at).count();
                if before != h.attempts_before {
                    return Err(format!("hint {} of {} is not after its attempts", h.index, q.question_id));
                }
            }
        }
        let mut seen_open = false;
        for q in &self.questions {
            if seen_open && (!q.hints.is_empty() || !q.attempts.is_empty()) {
                return Err(format!("{} was visited before an earlier question closed", q.question_id));
            }
            seen_open |= !q.is_closed();
        }
        Ok(())
    }
}
