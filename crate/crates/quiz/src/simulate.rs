//! A scripted participant. It reads its next move from the server's view
//! of the session, so it can stop at any point and pick up again against
//! a restarted service. Along the way it probes the protocol's refusals
//! (hints in the control section, a fifth hint, early surveys, premature
//! feedback) and fails if any of them is let through.

use std::collections::{BTreeMap, HashMap};

use hintlab_core::analysis::{HintFeedback, Outcome, PostQuizSurvey, PreQuizSurvey, SectionSurvey, StrategyPreference};
use hintlab_core::dataset::Question;
use serde::Serialize;

use crate::api::QuizApi;
use crate::service::CreateSession;
use crate::views::{CurrentView, QuestionView};
use crate::QuizError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Hint,
    Wrong,
    Right,
}

/// Moves for the question at 1-based `number` within its section. Hint
/// steps are skipped in the control section.
pub fn script(number: usize) -> Vec<Step> {
    use Step::*;
    match number % 5 {
        1 => vec![Right],
        2 => vec![Hint, Wrong, Right],
        3 => vec![Wrong, Hint, Wrong, Hint, Right],
        4 => vec![Hint, Hint, Hint, Hint, Wrong, Wrong, Wrong, Wrong, Wrong],
        _ => vec![Wrong; 5],
    }
}

fn effective_script(number: usize, hints_enabled: bool) -> Vec<Step> {
    script(number).into_iter().filter(|s| hints_enabled || *s != Step::Hint).collect()
}

/// Tally of what the participant did and which refusals it saw, by code.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Observed {
    pub steps: usize,
    pub hints: usize,
    pub attempts: usize,
    pub feedback: usize,
    pub surveys: usize,
    pub rejections: BTreeMap<String, usize>,
}

impl Observed {
    pub fn rejected(&self, code: &str) -> usize {
        self.rejections.get(code).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunEnd {
    Done,
    Paused,
}

pub struct Participant<'a> {
    api: &'a dyn QuizApi,
    answers: HashMap<String, String>,
}

fn small_hash(s: &str) -> usize {
    s.bytes().fold(7usize, |h, b| h.wrapping_mul(31).wrapping_add(b as usize))
}

impl<'a> Participant<'a> {
    pub fn new(api: &'a dyn QuizApi, questions: &[Question]) -> Self {
        Self { api, answers: questions.iter().map(|q| (q.id.clone(), q.answer.clone())).collect() }
    }

    pub async fn join(&self, participant_id: &str, seed: Option<u64>) -> Result<String, QuizError> {
        let pre_quiz = PreQuizSurvey {
            age_range: Some("25-34".into()),
            education: Some("bachelor".into()),
            familiarity: ["biology", "chemistry", "geology", "physics"]
                .iter()
                .enumerate()
                .map(|(i, s)| (s.to_string(), (i % 5) as u8 + 1))
                .collect(),
            ..Default::default()
        };
        let created = self
            .api
            .create_session(CreateSession { participant_id: participant_id.into(), seed, pre_quiz })
            .await?;
        Ok(created.session_id)
    }

    /// Expects `result` to be refused with `code` and records it.
    fn expect<T>(&self, seen: &mut Observed, what: &str, code: &str, result: Result<T, QuizError>) -> Result<(), QuizError> {
        match result {
            Err(e) if e.code() == code => {
                *seen.rejections.entry(code.to_string()).or_default() += 1;
                Ok(())
            }
            Err(e) => Err(QuizError::ServiceError(format!("{what}: expected {code}, got {}: {e}", e.code()))),
            Ok(_) => Err(QuizError::ServiceError(format!("{what}: expected {code}, but it was accepted"))),
        }
    }

    /// Plays until the session is done or `max_steps` state changes have
    /// been made in this call.
    pub async fn run(&self, session: &str, max_steps: Option<usize>, seen: &mut Observed) -> Result<RunEnd, QuizError> {
        let mut taken = 0;
        loop {
            if max_steps.is_some_and(|m| taken >= m) {
                return Ok(RunEnd::Paused);
            }
            match self.api.current(session).await? {
                CurrentView::Question(v) => self.play(session, &v, seen).await?,
                CurrentView::Feedback(v) => self.rate(session, &v, seen).await?,
                CurrentView::SectionSurvey { section, asks_hint_quality } => {
                    self.section_survey(session, section, asks_hint_quality, seen).await?
                }
                CurrentView::PostQuiz => {
                    self.expect(seen, "replay before post-quiz", "conflict", self.api.replay(session).await)?;
                    let survey = PostQuizSurvey {
                        helpful_strategy: StrategyPreference::Dynamic,
                        understanding_strategy: StrategyPreference::NoPreference,
                        differences: "later hints followed my wrong answers".into(),
                        general: String::new(),
                    };
                    self.api.submit_post_quiz(session, survey).await?;
                    seen.surveys += 1;
                }
                CurrentView::Done => return Ok(RunEnd::Done),
            }
            taken += 1;
            seen.steps += 1;
        }
    }

    async fn play(&self, session: &str, v: &QuestionView, seen: &mut Observed) -> Result<(), QuizError> {
        let qid = v.question_id.as_str();
        let steps = effective_script(v.number, v.hints_enabled);
        let idx = v.attempts_used + v.hints.len();
        if !v.hints_enabled && idx == 0 {
            self.expect(seen, "control hint", "hints_disabled", self.api.request_hint(session, qid).await)?;
        }
        if v.hints_enabled && v.number == 1 && idx == 0 {
            let early = SectionSurvey { difficulty: 3, hint_quality: Some(3), positives: None, negatives: None };
            let r = self.api.submit_section_survey(session, v.section, early).await;
            self.expect(seen, "early section survey", "section_incomplete", r)?;
            let post = PostQuizSurvey {
                helpful_strategy: StrategyPreference::Static,
                understanding_strategy: StrategyPreference::Static,
                differences: String::new(),
                general: String::new(),
            };
            let r = self.api.submit_post_quiz(session, post).await;
            self.expect(seen, "early post-quiz", "section_incomplete", r)?;
        }
        if v.hints.len() == hintlab_core::hints::MAX_HINTS && v.attempts_used == 0 {
            self.expect(seen, "fifth hint", "hint_budget_exhausted", self.api.request_hint(session, qid).await)?;
        }
        if !v.hints.is_empty() && v.attempts_used == 0 && v.number % 5 == 2 {
            let fb = HintFeedback { satisfaction: 3, informative: true, leaked: false };
            let r = self.api.submit_feedback(session, qid, 1, fb).await;
            self.expect(seen, "feedback on an open question", "conflict", r)?;
        }
        let step = steps.get(idx).copied().ok_or_else(|| {
            QuizError::ServiceError(format!("{qid}: still open after the whole script ({idx} steps)"))
        })?;
        match step {
            Step::Hint => {
                let h = self.api.request_hint(session, qid).await?;
                if h.hint_index != v.hints.len() + 1 {
                    return Err(QuizError::ServiceError(format!("{qid}: got hint {} out of order", h.hint_index)));
                }
                seen.hints += 1;
            }
            Step::Wrong | Step::Right => {
                let text = match step {
                    Step::Right => self.answers.get(qid).cloned().unwrap_or_default(),
                    _ => format!("wrong guess {}", v.attempts_used + 1),
                };
                let r = self.api.submit_answer(session, qid, &text).await?;
                let closes = step == Step::Right || r.attempts_used == crate::MAX_ATTEMPTS;
                if closes != r.reveal.is_some() {
                    return Err(QuizError::ServiceError(format!("{qid}: reveal does not match closing")));
                }
                seen.attempts += 1;
            }
        }
        Ok(())
    }

    async fn rate(&self, session: &str, v: &QuestionView, seen: &mut Observed) -> Result<(), QuizError> {
        let qid = v.question_id.as_str();
        let first_rating = v.feedback_pending.len() == v.hints.len();
        if first_rating && v.outcome == Outcome::Exhausted {
            let r = self.api.submit_answer(session, qid, "one more try").await;
            self.expect(seen, "answer after the last attempt", "question_closed", r)?;
        }
        if first_rating && v.number % 5 == 2 {
            let fb = HintFeedback { satisfaction: 4, informative: true, leaked: false };
            let r = self.api.submit_feedback(session, qid, v.hints.len() + 1, fb).await;
            self.expect(seen, "feedback for an unseen hint", "not_found", r)?;
        }
        if first_rating && v.number % 5 == 3 {
            let fb = HintFeedback { satisfaction: 6, informative: true, leaked: false };
            let r = self.api.submit_feedback(session, qid, v.feedback_pending[0], fb).await;
            self.expect(seen, "satisfaction out of range", "validation_error", r)?;
        }
        let index = v.feedback_pending[0];
        let fb = HintFeedback {
            satisfaction: (small_hash(qid) + index) as u8 % 5 + 1,
            informative: index % 2 == 1,
            leaked: v.number % 5 == 4 && index == 4,
        };
        self.api.submit_feedback(session, qid, index, fb).await?;
        let again = self.api.submit_feedback(session, qid, index, fb).await;
        self.expect(seen, "duplicate feedback", "conflict", again)?;
        seen.feedback += 1;
        Ok(())
    }

    async fn section_survey(&self, session: &str, section: u8, asks_hint_quality: bool, seen: &mut Observed) -> Result<(), QuizError> {
        if !asks_hint_quality {
            let bad = SectionSurvey { difficulty: 2, hint_quality: Some(4), positives: None, negatives: None };
            let r = self.api.submit_section_survey(session, section, bad).await;
            self.expect(seen, "hint question in the control survey", "validation_error", r)?;
        }
        let survey = if asks_hint_quality {
            SectionSurvey {
                difficulty: 3,
                hint_quality: Some(section + 1),
                positives: Some("short and to the point".into()),
                negatives: Some("one hint repeated the question".into()),
            }
        } else {
            SectionSurvey { difficulty: 2, hint_quality: None, positives: None, negatives: None }
        };
        self.api.submit_section_survey(session, section, survey).await?;
        seen.surveys += 1;
        Ok(())
    }
}
