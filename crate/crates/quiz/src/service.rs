use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};

use chrono::{DateTime, TimeDelta, Utc};
use futures::future::try_join_all;
use hintlab_core::analysis::{HintFeedback, PostQuizSurvey, PreQuizSurvey, SectionSurvey};
use hintlab_core::assessment::Assessor;
use hintlab_core::client::ModelClient;
use hintlab_core::dataset::{quiz_set, Question, SubjectMix};
use hintlab_core::hints::{HintChain, HintGenerator};
use hintlab_core::prompts::PromptSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

use crate::clock::{Clock, SystemClock};
use crate::plan::{Counterbalance, SectionPlan};
use crate::session::{
    validate_pre_quiz, AttemptEntry, HintSource, QuizSession, SessionEvent, ShownHint,
};
use crate::store::{restore, MemoryStore, SessionStore};
use crate::views::{self, Ack, AnswerResponse, CreatedView, CurrentView, HintResponse, Replay, SessionState, StatusView};
use crate::{export, QuizError};

pub const MAX_SUBMISSION_CHARS: usize = 2000;

/// Built-in survey wording and Likert anchor labels.
pub const DEFAULT_SURVEY_TEXT: &str = include_str!("../assets/survey_text.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceConfig {
    /// Mixed with the session counter when a request carries no seed.
    pub seed: u64,
    /// Write a snapshot every this many events.
    pub snapshot_every: usize,
    /// Extra attempts at dynamic hint generation on top of the client's
    /// own transport retries.
    pub generation_retries: u32,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self { seed: 0, snapshot_every: 8, generation_retries: 1 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreateSession {
    pub participant_id: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub pre_quiz: PreQuizSurvey,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerRequest {
    pub text: String,
}

struct Quiz {
    ids: Vec<String>,
    by_id: HashMap<String, Question>,
}

pub struct QuizServiceBuilder {
    client: Arc<ModelClient>,
    prompts: Arc<PromptSet>,
    store: Arc<dyn SessionStore>,
    clock: Arc<dyn Clock>,
    questions: Result<Vec<Question>, String>,
    config: ServiceConfig,
    survey_text: serde_json::Value,
}

impl QuizServiceBuilder {
    pub fn questions(mut self, questions: Vec<Question>) -> Self {
        self.questions = Ok(questions);
        self
    }

    /// Loads the curated quiz. A missing or invalid file leaves the service
    /// up but refusing sessions.
    pub fn quiz_file(mut self, path: &Path, mix: &SubjectMix) -> Self {
        self.questions = quiz_set(path, mix).map_err(|e| e.to_string());
        self
    }

    pub fn prompts(mut self, prompts: Arc<PromptSet>) -> Self {
        self.prompts = prompts;
        self
    }

    pub fn store(mut self, store: Arc<dyn SessionStore>) -> Self {
        self.store = store;
        self
    }

    pub fn clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn config(mut self, config: ServiceConfig) -> Self {
        self.config = config;
        self
    }

    /// Replaces the survey wording served to the UI with a JSON file.
    pub fn survey_text_file(mut self, path: &Path) -> Result<Self, QuizError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| QuizError::ServiceError(format!("{}: {e}", path.display())))?;
        self.survey_text = serde_json::from_str(&text)
            .map_err(|e| QuizError::ServiceError(format!("{}: {e}", path.display())))?;
        Ok(self)
    }

    /// Restores every stored session and starts the service.
    pub fn build(self) -> Result<QuizService, QuizError> {
        let quiz = self.questions.and_then(|qs| {
            let ids: Vec<String> = qs.iter().map(|q| q.id.clone()).collect();
            SectionPlan::draw(0, &ids).map_err(|e| e.to_string())?;
            Ok(Quiz { ids, by_id: qs.into_iter().map(|q| (q.id.clone(), q)).collect() })
        });
        if let Err(reason) = &quiz {
            tracing::warn!("quiz service not ready: {reason}");
        }
        let mut sessions = BTreeMap::new();
        let mut next_ordinal = 0;
        for stored in self.store.load_all().map_err(QuizError::storage)? {
            let s = restore(&stored)?;
            if let Ok(q) = &quiz {
                if let Some(missing) = s.questions.iter().find(|x| !q.by_id.contains_key(&x.question_id)) {
                    return Err(QuizError::ServiceError(format!(
                        "stored session {} refers to unknown question {}",
                        s.id, missing.question_id
                    )));
                }
            }
            next_ordinal = next_ordinal.max(s.ordinal + 1);
            sessions.insert(s.id.clone(), Arc::new(Mutex::new(s)));
        }
        let generator = HintGenerator::new(self.client.clone(), self.prompts.clone());
        let assessor = Assessor::new(self.client, self.prompts);
        Ok(QuizService {
            quiz,
            generator,
            assessor,
            store: self.store,
            clock: self.clock,
            config: self.config,
            sessions: RwLock::new(sessions),
            next_ordinal: AtomicUsize::new(next_ordinal),
            survey_text: self.survey_text,
        })
    }
}

/// The study protocol over a session store. Sessions are independent;
/// each one's mutations run one at a time under its own lock.
pub struct QuizService {
    quiz: Result<Quiz, String>,
    generator: HintGenerator,
    assessor: Assessor,
    store: Arc<dyn SessionStore>,
    clock: Arc<dyn Clock>,
    config: ServiceConfig,
    sessions: RwLock<BTreeMap<String, Arc<Mutex<QuizSession>>>>,
    next_ordinal: AtomicUsize,
    survey_text: serde_json::Value,
}

fn mix(a: u64, b: u64) -> u64 {
    let mut x = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x ^= x >> 31;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^ (x >> 29)
}

impl QuizService {
    pub fn builder(client: Arc<ModelClient>) -> QuizServiceBuilder {
        QuizServiceBuilder {
            client,
            prompts: Arc::new(PromptSet::builtin()),
            store: Arc::new(MemoryStore::new()),
            clock: Arc::new(SystemClock::default()),
            questions: Err("no quiz set configured".into()),
            config: ServiceConfig::default(),
            survey_text: serde_json::from_str(DEFAULT_SURVEY_TEXT).expect("built-in survey text is valid JSON"),
        }
    }

    pub fn survey_text(&self) -> &serde_json::Value {
        &self.survey_text
    }

    fn quiz(&self) -> Result<&Quiz, QuizError> {
        self.quiz.as_ref().map_err(|r| QuizError::ServiceNotReady(r.clone()))
    }

    fn question(&self, id: &str) -> Result<&Question, QuizError> {
        self.quiz()?
            .by_id
            .get(id)
            .ok_or_else(|| QuizError::NotFound(format!("question {id} is not in the quiz set")))
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<QuizSession>>, QuizError> {
        self.quiz()?;
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| QuizError::NotFound(format!("session {id} does not exist")))
    }

    /// A timestamp strictly after everything already in the session.
    fn stamp(&self, s: &QuizSession) -> DateTime<Utc> {
        self.clock.now().max(s.last_at + TimeDelta::microseconds(1))
    }

    fn commit(&self, s: &mut QuizSession, event: SessionEvent) -> Result<(), QuizError> {
        let mut next = s.clone();
        next.apply(&event)?;
        self.store.append(&s.id, s.events_applied, &event).map_err(QuizError::storage)?;
        if self.config.snapshot_every > 0 && next.events_applied.is_multiple_of(self.config.snapshot_every) {
            if let Err(e) = self.store.snapshot(&next) {
                tracing::warn!(session = %next.id, "snapshot failed: {e}");
            }
        }
        *s = next;
        Ok(())
    }

    pub async fn status(&self) -> StatusView {
        StatusView {
            ready: self.quiz.is_ok(),
            reason: self.quiz.as_ref().err().cloned(),
            questions: self.quiz.as_ref().map(|q| q.ids.len()).unwrap_or(0),
            counterbalance: self.counterbalance().await,
        }
    }

    /// Counts section orders over all sessions, waiting for busy ones.
    pub async fn counterbalance(&self) -> Counterbalance {
        let all: Vec<_> = self.sessions.read().unwrap().values().cloned().collect();
        let mut plans = Vec::with_capacity(all.len());
        for s in all {
            plans.push(s.lock().await.plan.clone());
        }
        Counterbalance::of(&plans)
    }

    pub async fn create_session(&self, req: CreateSession) -> Result<CreatedView, QuizError> {
        let quiz = self.quiz()?;
        let participant = req.participant_id.trim();
        if participant.is_empty() {
            return Err(QuizError::Validation("participant_id must not be empty".into()));
        }
        validate_pre_quiz(&req.pre_quiz)?;
        let ordinal = self.next_ordinal.fetch_add(1, Ordering::SeqCst);
        let seed = req.seed.unwrap_or_else(|| mix(self.config.seed, ordinal as u64));
        let plan = SectionPlan::draw(seed, &quiz.ids)?;
        let mut id_rng = ChaCha8Rng::seed_from_u64(mix(self.config.seed.rotate_left(17), ordinal as u64));
        let session_id = uuid::Builder::from_random_bytes(id_rng.random()).into_uuid().to_string();

        let static_chains = self.pregenerate(&plan).await?;
        let event = SessionEvent::Created {
            session_id: session_id.clone(),
            participant_id: participant.to_string(),
            ordinal,
            seed,
            plan,
            static_chains,
            pre_quiz: req.pre_quiz,
            at: self.clock.now(),
        };
        let session = QuizSession::from_created(&event)?;
        self.store.append(&session_id, 0, &event).map_err(QuizError::storage)?;
        let state = views::session_state(&session);
        tracing::info!(session = %session_id, static_first = session.plan.static_first(), "session created");
        self.sessions.write().unwrap().insert(session_id.clone(), Arc::new(Mutex::new(session)));
        Ok(CreatedView { session_id, state })
    }

    /// Static chains for the static section, generated up front.
    async fn pregenerate(&self, plan: &SectionPlan) -> Result<BTreeMap<String, HintChain>, QuizError> {
        let section = plan
            .sections
            .iter()
            .position(|c| *c == hintlab_core::analysis::Condition::Static)
            .expect("every plan has a static section");
        let jobs = plan.questions[section].iter().map(|qid| async move {
            let q = self.question(qid)?;
            let chain = self
                .generator
                .generate_static_chain(q)
                .await
                .map_err(|e| QuizError::ServiceError(format!("static hints for {qid}: {e}")))?;
            Ok::<_, QuizError>((qid.clone(), chain))
        });
        Ok(try_join_all(jobs).await?.into_iter().collect())
    }

    pub async fn state(&self, session_id: &str) -> Result<SessionState, QuizError> {
        let s = self.session(session_id)?;
        let s = s.lock().await;
        Ok(views::session_state(&s))
    }

    /// A copy of the full internal state.
    pub async fn snapshot(&self, session_id: &str) -> Result<QuizSession, QuizError> {
        let s = self.session(session_id)?;
        let s = s.lock().await;
        Ok(s.clone())
    }

    pub async fn current(&self, session_id: &str) -> Result<CurrentView, QuizError> {
        let s = self.session(session_id)?;
        let s = s.lock().await;
        Ok(views::current_view(&s, &self.quiz()?.by_id))
    }

    pub async fn request_hint(&self, session_id: &str, question_id: &str) -> Result<HintResponse, QuizError> {
        let s = self.session(session_id)?;
        let mut s = s.lock().await;
        let source = s.check_hint(question_id)?;
        let question = self.question(question_id)?;
        let hint = match source {
            HintSource::Static(h) => h,
            HintSource::Dynamic { prior, history } => {
                let mut tries = 0;
                loop {
                    match self.generator.generate_next_dynamic_hint(question, &prior, &history).await {
                        Ok(h) => break h,
                        Err(e) if tries < self.config.generation_retries => {
                            tries += 1;
                            tracing::warn!(session = %session_id, question = %question_id, "hint generation failed, retrying: {e}");
                        }
                        Err(e) => return Err(QuizError::ServiceError(format!("hint generation failed: {e}"))),
                    }
                }
            }
        };
        let (_, q) = s.question(question_id)?;
        let shown = ShownHint {
            index: q.hints_shown() + 1,
            text: hint.text,
            at: self.stamp(&s),
            attempts_before: q.attempts_used(),
            model_id: hint.model_id,
            prompt_hash: hint.prompt_hash,
        };
        let response = HintResponse { hint_index: shown.index, text: shown.text.clone(), hints_left: 0 };
        self.commit(&mut s, SessionEvent::HintShown { question_id: question_id.to_string(), hint: shown })?;
        let (_, q) = s.question(question_id)?;
        Ok(HintResponse { hints_left: q.hints_left(), ..response })
    }

    pub async fn submit_answer(
        &self,
        session_id: &str,
        question_id: &str,
        text: &str,
    ) -> Result<AnswerResponse, QuizError> {
        if text.chars().count() > MAX_SUBMISSION_CHARS {
            return Err(QuizError::Validation(format!("answers are limited to {MAX_SUBMISSION_CHARS} characters")));
        }
        let s = self.session(session_id)?;
        let mut s = s.lock().await;
        s.check_answer(question_id)?;
        let question = self.question(question_id)?;
        let result = self.assessor.assess(question, text).await;
        let (_, q) = s.question(question_id)?;
        let attempt = AttemptEntry {
            index: q.attempts_used() + 1,
            text: text.to_string(),
            verdict: result.verdict,
            method: result.method,
            raw_judge_output: result.raw_judge_output,
            at: self.stamp(&s),
            hints_before: q.hints_shown(),
        };
        self.commit(&mut s, SessionEvent::AttemptRecorded { question_id: question_id.to_string(), attempt })?;
        let (_, q) = s.question(question_id)?;
        Ok(AnswerResponse {
            verdict: result.verdict,
            method: result.method,
            attempts_used: q.attempts_used(),
            attempts_left: q.attempts_left(),
            outcome: q.outcome,
            reveal: q.is_resolved().then(|| question.answer.clone()),
            feedback_pending: if q.is_resolved() { q.pending_feedback() } else { Vec::new() },
        })
    }

    pub async fn submit_feedback(
        &self,
        session_id: &str,
        question_id: &str,
        hint_index: usize,
        feedback: HintFeedback,
    ) -> Result<Ack, QuizError> {
        let s = self.session(session_id)?;
        let mut s = s.lock().await;
        s.check_feedback(question_id, hint_index, &feedback)?;
        let at = self.stamp(&s);
        let event = SessionEvent::FeedbackRecorded { question_id: question_id.to_string(), hint_index, feedback, at };
        self.commit(&mut s, event)?;
        Ok(Ack { ok: true, position: views::position_view(&s) })
    }

    pub async fn submit_section_survey(
        &self,
        session_id: &str,
        section: u8,
        survey: SectionSurvey,
    ) -> Result<Ack, QuizError> {
        let s = self.session(session_id)?;
        let mut s = s.lock().await;
        s.check_section_survey(section, &survey)?;
        let at = self.stamp(&s);
        self.commit(&mut s, SessionEvent::SectionSurveyRecorded { section, survey, at })?;
        Ok(Ack { ok: true, position: views::position_view(&s) })
    }

    pub async fn submit_post_quiz(&self, session_id: &str, survey: PostQuizSurvey) -> Result<Ack, QuizError> {
        let s = self.session(session_id)?;
        let mut s = s.lock().await;
        s.check_post_quiz()?;
        let at = self.stamp(&s);
        self.commit(&mut s, SessionEvent::PostQuizRecorded { survey, at })?;
        if let Err(e) = self.store.snapshot(&s) {
            tracing::warn!(session = %s.id, "snapshot failed: {e}");
        }
        Ok(Ack { ok: true, position: views::position_view(&s) })
    }

    pub async fn replay(&self, session_id: &str) -> Result<Replay, QuizError> {
        let s = self.session(session_id)?;
        let s = s.lock().await;
        if !s.replay_available() {
            return Err(QuizError::Conflict("the replay opens after the post-quiz survey".into()));
        }
        Ok(views::replay(&s, &self.quiz()?.by_id))
    }

    /// NDJSON study log for one session or all of them.
    pub async fn export(&self, session_id: Option<&str>) -> Result<String, QuizError> {
        let handles: Vec<Arc<Mutex<QuizSession>>> = match session_id {
            Some(id) => vec![self.session(id)?],
            None => self.sessions.read().unwrap().values().cloned().collect(),
        };
        let mut sessions = Vec::with_capacity(handles.len());
        for h in handles {
            sessions.push(h.lock().await.clone());
        }
        Ok(export::export(&sessions))
    }
}
