//! One interface over the in-process service and the HTTP client, so the
//! same scripted participant can drive either.

use async_trait::async_trait;
use hintlab_core::analysis::{HintFeedback, PostQuizSurvey, SectionSurvey};

use crate::service::{CreateSession, QuizService};
use crate::views::{Ack, AnswerResponse, CreatedView, CurrentView, HintResponse, Replay, SessionState};
use crate::QuizError;

#[async_trait]
pub trait QuizApi: Send + Sync {
    async fn create_session(&self, req: CreateSession) -> Result<CreatedView, QuizError>;
    async fn state(&self, session: &str) -> Result<SessionState, QuizError>;
    async fn current(&self, session: &str) -> Result<CurrentView, QuizError>;
    async fn request_hint(&self, session: &str, question: &str) -> Result<HintResponse, QuizError>;
    async fn submit_answer(&self, session: &str, question: &str, text: &str) -> Result<AnswerResponse, QuizError>;
    async fn submit_feedback(
        &self,
        session: &str,
        question: &str,
        hint_index: usize,
        feedback: HintFeedback,
    ) -> Result<Ack, QuizError>;
    async fn submit_section_survey(&self, session: &str, section: u8, survey: SectionSurvey) -> Result<Ack, QuizError>;
    async fn submit_post_quiz(&self, session: &str, survey: PostQuizSurvey) -> Result<Ack, QuizError>;
    async fn replay(&self, session: &str) -> Result<Replay, QuizError>;
    async fn export(&self, session: Option<&str>) -> Result<String, QuizError>;
}

#[async_trait]
impl QuizApi for QuizService {
    async fn create_session(&self, req: CreateSession) -> Result<CreatedView, QuizError> {
        QuizService::create_session(self, req).await
    }
    async fn state(&self, session: &str) -> Result<SessionState, QuizError> {
        QuizService::state(self, session).await
    }
    async fn current(&self, session: &str) -> Result<CurrentView, QuizError> {
        QuizService::current(self, session).await
    }
    async fn request_hint(&self, session: &str, question: &str) -> Result<HintResponse, QuizError> {
        QuizService::request_hint(self, session, question).await
    }
    async fn submit_answer(&self, session: &str, question: &str, text: &str) -> Result<AnswerResponse, QuizError> {
        QuizService::submit_answer(self, session, question, text).await
    }
    async fn submit_feedback(
        &self,
        session: &str,
        question: &str,
        hint_index: usize,
        feedback: HintFeedback,
    ) -> Result<Ack, QuizError> {
        QuizService::submit_feedback(self, session, question, hint_index, feedback).await
    }
    async fn submit_section_survey(&self, session: &str, section: u8, survey: SectionSurvey) -> Result<Ack, QuizError> {
        QuizService::submit_section_survey(self, session, section, survey).await
    }
    async fn submit_post_quiz(&self, session: &str, survey: PostQuizSurvey) -> Result<Ack, QuizError> {
        QuizService::submit_post_quiz(self, session, survey).await
    }
    async fn replay(&self, session: &str) -> Result<Replay, QuizError> {
        QuizService::replay(self, session).await
    }
    async fn export(&self, session: Option<&str>) -> Result<String, QuizError> {
        QuizService::export(self, session).await
    }
}
