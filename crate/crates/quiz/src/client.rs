//! HTTP client for a running quiz service.

use async_trait::async_trait;
use hintlab_core::analysis::{HintFeedback, PostQuizSurvey, SectionSurvey};
use reqwest::{Method, StatusCode};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::api::QuizApi;
use crate::service::{AnswerRequest, CreateSession};
use crate::views::{Ack, AnswerResponse, CreatedView, CurrentView, HintResponse, Replay, SessionState, StatusView};
use crate::QuizError;

#[derive(Debug, Clone)]
pub struct QuizClient {
    base: String,
    http: reqwest::Client,
}

impl QuizClient {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self { base: base_url.into().trim_end_matches('/').to_string(), http: reqwest::Client::new() }
    }

    fn unreachable(e: reqwest::Error) -> QuizError {
        QuizError::ServiceError(format!("quiz service unreachable: {e}"))
    }

    async fn send(&self, method: Method, path: &str, body: Option<String>) -> Result<String, QuizError> {
        let mut req = self.http.request(method, format!("{}{path}", self.base));
        if let Some(b) = body {
            req = req.header("content-type", "application/json").body(b);
        }
        let resp = req.send().await.map_err(Self::unreachable)?;
        let status = resp.status();
        let text = resp.text().await.map_err(Self::unreachable)?;
        if status.is_success() {
            return Ok(text);
        }
        Err(decode_error(status, &text))
    }

    async fn call<T: DeserializeOwned>(
        &self,
        method: Method,
        path: &str,
        body: Option<String>,
    ) -> Result<T, QuizError> {
        let text = self.send(method, path, body).await?;
        serde_json::from_str(&text).map_err(|e| QuizError::ServiceError(format!("bad response from {path}: {e}")))
    }

    pub async fn status(&self) -> Result<StatusView, QuizError> {
        self.call(Method::GET, "/status", None).await
    }
}

/// Maps an error response back onto [`QuizError`] by its code.
pub fn decode_error(status: StatusCode, body: &str) -> QuizError {
    let parsed: Option<(String, String)> = serde_json::from_str::<serde_json::Value>(body).ok().and_then(|v| {
        let e = v.get("error")?;
        Some((e.get("code")?.as_str()?.to_string(), e.get("message")?.as_str()?.to_string()))
    });
    let Some((code, message)) = parsed else {
        return QuizError::ServiceError(format!("HTTP {status}: {body}"));
    };
    match code.as_str() {
        "service_not_ready" => QuizError::ServiceNotReady(message),
        "hints_disabled" => QuizError::HintsDisabled,
        "hint_budget_exhausted" => QuizError::HintBudgetExhausted(hintlab_core::hints::MAX_HINTS),
        "question_closed" => QuizError::QuestionClosed(message),
        "not_found" => QuizError::NotFound(message),
        "conflict" => QuizError::Conflict(message),
        "validation_error" => QuizError::Validation(message),
        "section_incomplete" => QuizError::SectionIncomplete(message),
        _ => QuizError::ServiceError(message),
    }
}

fn body<T: Serialize>(v: &T) -> Option<String> {
    Some(serde_json::to_string(v).expect("request bodies serialize"))
}

#[async_trait]
impl QuizApi for QuizClient {
    async fn create_session(&self, req: CreateSession) -> Result<CreatedView, QuizError> {
        self.call(Method::POST, "/sessions", body(&req)).await
    }
    async fn state(&self, session: &str) -> Result<SessionState, QuizError> {
        self.call(Method::GET, &format!("/sessions/{session}/state"), None).await
    }
    async fn current(&self, session: &str) -> Result<CurrentView, QuizError> {
        self.call(Method::GET, &format!("/sessions/{session}/questions/current"), None).await
    }
    async fn request_hint(&self, session: &str, question: &str) -> Result<HintResponse, QuizError> {
        self.call(Method::POST, &format!("/sessions/{session}/questions/{question}/hints"), None).await
    }
    async fn submit_answer(&self, session: &str, question: &str, text: &str) -> Result<AnswerResponse, QuizError> {
        let req = AnswerRequest { text: text.to_string() };
        self.call(Method::POST, &format!("/sessions/{session}/questions/{question}/answers"), body(&req)).await
    }
    async fn submit_feedback(
        &self,
        session: &str,
        question: &str,
        hint_index: usize,
        feedback: HintFeedback,
    ) -> Result<Ack, QuizError> {
        let path = format!("/sessions/{session}/questions/{question}/hints/{hint_index}/feedback");
        self.call(Method::POST, &path, body(&feedback)).await
    }
    async fn submit_section_survey(&self, session: &str, section: u8, survey: SectionSurvey) -> Result<Ack, QuizError> {
        self.call(Method::POST, &format!("/sessions/{session}/surveys/section/{section}"), body(&survey)).await
    }
    async fn submit_post_quiz(&self, session: &str, survey: PostQuizSurvey) -> Result<Ack, QuizError> {
        self.call(Method::POST, &format!("/sessions/{session}/surveys/post-quiz"), body(&survey)).await
    }
    async fn replay(&self, session: &str) -> Result<Replay, QuizError> {
        self.call(Method::GET, &format!("/sessions/{session}/replay"), None).await
    }
    async fn export(&self, session: Option<&str>) -> Result<String, QuizError> {
        let path = match session {
            Some(s) => format!("/export?session={s}"),
            None => "/export".to_string(),
        };
        self.send(Method::GET, &path, None).await
    }
}
