//! JSON-over-HTTP routes for the quiz. Errors come back as
//! `{"error": {"code": ..., "message": ...}}`.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use hintlab_core::analysis::{HintFeedback, PostQuizSurvey, SectionSurvey};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;

use crate::service::{AnswerRequest, CreateSession, QuizService};
use crate::QuizError;

pub struct ApiError(pub QuizError);

impl From<QuizError> for ApiError {
    fn from(e: QuizError) -> Self {
        ApiError(e)
    }
}

pub fn status_of(e: &QuizError) -> StatusCode {
    match e {
        QuizError::ServiceNotReady(_) => StatusCode::SERVICE_UNAVAILABLE,
        QuizError::HintsDisabled => StatusCode::FORBIDDEN,
        QuizError::HintBudgetExhausted(_)
        | QuizError::QuestionClosed(_)
        | QuizError::Conflict(_)
        | QuizError::SectionIncomplete(_) => StatusCode::CONFLICT,
        QuizError::ServiceError(_) => StatusCode::BAD_GATEWAY,
        QuizError::NotFound(_) => StatusCode::NOT_FOUND,
        QuizError::Validation(_) => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.0.code(), "message": self.0.to_string() } });
        (status_of(&self.0), Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn body<T: DeserializeOwned>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload.map(|Json(v)| v).map_err(|e| ApiError(QuizError::Validation(e.body_text())))
}

type Svc = State<Arc<QuizService>>;

async fn status(State(svc): Svc) -> impl IntoResponse {
    Json(svc.status().await)
}

async fn survey_text(State(svc): Svc) -> impl IntoResponse {
    Json(svc.survey_text().clone())
}

async fn create(State(svc): Svc, payload: Result<Json<CreateSession>, JsonRejection>) -> Result<Response, ApiError> {
    let created = svc.create_session(body(payload)?).await?;
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

async fn state(State(svc): Svc, Path(id): Path<String>) -> ApiResult<crate::views::SessionState> {
    Ok(Json(svc.state(&id).await?))
}

async fn current(State(svc): Svc, Path(id): Path<String>) -> ApiResult<crate::views::CurrentView> {
    Ok(Json(svc.current(&id).await?))
}

async fn hint(State(svc): Svc, Path((id, qid)): Path<(String, String)>) -> ApiResult<crate::views::HintResponse> {
    Ok(Json(svc.request_hint(&id, &qid).await?))
}

async fn answer(
    State(svc): Svc,
    Path((id, qid)): Path<(String, String)>,
    payload: Result<Json<AnswerRequest>, JsonRejection>,
) -> ApiResult<crate::views::AnswerResponse> {
    let req = body(payload)?;
    Ok(Json(svc.submit_answer(&id, &qid, &req.text).await?))
}

async fn feedback(
    State(svc): Svc,
    Path((id, qid, index)): Path<(String, String, usize)>,
    payload: Result<Json<HintFeedback>, JsonRejection>,
) -> ApiResult<crate::views::Ack> {
    let fb = body(payload)?;
    Ok(Json(svc.submit_feedback(&id, &qid, index, fb).await?))
}

async fn section_survey(
    State(svc): Svc,
    Path((id, section)): Path<(String, u8)>,
    payload: Result<Json<SectionSurvey>, JsonRejection>,
) -> ApiResult<crate::views::Ack> {
    let survey = body(payload)?;
    Ok(Json(svc.submit_section_survey(&id, section, survey).await?))
}

async fn post_quiz(
    State(svc): Svc,
    Path(id): Path<String>,
    payload: Result<Json<PostQuizSurvey>, JsonRejection>,
) -> ApiResult<crate::views::Ack> {
    let survey = body(payload)?;
    Ok(Json(svc.submit_post_quiz(&id, survey).await?))
}

async fn replay(State(svc): Svc, Path(id): Path<String>) -> ApiResult<crate::views::Replay> {
    Ok(Json(svc.replay(&id).await?))
}

#[derive(Debug, Deserialize)]
struct ExportQuery {
    session: Option<String>,
}

async fn export(State(svc): Svc, Query(q): Query<ExportQuery>) -> Result<Response, ApiError> {
    let text = svc.export(q.session.as_deref()).await?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], text).into_response())
}

pub fn router(service: Arc<QuizService>) -> Router {
    Router::new()
        .route("/status", get(status))
        .route("/survey-text", get(survey_text))
        .route("/sessions", post(create))
        .route("/sessions/{id}/state", get(state))
        .route("/sessions/{id}/questions/current", get(current))
        .route("/sessions/{id}/questions/{qid}/hints", post(hint))
        .route("/sessions/{id}/questions/{qid}/answers", post(answer))
        .route("/sessions/{id}/questions/{qid}/hints/{index}/feedback", post(feedback))
        .route("/sessions/{id}/surveys/section/{section}", post(section_survey))
        .route("/sessions/{id}/surveys/post-quiz", post(post_quiz))
        .route("/sessions/{id}/replay", get(replay))
        .route("/export", get(export))
        .with_state(service)
}

/// Binds `addr` and serves until the future is dropped. Returns the bound
/// address through `on_bound`, which helps when `addr` uses port 0.
pub async fn serve(
    service: Arc<QuizService>,
    addr: SocketAddr,
    on_bound: impl FnOnce(SocketAddr),
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    on_bound(listener.local_addr()?);
    axum::serve(listener, router(service)).await
}
