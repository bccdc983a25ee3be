mod common;

use std::net::SocketAddr;
use std::sync::Arc;

use hintlab_core::analysis::StudyLog;
use hintlab_quiz::simulate::{Observed, Participant, RunEnd};
use hintlab_quiz::{FileStore, MemoryStore, QuizApi, QuizClient, QuizService};
use serde_json::Value;
use tokio::task::JoinHandle;

use common::{mock_client, questions, service};

async fn start(svc: QuizService) -> (String, JoinHandle<()>) {
    let (tx, rx) = tokio::sync::oneshot::channel();
    let addr: SocketAddr = "127.0.0.1:0".parse().unwrap();
    let handle = tokio::spawn(async move {
        hintlab_quiz::http::serve(Arc::new(svc), addr, |a| tx.send(a).unwrap()).await.unwrap();
    });
    (format!("http://{}", rx.await.unwrap()), handle)
}

async fn raw(method: reqwest::Method, url: &str, body: Option<&str>) -> (u16, Value) {
    let mut req = reqwest::Client::new().request(method, url);
    if let Some(b) = body {
        req = req.header("content-type", "application/json").body(b.to_string());
    }
    let resp = req.send().await.unwrap();
    let status = resp.status().as_u16();
    let text = resp.text().await.unwrap();
    (status, serde_json::from_str(&text).unwrap_or(Value::String(text)))
}

#[tokio::test]
async fn full_session_over_http() {
    let (url, server) = start(service(mock_client(), Arc::new(MemoryStore::new()))).await;
    let client = QuizClient::new(&url);
    assert!(client.status().await.unwrap().ready);
    let qs = questions();
    let p = Participant::new(&client, &qs);
    let id = p.join("http", Some(11)).await.unwrap();
    let mut seen = Observed::default();
    assert_eq!(p.run(&id, None, &mut seen).await.unwrap(), RunEnd::Done);
    assert_eq!(seen.rejected("hints_disabled"), 10);
    assert_eq!(seen.rejected("hint_budget_exhausted"), 4);

    let replay = client.replay(&id).await.unwrap();
    assert_eq!(replay.sections.len(), 3);
    let a = client.export(None).await.unwrap();
    assert_eq!(a, client.export(None).await.unwrap());
    let log = StudyLog::parse(&a).unwrap();
    assert_eq!(log.hints().count(), seen.hints);
    assert_eq!(client.export(Some(&id)).await.unwrap(), a);
    server.abort();
}

#[tokio::test]
async fn error_bodies_carry_codes() {
    let (url, server) = start(service(mock_client(), Arc::new(MemoryStore::new()))).await;
    let (status, body) = raw(reqwest::Method::POST, &format!("{url}/sessions"), Some(r#"{"participant_id":"e","seed":1}"#)).await;
    assert_eq!(status, 201);
    let id = body["session_id"].as_str().unwrap().to_string();
    assert!(body["state"]["sections"][1].get("condition").is_none(), "labels hidden during the quiz");

    let hint = format!("{url}/sessions/{id}/questions/quiz-01/hints");
    let (status, body) = raw(reqwest::Method::POST, &hint, None).await;
    assert_eq!((status, body["error"]["code"].as_str()), (403, Some("hints_disabled")));

    let answer = format!("{url}/sessions/{id}/questions/quiz-01/answers");
    let (status, body) = raw(reqwest::Method::POST, &answer, Some("{not json")).await;
    assert_eq!((status, body["error"]["code"].as_str()), (422, Some("validation_error")));

    let (status, body) = raw(reqwest::Method::GET, &format!("{url}/sessions/nope/state"), None).await;
    assert_eq!((status, body["error"]["code"].as_str()), (404, Some("not_found")));

    let (status, body) = raw(reqwest::Method::GET, &format!("{url}/sessions/{id}/replay"), None).await;
    assert_eq!((status, body["error"]["code"].as_str()), (409, Some("conflict")));

    let (status, body) = raw(reqwest::Method::GET, &format!("{url}/sessions/{id}/questions/current"), None).await;
    assert_eq!(status, 200);
    assert_eq!(body["screen"], "question");
    assert_eq!(body["question_id"], "quiz-01");
    assert!(body.get("answer").is_none());

    let (status, body) = raw(reqwest::Method::POST, &answer, Some(r#"{"text":"wrong"}"#)).await;
    assert_eq!(status, 200);
    assert_eq!((body["verdict"].as_str(), body["attempts_left"].as_u64()), (Some("incorrect"), Some(4)));
    server.abort();
}

#[tokio::test]
async fn not_ready_service_answers_503() {
    let svc = QuizService::builder(mock_client()).build().unwrap();
    let (url, server) = start(svc).await;
    let (status, body) = raw(reqwest::Method::POST, &format!("{url}/sessions"), Some(r#"{"participant_id":"x"}"#)).await;
    assert_eq!((status, body["error"]["code"].as_str()), (503, Some("service_not_ready")));
    server.abort();
}

#[tokio::test]
async fn server_restart_mid_section_over_http() {
    let dir = tempfile::tempdir().unwrap();
    let qs = questions();
    let file_service = || service(mock_client(), Arc::new(FileStore::open(dir.path()).unwrap()));

    let (url, server) = start(file_service()).await;
    let client = QuizClient::new(&url);
    let p = Participant::new(&client, &qs);
    let id = p.join("restart", Some(6)).await.unwrap();
    let mut seen = Observed::default();
    p.run(&id, Some(45), &mut seen).await.unwrap();
    let before = client.state(&id).await.unwrap();
    let current_before = client.current(&id).await.unwrap();
    server.abort();
    let _ = server.await;

    let (url, server) = start(file_service()).await;
    let client = QuizClient::new(&url);
    assert_eq!(client.state(&id).await.unwrap(), before);
    assert_eq!(client.current(&id).await.unwrap(), current_before);
    let p = Participant::new(&client, &qs);
    assert_eq!(p.run(&id, None, &mut seen).await.unwrap(), RunEnd::Done);
    assert!(StudyLog::parse(&client.export(None).await.unwrap()).is_ok());
    server.abort();
}

#[tokio::test]
async fn survey_text_is_served() {
    let (url, server) = start(service(mock_client(), Arc::new(MemoryStore::new()))).await;
    let (status, body) = raw(reqwest::Method::GET, &format!("{url}/survey-text"), None).await;
    assert_eq!(status, 200);
    assert_eq!(body["likert"]["satisfaction"].as_array().unwrap().len(), 5);
    server.abort();
}
