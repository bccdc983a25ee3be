#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use hintlab_core::client::{EndpointTable, ModelClient};
use hintlab_core::dataset::{quiz_set, Question, SubjectMix};
use hintlab_quiz::{QuizService, ServiceConfig, SessionStore, StepClock};

pub fn quiz_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/quiz_set.jsonl")
}

pub fn questions() -> Vec<Question> {
    quiz_set(quiz_path(), &SubjectMix::study_default()).unwrap()
}

pub fn mock_client() -> Arc<ModelClient> {
    Arc::new(ModelClient::from_table(EndpointTable::all_mock()))
}

pub fn service(client: Arc<ModelClient>, store: Arc<dyn SessionStore>) -> QuizService {
    QuizService::builder(client)
        .questions(questions())
        .store(store)
        .clock(Arc::new(StepClock::starting_at_epoch()))
        .config(ServiceConfig { seed: 42, snapshot_every: 5, generation_retries: 1 })
        .build()
        .unwrap()
}
