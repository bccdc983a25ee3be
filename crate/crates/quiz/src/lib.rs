//! The three-section quiz protocol as an HTTP service: sessions with a
//! seeded section order, per-question hint and attempt budgets, hint
//! feedback, surveys, an interaction replay and a study-log export.
//!
//! Session state is event-sourced. Each session appends to its own log and
//! is periodically snapshotted, and a restarted service rebuilds every
//! session from storage.

pub mod api;
pub mod client;
pub mod clock;
mod error;
pub mod export;
pub mod http;
pub mod plan;
pub mod service;
pub mod session;
pub mod simulate;
pub mod store;
pub mod views;

pub use api::QuizApi;
pub use client::QuizClient;
pub use clock::{Clock, StepClock, SystemClock};
pub use error::QuizError;
pub use plan::{Counterbalance, SectionPlan};
pub use service::{AnswerRequest, CreateSession, QuizService, ServiceConfig};
pub use session::{QuizSession, SessionEvent, MAX_ATTEMPTS};
pub use store::{FileStore, MemoryStore, SessionStore};
