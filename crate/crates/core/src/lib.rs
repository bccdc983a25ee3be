//! Hint generation, evaluation and study analysis for short-answer science
//! questions.

pub mod analysis;
pub mod assessment;
pub mod bench;
pub mod client;
pub mod dataset;
pub mod hints;
pub mod metrics;
pub mod prompts;
