//! Section layout of a quiz session.

use hintlab_core::analysis::Condition;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::QuizError;

pub const SECTIONS: usize = 3;
pub const QUESTIONS_PER_SECTION: usize = 10;

/// Section 1 is the no-hint control. Sections 2 and 3 get static and
/// dynamic hints in an order drawn from the session seed. Questions keep
/// the curated quiz order, ten per section.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionPlan {
    pub sections: [Condition; SECTIONS],
    pub questions: [Vec<String>; SECTIONS],
}

impl SectionPlan {
    pub fn draw(seed: u64, question_ids: &[String]) -> Result<Self, QuizError> {
        let want = SECTIONS * QUESTIONS_PER_SECTION;
        if question_ids.len() != want {
            return Err(QuizError::ServiceNotReady(format!(
                "quiz set has {} questions, expected {want}",
                question_ids.len()
            )));
        }
        let static_first = ChaCha8Rng::seed_from_u64(seed).random_bool(0.5);
        let (second, third) = if static_first {
            (Condition::Static, Condition::Dynamic)
        } else {
            (Condition::Dynamic, Condition::Static)
        };
        let chunk = |i: usize| question_ids[i * QUESTIONS_PER_SECTION..(i + 1) * QUESTIONS_PER_SECTION].to_vec();
        Ok(Self { sections: [Condition::Control, second, third], questions: [chunk(0), chunk(1), chunk(2)] })
    }

    pub fn static_first(&self) -> bool {
        self.sections[1] == Condition::Static
    }

    /// Condition of a 1-based section number.
    pub fn condition(&self, section: u8) -> Condition {
        self.sections[usize::from(section) - 1]
    }

    pub fn section_of(&self, question_id: &str) -> Option<u8> {
        self.questions.iter().position(|qs| qs.iter().any(|q| q == question_id)).map(|i| i as u8 + 1)
    }

    pub fn question_ids(&self) -> impl Iterator<Item = (u8, &str)> {
        self.questions
            .iter()
            .enumerate()
            .flat_map(|(i, qs)| qs.iter().map(move |q| (i as u8 + 1, q.as_str())))
    }
}

/// Running count of section orders across sessions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterbalance {
    pub sessions: usize,
    pub static_first: usize,
    pub dynamic_first: usize,
}

impl Counterbalance {
    pub fn of<'a>(plans: impl IntoIterator<Item = &'a SectionPlan>) -> Self {
        let mut c = Self::default();
        for p in plans {
            c.sessions += 1;
            if p.static_first() {
                c.static_first += 1;
            } else {
                c.dynamic_first += 1;
            }
        }
        c
    }
}
