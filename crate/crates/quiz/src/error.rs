use thiserror::Error;

/// Failures surfaced to clients. Every variant carries a stable
/// machine-readable code.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuizError {
    #[error("quiz set is not loaded: {0}")]
    ServiceNotReady(String),
    #[error("hints are disabled in this section")]
    HintsDisabled,
    #[error("all {0} hints for this question have been shown")]
    HintBudgetExhausted(usize),
    #[error("{0}")]
    ServiceError(String),
    #[error("question {0} is closed")]
    QuestionClosed(String),
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    SectionIncomplete(String),
}

impl QuizError {
    pub fn code(&self) -> &'static str {
        match self {
            QuizError::ServiceNotReady(_) => "service_not_ready",
            QuizError::HintsDisabled => "hints_disabled",
            QuizError::HintBudgetExhausted(_) => "hint_budget_exhausted",
            QuizError::ServiceError(_) => "service_error",
            QuizError::QuestionClosed(_) => "question_closed",
            QuizError::NotFound(_) => "not_found",
            QuizError::Conflict(_) => "conflict",
            QuizError::Validation(_) => "validation_error",
            QuizError::SectionIncomplete(_) => "section_incomplete",
        }
    }

    pub(crate) fn storage(e: std::io::Error) -> Self {
        QuizError::ServiceError(format!("session store: {e}"))
    }
}
