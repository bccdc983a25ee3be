//! Study-log export. Output depends only on persisted state, so repeated
//! exports are byte-identical.

use hintlab_core::analysis::{StudyRecord, STUDY_LOG_SCHEMA};

use crate::session::QuizSession;

enum Step<'a> {
    Hint(&'a crate::session::ShownHint),
    Attempt(&'a crate::session::AttemptEntry),
}

/// Pre-quiz record, then each question's hints and attempts in the order
/// they happened, then section surveys and the post-quiz survey.
pub fn session_records(s: &QuizSession) -> Vec<StudyRecord> {
    let mut out = vec![StudyRecord::PreQuiz {
        session: s.id.clone(),
        participant: s.participant_id.clone(),
        survey: s.pre_quiz.clone(),
    }];
    for q in &s.questions {
        let mut steps: Vec<(chrono::DateTime<chrono::Utc>, Step)> = q
            .hints
            .iter()
            .map(|h| (h.at, Step::Hint(h)))
            .chain(q.attempts.iter().map(|a| (a.at, Step::Attempt(a))))
            .collect();
        steps.sort_by_key(|(at, _)| *at);
        for (_, step) in steps {
            out.push(match step {
                Step::Hint(h) => {
                    let fb = q.feedback.get(&h.index);
                    StudyRecord::Hint {
                        session: s.id.clone(),
                        question: q.question_id.clone(),
                        section: q.section,
                        strategy: q.condition.strategy().expect("hints only exist in hinted sections"),
                        hint_index: h.index,
                        text: h.text.clone(),
                        satisfaction: fb.map(|f| f.satisfaction),
                        informative: fb.map(|f| f.informative),
                        leaked: fb.map(|f| f.leaked),
                        attempts_before_hint: h.attempts_before,
                    }
                }
                Step::Attempt(a) => StudyRecord::Attempt {
                    session: s.id.clone(),
                    question: q.question_id.clone(),
                    section: q.section,
                    condition: q.condition,
                    attempt_index: a.index,
                    text: a.text.clone(),
                    verdict: a.verdict,
                    method: a.method,
                    hints_before_attempt: a.hints_before,
                },
            });
        }
    }
    for (section, survey) in &s.section_surveys {
        out.push(StudyRecord::SectionSurvey {
            session: s.id.clone(),
            section: *section,
            condition: s.plan.condition(*section),
            survey: survey.clone(),
        });
    }
    if let Some(survey) = &s.post_quiz {
        out.push(StudyRecord::PostQuiz { session: s.id.clone(), survey: survey.clone() });
    }
    out
}

pub fn summary_records(s: &QuizSession) -> Vec<StudyRecord> {
    s.questions
        .iter()
        .map(|q| StudyRecord::QuestionSummary {
            session: s.id.clone(),
            question: q.question_id.clone(),
            section: q.section,
            condition: q.condition,
            outcome: q.outcome,
            attempts_used: q.attempts_used(),
            hints_shown: q.hints_shown(),
        })
        .collect()
}

/// Header, every session's records in creation order, then one summary per
/// question per session.
pub fn export<'a>(sessions: impl IntoIterator<Item = &'a QuizSession>) -> String {
    let mut sessions: Vec<&QuizSession> = sessions.into_iter().collect();
    sessions.sort_by_key(|s| (s.ordinal, s.id.clone()));
    let mut records = vec![StudyRecord::Header { schema: STUDY_LOG_SCHEMA.into(), sessions: sessions.len() }];
    records.extend(sessions.iter().flat_map(|s| session_records(s)));
    records.extend(sessions.iter().flat_map(|s| summary_records(s)));
    records.iter().map(StudyRecord::to_line).collect()
}
