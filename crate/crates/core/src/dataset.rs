//! SciQ-style records, free-form conversion, curated quiz sets and
//! dataset statistics.
//!
//! Records are JSON lines using the SciQ field names (`question`,
//! `correct_answer`, `distractor1`..`distractor3`, `support`) plus an optional
//! `subject` and `id`. A `distractors` array is accepted in place of the
//! three numbered fields.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("record {index} (line {line}): {message}")]
    Parse {
        index: usize,
        line: usize,
        message: String,
    },
    #[error("dataset {0} contains no records")]
    EmptyDataset(String),
    #[error("invalid quiz set: {0}")]
    QuizSetInvalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subject {
    Biology,
    Chemistry,
    Physics,
    Geology,
    Miscellaneous,
}

impl Subject {
    pub const ALL: [Subject; 5] = [
        Subject::Biology,
        Subject::Chemistry,
        Subject::Physics,
        Subject::Geology,
        Subject::Miscellaneous,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Subject::Biology => "biology",
            Subject::Chemistry => "chemistry",
            Subject::Physics => "physics",
            Subject::Geology => "geology",
            Subject::Miscellaneous => "miscellaneous",
        }
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Subject {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Subject::ALL
            .into_iter()
            .find(|subj| subj.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown subject {s:?}"))
    }
}

/// A multiple-choice source item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SciQRecord {
    pub id: String,
    pub question: String,
    pub correct_answer: String,
    pub distractors: [String; 3],
    pub support: String,
    pub subject: Subject,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    #[serde(default)]
    question: Option<String>,
    #[serde(default)]
    distractor1: Option<String>,
    #[serde(default)]
    distractor2: Option<String>,
    #[serde(default)]
    distractor3: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    distractors: Option<Vec<String>>,
    #[serde(default)]
    correct_answer: Option<String>,
    #[serde(default)]
    support: Option<String>,
    #[serde(default)]
    subject: Option<String>,
}

impl RawRecord {
    fn into_record(self, index: usize) -> Result<SciQRecord, String> {
        let question = self
            .question
            .filter(|q| !q.trim().is_empty())
            .ok_or("missing or empty field `question`")?;
        let correct_answer = self
            .correct_answer
            .filter(|a| !a.trim().is_empty())
            .ok_or("missing or empty field `correct_answer`")?;
        let distractors: [String; 3] = match self.distractors {
            Some(list) => list
                .try_into()
                .map_err(|l: Vec<String>| format!("expected 3 distractors, found {}", l.len()))?,
            None => [
                self.distractor1.ok_or("missing field `distractor1`")?,
                self.distractor2.ok_or("missing field `distractor2`")?,
                self.distractor3.ok_or("missing field `distractor3`")?,
            ],
        };
        if distractors.iter().any(|d| d.trim() == correct_answer.trim()) {
            return Err("correct_answer appears among the distractors".into());
        }
        let subject = match self.subject {
            Some(s) => s.parse()?,
            None => Subject::Miscellaneous,
        };
        Ok(SciQRecord {
            id: self.id.unwrap_or_else(|| format!("sciq-{index:05}")),
            question,
            correct_answer,
            distractors,
            support: self.support.unwrap_or_default(),
            subject,
        })
    }
}

impl SciQRecord {
    pub fn to_json_line(&self) -> String {
        let [d1, d2, d3] = self.distractors.clone();
        let raw = RawRecord {
            id: Some(self.id.clone()),
            question: Some(self.question.clone()),
            distractor1: Some(d1),
            distractor2: Some(d2),
            distractor3: Some(d3),
            distractors: None,
            correct_answer: Some(self.correct_answer.clone()),
            support: Some(self.support.clone()),
            subject: Some(self.subject.as_str().to_string()),
        };
        serde_json::to_string(&raw).expect("record serializes")
    }

    pub fn parse_line(line: &str, index: usize) -> Result<Self, String> {
        let raw: RawRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
        raw.into_record(index)
    }
}

/// A free-form short-answer question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub text: String,
    pub answer: String,
    #[serde(default)]
    pub support: String,
    pub subject: Subject,
}

/// The three distractors of a source record, replayed as wrong attempts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulatedAttempts {
    pub attempts: [String; 3],
}

/// Drops the choices: the question keeps text, answer, support and subject;
/// the distractors become simulated attempts in record order.
pub fn to_freeform(record: &SciQRecord) -> (Question, SimulatedAttempts) {
    (
        Question {
            id: record.id.clone(),
            text: record.question.clone(),
            answer: record.correct_answer.clone(),
            support: record.support.clone(),
            subject: record.subject,
        },
        SimulatedAttempts { attempts: record.distractors.clone() },
    )
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>, DatasetError> {
    let io_err = |source| DatasetError::Io { path: path.display().to_string(), source };
    let file = std::fs::File::open(path).map_err(io_err)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err)?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

/// Loads a JSON-lines SciQ file. Blank lines are skipped; the first
/// malformed record aborts the load with its record index and line number.
pub fn load_sciq(path: impl AsRef<Path>) -> Result<Vec<SciQRecord>, DatasetError> {
    let path = path.as_ref();
    let lines = read_lines(path)?;
    if lines.is_empty() {
        return Err(DatasetError::EmptyDataset(path.display().to_string()));
    }
    lines
        .into_iter()
        .enumerate()
        .map(|(index, (line, text))| {
            SciQRecord::parse_line(&text, index)
                .map_err(|message| DatasetError::Parse { index, line, message })
        })
        .collect()
}

pub fn write_sciq(path: impl AsRef<Path>, records: &[SciQRecord]) -> std::io::Result<()> {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_json_line());
        out.push('\n');
    }
    std::fs::write(path, out)
}

/// Required subject composition of a curated quiz.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubjectMix {
    pub counts: BTreeMap<Subject, usize>,
    pub strict: bool,
}

impl SubjectMix {
    /// 8 biology, 7 chemistry, 7 geology, 8 physics.
    pub fn study_default() -> Self {
        Self {
            counts: BTreeMap::from([
                (Subject::Biology, 8),
                (Subject::Chemistry, 7),
                (Subject::Geology, 7),
                (Subject::Physics, 8),
            ]),
            strict: true,
        }
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

pub const QUIZ_SIZE: usize = 30;

/// Loads a curated quiz file (one [`Question`] per line) and checks the
/// question count and, when strict, the subject mix. Order is preserved.
pub fn quiz_set(path: impl AsRef<Path>, mix: &SubjectMix) -> Result<Vec<Question>, DatasetError> {
    let path = path.as_ref();
    let lines = read_lines(path)?;
    let questions = lines
        .into_iter()
        .enumerate()
        .map(|(index, (line, text))| {
            serde_json::from_str::<Question>(&text).map_err(|e| DatasetError::Parse {
                index,
                line,
                message: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    validate_quiz_set(&questions, mix)?;
    Ok(questions)
}

pub fn validate_quiz_set(questions: &[Question], mix: &SubjectMix) -> Result<(), DatasetError> {
    if questions.len() != QUIZ_SIZE {
        return Err(DatasetError::QuizSetInvalid(format!(
            "expected {QUIZ_SIZE} questions, found {}",
            questions.len()
        )));
    }
    let mut ids = std::collections::BTreeSet::new();
    for q in questions {
        if q.text.trim().is_empty() || q.answer.trim().is_empty() {
            return Err(DatasetError::QuizSetInvalid(format!("question {} is empty", q.id)));
        }
        if !ids.insert(q.id.as_str()) {
            return Err(DatasetError::QuizSetInvalid(format!("duplicate id {}", q.id)));
        }
    }
    if mix.strict {
        let mut found: BTreeMap<Subject, usize> = BTreeMap::new();
        for q in questions {
            *found.entry(q.subject).or_default() += 1;
        }
        let expected: BTreeMap<Subject, usize> =
            mix.counts.iter().filter(|(_, n)| **n > 0).map(|(s, n)| (*s, *n)).collect();
        if found != expected {
            return Err(DatasetError::QuizSetInvalid(format!(
                "subject mix {found:?} does not match required {expected:?}"
            )));
        }
    }
    Ok(())
}

/// Whitespace-token word count.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub instances: usize,
    pub per_subject: BTreeMap<Subject, usize>,
    pub avg_question_words: f64,
    pub avg_answer_words: f64,
    pub avg_context_words: f64,
}

impl DatasetStats {
    pub fn of_questions<'a>(questions: impl IntoIterator<Item = &'a Question>) -> Self {
        let mut per_subject = BTreeMap::new();
        let (mut n, mut q, mut a, mut c) = (0usize, 0usize, 0usize, 0usize);
        for question in questions {
            n += 1;
            *per_subject.entry(question.subject).or_default() += 1;
            q += word_count(&question.text);
            a += word_count(&question.answer);
            c += word_count(&question.support);
        }
        let mean = |total: usize| if n == 0 { 0.0 } else { total as f64 / n as f64 };
        Self {
            instances: n,
            per_subject,
            avg_question_words: mean(q),
            avg_answer_words: mean(a),
            avg_context_words: mean(c),
        }
    }

    pub fn of_records(records: &[SciQRecord]) -> Self {
        let questions: Vec<Question> = records.iter().map(|r| to_freeform(r).0).collect();
        Self::of_questions(&questions)
    }

    pub fn render(&self, label: &str) -> String {
        let subjects = self
            .per_subject
            .iter()
            .map(|(s, n)| format!("{s} ({n})"))
            .collect::<Vec<_>>()
            .join(", ");
        format!(
            "{:<12} {:>10}  {:<60} {:>9} {:>7} {:>8}\n{:<12} {:>10}  {:<60} {:>9.2} {:>7.2} {:>8.2}\n",
            "split",
            "#instances",
            "#instances per subject",
            "question",
            "answer",
            "context",
            label,
            self.instances,
            subjects,
            self.avg_question_words,
            self.avg_answer_words,
            self.avg_context_words,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn sound_waves() -> SciQRecord {
        SciQRecord {
            id: "q1".into(),
            question: "What kind of waves are sound waves?".into(),
            correct_answer: "mechanical".into(),
            distractors: ["spinning".into(), "external".into(), "internal".into()],
            support: "Sound waves are mechanical waves.".into(),
            subject: Subject::Physics,
        }
    }

    fn write_temp(lines: &[String]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    #[test]
    fn freeform_drops_choices_and_keeps_distractor_order() {
        let (q, sim) = to_freeform(&sound_waves());
        assert_eq!(q.answer, "mechanical");
        assert_eq!(q.text, "What kind of waves are sound waves?");
        assert_eq!(sim.attempts, ["spinning", "external", "internal"]);
    }

    #[test]
    fn duplicate_distractors_are_kept_verbatim() {
        let mut r = sound_waves();
        r.distractors = ["x".into(), "x".into(), "".into()];
        assert_eq!(to_freeform(&r).1.attempts, ["x", "x", ""]);
    }

    #[test]
    fn missing_distractor_is_a_parse_error_at_index_zero() {
        let f = write_temp(&[
            r#"{"question":"q","correct_answer":"a","distractor1":"b","distractor2":"c"}"#.into(),
        ]);
        match load_sciq(f.path()) {
            Err(DatasetError::Parse { index: 0, line: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_rejected() {
        let f = write_temp(&[]);
        assert!(matches!(load_sciq(f.path()), Err(DatasetError::EmptyDataset(_))));
    }

    #[test]
    fn parse_errors_carry_line_numbers_past_blank_lines() {
        let good = sound_waves().to_json_line();
        let f = write_temp(&[good, String::new(), "{not json".into()]);
        match load_sciq(f.path()) {
            Err(DatasetError::Parse { index: 1, line: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn answer_among_distractors_is_rejected() {
        let line = r#"{"question":"q","correct_answer":"a","distractors":["a","b","c"]}"#;
        assert!(SciQRecord::parse_line(line, 0).is_err());
    }

    #[test]
    fn native_sciq_line_without_subject_parses() {
        let line = r#"{"question": "Q?", "distractor3": "c", "distractor1": "a", "distractor2": "b", "correct_answer": "d", "support": ""}"#;
        let r = SciQRecord::parse_line(line, 7).unwrap();
        assert_eq!(r.id, "sciq-00007");
        assert_eq!(r.subject, Subject::Miscellaneous);
        assert_eq!(r.distractors, ["a", "b", "c"]);
    }

    #[test]
    fn round_trip_through_file() {
        let mut second = sound_waves();
        second.id = "q2".into();
        second.support.clear();
        let records = vec![sound_waves(), second];
        let f = tempfile::NamedTempFile::new().unwrap();
        write_sciq(f.path(), &records).unwrap();
        assert_eq!(load_sciq(f.path()).unwrap(), records);
    }

    fn quiz(mix: &[(Subject, usize)]) -> Vec<Question> {
        let mut out = Vec::new();
        for (subject, n) in mix {
            for i in 0..*n {
                out.push(Question {
                    id: format!("{subject}-{i}"),
                    text: "q".into(),
                    answer: "a".into(),
                    support: String::new(),
                    subject: *subject,
                });
            }
        }
        out
    }

    #[test]
    fn quiz_mix_checks() {
        use Subject::*;
        let mix = SubjectMix::study_default();
        assert!(validate_quiz_set(&quiz(&[(Biology, 8), (Chemistry, 7), (Geology, 7), (Physics, 8)]), &mix).is_ok());
        assert!(matches!(
            validate_quiz_set(&quiz(&[(Biology, 8), (Chemistry, 7), (Geology, 7), (Physics, 7)]), &mix),
            Err(DatasetError::QuizSetInvalid(_))
        ));
        let skewed = quiz(&[(Biology, 9), (Chemistry, 6), (Geology, 7), (Physics, 8)]);
        assert!(validate_quiz_set(&skewed, &mix).is_err());
        let lax = SubjectMix { strict: false, ..mix };
        assert!(validate_quiz_set(&skewed, &lax).is_ok());
    }

    #[test]
    fn stats_use_whitespace_words() {
        let s = DatasetStats::of_records(&[sound_waves()]);
        assert_eq!(s.instances, 1);
        assert_eq!(s.avg_question_words, 7.0);
        assert_eq!(s.avg_answer_words, 1.0);
        assert_eq!(s.avg_context_words, 5.0);
    }
}
