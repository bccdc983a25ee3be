//! Prompt templates with named `{placeholder}` slots.
//!
//! A template file may carry a `[system]` and a `[user]` section. Without
//! section markers the whole file is the user segment. `{{` and `}}` render
//! as literal braces.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use thiserror::Error;

use crate::client::sha256_hex;

#[derive(Debug, Error, PartialEq)]
pub enum PromptError {
    #[error("template {template}: unterminated placeholder")]
    Unterminated { template: String },
    #[error("template {template}: unknown placeholder {{{name}}}")]
    Unknown { template: String, name: String },
    #[error("template {template}: missing required placeholder {{{name}}}")]
    MissingPlaceholder { template: String, name: String },
    #[error("template {template}: no value for {{{name}}}")]
    MissingValue { template: String, name: String },
    #[error("reading template {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Text(String),
    Slot(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    name: String,
    system: Option<Vec<Piece>>,
    user: Vec<Piece>,
}

/// A rendered prompt. `full_text` is what single-string endpoints receive
/// and what the prompt hash covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedPrompt {
    pub system: Option<String>,
    pub user: String,
}

impl RenderedPrompt {
    pub fn full_text(&self) -> String {
        match &self.system {
            Some(sys) => format!("{sys}\n\n{}", self.user),
            None => self.user.clone(),
        }
    }

    pub fn hash(&self) -> String {
        sha256_hex(self.full_text().as_bytes())
    }
}

impl PromptTemplate {
    pub fn parse(name: &str, text: &str) -> Result<Self, PromptError> {
        let (system, user) = split_sections(text);
        Ok(Self {
            name: name.to_string(),
            system: system.map(|s| tokenize(name, &s)).transpose()?,
            user: tokenize(name, &user)?,
        })
    }

    /// Parses and checks the placeholder set against `allowed`, of which all
    /// of `required` must appear.
    pub fn parse_checked(
        name: &str,
        text: &str,
        allowed: &[&str],
        required: &[&str],
    ) -> Result<Self, PromptError> {
        let template = Self::parse(name, text)?;
        let used = template.placeholders();
        if let Some(unknown) = used.iter().find(|p| !allowed.contains(&p.as_str())) {
            return Err(PromptError::Unknown {
                template: name.to_string(),
                name: unknown.clone(),
            });
        }
        if let Some(missing) = required.iter().find(|r| !used.contains(**r)) {
            return Err(PromptError::MissingPlaceholder {
                template: name.to_string(),
                name: missing.to_string(),
            });
        }
        Ok(template)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn placeholders(&self) -> BTreeSet<String> {
        self.system
            .iter()
            .flatten()
            .chain(&self.user)
            .filter_map(|p| match p {
                Piece::Slot(s) => Some(s.clone()),
                Piece::Text(_) => None,
            })
            .collect()
    }

    pub fn render(&self, values: &BTreeMap<&str, String>) -> Result<RenderedPrompt, PromptError> {
        let fill = |pieces: &[Piece]| -> Result<String, PromptError> {
            let mut out = String::new();
            for piece in pieces {
                match piece {
                    Piece::Text(t) => out.push_str(t),
                    Piece::Slot(s) => out.push_str(values.get(s.as_str()).ok_or_else(|| {
                        PromptError::MissingValue {
                            template: self.name.clone(),
                            name: s.clone(),
                        }
                    })?),
                }
            }
            Ok(out.trim().to_string())
        };
        Ok(RenderedPrompt {
            system: self.system.as_deref().map(fill).transpose()?,
            user: fill(&self.user)?,
        })
    }
}

fn split_sections(text: &str) -> (Option<String>, String) {
    let mut system: Option<String> = None;
    let mut user = String::new();
    let mut current: Option<&str> = None;
    let mut saw_marker = false;
    for line in text.lines() {
        match line.trim() {
            "[system]" => {
                current = Some("system");
                saw_marker = true;
                system.get_or_insert_with(String::new);
                continue;
            }
            "[user]" => {
                current = Some("user");
                saw_marker = true;
                continue;
            }
            _ => {}
        }
        let target = match current {
            Some("system") => system.get_or_insert_with(String::new),
            _ => &mut user,
        };
        target.push_str(line);
        target.push('\n');
    }
    if !saw_marker {
        return (None, text.to_string());
    }
    (system, user)
}

fn tokenize(template: &str, text: &str) -> Result<Vec<Piece>, PromptError> {
    let mut pieces = Vec::new();
    let mut buf = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '{' if chars.peek() == Some(&'{') => {
                chars.next();
                buf.push('{');
            }
            '}' if chars.peek() == Some(&'}') => {
                chars.next();
                buf.push('}');
            }
            '{' => {
                let mut name = String::new();
                loop {
                    match chars.next() {
                        Some('}') => break,
                        Some(ch) if ch.is_ascii_alphanumeric() || ch == '_' => name.push(ch),
                        _ => {
                            return Err(PromptError::Unterminated { template: template.into() })
                        }
                    }
                }
                if name.is_empty() {
                    return Err(PromptError::Unterminated { template: template.into() });
                }
                if !buf.is_empty() {
                    pieces.push(Piece::Text(std::mem::take(&mut buf)));
                }
                pieces.push(Piece::Slot(name));
            }
            _ => buf.push(c),
        }
    }
    if !buf.is_empty() {
        pieces.push(Piece::Text(buf));
    }
    Ok(pieces)
}

pub const STATIC_HINTS: &str = "static_hints";
pub const DYNAMIC_HINT: &str = "dynamic_hint";
pub const LEAKAGE: &str = "leakage";
pub const ASSESSMENT: &str = "assessment";

const BUILTIN_STATIC: &str = include_str!("../assets/prompts/static_hints.txt");
const BUILTIN_DYNAMIC: &str = include_str!("../assets/prompts/dynamic_hint.txt");
const BUILTIN_LEAKAGE: &str = include_str!("../assets/prompts/leakage.txt");
const BUILTIN_ASSESSMENT: &str = include_str!("../assets/prompts/assessment.txt");

/// The four prompt templates the platform uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSet {
    pub static_hints: PromptTemplate,
    pub dynamic_hint: PromptTemplate,
    pub leakage: PromptTemplate,
    pub assessment: PromptTemplate,
}

impl PromptSet {
    pub fn builtin() -> Self {
        Self::from_texts(BUILTIN_STATIC, BUILTIN_DYNAMIC, BUILTIN_LEAKAGE, BUILTIN_ASSESSMENT)
            .expect("built-in prompt templates are valid")
    }

    pub fn from_texts(
        static_hints: &str,
        dynamic_hint: &str,
        leakage: &str,
        assessment: &str,
    ) -> Result<Self, PromptError> {
        Ok(Self {
            static_hints: PromptTemplate::parse_checked(
                STATIC_HINTS,
                static_hints,
                &["question", "answer", "k"],
                &["question", "answer"],
            )?,
            dynamic_hint: PromptTemplate::parse_checked(
                DYNAMIC_HINT,
                dynamic_hint,
                &["question", "answer", "prior_hints", "attempts"],
                &["question", "prior_hints", "attempts"],
            )?,
            leakage: PromptTemplate::parse_checked(
                LEAKAGE,
                leakage,
                &["question", "answer", "hints"],
                &["answer", "hints"],
            )?,
            assessment: PromptTemplate::parse_checked(
                ASSESSMENT,
                assessment,
                &["question", "answer", "submission"],
                &["answer", "submission"],
            )?,
        })
    }

    /// Built-in templates, overridden by `<name>.txt` files found in `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self, PromptError> {
        let read = |name: &str, fallback: &str| -> Result<String, PromptError> {
            let path = dir.join(format!("{name}.txt"));
            if path.exists() {
                std::fs::read_to_string(&path).map_err(|e| PromptError::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })
            } else {
                Ok(fallback.to_string())
            }
        };
        Self::from_texts(
            &read(STATIC_HINTS, BUILTIN_STATIC)?,
            &read(DYNAMIC_HINT, BUILTIN_DYNAMIC)?,
            &read(LEAKAGE, BUILTIN_LEAKAGE)?,
            &read(ASSESSMENT, BUILTIN_ASSESSMENT)?,
        )
    }
}

impl Default for PromptSet {
    fn default() -> Self {
        Self::builtin()
    }
}
