//! Flesch-Kincaid grade, Flesch reading ease and Dale-Chall over the
//! concatenated chain text.

use std::collections::HashSet;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use super::{undefined, MetricError};
use crate::hints::HintChain;

const EASY_WORDS_TEXT: &str = include_str!("../../assets/dale_chall_easy_words.txt");

static EASY_WORDS: LazyLock<HashSet<&'static str>> = LazyLock::new(|| {
    EASY_WORDS_TEXT
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect()
});

pub fn easy_word_count() -> usize {
    EASY_WORDS.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Readability {
    pub fk_grade: f64,
    pub fre: f64,
    pub dale_chall: f64,
}

/// Raw counts the three formulas are built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TextCounts {
    pub words: usize,
    pub sentences: usize,
    pub syllables: usize,
    pub difficult: usize,
}

impl TextCounts {
    pub fn of(text: &str) -> Self {
        let words = words(text);
        Self {
            words: words.len(),
            sentences: sentence_count(text),
            syllables: words.iter().map(|w| syllables(w)).sum(),
            difficult: words.iter().filter(|w| !is_easy(w)).count(),
        }
    }

    pub fn scores(&self) -> Result<Readability, MetricError> {
        if self.words == 0 || self.sentences == 0 {
            return Err(undefined("readability of text without words or sentences"));
        }
        let w = self.words as f64;
        let wps = w / self.sentences as f64;
        let spw = self.syllables as f64 / w;
        let difficult = self.difficult as f64 / w;
        Ok(Readability {
            fk_grade: 0.39 * wps + 11.8 * spw - 15.59,
            fre: 206.835 - 1.015 * wps - 84.6 * spw,
            dale_chall: 0.1579 * (100.0 * difficult)
                + 0.0496 * wps
                + if difficult > 0.05 { 3.6365 } else { 0.0 },
        })
    }
}

/// Lowercased word tokens: whitespace-separated, outer punctuation
/// stripped, keeping inner apostrophes and hyphens.
pub fn words(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .collect()
}

/// Sentences end at `.`, `!` or `?` followed by whitespace or the end of
/// the text. Trailing text without a terminator counts as a sentence.
pub fn sentence_count(text: &str) -> usize {
    let chars: Vec<char> = text.chars().collect();
    let mut count = 0;
    let mut has_word = false;
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            has_word = true;
        }
        let terminal = matches!(c, '.' | '!' | '?');
        let next_breaks = chars.get(i + 1).is_none_or(|n| n.is_whitespace());
        if terminal && next_breaks && has_word {
            count += 1;
            has_word = false;
        }
    }
    count + has_word as usize
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Vowel groups, less a silent trailing `e` (but not consonant + `le`),
/// at least one per word.
pub fn syllables(word: &str) -> usize {
    let letters: Vec<char> = word.to_lowercase().chars().filter(|c| c.is_ascii_alphabetic()).collect();
    if letters.is_empty() {
        return 1;
    }
    let mut groups = 0;
    let mut prev_vowel = false;
    for &c in &letters {
        let v = is_vowel(c);
        if v && !prev_vowel {
            groups += 1;
        }
        prev_vowel = v;
    }
    let n = letters.len();
    if groups > 1 && letters[n - 1] == 'e' && !is_vowel(letters[n - 2]) {
        let consonant_le = n >= 3 && letters[n - 2] == 'l' && !is_vowel(letters[n - 3]);
        if !consonant_le {
            groups -= 1;
        }
    }
    groups.max(1)
}

/// Familiar words, including regular inflections of list entries.
pub fn is_easy(word: &str) -> bool {
    let w = word.to_lowercase();
    if w.chars().all(|c| c.is_ascii_digit()) || EASY_WORDS.contains(w.as_str()) {
        return true;
    }
    if let Some(stem) = w.strip_suffix("ies") {
        if EASY_WORDS.contains(format!("{stem}y").as_str()) {
            return true;
        }
    }
    ["'s", "s", "es", "ed", "d", "ing"]
        .iter()
        .filter_map(|suffix| w.strip_suffix(suffix))
        .any(|stem| !stem.is_empty() && EASY_WORDS.contains(stem))
}

pub fn readability_of_text(text: &str) -> Result<Readability, MetricError> {
    TextCounts::of(text).scores()
}

/// Hints joined with a space, each closed with a period if it lacks a
/// terminal mark, so every hint counts as at least one sentence.
pub fn chain_text(chain: &HintChain) -> String {
    chain
        .texts()
        .iter()
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| {
            if t.ends_with(['.', '!', '?']) {
                t.to_string()
            } else {
                format!("{t}.")
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn readability(chain: &HintChain) -> Result<Readability, MetricError> {
    readability_of_text(&chain_text(chain))
}
