use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Context window of the default multilingual encoder, in tokens.
pub const DEFAULT_TOKEN_BUDGET: usize = 128;

const TERMINAL_PUNCTUATION: [char; 5] = ['.', '!', '?', ';', ':'];

/// Approximates how many encoder tokens a run of words costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenCounter {
    /// `ceil(1.3 × words)`.
    #[default]
    Approximate,
    /// One token per whitespace-delimited word.
    Words,
}

impl TokenCounter {
    pub fn count(self, words: usize) -> usize {
        match self {
            TokenCounter::Approximate => (words * 13).div_ceil(10),
            TokenCounter::Words => words,
        }
    }

    /// Largest word count that fits the budget; a lone word always fits.
    fn max_words(self, budget: usize) -> usize {
        match self {
            TokenCounter::Approximate => (budget * 10 / 13).max(1),
            TokenCounter::Words => budget.max(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceChunk {
    pub text: String,
    pub approx_tokens: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentConfig {
    pub token_budget: usize,
    pub counter: TokenCounter,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        SegmentConfig {
            token_budget: DEFAULT_TOKEN_BUDGET,
            counter: TokenCounter::Approximate,
        }
    }
}

impl SegmentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.token_budget == 0 {
            return Err(Error::Config("token budget must be at least 1".into()));
        }
        Ok(())
    }
}

/// Splits at line breaks and after runs of terminal punctuation.
fn sentences(text: &str) -> Vec<&str> {
    let mut pieces = Vec::new();
    let mut start = 0;
    let mut after_punct = false;
    for (i, c) in text.char_indices() {
        if c == '\n' || c == '\r' {
            pieces.push(&text[start..i]);
            start = i + c.len_utf8();
            after_punct = false;
        } else if TERMINAL_PUNCTUATION.contains(&c) {
            after_punct = true;
        } else if after_punct && !c.is_whitespace() {
            pieces.push(&text[start..i]);
            start = i;
            after_punct = false;
        }
    }
    pieces.push(&text[start..]);
    pieces
        .into_iter()
        .map(str::trim)
        .filter(|p| p.chars().any(char::is_alphanumeric))
        .collect()
}

pub fn segment(text: &str, token_budget: usize) -> Result<Vec<SentenceChunk>> {
    segment_with(
        text,
        &SegmentConfig {
            token_budget,
            counter: TokenCounter::Approximate,
        },
    )
}

/// Breaks lyrics into sentence chunks whose approximate token count fits the
/// budget. Sentences over budget are cut at word boundaries into maximal
/// windows. A single word is never cut; its count is reported capped at the
/// budget.
pub fn segment_with(text: &str, config: &SegmentConfig) -> Result<Vec<SentenceChunk>> {
    config.validate()?;
    let counter = config.counter;
    let budget = config.token_budget;
    let mut chunks = Vec::new();
    for sentence in sentences(text) {
        let words: Vec<&str> = sentence.split_whitespace().collect();
        let tokens = counter.count(words.len());
        if tokens <= budget {
            chunks.push(SentenceChunk {
                text: sentence.to_string(),
                approx_tokens: tokens,
            });
            continue;
        }
        for window in words.chunks(counter.max_words(budget)) {
            chunks.push(SentenceChunk {
                text: window.join(" "),
                approx_tokens: counter.count(window.len()).min(budget),
            });
        }
    }
    Ok(chunks)
}
