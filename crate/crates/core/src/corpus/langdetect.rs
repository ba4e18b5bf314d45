//! Character-trigram language identification.
//!
//! Each profile is a trigram distribution with add-one smoothing. A text is
//! scored by its mean trigram log-probability under every profile, and the
//! winner's confidence is its softmax weight over those scores.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::record::{normalize_language, LyricRecord};
use crate::error::{Error, Result};

const BUNDLED_EN: &str = include_str!("../../data/en.txt");
const BUNDLED_PT: &str = include_str!("../../data/pt.txt");

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LanguageProfile {
    pub language: String,
    trigram_weights: HashMap<String, f64>,
    /// Log-probability assigned to any trigram absent from the profile.
    unseen_weight: f64,
}

impl LanguageProfile {
    pub fn from_text(language: &str, text: &str) -> Self {
        let mut counts: HashMap<String, u64> = HashMap::new();
        for tri in trigrams(&normalize_text(text)) {
            *counts.entry(tri).or_default() += 1;
        }
        let total: u64 = counts.values().sum();
        // add-one smoothing with one extra slot for every unseen trigram
        let denom = (total + counts.len() as u64 + 1) as f64;
        let trigram_weights = counts
            .into_iter()
            .map(|(tri, c)| (tri, ((c + 1) as f64 / denom).ln()))
            .collect();
        LanguageProfile {
            language: normalize_language(language),
            trigram_weights,
            unseen_weight: (1.0 / denom).ln(),
        }
    }

    pub fn trigram_weights(&self) -> &HashMap<String, f64> {
        &self.trigram_weights
    }

    pub fn log_prob(&self, trigram: &str) -> f64 {
        self.trigram_weights.get(trigram).copied().unwrap_or(self.unseen_weight)
    }
}

/// English and Portuguese profiles trained on the bundled sample texts.
pub fn bundled_profiles() -> Vec<LanguageProfile> {
    vec![
        LanguageProfile::from_text("en", BUNDLED_EN),
        LanguageProfile::from_text("pt", BUNDLED_PT),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub language: String,
    pub score: f64,
}

/// Lowercases, maps every non-letter to a space and collapses runs of spaces.
fn normalize_text(text: &str) -> String {
    let mapped: String = text
        .chars()
        .flat_map(char::to_lowercase)
        .map(|c| if c.is_alphabetic() { c } else { ' ' })
        .collect();
    mapped.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn trigrams(normalized: &str) -> Vec<String> {
    if normalized.is_empty() {
        return Vec::new();
    }
    let padded: Vec<char> = std::iter::once(' ')
        .chain(normalized.chars())
        .chain(std::iter::once(' '))
        .collect();
    padded.windows(3).map(|w| w.iter().collect()).collect()
}

pub fn detect_language(text: &str, profiles: &[LanguageProfile]) -> Result<Detection> {
    if profiles.len() < 2 {
        return Err(Error::Config(format!(
            "language detection needs at least 2 profiles, got {}",
            profiles.len()
        )));
    }
    let normalized = normalize_text(text);
    if normalized.chars().count() < 3 {
        return Err(Error::Undeterminable(format!(
            "text `{}` is shorter than 3 characters",
            text.trim()
        )));
    }
    let grams = trigrams(&normalized);
    let scores: Vec<f64> = profiles
        .iter()
        .map(|p| grams.iter().map(|g| p.log_prob(g)).sum::<f64>() / grams.len() as f64)
        .collect();
    let (best, best_score) =
        scores.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc },
        );
    let partition: f64 = scores.iter().map(|s| (s - best_score).exp()).sum();
    Ok(Detection {
        language: profiles[best].language.clone(),
        score: 1.0 / partition,
    })
}

/// How `detected_language` gets populated.
#[derive(Debug, Clone)]
pub enum DetectionMode {
    Trigram(Vec<LanguageProfile>),
    /// Trust a detected language already present in the input.
    PassThrough,
}

/// Fills `detected_language` on every record. Undeterminable texts are left
/// as `None`, which the mismatch filter treats as a mismatch.
pub fn annotate_languages(records: &mut [LyricRecord], mode: &DetectionMode) -> Result<()> {
    match mode {
        DetectionMode::PassThrough => {
            let missing = records.iter().filter(|r| r.detected_language.is_none()).count();
            if missing > 0 {
                log::warn!("{missing} records lack a precomputed detected language");
            }
        }
        DetectionMode::Trigram(profiles) => {
            for record in records.iter_mut() {
                record.detected_language = match detect_language(&record.lyrics, profiles) {
                    Ok(d) => Some(d.language),
                    Err(Error::Undeterminable(msg)) => {
                        log::warn!("record `{}`: {msg}", record.id);
                        None
                    }
                    Err(e) => return Err(e),
                };
            }
        }
    }
    Ok(())
}
