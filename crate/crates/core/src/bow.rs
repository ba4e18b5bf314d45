//! TF-IDF bag-of-words baseline.
//!
//! Raw term counts are weighted by a smoothed inverse document frequency,
//! `ln((1 + n) / (1 + df)) + 1`, and each document vector is L2-normalized.
//! Terms are kept when their document frequency lies in `[min_df, max_df]`
//! and they appear in neither exclusion list.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::LyricRecord;
use crate::error::{Error, Result};

const DEFAULT_MUSICAL_TERMS: &str = include_str!("../data/musical_terms.txt");

/// Artist-name tokens that are also among this many most frequent lyric
/// tokens stay in the vocabulary.
pub const COMMON_TOKEN_CARVE_OUT: usize = 1000;

pub const VOCABULARY_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BowConfig {
    pub min_df: f64,
    pub max_df: f64,
    pub excluded_terms: BTreeSet<String>,
    pub excluded_name_parts: BTreeSet<String>,
}

impl Default for BowConfig {
    fn default() -> Self {
        BowConfig {
            min_df: 0.01,
            max_df: 0.3,
            excluded_terms: default_musical_terms(),
            excluded_name_parts: BTreeSet::new(),
        }
    }
}

impl BowConfig {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |x: f64| x.is_finite() && (0.0..=1.0).contains(&x);
        if !in_unit(self.min_df) || !in_unit(self.max_df) || self.min_df >= self.max_df {
            return Err(Error::Config(format!(
                "document-frequency thresholds must satisfy 0 <= min_df < max_df <= 1, got {} and {}",
                self.min_df, self.max_df
            )));
        }
        Ok(())
    }

    fn is_excluded(&self, term: &str) -> bool {
        self.excluded_terms.contains(term) || self.excluded_name_parts.contains(term)
    }
}

/// Case-folds, splits on every non-letter and drops tokens shorter than two
/// characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .filter(|t| t.chars().count() >= 2)
        .collect()
}

/// One term per line; `#` starts a comment.
pub fn parse_term_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect()
}

pub fn load_term_list(path: &Path) -> Result<BTreeSet<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_term_list(&text))
}

pub fn default_musical_terms() -> BTreeSet<String> {
    parse_term_list(DEFAULT_MUSICAL_TERMS)
}

/// Artist-name tokens across `records`, minus the most frequent lyric tokens.
pub fn build_exclusions(records: &[&LyricRecord]) -> BTreeSet<String> {
    build_exclusions_with(records, COMMON_TOKEN_CARVE_OUT)
}

pub fn build_exclusions_with(records: &[&LyricRecord], common_cutoff: usize) -> BTreeSet<String> {
    let names: BTreeSet<String> = records.iter().flat_map(|r| tokenize(&r.artist)).collect();
    if names.is_empty() {
        return names;
    }
    let mut freq: HashMap<String, usize> = HashMap::new();
    for r in records {
        for t in tokenize(&r.lyrics) {
            *freq.entry(t).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, usize)> = freq.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let common: HashSet<String> = ranked.into_iter().take(common_cutoff).map(|(t, _)| t).collect();
    names.into_iter().filter(|t| !common.contains(t)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabularyTerm {
    pub term: String,
    pub df: usize,
    pub idf: f64,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct VocabularyFile {
    version: u32,
    n_docs: usize,
    min_df: f64,
    max_df: f64,
    terms: Vec<VocabularyTerm>,
}

/// A fitted vocabulary. Column indices follow lexicographic term order, so
/// fitting does not depend on document order.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfVocabulary {
    terms: Vec<VocabularyTerm>,
    index: HashMap<String, usize>,
    n_docs: usize,
    min_df: f64,
    max_df: f64,
}

impl TfidfVocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn terms(&self) -> &[VocabularyTerm] {
        &self.terms
    }

    pub fn get(&self, term: &str) -> Option<&VocabularyTerm> {
        self.index.get(term).map(|&i| &self.terms[i])
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = VocabularyFile {
            version: VOCABULARY_VERSION,
            n_docs: self.n_docs,
            min_df: self.min_df,
            max_df: self.max_df,
            terms: self.terms.clone(),
        };
        let text = serde_json::to_string_pretty(&file)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: VocabularyFile = serde_json::from_str(&text)?;
        if file.version != VOCABULARY_VERSION {
            return Err(Error::Format(format!(
                "unsupported vocabulary version {}",
                file.version
            )));
        }
        if file.terms.iter().enumerate().any(|(i, t)| t.index != i) {
            return Err(Error::Format("vocabulary indices are not contiguous".into()));
        }
        let index = file.terms.iter().map(|t| (t.term.clone(), t.index)).collect();
        Ok(TfidfVocabulary {
            terms: file.terms,
            index,
            n_docs: file.n_docs,
            min_df: file.min_df,
            max_df: file.max_df,
        })
    }
}

pub fn fit_vocabulary<S: AsRef<str>>(docs: &[S], config: &BowConfig) -> Result<TfidfVocabulary> {
    let tokenized: Vec<Vec<String>> = docs.iter().map(|d| tokenize(d.as_ref())).collect();
    fit_vocabulary_tokens(&tokenized, config)
}

pub fn fit_vocabulary_tokens(docs: &[Vec<String>], config: &BowConfig) -> Result<TfidfVocabulary> {
    config.validate()?;
    if docs.is_empty() {
        return Err(Error::EmptyInput("no documents to fit a vocabulary"));
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        let distinct: HashSet<&str> = doc.iter().map(String::as_str).collect();
        for term in distinct {
            *df.entry(term).or_default() += 1;
        }
    }
    let n = docs.len();
    let terms: Vec<VocabularyTerm> = df
        .into_iter()
        .filter(|&(_, count)| {
            let frac = count as f64 / n as f64;
            config.min_df <= frac && frac <= config.max_df
        })
        .filter(|(term, _)| !config.is_excluded(term))
        .enumerate()
        .map(|(index, (term, count))| VocabularyTerm {
            term: term.to_string(),
            df: count,
            idf: ((1 + n) as f64 / (1 + count) as f64).ln() + 1.0,
            index,
        })
        .collect();
    if terms.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let index = terms.iter().map(|t| (t.term.clone(), t.index)).collect();
    Ok(TfidfVocabulary {
        terms,
        index,
        n_docs: n,
        min_df: config.min_df,
        max_df: config.max_df,
    })
}

/// A document as sorted `(column, weight)` pairs over a fixed number of columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDocVector {
    pub entries: Vec<(usize, f64)>,
    /// L2 length before normalization.
    pub norm: f64,
    pub dimension: usize,
}

impl SparseDocVector {
    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.dimension];
        for &(i, w) in &self.entries {
            dense[i] = w;
        }
        dense
    }
}

pub fn transform(doc: &str, vocabulary: &TfidfVocabulary) -> SparseDocVector {
    transform_tokens(&tokenize(doc), vocabulary)
}

pub fn transform_tokens(tokens: &[String], vocabulary: &TfidfVocabulary) -> SparseDocVector {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for t in tokens {
        if let Some(&i) = vocabulary.index.get(t) {
            *counts.entry(i).or_default() += 1;
        }
    }
    let mut entries: Vec<(usize, f64)> = counts
        .into_iter()
        .map(|(i, c)| (i, c as f64 * vocabulary.terms[i].idf))
        .collect();
    let norm = entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
    if norm > 0.0 {
        entries.iter_mut().for_each(|(_, w)| *w /= norm);
    }
    SparseDocVector {
        entries,
        norm,
        dimension: vocabulary.len(),
    }
}
