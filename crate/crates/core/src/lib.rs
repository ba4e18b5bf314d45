//! Multi-label, cross-lingual music genre classification from lyrics.
//!
//! Songs are represented either by mean-pooled multilingual sentence
//! embeddings (optionally centred per set) or by a TF-IDF bag of words, and
//! classified by one linear SVM per genre. The [`eval`] module runs the
//! bootstrap protocol that compares representations across train/test
//! language pairs.

pub mod bow;
pub mod corpus;
pub mod embedding;
mod error;
pub mod eval;
pub mod metrics;
pub mod seed;
pub mod svm;

pub use error::{Category, Error, Result};
