//! Bootstrap evaluation over train/test language pairs.
//!
//! Every repeat splits each language 80/20, draws balanced bootstrap
//! samples, builds the representation from the training sample alone,
//! selects C by cross-validation and scores f1 on the test sample. Seeds for
//! each repeat are hashed from the master seed and the run coordinates, so
//! results do not depend on scheduling.

mod config;
mod protocol;
mod report;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use config::{plan_specs, prepare, BowSettings, CorpusEntry, GenreChoice, OutputPaths, RunConfig};
pub use protocol::{bootstrap, bootstrap_traces, run_all, run_once, EvalContext, RunTrace};
pub use report::{
    aggregate_all, aggregate_matrix, parse_report_csv, read_results_csv, render_report, write_aggregated_csv,
    write_results_csv, MatrixCell, ReportFormat, ReportRow, ResultMatrix,
};

use crate::corpus::{Genre, VariantTag};
use crate::error::{Error, Result};
use crate::seed::{rng_from, SeedHasher};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    Embedding,
    Bow,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Representation::Embedding => "embedding",
            Representation::Bow => "bow",
        })
    }
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "embedding" => Ok(Representation::Embedding),
            "bow" => Ok(Representation::Bow),
            other => Err(Error::Config(format!("unknown representation `{other}`"))),
        }
    }
}

/// Where the test-side mean comes from when centralizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestCenteringSource {
    /// Every song of the test language variant, labels unused.
    #[default]
    FullCorpus,
    /// The balanced test sample itself.
    SampledSet,
}

/// Centering choice as exposed to users: off, or on with a test-side source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Centering {
    None,
    FullCorpus,
    SampledSet,
}

impl Centering {
    pub fn centralized(self) -> bool {
        self != Centering::None
    }

    pub fn source(self) -> TestCenteringSource {
        match self {
            Centering::SampledSet => TestCenteringSource::SampledSet,
            _ => TestCenteringSource::FullCorpus,
        }
    }
}

impl FromStr for Centering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(Centering::None),
            "full-corpus" => Ok(Centering::FullCorpus),
            "sampled-set" => Ok(Centering::SampledSet),
            other => Err(Error::Config(format!("unknown centering mode `{other}`"))),
        }
    }
}

/// One (genre, train variant, test variant, representation, centering) cell
/// of the experiment grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub genre: Genre,
    pub train_language: VariantTag,
    pub test_language: VariantTag,
    pub representation: Representation,
    pub centralized: bool,
    pub repeats: usize,
    pub master_seed: u64,
    pub test_centering_source: TestCenteringSource,
    pub allow_source_overlap: bool,
}

impl RunSpec {
    pub fn new(genre: Genre, train: VariantTag, test: VariantTag, representation: Representation) -> Self {
        RunSpec {
            genre,
            train_language: train,
            test_language: test,
            representation,
            centralized: false,
            repeats: 10,
            master_seed: 0,
            test_centering_source: TestCenteringSource::FullCorpus,
            allow_source_overlap: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        if self.centralized && self.representation == Representation::Bow {
            return Err(Error::Config("centralization applies to embeddings only".into()));
        }
        Ok(())
    }

    /// Seed for one repeat, independent of execution order.
    pub fn repeat_seed(&self, repeat: usize) -> u64 {
        SeedHasher::new("bootstrap-repeat")
            .u64(self.master_seed)
            .u64(repeat as u64)
            .str(self.genre.key())
            .str(&self.train_language.to_string())
            .str(&self.test_language.to_string())
            .finish()
    }

    pub fn describe(&self) -> String {
        format!(
            "{} {}→{} {}{}",
            self.genre,
            self.train_language,
            self.test_language,
            self.representation,
            if self.centralized { " centralized" } else { "" }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub spec: RunSpec,
    pub f1_values: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (n − 1); zero for a single value.
    pub std: f64,
}

impl BootstrapResult {
    pub fn from_values(spec: RunSpec, f1_values: Vec<f64>) -> Self {
        let (mean, std) = mean_and_std(&f1_values);
        BootstrapResult {
            spec,
            f1_values,
            mean,
            std,
        }
    }
}

/// Mean and sample standard deviation.
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    if values.iter().all(|v| *v == values[0]) {
        return (values[0], 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Shuffles and returns (first ⌊0.8·n⌋, rest).
pub fn split_80_20<T: Clone>(items: &[T], seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    if items.len() < 5 {
        return Err(Error::TooFewRecords {
            needed: 5,
            got: items.len(),
        });
    }
    let mut shuffled = items.to_vec();
    shuffled.shuffle(&mut rng_from(seed, "split-80-20"));
    let test = shuffled.split_off(items.len() * 4 / 5);
    Ok((shuffled, test))
}

/// Draws `min(#pos, #neg)` items with replacement from each class. Returns
/// indices into `labels`, positives first.
pub fn balanced_resample(labels: &[bool], seed: u64) -> Result<Vec<usize>> {
    let pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    if pos.is_empty() {
        return Err(Error::EmptyClass("positive"));
    }
    if neg.is_empty() {
        return Err(Error::EmptyClass("negative"));
    }
    let n = pos.len().min(neg.len());
    let mut rng = rng_from(seed, "balanced-resample");
    let mut out = Vec::with_capacity(2 * n);
    for class in [&pos, &neg] {
        out.extend((0..n).map(|_| class[rng.gen_range(0..class.len())]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn split_sizes_and_determinism() {
        let items: Vec<u32> = (0..10).collect();
        let (train, test) = split_80_20(&items, 4).unwrap();
        assert_eq!((train.len(), test.len()), (8, 2));
        let a: HashSet<_> = train.iter().collect();
        assert!(test.iter().all(|t| !a.contains(t)));
        assert_eq!(split_80_20(&items, 4).unwrap(), (train, test));
        assert!(split_80_20(&items[..4], 1).is_err());
    }

    #[test]
    fn resample_sizes() {
        let labels = [true, true, true, false, false, false, false, false, false, false];
        let idx = balanced_resample(&labels, 1).unwrap();
        assert_eq!(idx.len(), 6);
        assert_eq!(idx.iter().filter(|&&i| labels[i]).count(), 3);
        let even = [true, false, true, false, true, false, true, false, true, false];
        let idx = balanced_resample(&even, 9).unwrap();
        assert_eq!(idx.iter().filter(|&&i| even[i]).count(), 5);
        assert_eq!(idx.len(), 10);
        assert!(matches!(
            balanced_resample(&[true, true], 0),
            Err(Error::EmptyClass("negative"))
        ));
    }

    #[test]
    fn mean_and_sample_std() {
        let (m, s) = mean_and_std(&[0.5, 0.7]);
        assert!((m - 0.6).abs() < 1e-15);
        assert!((s - 0.02f64.sqrt()).abs() < 1e-15);
        assert_eq!(mean_and_std(&[0.4, 0.4, 0.4]).1, 0.0);
        assert_eq!(mean_and_std(&[0.4]), (0.4, 0.0));
    }

    #[test]
    fn repeat_seed_depends_on_coordinates() {
        let spec = RunSpec::new(
            Genre::new("Rock").unwrap(),
            VariantTag::native("pt"),
            VariantTag::native("en"),
            Representation::Embedding,
        );
        let mut other = spec.clone();
        other.representation = Representation::Bow;
        other.centralized = true;
        assert_eq!(spec.repeat_seed(3), other.repeat_seed(3));
        assert_ne!(spec.repeat_seed(3), spec.repeat_seed(4));
        other.test_language = VariantTag::translated("en", "pt");
        assert_ne!(spec.repeat_seed(3), other.repeat_seed(3));
    }

    #[test]
    fn bow_cannot_be_centralized() {
        let mut spec = RunSpec::new(
            Genre::new("Rock").unwrap(),
            VariantTag::native("pt"),
            VariantTag::native("pt"),
            Representation::Bow,
        );
        spec.validate().unwrap();
        spec.centralized = true;
        assert!(spec.validate().is_err());
    }
}
