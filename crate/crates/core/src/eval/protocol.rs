use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use super::{balanced_resample, split_80_20, BootstrapResult, Representation, RunSpec, TestCenteringSource};
use crate::bow::{build_exclusions, fit_vocabulary_tokens, tokenize, transform_tokens, BowConfig};
use crate::corpus::{LyricRecord, VariantTag};
use crate::embedding::{CentroidSource, CentroidTransform};
use crate::error::{Error, Result, ResultExt};
use crate::metrics::f1;
use crate::seed::SeedHasher;
use crate::svm::{cv_select_c, train_binary, FeatureRow, TrainConfig};

/// Corpora, features and settings shared by every run.
#[derive(Debug, Clone)]
pub struct EvalContext {
    variants: BTreeMap<VariantTag, Vec<LyricRecord>>,
    embeddings: HashMap<String, Vec<f64>>,
    full_means: BTreeMap<VariantTag, CentroidTransform>,
    pub bow: BowConfig,
    pub train: TrainConfig,
}

impl EvalContext {
    /// Groups records by their variant tag.
    pub fn new(records: impl IntoIterator<Item = LyricRecord>, train: TrainConfig) -> Result<Self> {
        train.validate()?;
        let mut variants: BTreeMap<VariantTag, Vec<LyricRecord>> = BTreeMap::new();
        let mut seen = HashSet::new();
        for r in records {
            if !seen.insert(r.id.clone()) {
                return Err(Error::Config(format!("duplicate record id `{}`", r.id)));
            }
            variants.entry(r.variant_tag()).or_default().push(r);
        }
        Ok(EvalContext {
            variants,
            embeddings: HashMap::new(),
            full_means: BTreeMap::new(),
            bow: BowConfig::default(),
            train,
        })
    }

    /// Attaches song embeddings. Records without one are dropped and logged,
    /// and each variant's full-corpus mean is computed for centering.
    pub fn with_embeddings(mut self, embeddings: HashMap<String, Vec<f64>>) -> Result<Self> {
        let dims: HashSet<usize> = embeddings.values().map(Vec::len).collect();
        if dims.len() > 1 {
            return Err(Error::Config(format!("embeddings have mixed dimensions {dims:?}")));
        }
        for (tag, records) in &mut self.variants {
            let before = records.len();
            records.retain(|r| embeddings.contains_key(&r.id));
            if records.len() < before {
                log::warn!("{tag}: {} records without embeddings excluded", before - records.len());
            }
        }
        self.variants.retain(|_, v| !v.is_empty());
        self.embeddings = embeddings;
        self.full_means = self
            .variants
            .iter()
            .map(|(tag, records)| {
                let rows: Vec<Vec<f64>> = records.iter().map(|r| self.embeddings[&r.id].clone()).collect();
                CentroidTransform::fit(&rows, CentroidSource::TestCorpus).map(|t| (tag.clone(), t))
            })
            .collect::<Result<_>>()?;
        Ok(self)
    }

    pub fn with_bow(mut self, bow: BowConfig) -> Result<Self> {
        bow.validate()?;
        self.bow = bow;
        Ok(self)
    }

    pub fn variant_tags(&self) -> impl Iterator<Item = &VariantTag> {
        self.variants.keys()
    }

    pub fn records(&self, tag: &VariantTag) -> Result<&[LyricRecord]> {
        self.variants
            .get(tag)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Config(format!("no corpus loaded for variant {tag}")))
    }

    fn embedding(&self, id: &str) -> Result<&[f64]> {
        self.embeddings
            .get(id)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Unembeddable(id.to_string()))
    }
}

/// Everything one repeat decided, for auditing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunTrace {
    pub repeat: usize,
    pub seed: u64,
    pub f1: f64,
    pub chosen_c: f64,
    /// Balanced training sample, duplicates included.
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub train_split: Vec<String>,
    pub test_split: Vec<String>,
}

fn split_seed(run_seed: u64, tag: &VariantTag) -> u64 {
    SeedHasher::new("split").u64(run_seed).str(&tag.to_string()).finish()
}

/// One bootstrap repeat: split, resample, build features, select C, train, score.
pub fn run_once(ctx: &EvalContext, spec: &RunSpec, repeat: usize) -> Result<RunTrace> {
    run_inner(ctx, spec, repeat).context_with(|| format!("{} repeat {repeat}", spec.describe()))
}

fn run_inner(ctx: &EvalContext, spec: &RunSpec, repeat: usize) -> Result<RunTrace> {
    spec.validate()?;
    let seed = spec.repeat_seed(repeat);
    let train_pool = ctx.records(&spec.train_language)?;
    let test_pool = ctx.records(&spec.test_language)?;

    let train_idx: Vec<usize> = (0..train_pool.len()).collect();
    let (train_split, _) = split_80_20(&train_idx, split_seed(seed, &spec.train_language))?;
    let test_idx: Vec<usize> = (0..test_pool.len()).collect();
    let (_, mut test_split) = split_80_20(&test_idx, split_seed(seed, &spec.test_language))?;

    let train_labels: Vec<bool> = train_split
        .iter()
        .map(|&i| train_pool[i].has_genre(&spec.genre))
        .collect();
    let train_sample: Vec<&LyricRecord> = balanced_resample(&train_labels, SeedHasher::new("train").u64(seed).finish())
        .context_with(|| format!("training split of {}", spec.train_language))?
        .into_iter()
        .map(|k| &train_pool[train_split[k]])
        .collect();

    if !spec.allow_source_overlap {
        let used: HashSet<&str> = train_sample.iter().map(|r| r.source_id.as_str()).collect();
        test_split.retain(|&i| !used.contains(test_pool[i].source_id.as_str()));
    }
    let test_labels: Vec<bool> = test_split
        .iter()
        .map(|&i| test_pool[i].has_genre(&spec.genre))
        .collect();
    let test_sample: Vec<&LyricRecord> = balanced_resample(&test_labels, SeedHasher::new("test").u64(seed).finish())
        .context_with(|| format!("test split of {}", spec.test_language))?
        .into_iter()
        .map(|k| &test_pool[test_split[k]])
        .collect();

    let y_train: Vec<bool> = train_sample.iter().map(|r| r.has_genre(&spec.genre)).collect();
    let y_test: Vec<bool> = test_sample.iter().map(|r| r.has_genre(&spec.genre)).collect();
    let svm = TrainConfig {
        seed: SeedHasher::new("svm").u64(seed).finish(),
        ..ctx.train.clone()
    };

    let (f1, chosen_c) = match spec.representation {
        Representation::Embedding => {
            let rows = |sample: &[&LyricRecord]| -> Result<Vec<Vec<f64>>> {
                sample
                    .iter()
                    .map(|r| ctx.embedding(&r.id).map(<[f64]>::to_vec))
                    .collect()
            };
            let mut x_train = rows(&train_sample)?;
            let mut x_test = rows(&test_sample)?;
            if spec.centralized {
                x_train = CentroidTransform::fit(&x_train, CentroidSource::TrainSet)?.apply_all(&x_train)?;
                let test_mean = match spec.test_centering_source {
                    TestCenteringSource::FullCorpus => ctx.full_means[&spec.test_language].clone(),
                    TestCenteringSource::SampledSet => CentroidTransform::fit(&x_test, CentroidSource::TestCorpus)?,
                };
                x_test = test_mean.apply_all(&x_test)?;
            }
            fit_and_score(&x_train, &y_train, &x_test, &y_test, &svm)?
        }
        Representation::Bow => {
            let bow = BowConfig {
                excluded_name_parts: build_exclusions(&train_sample),
                ..ctx.bow.clone()
            };
            let train_tokens: Vec<Vec<String>> = train_sample.iter().map(|r| tokenize(&r.lyrics)).collect();
            let vocab = fit_vocabulary_tokens(&train_tokens, &bow)?;
            let x_train: Vec<_> = train_tokens.iter().map(|t| transform_tokens(t, &vocab)).collect();
            let x_test: Vec<_> = test_sample
                .iter()
                .map(|r| transform_tokens(&tokenize(&r.lyrics), &vocab))
                .collect();
            fit_and_score(&x_train, &y_train, &x_test, &y_test, &svm)?
        }
    };

    let ids = |v: &[&LyricRecord]| v.iter().map(|r| r.id.clone()).collect::<Vec<_>>();
    Ok(RunTrace {
        repeat,
        seed,
        f1,
        chosen_c,
        train_ids: ids(&train_sample),
        test_ids: ids(&test_sample),
        train_split: train_split.iter().map(|&i| train_pool[i].id.clone()).collect(),
        test_split: test_split.iter().map(|&i| test_pool[i].id.clone()).collect(),
    })
}

fn fit_and_score<R: FeatureRow>(
    x_train: &[R],
    y_train: &[bool],
    x_test: &[R],
    y_test: &[bool],
    config: &TrainConfig,
) -> Result<(f64, f64)> {
    let cv = cv_select_c(x_train, y_train, config)?;
    let model = train_binary(x_train, y_train, cv.chosen_c, config)?;
    let predicted = model.predict_all(x_test)?;
    Ok((f1(y_test, &predicted)?, cv.chosen_c))
}

/// All repeats of one spec, run concurrently. Any failure aborts the spec.
pub fn bootstrap_traces(ctx: &EvalContext, spec: &RunSpec) -> Result<Vec<RunTrace>> {
    spec.validate()?;
    (0..spec.repeats)
        .into_par_iter()
        .map(|r| run_once(ctx, spec, r))
        .collect()
}

pub fn bootstrap(ctx: &EvalContext, spec: &RunSpec) -> Result<BootstrapResult> {
    let traces = bootstrap_traces(ctx, spec)?;
    Ok(BootstrapResult::from_values(
        spec.clone(),
        traces.iter().map(|t| t.f1).collect(),
    ))
}

/// Bootstraps every spec; results keep the order of `specs`.
pub fn run_all(ctx: &EvalContext, specs: &[RunSpec]) -> Result<Vec<BootstrapResult>> {
    specs.par_iter().map(|s| bootstrap(ctx, s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CorpusVariant, Genre};
    use crate::seed::rng_from;
    use rand::Rng;

    fn genre() -> Genre {
        Genre::new("Rock").unwrap()
    }

    /// Two separable clusters in 4-d, `n` songs per variant.
    fn clustered(n: usize, tags: &[VariantTag]) -> (Vec<LyricRecord>, HashMap<String, Vec<f64>>) {
        let mut rng = rng_from(11, "fixture");
        let mut records = Vec::new();
        let mut emb = HashMap::new();
        for tag in tags {
            for i in 0..n {
                let pos = i % 2 == 0;
                let g = if pos { "Rock" } else { "Samba" };
                let id = format!("{tag}-{i}");
                let variant = tag.variant.clone();
                let r = LyricRecord::new(&id, format!("song {i}"), &tag.language, Genre::new(g))
                    .unwrap()
                    .with_source(format!("s{i}"), variant);
                let sign = if pos { 1.0 } else { -1.0 };
                let v: Vec<f64> = (0..4)
                    .map(|k| if k == 0 { sign * 0.5 } else { 0.0 } + rng.gen_range(-0.05..0.05))
                    .collect();
                emb.insert(id, v);
                records.push(r);
            }
        }
        (records, emb)
    }

    #[test]
    fn separable_clusters_score_high_and_repeat_exactly() {
        let pt = VariantTag::native("pt");
        let (records, emb) = clustered(60, std::slice::from_ref(&pt));
        let ctx = EvalContext::new(records, TrainConfig::default())
            .unwrap()
            .with_embeddings(emb)
            .unwrap();
        let spec = RunSpec::new(genre(), pt.clone(), pt, Representation::Embedding);
        let a = run_once(&ctx, &spec, 0).unwrap();
        assert!(a.f1 >= 0.95, "{}", a.f1);
        assert_eq!(a, run_once(&ctx, &spec, 0).unwrap());
        let train: HashSet<_> = a.train_split.iter().collect();
        assert!(a.test_split.iter().all(|id| !train.contains(id)));
        // fixture ids are `PT-{i}` with even i positive
        let pos = a
            .train_ids
            .iter()
            .filter(|id| id[3..].parse::<usize>().unwrap() % 2 == 0)
            .count();
        assert_eq!(pos * 2, a.train_ids.len());
    }

    #[test]
    fn translated_variants_never_share_sources() {
        let pt = VariantTag::native("pt");
        let pten = VariantTag::translated("pt", "en");
        let (records, emb) = clustered(200, &[pt.clone(), pten.clone()]);
        assert!(records.iter().any(|r| r.corpus_variant != CorpusVariant::Native));
        let ctx = EvalContext::new(records, TrainConfig::default())
            .unwrap()
            .with_embeddings(emb)
            .unwrap();
        let mut spec = RunSpec::new(genre(), pt, pten, Representation::Embedding);
        spec.repeats = 3;
        let by_id: HashMap<&str, &str> = ctx
            .variants
            .values()
            .flatten()
            .map(|r| (r.id.as_str(), r.source_id.as_str()))
            .collect();
        for t in bootstrap_traces(&ctx, &spec).unwrap() {
            let train: HashSet<&str> = t.train_ids.iter().map(|id| by_id[id.as_str()]).collect();
            assert!(t.test_ids.iter().all(|id| !train.contains(by_id[id.as_str()])));
        }
    }

    #[test]
    fn missing_variant_is_reported_with_context() {
        let pt = VariantTag::native("pt");
        let (records, emb) = clustered(20, std::slice::from_ref(&pt));
        let ctx = EvalContext::new(records, TrainConfig::default())
            .unwrap()
            .with_embeddings(emb)
            .unwrap();
        let spec = RunSpec::new(genre(), pt, VariantTag::native("en"), Representation::Embedding);
        let err = run_once(&ctx, &spec, 2).unwrap_err().to_string();
        assert!(err.contains("EN") && err.contains("repeat 2"), "{err}");
    }
}
