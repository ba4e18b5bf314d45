use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Centering, EvalContext, Representation, RunSpec};
use crate::bow::{load_term_list, BowConfig};
use crate::corpus::{read_corpus, select_genres, Genre, LyricRecord, VariantTag};
use crate::embedding::{embed_corpus, open_encoder, ProviderSpec, SegmentConfig, TokenCounter, DEFAULT_DIMENSION};
use crate::error::{Error, Result};
use crate::svm::TrainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub variant: VariantTag,
    pub path: PathBuf,
}

/// `"auto"` (top-k shared genres) or an explicit list.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum GenreChoice {
    #[default]
    Auto,
    List(Vec<Genre>),
}

impl Serialize for GenreChoice {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            GenreChoice::Auto => s.serialize_str("auto"),
            GenreChoice::List(list) => list.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for GenreChoice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Word(String),
            List(Vec<Genre>),
        }
        match Raw::deserialize(d)? {
            Raw::Word(w) if w == "auto" => Ok(GenreChoice::Auto),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "expected \"auto\" or a list, got `{w}`"
            ))),
            Raw::List(list) => Ok(GenreChoice::List(list)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BowSettings {
    pub min_df: f64,
    pub max_df: f64,
    /// Replaces the bundled musical-term list when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub musical_terms: Option<PathBuf>,
}

impl Default for BowSettings {
    fn default() -> Self {
        let d = BowConfig::default();
        BowSettings {
            min_df: d.min_df,
            max_df: d.max_df,
            musical_terms: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputPaths {
    pub dir: PathBuf,
    pub results: String,
    pub aggregated: String,
    pub report: String,
}

impl Default for OutputPaths {
    fn default() -> Self {
        OutputPaths {
            dir: PathBuf::from("out"),
            results: "results.csv".into(),
            aggregated: "results_aggregated.csv".into(),
            report: "report.md".into(),
        }
    }
}

impl OutputPaths {
    pub fn results_path(&self) -> PathBuf {
        self.dir.join(&self.results)
    }

    pub fn aggregated_path(&self) -> PathBuf {
        self.dir.join(&self.aggregated)
    }

    pub fn report_path(&self) -> PathBuf {
        self.dir.join(&self.report)
    }
}

/// An experiment description, read from TOML.
///
/// ```toml
/// master_seed = 7
/// provider = "file:embeddings.lyre"
/// representations = ["embedding", "bow"]
/// centering = ["none", "full-corpus"]
///
/// [[corpus]]
/// variant = "PT"
/// path = "pt.jsonl"
///
/// [[corpus]]
/// variant = "EN"
/// path = "en.jsonl"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub master_seed: u64,
    pub repeats: usize,
    pub provider: ProviderSpec,
    pub dimension: usize,
    pub token_budget: usize,
    pub token_counter: TokenCounter,
    pub genres: GenreChoice,
    pub top_k: usize,
    pub representations: Vec<Representation>,
    pub centering: Vec<Centering>,
    pub allow_source_overlap: bool,
    /// Train/test pairs to run; every ordered pair of corpora when empty.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<(VariantTag, VariantTag)>,
    pub corpus: Vec<CorpusEntry>,
    pub bow: BowSettings,
    pub svm: TrainConfig,
    pub output: OutputPaths,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            master_seed: 0,
            repeats: 10,
            provider: ProviderSpec::Mock { seed: 0 },
            dimension: DEFAULT_DIMENSION,
            token_budget: SegmentConfig::default().token_budget,
            token_counter: TokenCounter::default(),
            genres: GenreChoice::Auto,
            top_k: 20,
            representations: vec![Representation::Embedding],
            centering: vec![Centering::None],
            allow_source_overlap: false,
            pairs: Vec::new(),
            corpus: Vec::new(),
            bow: BowSettings::default(),
            svm: TrainConfig::default(),
            output: OutputPaths::default(),
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config; relative paths are taken from the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = RunConfig::from_toml(&text).map_err(|e| e.context(path.display().to_string()))?;
        config.rebase(path.parent().unwrap_or(Path::new(".")));
        Ok(config)
    }

    pub fn rebase(&mut self, base: &Path) {
        for c in &mut self.corpus {
            c.path = resolve(base, &c.path);
        }
        if let ProviderSpec::File { path } = &mut self.provider {
            *path = resolve(base, path);
        }
        if let Some(p) = &mut self.bow.musical_terms {
            *p = resolve(base, p);
        }
        self.output.dir = resolve(base, &self.output.dir);
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        if self.top_k == 0 {
            return Err(Error::Config("top_k must be at least 1".into()));
        }
        if self.representations.is_empty() || self.centering.is_empty() {
            return Err(Error::Config("representations and centering must be non-empty".into()));
        }
        if self.centering.contains(&Centering::FullCorpus) && self.centering.contains(&Centering::SampledSet) {
            return Err(Error::Config(
                "full-corpus and sampled-set centering cannot share one results file; run them separately".into(),
            ));
        }
        let tags: BTreeSet<&VariantTag> = self.corpus.iter().map(|c| &c.variant).collect();
        if tags.len() != self.corpus.len() {
            return Err(Error::Config("each corpus variant may appear once".into()));
        }
        for (a, b) in &self.pairs {
            if !tags.contains(a) || !tags.contains(b) {
                return Err(Error::Config(format!("pair {a}→{b} names a variant with no corpus")));
            }
        }
        self.segment_config().validate()?;
        self.svm.validate()?;
        self.bow_config()?.validate()
    }

    pub fn segment_config(&self) -> SegmentConfig {
        SegmentConfig {
            token_budget: self.token_budget,
            counter: self.token_counter,
        }
    }

    pub fn bow_config(&self) -> Result<BowConfig> {
        let mut cfg = BowConfig {
            min_df: self.bow.min_df,
            max_df: self.bow.max_df,
            ..BowConfig::default()
        };
        if let Some(p) = &self.bow.musical_terms {
            cfg.excluded_terms = load_term_list(p)?;
        }
        Ok(cfg)
    }

    /// Train/test pairs in corpus order.
    pub fn resolved_pairs(&self) -> Vec<(VariantTag, VariantTag)> {
        if !self.pairs.is_empty() {
            return self.pairs.clone();
        }
        let tags: Vec<&VariantTag> = self.corpus.iter().map(|c| &c.variant).collect();
        tags.iter()
            .flat_map(|a| tags.iter().map(move |b| ((*a).clone(), (*b).clone())))
            .collect()
    }

    /// Reads every corpus and stamps records with their entry's variant.
    pub fn load_corpora(&self) -> Result<Vec<LyricRecord>> {
        let mut all = Vec::new();
        for entry in &self.corpus {
            for mut r in read_corpus(&entry.path)? {
                if r.declared_language != entry.variant.language {
                    return Err(Error::Config(format!(
                        "{}: record `{}` is `{}` but the corpus is declared {}",
                        entry.path.display(),
                        r.id,
                        r.declared_language,
                        entry.variant
                    )));
                }
                r.corpus_variant = entry.variant.variant.clone();
                all.push(r);
            }
        }
        Ok(all)
    }

    /// Genres to evaluate: the explicit list, or the top-k intersection over
    /// native corpora.
    pub fn resolve_genres(&self, records: &[LyricRecord]) -> Result<Vec<Genre>> {
        match &self.genres {
            GenreChoice::List(list) if list.is_empty() => Err(Error::Config("empty genre list".into())),
            GenreChoice::List(list) => Ok(list.clone()),
            GenreChoice::Auto => {
                let native: Vec<LyricRecord> = records
                    .iter()
                    .filter(|r| r.variant_tag().is_native())
                    .cloned()
                    .collect();
                let selection = select_genres(&native, self.top_k)?;
                if selection.shared.is_empty() {
                    return Err(Error::EmptyInput("no genre is shared by the native corpora"));
                }
                Ok(selection.shared.into_iter().collect())
            }
        }
    }
}

/// Every run a config asks for: representation, then centering, then
/// train/test pair, then genre. Bag-of-words runs are never centralized.
pub fn plan_specs(config: &RunConfig, genres: &[Genre]) -> Vec<RunSpec> {
    let mut specs = Vec::new();
    for &representation in &config.representations {
        for &centering in &config.centering {
            if representation == Representation::Bow && centering.centralized() {
                continue;
            }
            for (train, test) in config.resolved_pairs() {
                for genre in genres {
                    let mut spec = RunSpec::new(genre.clone(), train.clone(), test.clone(), representation);
                    spec.centralized = centering.centralized();
                    spec.test_centering_source = centering.source();
                    spec.repeats = config.repeats;
                    spec.master_seed = config.master_seed;
                    spec.allow_source_overlap = config.allow_source_overlap;
                    specs.push(spec);
                }
            }
        }
    }
    specs
}

/// Loads corpora, resolves genres, embeds when needed and returns the
/// evaluation context together with the planned specs. Records carrying none
/// of the evaluated genres are dropped.
pub fn prepare(config: &RunConfig) -> Result<(EvalContext, Vec<RunSpec>)> {
    config.validate()?;
    let records = config.load_corpora()?;
    let genres = config.resolve_genres(&records)?;
    let wanted: BTreeSet<&Genre> = genres.iter().collect();
    let records: Vec<LyricRecord> = records
        .into_iter()
        .filter(|r| r.genres.iter().any(|g| wanted.contains(g)))
        .collect();
    let specs = plan_specs(config, &genres);
    let mut ctx = EvalContext::new(records.clone(), config.svm.clone())?.with_bow(config.bow_config()?)?;
    if config.representations.contains(&Representation::Embedding) {
        let encoder = open_encoder(&config.provider, config.dimension, config.segment_config())?;
        let embedded = embed_corpus(encoder.as_ref(), &records)?;
        let table: HashMap<String, Vec<f64>> = embedded
            .embeddings
            .iter()
            .map(|e| (e.record_id.clone(), e.to_f64()))
            .collect();
        ctx = ctx.with_embeddings(table)?;
    }
    Ok((ctx, specs))
}
