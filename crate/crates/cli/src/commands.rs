use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use lyricgenre::bow::{
    build_exclusions, fit_vocabulary_tokens, tokenize, transform_tokens, SparseDocVector, TfidfVocabulary,
};
use lyricgenre::corpus::{
    annotate_languages, bundled_profiles, filter_mislabeled, genre_counts, ingest, read_corpus, select_genres,
    select_genres_ordered, write_corpus, CorpusVariant, DetectionMode, Genre, IngestOptions, InputFormat, LyricRecord,
    RankOrder,
};
use lyricgenre::embedding::{
    embed_corpus, open_encoder, save_embedding_file, CentroidSource, CentroidTransform, ProviderSpec, SegmentConfig,
    SongEncoder, TokenCounter, DEFAULT_DIMENSION, DEFAULT_TOKEN_BUDGET,
};
use lyricgenre::eval::{
    aggregate_all, prepare, read_results_csv, render_report, run_all, write_aggregated_csv, write_results_csv,
    Centering, ReportFormat, Representation, RunConfig,
};
use lyricgenre::seed::SeedHasher;
use lyricgenre::svm::{train_genre, GenreTrainingSet, LinearModel, TrainConfig, WeightLayout};
use lyricgenre::{Error, Result};

/// Printed by `predict` when no genre has a positive decision.
pub const EMPTY_MARKER: &str = "<none>";

const MANIFEST: &str = "models.json";
const VOCABULARY: &str = "vocabulary.json";

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn dir_of(file: &Path) -> PathBuf {
    match file.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Records the settings a command actually ran with, defaults included.
fn write_resolved<T: Serialize>(dir: &Path, command: &str, settings: &T) -> Result<()> {
    let text = toml::to_string(settings).map_err(|e| Error::Config(e.to_string()))?;
    write_text(&dir.join(format!("{command}.resolved.toml")), &text)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectArg {
    /// Character-trigram profiles bundled with the library.
    Trigram,
    /// Keep the `detected_language` column from the input.
    PassThrough,
}

#[derive(Args, Debug, Serialize)]
pub struct IngestArgs {
    /// Raw lyrics as CSV or JSONL.
    #[arg(long, short)]
    input: PathBuf,
    /// Corpus JSONL of songs whose detected language matches the declared one.
    #[arg(long, short)]
    output: PathBuf,
    /// Inferred from the input extension when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Fail on the first malformed row instead of skipping it.
    #[arg(long)]
    strict: bool,
    #[arg(long, default_value_t = ';')]
    genre_delimiter: char,
    /// `native` or `translated-from:<lang>`, for rows without a variant column.
    #[arg(long, default_value = "native")]
    variant: String,
    #[arg(long, value_enum, default_value_t = DetectArg::Trigram)]
    detect: DetectArg,
    /// Mismatched songs; defaults to `<output>.discarded.jsonl`.
    #[arg(long)]
    discarded: Option<PathBuf>,
}

pub fn ingest_cmd(mut a: IngestArgs) -> Result<()> {
    let format = match a.format {
        Some(FormatArg::Csv) => InputFormat::Csv,
        Some(FormatArg::Jsonl) => InputFormat::Jsonl,
        None => InputFormat::from_path(&a.input)
            .ok_or_else(|| Error::Config(format!("cannot infer format of {}; pass --format", a.input.display())))?,
    };
    a.format = Some(match format {
        InputFormat::Csv => FormatArg::Csv,
        InputFormat::Jsonl => FormatArg::Jsonl,
    });
    let discarded_path = a
        .discarded
        .clone()
        .unwrap_or_else(|| with_suffix(&a.output, ".discarded.jsonl"));
    a.discarded = Some(discarded_path.clone());
    let options = IngestOptions {
        strict: a.strict,
        genre_delimiter: a.genre_delimiter,
        variant: a.variant.parse::<CorpusVariant>()?,
        ..IngestOptions::default()
    };
    let mut ingested = ingest(&a.input, format, &options)?;
    let mode = match a.detect {
        DetectArg::Trigram => DetectionMode::Trigram(bundled_profiles()),
        DetectArg::PassThrough => DetectionMode::PassThrough,
    };
    annotate_languages(&mut ingested.records, &mode)?;
    let partition = filter_mislabeled(ingested.records);
    write_corpus(&a.output, &partition.kept)?;
    write_corpus(&discarded_path, &partition.discarded)?;
    write_resolved(&dir_of(&a.output), "ingest", &a)?;
    println!("kept\t{}", partition.kept.len());
    println!("discarded\t{}", partition.discarded.len());
    println!("skipped\t{}", ingested.skipped.len());
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct SelectArgs {
    /// Filtered corpus written by `ingest`.
    #[arg(long, short)]
    input: PathBuf,
    /// Directory for `genres.json`, `genre_counts.md` and `genre_counts.csv`.
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long, default_value_t = 20)]
    top_k: usize,
    /// Rank genres on all ingested songs, including mismatched ones.
    #[arg(long)]
    rank_before_filter: bool,
    /// Sidecar of mismatched songs; defaults to `<input>.discarded.jsonl`.
    #[arg(long)]
    discarded: Option<PathBuf>,
}

pub fn select_genres_cmd(mut a: SelectArgs) -> Result<()> {
    let kept = read_corpus(&a.input)?;
    let (discarded, order) = if a.rank_before_filter {
        let path = a
            .discarded
            .clone()
            .unwrap_or_else(|| with_suffix(&a.input, ".discarded.jsonl"));
        a.discarded = Some(path.clone());
        (read_corpus(&path)?, RankOrder::BeforeFilter)
    } else {
        (Vec::new(), RankOrder::AfterFilter)
    };
    let selection = select_genres_ordered(&kept, &discarded, a.top_k, order)?;
    let table = genre_counts(&kept, &selection)?;
    let markdown = table.to_markdown();
    fs::create_dir_all(&a.output).map_err(|e| Error::io(&a.output, e))?;
    write_text(
        &a.output.join("genres.json"),
        &(serde_json::to_string_pretty(&selection)? + "\n"),
    )?;
    write_text(&a.output.join("genre_counts.md"), &markdown)?;
    write_text(&a.output.join("genre_counts.csv"), &table.to_csv()?)?;
    write_resolved(&a.output, "select-genres", &a)?;
    print!("{markdown}");
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct EmbedArgs {
    /// Corpus JSONL.
    #[arg(long, short)]
    input: PathBuf,
    /// LYRE embedding file.
    #[arg(long, short)]
    output: PathBuf,
    /// `mock:<seed>` or `extern:<url>`.
    #[arg(long)]
    provider: ProviderSpec,
    #[arg(long, default_value_t = DEFAULT_DIMENSION)]
    dimension: usize,
    #[arg(long, default_value_t = DEFAULT_TOKEN_BUDGET)]
    token_budget: usize,
    #[arg(long, value_enum, default_value_t = CounterArg::Approximate)]
    token_counter: CounterArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CounterArg {
    /// 1.3 tokens per word, rounded up.
    Approximate,
    /// One token per word.
    Words,
}

impl From<CounterArg> for TokenCounter {
    fn from(c: CounterArg) -> Self {
        match c {
            CounterArg::Approximate => TokenCounter::Approximate,
            CounterArg::Words => TokenCounter::Words,
        }
    }
}

pub fn embed_cmd(a: EmbedArgs) -> Result<()> {
    if matches!(a.provider, ProviderSpec::File { .. }) {
        return Err(Error::Config(
            "embed needs a sentence provider, not a precomputed file".into(),
        ));
    }
    let records = read_corpus(&a.input)?;
    let segments = SegmentConfig {
        token_budget: a.token_budget,
        counter: a.token_counter.into(),
    };
    let encoder = open_encoder(&a.provider, a.dimension, segments)?;
    let embedded = embed_corpus(encoder.as_ref(), &records)?;
    save_embedding_file(&a.output, encoder.dimension(), &embedded.embeddings)?;
    let excluded: String = embedded.excluded.iter().map(|id| format!("{id}\n")).collect();
    write_text(&with_suffix(&a.output, ".excluded.txt"), &excluded)?;
    write_resolved(&dir_of(&a.output), "embed", &a)?;
    println!("embedded\t{}", embedded.embeddings.len());
    println!("excluded\t{}", embedded.excluded.len());
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepresentationArg {
    Embedding,
    Bow,
}

impl From<RepresentationArg> for Representation {
    fn from(r: RepresentationArg) -> Self {
        match r {
            RepresentationArg::Embedding => Representation::Embedding,
            RepresentationArg::Bow => Representation::Bow,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CenteringArg {
    None,
    FullCorpus,
    SampledSet,
}

impl From<CenteringArg> for Centering {
    fn from(c: CenteringArg) -> Self {
        match c {
            CenteringArg::None => Centering::None,
            CenteringArg::FullCorpus => Centering::FullCorpus,
            CenteringArg::SampledSet => Centering::SampledSet,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    /// Training corpus (JSONL).
    #[arg(long, short)]
    input: PathBuf,
    /// Directory for the models, their manifest and any vocabulary.
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = RepresentationArg::Embedding)]
    representation: RepresentationArg,
    /// Required for embedding models: `mock:<seed>`, `file:<lyre>` or `extern:<url>`.
    #[arg(long)]
    provider: Option<ProviderSpec>,
    #[arg(long, default_value_t = DEFAULT_DIMENSION)]
    dimension: usize,
    #[arg(long, default_value_t = DEFAULT_TOKEN_BUDGET)]
    token_budget: usize,
    /// Comma-separated genres; the top-k shared genres when omitted.
    #[arg(long, value_delimiter = ',')]
    genres: Vec<String>,
    #[arg(long, default_value_t = 20)]
    top_k: usize,
    /// Subtract the training corpus mean from every embedding.
    #[arg(long, value_enum, default_value_t = CenteringArg::None)]
    centering: CenteringArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0.01)]
    min_df: f64,
    #[arg(long, default_value_t = 0.3)]
    max_df: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelEntry {
    genre: String,
    file: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    representation: Representation,
    #[serde(skip_serializing_if = "Option::is_none")]
    provider: Option<ProviderSpec>,
    dimension: usize,
    token_budget: usize,
    centralized: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    vocabulary: Option<String>,
    models: Vec<ModelEntry>,
}

/// Most frequent genres, ties by name.
fn top_genres(records: &[LyricRecord], k: usize) -> Vec<Genre> {
    let mut counts: BTreeMap<&Genre, usize> = BTreeMap::new();
    for r in records {
        for g in &r.genres {
            *counts.entry(g).or_default() += 1;
        }
    }
    let mut ranked: Vec<(&Genre, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.into_iter().take(k).map(|(g, _)| g.clone()).collect()
}

fn slug(genre: &Genre) -> String {
    genre
        .key()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { '-' })
        .collect()
}

enum Features {
    Dense(Vec<Vec<f64>>),
    Sparse(Vec<SparseDocVector>),
}

pub fn train_cmd(a: TrainArgs) -> Result<()> {
    let representation: Representation = a.representation.into();
    let centering: Centering = a.centering.into();
    if representation == Representation::Bow && centering.centralized() {
        return Err(Error::Config("centering applies to embedding models only".into()));
    }
    let records = read_corpus(&a.input)?;
    let genres: Vec<Genre> = if a.genres.is_empty() {
        let languages: BTreeSet<&str> = records.iter().map(|r| r.declared_language.as_str()).collect();
        if languages.len() >= 2 {
            select_genres(&records, a.top_k)?.shared.into_iter().collect()
        } else {
            top_genres(&records, a.top_k)
        }
    } else {
        a.genres.iter().map(|g| g.parse()).collect::<Result<_>>()?
    };
    if genres.is_empty() {
        return Err(Error::EmptyInput("no genres to train"));
    }
    let wanted: BTreeSet<&Genre> = genres.iter().collect();
    let mut records: Vec<LyricRecord> = records
        .into_iter()
        .filter(|r| r.genres.iter().any(|g| wanted.contains(g)))
        .collect();

    let mut manifest = Manifest {
        representation,
        provider: a.provider.clone(),
        dimension: a.dimension,
        token_budget: a.token_budget,
        centralized: centering.centralized(),
        vocabulary: None,
        models: Vec::new(),
    };
    let mut centroid = None;
    let mut tag = representation.to_string();
    fs::create_dir_all(&a.output).map_err(|e| Error::io(&a.output, e))?;
    let features = match representation {
        Representation::Embedding => {
            let provider = a
                .provider
                .as_ref()
                .ok_or_else(|| Error::Config("embedding models need --provider".into()))?;
            let segments = SegmentConfig {
                token_budget: a.token_budget,
                ..SegmentConfig::default()
            };
            let encoder = open_encoder(provider, a.dimension, segments)?;
            manifest.dimension = encoder.dimension();
            tag = encoder.tag();
            let embedded = embed_corpus(encoder.as_ref(), &records)?;
            let excluded: BTreeSet<&str> = embedded.excluded.iter().map(String::as_str).collect();
            records.retain(|r| !excluded.contains(r.id.as_str()));
            let mut rows: Vec<Vec<f64>> = embedded.embeddings.iter().map(|e| e.to_f64()).collect();
            if centering.centralized() {
                let t = CentroidTransform::fit(&rows, CentroidSource::TrainSet)?;
                rows = t.apply_all(&rows)?;
                centroid = Some(t);
            }
            Features::Dense(rows)
        }
        Representation::Bow => {
            let refs: Vec<&LyricRecord> = records.iter().collect();
            let config = lyricgenre::bow::BowConfig {
                min_df: a.min_df,
                max_df: a.max_df,
                excluded_name_parts: build_exclusions(&refs),
                ..Default::default()
            };
            let tokens: Vec<Vec<String>> = records.iter().map(|r| tokenize(&r.lyrics)).collect();
            let vocab = fit_vocabulary_tokens(&tokens, &config)?;
            vocab.save(&a.output.join(VOCABULARY))?;
            manifest.vocabulary = Some(VOCABULARY.into());
            manifest.dimension = vocab.len();
            Features::Sparse(tokens.iter().map(|t| transform_tokens(t, &vocab)).collect())
        }
    };

    let trained: Vec<_> = genres
        .par_iter()
        .map(|genre| -> Result<_> {
            let labels: Vec<bool> = records.iter().map(|r| r.has_genre(genre)).collect();
            let genre_seed = SeedHasher::new("train-cmd").u64(a.seed).str(genre.key()).finish();
            let sample = lyricgenre::eval::balanced_resample(&labels, genre_seed)
                .map_err(|e| e.context(format!("genre `{genre}`")))?;
            let config = TrainConfig {
                folds: a.folds,
                seed: genre_seed,
                ..TrainConfig::default()
            };
            let y: Vec<bool> = sample.iter().map(|&i| labels[i]).collect();
            let mut out = match &features {
                Features::Dense(rows) => {
                    let x: Vec<&Vec<f64>> = sample.iter().map(|&i| &rows[i]).collect();
                    train_genre(
                        &GenreTrainingSet {
                            genre: genre.clone(),
                            rows: &x,
                            labels: &y,
                        },
                        &config,
                    )?
                }
                Features::Sparse(rows) => {
                    let x: Vec<&SparseDocVector> = sample.iter().map(|&i| &rows[i]).collect();
                    let mut t = train_genre(
                        &GenreTrainingSet {
                            genre: genre.clone(),
                            rows: &x,
                            labels: &y,
                        },
                        &config,
                    )?;
                    t.model.layout = WeightLayout::Sparse;
                    t
                }
            };
            out.model.representation_tag = tag.clone();
            out.model.centroid = centroid.clone();
            Ok(out)
        })
        .collect::<Result<_>>()?;

    for (i, (genre, t)) in genres.iter().zip(&trained).enumerate() {
        let file = format!("{i:02}-{}.model.json", slug(genre));
        t.model.save(&a.output.join(&file))?;
        manifest.models.push(ModelEntry {
            genre: genre.to_string(),
            file,
        });
        let best =
            t.cv.per_c
                .iter()
                .find(|e| e.c == t.cv.chosen_c)
                .map_or(f64::NAN, |e| e.mean_f1);
        println!("{genre}\tC={}\tcv_f1={best:.4}", t.cv.chosen_c);
    }
    write_text(
        &a.output.join(MANIFEST),
        &(serde_json::to_string_pretty(&manifest)? + "\n"),
    )?;
    write_resolved(&a.output, "train", &a)
}

#[derive(Args, Debug, Serialize)]
pub struct BootstrapArgs {
    /// Run configuration (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Overrides the config's output directory.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Overrides the config's provider.
    #[arg(long)]
    provider: Option<ProviderSpec>,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `repeats`.
    #[arg(long)]
    repeats: Option<usize>,
    /// Overrides the centering list; repeat or comma-separate.
    #[arg(long, value_enum, value_delimiter = ',')]
    centering: Vec<CenteringArg>,
    /// Overrides the representation list; repeat or comma-separate.
    #[arg(long, value_enum, value_delimiter = ',')]
    representation: Vec<RepresentationArg>,
    /// Keep translated test songs whose source song is in the train sample.
    #[arg(long)]
    allow_source_overlap: bool,
}

pub fn bootstrap_cmd(a: BootstrapArgs) -> Result<()> {
    let mut config = RunConfig::load(&a.config)?;
    let cwd = Path::new(".");
    if let Some(dir) = &a.output {
        config.output.dir = dir.clone();
    }
    if let Some(mut p) = a.provider.clone() {
        if let ProviderSpec::File { path } = &mut p {
            if path.is_relative() {
                *path = cwd.join(&*path);
            }
        }
        config.provider = p;
    }
    if let Some(seed) = a.seed {
        config.master_seed = seed;
    }
    if let Some(r) = a.repeats {
        config.repeats = r;
    }
    if !a.centering.is_empty() {
        config.centering = a.centering.iter().map(|&c| c.into()).collect();
    }
    if !a.representation.is_empty() {
        config.representations = a.representation.iter().map(|&r| r.into()).collect();
    }
    config.allow_source_overlap |= a.allow_source_overlap;
    config.validate()?;

    let (ctx, specs) = prepare(&config)?;
    log::info!("{} specs × {} repeats", specs.len(), config.repeats);
    let results = run_all(&ctx, &specs)?;

    let out = &config.output;
    fs::create_dir_all(&out.dir).map_err(|e| Error::io(&out.dir, e))?;
    let results_path = out.results_path();
    let mut w = create(&results_path)?;
    write_results_csv(&mut w, &results)?;
    w.flush().map_err(|e| Error::io(&results_path, e))?;
    let aggregated_path = out.aggregated_path();
    let mut w = create(&aggregated_path)?;
    write_aggregated_csv(&mut w, &results)?;
    w.flush().map_err(|e| Error::io(&aggregated_path, e))?;
    let report: Vec<String> = aggregate_all(&results)?
        .iter()
        .map(|m| render_report(m, ReportFormat::Markdown))
        .collect();
    write_text(&out.report_path(), &report.join("\n"))?;
    write_text(&out.dir.join("run.resolved.toml"), &config.to_toml()?)?;
    println!("{}", results_path.display());
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormatArg {
    Markdown,
    Csv,
}

#[derive(Args, Debug, Serialize)]
pub struct ReportArgs {
    /// Per-repeat results CSV written by `bootstrap`.
    #[arg(long, short)]
    input: PathBuf,
    /// Written to standard output when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormatArg::Markdown)]
    format: ReportFormatArg,
}

pub fn report_cmd(a: ReportArgs) -> Result<()> {
    let file = File::open(&a.input).map_err(|e| Error::io(&a.input, e))?;
    let results = read_results_csv(BufReader::new(file))?;
    let matrices = aggregate_all(&results)?;
    let format = match a.format {
        ReportFormatArg::Markdown => ReportFormat::Markdown,
        ReportFormatArg::Csv => ReportFormat::Csv,
    };
    let text = match format {
        ReportFormat::Markdown => matrices
            .iter()
            .map(|m| render_report(m, format))
            .collect::<Vec<_>>()
            .join("\n"),
        // one table per file keeps the CSV rectangular; extra tables get a title row
        ReportFormat::Csv => matrices
            .iter()
            .map(|m| format!("# {}\n{}", m.title(), render_report(m, format)))
            .collect::<Vec<_>>()
            .join(""),
    };
    match &a.output {
        Some(path) => {
            write_text(path, &text)?;
            write_resolved(&dir_of(path), "report", &a)
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    /// One lyric per line (`\n` inside a line marks a line break); `-` for stdin.
    #[arg(long, short)]
    input: PathBuf,
    /// Directory written by `train`.
    #[arg(long)]
    models: PathBuf,
    /// Replaces the provider recorded with the models.
    #[arg(long)]
    provider: Option<ProviderSpec>,
    /// For centered models: corpus in the input's language whose mean is
    /// subtracted; the training mean is used when omitted.
    #[arg(long)]
    center_corpus: Option<PathBuf>,
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let reader: Box<dyn BufRead> = if path == Path::new("-") {
        Box::new(BufReader::new(io::stdin()))
    } else {
        Box::new(BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?))
    };
    reader
        .lines()
        .map(|l| l.map(|s| s.replace("\\n", "\n")).map_err(|e| Error::io(path, e)))
        .collect()
}

fn adhoc_record(i: usize, lyrics: &str) -> LyricRecord {
    LyricRecord {
        id: format!("input:{i}"),
        source_id: format!("input:{i}"),
        artist: String::new(),
        title: String::new(),
        lyrics: lyrics.to_string(),
        declared_language: String::new(),
        detected_language: None,
        genres: BTreeSet::new(),
        corpus_variant: CorpusVariant::Native,
    }
}

fn embed_inputs(encoder: &dyn SongEncoder, lines: &[String]) -> Result<Vec<Option<Vec<f64>>>> {
    lines
        .par_iter()
        .enumerate()
        .map(|(i, text)| match encoder.encode(&adhoc_record(i, text)) {
            Ok(e) => Ok(Some(e.to_f64())),
            Err(Error::Unembeddable(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

pub fn predict_cmd(a: PredictArgs) -> Result<()> {
    let manifest_path = a.models.join(MANIFEST);
    let manifest: Manifest =
        serde_json::from_str(&fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?)?;
    let models: Vec<LinearModel> = manifest
        .models
        .iter()
        .map(|m| LinearModel::load(&a.models.join(&m.file)))
        .collect::<Result<_>>()?;
    let lines = read_lines(&a.input)?;

    let decisions: Vec<Option<Vec<f64>>> = match manifest.representation {
        Representation::Embedding => {
            let provider = a
                .provider
                .clone()
                .or(manifest.provider.clone())
                .ok_or_else(|| Error::Config("no provider recorded; pass --provider".into()))?;
            if matches!(provider, ProviderSpec::File { .. }) {
                return Err(Error::Config(
                    "new lyrics need a sentence provider; pass --provider".into(),
                ));
            }
            let segments = SegmentConfig {
                token_budget: manifest.token_budget,
                ..SegmentConfig::default()
            };
            let encoder = open_encoder(&provider, manifest.dimension, segments)?;
            let rows = embed_inputs(encoder.as_ref(), &lines)?;
            let input_mean = match (&a.center_corpus, manifest.centralized) {
                (Some(path), true) => {
                    let corpus = read_corpus(path)?;
                    let embedded = embed_corpus(encoder.as_ref(), &corpus)?;
                    let table: Vec<Vec<f64>> = embedded.embeddings.iter().map(|e| e.to_f64()).collect();
                    Some(CentroidTransform::fit(&table, CentroidSource::TestCorpus)?)
                }
                _ => None,
            };
            rows.into_iter()
                .map(|row| -> Result<Option<Vec<f64>>> {
                    let Some(row) = row else { return Ok(None) };
                    models
                        .iter()
                        .map(|m| {
                            let x = match (input_mean.as_ref(), m.centroid.as_ref()) {
                                (Some(t), _) | (None, Some(t)) => t.apply(&row)?,
                                (None, None) => row.clone(),
                            };
                            m.decision(x.as_slice())
                        })
                        .collect::<Result<Vec<f64>>>()
                        .map(Some)
                })
                .collect::<Result<_>>()?
        }
        Representation::Bow => {
            let name = manifest
                .vocabulary
                .as_deref()
                .ok_or_else(|| Error::Config("bag-of-words models without a vocabulary".into()))?;
            let vocab = TfidfVocabulary::load(&a.models.join(name))?;
            lines
                .iter()
                .map(|text| {
                    let x = transform_tokens(&tokenize(text), &vocab);
                    models
                        .iter()
                        .map(|m| m.decision(&x))
                        .collect::<Result<Vec<f64>>>()
                        .map(Some)
                })
                .collect::<Result<_>>()?
        }
    };

    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    for scores in decisions {
        let labels: Vec<String> = scores
            .unwrap_or_default()
            .iter()
            .zip(&manifest.models)
            .filter(|(s, _)| **s > 0.0)
            .map(|(s, m)| format!("{}:{s:.4}", m.genre))
            .collect();
        let line = if labels.is_empty() {
            EMPTY_MARKER.to_string()
        } else {
            labels.join("\t")
        };
        writeln!(out, "{line}").map_err(|e| Error::io("<stdout>", e))?;
    }
    out.flush().map_err(|e| Error::io("<stdout>", e))
}
