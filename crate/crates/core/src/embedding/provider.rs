use std::collections::BTreeMap;
use std::io::Read;
use std::path::PathBuf;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::file::load_embedding_file;
use super::segment::{segment_with, SegmentConfig};
use super::{pool, SongEmbedding};
use crate::corpus::LyricRecord;
use crate::error::{Error, Result};
use crate::seed::SeedHasher;

/// Output size of the default multilingual sentence encoder.
pub const DEFAULT_DIMENSION: usize = 768;

/// A sentence encoder.
///
/// `embed_batch` must be deterministic for a fixed configuration and return
/// one vector of length [`dimension`](Self::dimension) per input sentence.
/// Providers that declare `bounded` promise every component lies in
/// `[-1, 1]`; the others get per-sentence L2 normalization before pooling.
pub trait EmbeddingProvider: Send + Sync {
    fn dimension(&self) -> usize;
    fn bounded(&self) -> bool;
    fn tag(&self) -> String;
    fn embed_batch(&self, sentences: &[&str]) -> Result<Vec<Vec<f32>>>;

    fn embed(&self, sentence: &str) -> Result<Vec<f32>> {
        let mut out = self.embed_batch(&[sentence])?;
        out.pop()
            .ok_or_else(|| Error::ProviderContract("empty response for one sentence".into()))
    }
}

/// Deterministic pseudo-embeddings keyed by a hash of the sentence text.
#[derive(Debug, Clone)]
pub struct MockProvider {
    seed: u64,
    dimension: usize,
}

impl MockProvider {
    pub fn new(seed: u64, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Config("mock provider dimension must be at least 1".into()));
        }
        Ok(MockProvider { seed, dimension })
    }
}

impl EmbeddingProvider for MockProvider {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn bounded(&self) -> bool {
        true
    }

    fn tag(&self) -> String {
        format!("mock:{}", self.seed)
    }

    fn embed_batch(&self, sentences: &[&str]) -> Result<Vec<Vec<f32>>> {
        Ok(sentences
            .iter()
            .map(|s| {
                let mut rng = SeedHasher::new("mock-sentence").u64(self.seed).str(s).rng();
                (0..self.dimension).map(|_| rng.gen_range(-1.0f32..=1.0)).collect()
            })
            .collect())
    }
}

/// Adapter for an external inference service. Each request POSTs one
/// sentence per line; the response carries one whitespace-separated float
/// row per line, in request order.
pub struct ExternProvider {
    endpoint: String,
    dimension: usize,
    agent: ureq::Agent,
}

impl ExternProvider {
    pub fn new(endpoint: impl Into<String>, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Config("extern provider dimension must be at least 1".into()));
        }
        Ok(ExternProvider {
            endpoint: endpoint.into(),
            dimension,
            agent: ureq::Agent::new_with_defaults(),
        })
    }
}

pub(crate) fn parse_vector_rows(body: &str, expected_rows: usize, dimension: usize) -> Result<Vec<Vec<f32>>> {
    let rows: Vec<Vec<f32>> = body
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            line.split_whitespace()
                .map(|v| f32::from_str(v).map_err(|e| Error::Provider(format!("response row {}: `{v}`: {e}", i + 1))))
                .collect()
        })
        .collect::<Result<_>>()?;
    if rows.len() != expected_rows {
        return Err(Error::ProviderContract(format!(
            "sent {expected_rows} sentences, received {} rows",
            rows.len()
        )));
    }
    if let Some(row) = rows.iter().find(|r| r.len() != dimension) {
        return Err(Error::DimensionMismatch {
            expected: dimension,
            got: row.len(),
        });
    }
    Ok(rows)
}

impl EmbeddingProvider for ExternProvider {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn bounded(&self) -> bool {
        false
    }

    fn tag(&self) -> String {
        format!("extern:{}", self.endpoint)
    }

    fn embed_batch(&self, sentences: &[&str]) -> Result<Vec<Vec<f32>>> {
        if sentences.is_empty() {
            return Ok(Vec::new());
        }
        if let Some(bad) = sentences.iter().find(|s| s.contains(['\n', '\r'])) {
            return Err(Error::Provider(format!("sentence contains a line break: {bad:?}")));
        }
        let body = sentences.join("\n");
        let mut response = self
            .agent
            .post(&self.endpoint)
            .content_type("text/plain; charset=utf-8")
            .send(body.as_str())
            .map_err(|e| Error::Provider(format!("{}: {e}", self.endpoint)))?;
        let mut text = String::new();
        response
            .body_mut()
            .as_reader()
            .read_to_string(&mut text)
            .map_err(|e| Error::Provider(format!("{}: {e}", self.endpoint)))?;
        parse_vector_rows(&text, sentences.len(), self.dimension)
    }
}

fn l2_normalize(v: &mut [f32]) {
    let norm = v.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x = (f64::from(*x) / norm) as f32;
        }
    }
}

/// Segments the lyrics, embeds every chunk and mean-pools the sentence vectors.
pub fn embed_song(
    provider: &dyn EmbeddingProvider,
    record: &LyricRecord,
    segments: &SegmentConfig,
) -> Result<SongEmbedding> {
    let chunks = segment_with(&record.lyrics, segments)?;
    if chunks.is_empty() {
        return Err(Error::Unembeddable(record.id.clone()));
    }
    let texts: Vec<&str> = chunks.iter().map(|c| c.text.as_str()).collect();
    let mut vectors = provider.embed_batch(&texts)?;
    if vectors.len() != texts.len() {
        return Err(Error::ProviderContract(format!(
            "{} returned {} vectors for {} sentences",
            provider.tag(),
            vectors.len(),
            texts.len()
        )));
    }
    for v in vectors.iter_mut() {
        if v.len() != provider.dimension() {
            return Err(Error::DimensionMismatch {
                expected: provider.dimension(),
                got: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::ProviderContract(format!(
                "{} emitted a non-finite value",
                provider.tag()
            )));
        }
        if provider.bounded() {
            if let Some(x) = v.iter().find(|x| x.abs() > 1.0) {
                return Err(Error::ProviderContract(format!(
                    "{} declared bounded but emitted {x}",
                    provider.tag()
                )));
            }
        } else {
            l2_normalize(v);
        }
    }
    Ok(SongEmbedding {
        record_id: record.id.clone(),
        values: pool(&vectors)?,
        provider_tag: provider.tag(),
    })
}

/// Produces one embedding per song.
pub trait SongEncoder: Send + Sync {
    fn dimension(&self) -> usize;
    fn tag(&self) -> String;
    /// Fails with [`Error::Unembeddable`] for songs that must be excluded.
    fn encode(&self, record: &LyricRecord) -> Result<SongEmbedding>;
}

/// Sentence provider plus segmentation and pooling.
pub struct PooledEncoder {
    provider: Box<dyn EmbeddingProvider>,
    segments: SegmentConfig,
}

impl PooledEncoder {
    pub fn new(provider: Box<dyn EmbeddingProvider>, segments: SegmentConfig) -> Result<Self> {
        segments.validate()?;
        Ok(PooledEncoder { provider, segments })
    }
}

impl SongEncoder for PooledEncoder {
    fn dimension(&self) -> usize {
        self.provider.dimension()
    }

    fn tag(&self) -> String {
        self.provider.tag()
    }

    fn encode(&self, record: &LyricRecord) -> Result<SongEmbedding> {
        embed_song(self.provider.as_ref(), record, &self.segments)
    }
}

/// Song embeddings computed ahead of time, looked up by record id.
pub struct PrecomputedEncoder {
    dimension: usize,
    tag: String,
    table: BTreeMap<String, SongEmbedding>,
}

impl PrecomputedEncoder {
    pub fn new(tag: impl Into<String>, dimension: usize, table: BTreeMap<String, SongEmbedding>) -> Self {
        PrecomputedEncoder {
            dimension,
            tag: tag.into(),
            table,
        }
    }
}

impl SongEncoder for PrecomputedEncoder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn tag(&self) -> String {
        self.tag.clone()
    }

    fn encode(&self, record: &LyricRecord) -> Result<SongEmbedding> {
        self.table
            .get(&record.id)
            .cloned()
            .ok_or_else(|| Error::Unembeddable(record.id.clone()))
    }
}

/// Parsed `mock:<seed>`, `file:<path>` or `extern:<endpoint>` selector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ProviderSpec {
    Mock { seed: u64 },
    File { path: PathBuf },
    Extern { endpoint: String },
}

impl FromStr for ProviderSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("provider `{s}` must look like kind:argument")))?;
        if arg.is_empty() {
            return Err(Error::Config(format!("provider `{s}` has an empty argument")));
        }
        match kind {
            "mock" => arg
                .parse()
                .map(|seed| ProviderSpec::Mock { seed })
                .map_err(|_| Error::Config(format!("mock seed `{arg}` is not an integer"))),
            "file" => Ok(ProviderSpec::File { path: arg.into() }),
            "extern" => Ok(ProviderSpec::Extern {
                endpoint: arg.to_string(),
            }),
            _ => Err(Error::Config(format!("unknown provider kind `{kind}`"))),
        }
    }
}

impl std::fmt::Display for ProviderSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProviderSpec::Mock { seed } => write!(f, "mock:{seed}"),
            ProviderSpec::File { path } => write!(f, "file:{}", path.display()),
            ProviderSpec::Extern { endpoint } => write!(f, "extern:{endpoint}"),
        }
    }
}

impl TryFrom<String> for ProviderSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ProviderSpec> for String {
    fn from(p: ProviderSpec) -> String {
        p.to_string()
    }
}

/// Opens the encoder a selector names. `dimension` applies to sentence
/// providers; precomputed files carry their own.
pub fn open_encoder(spec: &ProviderSpec, dimension: usize, segments: SegmentConfig) -> Result<Box<dyn SongEncoder>> {
    Ok(match spec {
        ProviderSpec::Mock { seed } => Box::new(PooledEncoder::new(
            Box::new(MockProvider::new(*seed, dimension)?),
            segments,
        )?),
        ProviderSpec::Extern { endpoint } => Box::new(PooledEncoder::new(
            Box::new(ExternProvider::new(endpoint.clone(), dimension)?),
            segments,
        )?),
        ProviderSpec::File { path } => {
            let table = load_embedding_file(path)?;
            Box::new(PrecomputedEncoder::new(
                spec.to_string(),
                table.dimension,
                table.embeddings,
            ))
        }
    })
}

#[derive(Debug, Default)]
pub struct EmbeddedCorpus {
    /// In input order.
    pub embeddings: Vec<SongEmbedding>,
    /// Ids of songs with nothing to embed.
    pub excluded: Vec<String>,
}

/// Embeds every record in parallel. Unembeddable songs are set aside and
/// logged; any other failure aborts.
pub fn embed_corpus(encoder: &dyn SongEncoder, records: &[LyricRecord]) -> Result<EmbeddedCorpus> {
    let results: Vec<Result<SongEmbedding>> = records.par_iter().map(|r| encoder.encode(r)).collect();
    let mut out = EmbeddedCorpus::default();
    for result in results {
        match result {
            Ok(e) => out.embeddings.push(e),
            Err(Error::Unembeddable(id)) => {
                log::warn!("excluding `{id}`: nothing to embed");
                out.excluded.push(id);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
