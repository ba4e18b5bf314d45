use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::Deserialize;

use super::record::{normalize_language, CorpusVariant, Genre, LyricRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Csv,
    Jsonl,
}

impl InputFormat {
    pub fn from_path(path: &Path) -> Option<InputFormat> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(InputFormat::Csv),
            "jsonl" | "ndjson" => Some(InputFormat::Jsonl),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    /// Abort on the first bad row instead of skipping it.
    pub strict: bool,
    pub genre_delimiter: char,
    /// Variant assigned to rows that do not carry one.
    pub variant: CorpusVariant,
    /// Prefix for ids derived from line numbers when the input has no id.
    pub id_prefix: String,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            strict: false,
            genre_delimiter: ';',
            variant: CorpusVariant::Native,
            id_prefix: "row".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowIssue {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Default)]
pub struct Ingested {
    pub records: Vec<LyricRecord>,
    pub skipped: Vec<RowIssue>,
}

pub fn ingest(path: &Path, format: InputFormat, options: &IngestOptions) -> Result<Ingested> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(BufReader::new(file), format, options)
}

pub fn ingest_reader<R: Read>(reader: R, format: InputFormat, options: &IngestOptions) -> Result<Ingested> {
    match format {
        InputFormat::Csv => ingest_csv(reader, options),
        InputFormat::Jsonl => ingest_jsonl(reader, options),
    }
}

/// Fields shared by both input formats before validation.
#[derive(Debug, Default, Deserialize)]
struct RawRow {
    id: Option<String>,
    source_id: Option<String>,
    #[serde(default)]
    artist: String,
    #[serde(default)]
    title: String,
    lyrics: Option<String>,
    #[serde(alias = "declared_language")]
    language: Option<String>,
    detected_language: Option<String>,
    #[serde(default)]
    genres: Vec<String>,
    #[serde(alias = "corpus_variant")]
    variant: Option<String>,
}

fn build_record(raw: RawRow, line: usize, options: &IngestOptions) -> Result<LyricRecord, String> {
    let lyrics = raw.lyrics.ok_or("missing field `lyrics`")?;
    if lyrics.trim().is_empty() {
        return Err("empty lyrics".into());
    }
    let language = raw
        .language
        .map(|l| normalize_language(&l))
        .filter(|l| !l.is_empty())
        .ok_or("missing language")?;
    let genres: std::collections::BTreeSet<Genre> = raw.genres.iter().filter_map(|g| Genre::new(g)).collect();
    if genres.is_empty() {
        return Err("no genres".into());
    }
    let id = raw
        .id
        .filter(|id| !id.trim().is_empty())
        .map(|id| id.trim().to_string())
        .unwrap_or_else(|| format!("{}:{line}", options.id_prefix));
    let corpus_variant = match raw.variant.as_deref().map(str::trim) {
        Some(v) if !v.is_empty() => v.parse().map_err(|e: Error| e.to_string())?,
        _ => options.variant.clone(),
    };
    Ok(LyricRecord {
        source_id: raw
            .source_id
            .filter(|s| !s.trim().is_empty())
            .unwrap_or_else(|| id.clone()),
        id,
        artist: raw.artist.trim().to_string(),
        title: raw.title.trim().to_string(),
        lyrics,
        declared_language: language,
        detected_language: raw
            .detected_language
            .map(|l| normalize_language(&l))
            .filter(|l| !l.is_empty()),
        genres,
        corpus_variant,
    })
}

fn push_row(
    out: &mut Ingested,
    built: Result<LyricRecord, String>,
    line: usize,
    options: &IngestOptions,
) -> Result<()> {
    match built {
        Ok(record) => out.records.push(record),
        Err(message) if options.strict => return Err(Error::Row { line, message }),
        Err(message) => {
            log::warn!("skipping line {line}: {message}");
            out.skipped.push(RowIssue { line, message });
        }
    }
    Ok(())
}

fn ingest_csv<R: Read>(reader: R, options: &IngestOptions) -> Result<Ingested> {
    let mut csv = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let headers = csv.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
    let required = |name: &str| column(name).ok_or_else(|| Error::MissingColumn(name.to_string()));
    let lyrics_col = required("lyrics")?;
    let language_col = required("language")?;
    let genres_col = required("genres")?;
    let id_col = column("id");
    let artist_col = column("artist");
    let title_col = column("title");
    let source_col = column("source_id");
    let detected_col = column("detected_language");
    let variant_col = column("variant");

    let mut out = Ingested::default();
    for row in csv.records() {
        let row = match row {
            Ok(row) => row,
            Err(e) => {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
                push_row(&mut out, Err(e.to_string()), line, options)?;
                continue;
            }
        };
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let get = |col: Option<usize>| col.and_then(|c| row.get(c)).map(str::to_string);
        let raw = RawRow {
            id: get(id_col),
            source_id: get(source_col),
            artist: get(artist_col).unwrap_or_default(),
            title: get(title_col).unwrap_or_default(),
            lyrics: get(Some(lyrics_col)),
            language: get(Some(language_col)),
            detected_language: get(detected_col),
            genres: get(Some(genres_col))
                .unwrap_or_default()
                .split(options.genre_delimiter)
                .map(str::to_string)
                .collect(),
            variant: get(variant_col),
        };
        push_row(&mut out, build_record(raw, line, options), line, options)?;
    }
    Ok(out)
}

fn ingest_jsonl<R: Read>(reader: R, options: &IngestOptions) -> Result<Ingested> {
    let mut out = Ingested::default();
    for (index, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = index + 1;
        let line = line.map_err(|e| Error::Row {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let built = serde_json::from_str::<RawRow>(&line)
            .map_err(|e| e.to_string())
            .and_then(|raw| build_record(raw, line_no, options));
        push_row(&mut out, built, line_no, options)?;
    }
    Ok(out)
}

/// Writes records as JSONL, one object per line with every derived field.
pub fn write_corpus(path: &Path, records: &[LyricRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    for record in records {
        serde_json::to_writer(&mut writer, record)?;
        writer.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Reads a corpus file written by [`write_corpus`]. Every row must be valid.
pub fn read_corpus(path: &Path) -> Result<Vec<LyricRecord>> {
    let options = IngestOptions {
        strict: true,
        ..IngestOptions::default()
    };
    Ok(ingest(path, InputFormat::Jsonl, &options)?.records)
}
