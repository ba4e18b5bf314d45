//! Lyric datasets: ingestion, language filtering, genre selection and
//! one-vs-all label views.

mod genres;
mod ingest;
mod langdetect;
mod record;

pub use genres::{
    genre_counts, label_view, select_genres, GenreCountRow, GenreCountTable, GenreSelection, LabelView, LabeledRecord,
};
pub use ingest::{ingest, ingest_reader, read_corpus, write_corpus, IngestOptions, Ingested, InputFormat, RowIssue};
pub use langdetect::{
    annotate_languages, bundled_profiles, detect_language, Detection, DetectionMode, LanguageProfile,
};
pub use record::{CorpusVariant, Genre, LyricRecord, VariantTag};

#[derive(Debug, Default)]
pub struct LanguagePartition {
    pub kept: Vec<LyricRecord>,
    pub discarded: Vec<LyricRecord>,
}

/// Keeps records whose detected language equals the declared one. Records
/// without a detected language are discarded.
pub fn filter_mislabeled(records: Vec<LyricRecord>) -> LanguagePartition {
    let (kept, discarded) = records
        .into_iter()
        .partition(|r| r.detected_language.as_deref() == Some(r.declared_language.as_str()));
    LanguagePartition { kept, discarded }
}

/// Whether genres are ranked on the filtered corpus or on everything ingested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankOrder {
    #[default]
    AfterFilter,
    BeforeFilter,
}

/// [`select_genres`] over either the kept records alone or kept plus discarded.
pub fn select_genres_ordered(
    kept: &[LyricRecord],
    discarded: &[LyricRecord],
    k: usize,
    order: RankOrder,
) -> crate::Result<GenreSelection> {
    match order {
        RankOrder::AfterFilter => select_genres(kept, k),
        RankOrder::BeforeFilter => {
            let all: Vec<LyricRecord> = kept.iter().chain(discarded).cloned().collect();
            select_genres(&all, k)
        }
    }
}
