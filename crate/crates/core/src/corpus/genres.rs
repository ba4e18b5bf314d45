use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::record::{Genre, LyricRecord};
use crate::error::{Error, Result};

/// Top-k genres per language and their intersection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenreSelection {
    pub k: usize,
    pub per_language_top: BTreeMap<String, Vec<Genre>>,
    pub shared: BTreeSet<Genre>,
}

impl GenreSelection {
    pub fn contains(&self, genre: &Genre) -> bool {
        self.shared.contains(genre)
    }
}

fn counts_by_language(records: &[LyricRecord]) -> BTreeMap<String, BTreeMap<Genre, usize>> {
    let mut counts: BTreeMap<String, BTreeMap<Genre, usize>> = BTreeMap::new();
    for record in records {
        let per_genre = counts.entry(record.declared_language.clone()).or_default();
        for genre in &record.genres {
            *per_genre.entry(genre.clone()).or_default() += 1;
        }
    }
    counts
}

/// Ranks genres per declared language by song count (ties broken by
/// normalized name) and intersects the top `k` of every language.
pub fn select_genres(records: &[LyricRecord], k: usize) -> Result<GenreSelection> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let counts = counts_by_language(records);
    if counts.len() < 2 {
        return Err(Error::Config(format!(
            "genre selection needs at least 2 languages, found {}",
            counts.len()
        )));
    }
    let per_language_top: BTreeMap<String, Vec<Genre>> = counts
        .into_iter()
        .map(|(language, per_genre)| {
            let mut ranked: Vec<(Genre, usize)> = per_genre.into_iter().collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            let top = ranked.into_iter().take(k).map(|(g, _)| g).collect();
            (language, top)
        })
        .collect();
    let mut lists = per_language_top.values();
    let first: BTreeSet<Genre> = lists.next().into_iter().flatten().cloned().collect();
    let shared = lists.fold(first, |acc, list| {
        let set: BTreeSet<Genre> = list.iter().cloned().collect();
        acc.intersection(&set).cloned().collect()
    });
    Ok(GenreSelection {
        k,
        per_language_top,
        shared,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenreCountRow {
    pub genre: Genre,
    /// Aligned with [`GenreCountTable::languages`].
    pub counts: Vec<usize>,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenreCountTable {
    pub languages: Vec<String>,
    pub rows: Vec<GenreCountRow>,
}

impl GenreCountTable {
    pub fn language_totals(&self) -> Vec<usize> {
        (0..self.languages.len())
            .map(|i| self.rows.iter().map(|r| r.counts[i]).sum())
            .collect()
    }

    pub fn grand_total(&self) -> usize {
        self.rows.iter().map(|r| r.total).sum()
    }

    pub fn row(&self, genre: &Genre) -> Option<&GenreCountRow> {
        self.rows.iter().find(|r| &r.genre == genre)
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| Genre |");
        for lang in &self.languages {
            let _ = write!(out, " {} |", lang.to_uppercase());
        }
        out.push_str(" Total |\n|---|");
        out.push_str(&"---:|".repeat(self.languages.len() + 1));
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "| {} |", row.genre);
            for c in &row.counts {
                let _ = write!(out, " {c} |");
            }
            let _ = writeln!(out, " {} |", row.total);
        }
        out.push_str("| Total |");
        for c in self.language_totals() {
            let _ = write!(out, " {c} |");
        }
        let _ = writeln!(out, " {} |", self.grand_total());
        out
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["genre".to_string()];
        header.extend(self.languages.iter().cloned());
        header.push("total".into());
        writer.write_record(&header)?;
        for row in &self.rows {
            let mut fields = vec![row.genre.to_string()];
            fields.extend(row.counts.iter().map(usize::to_string));
            fields.push(row.total.to_string());
            writer.write_record(&fields)?;
        }
        let bytes = writer.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Per-language song counts for each shared genre, largest total first.
/// A song with several shared genres counts once toward each of them.
pub fn genre_counts(records: &[LyricRecord], selection: &GenreSelection) -> Result<GenreCountTable> {
    if selection.shared.is_empty() {
        return Err(Error::EmptyInput("shared genre set"));
    }
    let counts = counts_by_language(records);
    let languages: Vec<String> = counts.keys().cloned().collect();
    let mut rows: Vec<GenreCountRow> = selection
        .shared
        .iter()
        .map(|genre| {
            let per_lang: Vec<usize> = languages
                .iter()
                .map(|l| counts[l].get(genre).copied().unwrap_or(0))
                .collect();
            GenreCountRow {
                genre: genre.clone(),
                total: per_lang.iter().sum(),
                counts: per_lang,
            }
        })
        .collect();
    rows.sort_by(|a, b| b.total.cmp(&a.total).then_with(|| a.genre.cmp(&b.genre)));
    Ok(GenreCountTable { languages, rows })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledRecord {
    /// Position in the slice the view was built from.
    pub index: usize,
    pub id: String,
    pub positive: bool,
}

/// One-vs-all view of a record set for a single genre.
#[derive(Debug, Clone)]
pub struct LabelView {
    pub genre: Genre,
    pub entries: Vec<LabeledRecord>,
}

impl LabelView {
    pub fn positives(&self) -> usize {
        self.entries.iter().filter(|e| e.positive).count()
    }

    pub fn negatives(&self) -> usize {
        self.entries.len() - self.positives()
    }

    pub fn labels(&self) -> Vec<bool> {
        self.entries.iter().map(|e| e.positive).collect()
    }
}

pub fn label_view(records: &[LyricRecord], genre: &Genre, selection: &GenreSelection) -> Result<LabelView> {
    if !selection.contains(genre) {
        return Err(Error::UnknownGenre(genre.to_string()));
    }
    Ok(label_view_unchecked(records, genre))
}

fn label_view_unchecked(records: &[LyricRecord], genre: &Genre) -> LabelView {
    LabelView {
        genre: genre.clone(),
        entries: records
            .iter()
            .enumerate()
            .map(|(index, r)| LabeledRecord {
                index,
                id: r.id.clone(),
                positive: r.has_genre(genre),
            })
            .collect(),
    }
}
