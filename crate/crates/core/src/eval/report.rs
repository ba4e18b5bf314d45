use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{mean_and_std, BootstrapResult, Representation, RunSpec, TestCenteringSource};
use crate::corpus::{Genre, VariantTag};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::Config(format!("unknown report format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixCell {
    /// Unweighted mean of the genre-level means.
    pub mean: f64,
    /// Sample std of the genre-level means.
    pub std: f64,
    pub genres: usize,
}

impl MatrixCell {
    pub fn two_sigma(&self) -> f64 {
        2.0 * self.std
    }
}

/// Train variants by test variants for one representation and centering mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultMatrix {
    pub representation: Representation,
    pub centralized: bool,
    pub rows: Vec<VariantTag>,
    pub cols: Vec<VariantTag>,
    /// `cells[r][c]`; `None` where no results were supplied for the pair.
    pub cells: Vec<Vec<Option<MatrixCell>>>,
}

impl ResultMatrix {
    pub fn cell(&self, train: &VariantTag, test: &VariantTag) -> Option<&MatrixCell> {
        let r = self.rows.iter().position(|t| t == train)?;
        let c = self.cols.iter().position(|t| t == test)?;
        self.cells[r][c].as_ref()
    }

    pub fn title(&self) -> String {
        format!(
            "{}, {}",
            self.representation,
            if self.centralized {
                "centralized"
            } else {
                "uncentralized"
            }
        )
    }
}

/// Languages in first-appearance order; within a language the native corpus
/// comes first, then its translations.
fn ordered_tags<'a>(tags: impl Iterator<Item = &'a VariantTag>) -> Vec<VariantTag> {
    let mut languages: Vec<String> = Vec::new();
    let mut set = BTreeSet::new();
    for t in tags {
        if !languages.contains(&t.language) {
            languages.push(t.language.clone());
        }
        set.insert(t.clone());
    }
    let mut out: Vec<VariantTag> = set.into_iter().collect();
    out.sort_by_key(|t| {
        (
            languages.iter().position(|l| *l == t.language),
            !t.is_native(),
            t.to_string(),
        )
    });
    out
}

/// Folds per-genre results into one matrix. All results must share the
/// representation and centering flag; every populated cell must cover every
/// genre seen in the input.
pub fn aggregate_matrix(results: &[BootstrapResult]) -> Result<ResultMatrix> {
    let first = results.first().ok_or(Error::EmptyInput("no bootstrap results"))?;
    let (representation, centralized) = (first.spec.representation, first.spec.centralized);
    if results
        .iter()
        .any(|r| r.spec.representation != representation || r.spec.centralized != centralized)
    {
        return Err(Error::Config("results mix representations or centering modes".into()));
    }
    let all_genres: BTreeSet<&Genre> = results.iter().map(|r| &r.spec.genre).collect();
    let mut by_pair: BTreeMap<(&VariantTag, &VariantTag), BTreeMap<&Genre, f64>> = BTreeMap::new();
    for r in results {
        let cell = by_pair
            .entry((&r.spec.train_language, &r.spec.test_language))
            .or_default();
        if cell.insert(&r.spec.genre, r.mean).is_some() {
            return Err(Error::Config(format!("duplicate result for {}", r.spec.describe())));
        }
    }
    let order = ordered_tags(
        results
            .iter()
            .flat_map(|r| [&r.spec.train_language, &r.spec.test_language]),
    );
    let used = |pick: fn(&RunSpec) -> &VariantTag| -> Vec<VariantTag> {
        let present: BTreeSet<&VariantTag> = results.iter().map(|r| pick(&r.spec)).collect();
        order.iter().filter(|t| present.contains(t)).cloned().collect()
    };
    let rows = used(|s| &s.train_language);
    let cols = used(|s| &s.test_language);
    let mut cells = vec![vec![None; cols.len()]; rows.len()];
    for ((train, test), genre_means) in &by_pair {
        if genre_means.len() < all_genres.len() {
            return Err(Error::IncompleteCell {
                train: train.to_string(),
                test: test.to_string(),
                missing: all_genres
                    .iter()
                    .filter(|g| !genre_means.contains_key(*g))
                    .map(|g| g.to_string())
                    .collect(),
            });
        }
        let means: Vec<f64> = genre_means.values().copied().collect();
        let (mean, std) = mean_and_std(&means);
        let r = rows.iter().position(|t| t == *train).expect("row tag");
        let c = cols.iter().position(|t| t == *test).expect("col tag");
        cells[r][c] = Some(MatrixCell {
            mean,
            std,
            genres: means.len(),
        });
    }
    Ok(ResultMatrix {
        representation,
        centralized,
        rows,
        cols,
        cells,
    })
}

/// One matrix per (representation, centralized) group, embedding first,
/// uncentralized before centralized.
pub fn aggregate_all(results: &[BootstrapResult]) -> Result<Vec<ResultMatrix>> {
    let mut groups: BTreeMap<(Representation, bool), Vec<BootstrapResult>> = BTreeMap::new();
    for r in results {
        groups
            .entry((r.spec.representation, r.spec.centralized))
            .or_default()
            .push(r.clone());
    }
    groups.values().map(|g| aggregate_matrix(g)).collect()
}

pub fn render_report(matrix: &ResultMatrix, format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Markdown => {
            let _ = writeln!(out, "F1-score (μ ± 2σ), {}\n", matrix.title());
            out.push_str("| train \\ test |");
            for c in &matrix.cols {
                let _ = write!(out, " {c} |");
            }
            out.push_str("\n|---|");
            out.push_str(&"---|".repeat(matrix.cols.len()));
            out.push('\n');
            for (r, row) in matrix.rows.iter().zip(&matrix.cells) {
                let _ = write!(out, "| {r} |");
                for cell in row {
                    match cell {
                        Some(c) => {
                            let _ = write!(out, " {:.2} ± {:.2} |", c.mean, c.two_sigma());
                        }
                        None => out.push_str(" - |"),
                    }
                }
                out.push('\n');
            }
        }
        ReportFormat::Csv => {
            out.push_str("train_language,test_language,mean,two_sigma\n");
            for (r, row) in matrix.rows.iter().zip(&matrix.cells) {
                for (c, cell) in matrix.cols.iter().zip(row) {
                    if let Some(cell) = cell {
                        let _ = writeln!(out, "{r},{c},{:.2},{:.2}", cell.mean, cell.two_sigma());
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub train_language: VariantTag,
    pub test_language: VariantTag,
    pub mean: f64,
    pub two_sigma: f64,
}

pub fn parse_report_csv(text: &str) -> Result<Vec<ReportRow>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct ResultRow {
    genre: Genre,
    train_language: VariantTag,
    test_language: VariantTag,
    representation: Representation,
    centralized: bool,
    repeat: usize,
    f1: f64,
}

#[derive(Debug, Serialize)]
struct AggregatedRow<'a> {
    genre: &'a Genre,
    train_language: &'a VariantTag,
    test_language: &'a VariantTag,
    representation: Representation,
    centralized: bool,
    repeats: usize,
    mean: f64,
    std: f64,
}

/// One row per repeat, in result order.
pub fn write_results_csv<W: Write>(out: W, results: &[BootstrapResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        for (repeat, &f1) in r.f1_values.iter().enumerate() {
            w.serialize(ResultRow {
                genre: r.spec.genre.clone(),
                train_language: r.spec.train_language.clone(),
                test_language: r.spec.test_language.clone(),
                representation: r.spec.representation,
                centralized: r.spec.centralized,
                repeat,
                f1,
            })?;
        }
    }
    w.flush().map_err(|e| Error::io("<results csv>", e))
}

/// One row per run with its repeat count, mean and sample std.
pub fn write_aggregated_csv<W: Write>(out: W, results: &[BootstrapResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        w.serialize(AggregatedRow {
            genre: &r.spec.genre,
            train_language: &r.spec.train_language,
            test_language: &r.spec.test_language,
            representation: r.spec.representation,
            centralized: r.spec.centralized,
            repeats: r.f1_values.len(),
            mean: r.mean,
            std: r.std,
        })?;
    }
    w.flush().map_err(|e| Error::io("<aggregated csv>", e))
}

/// Regroups a per-repeat results file. Specs come back in first-appearance
/// order; seed and centering source are not stored and take defaults.
pub fn read_results_csv<R: Read>(input: R) -> Result<Vec<BootstrapResult>> {
    type Key = (Genre, VariantTag, VariantTag, Representation, bool);
    let mut order: Vec<Key> = Vec::new();
    let mut values: HashMap<Key, Vec<(usize, f64)>> = HashMap::new();
    for row in csv::Reader::from_reader(input).deserialize() {
        let row: ResultRow = row?;
        let key = (
            row.genre,
            row.train_language,
            row.test_language,
            row.representation,
            row.centralized,
        );
        let entry = values.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            Vec::new()
        });
        entry.push((row.repeat, row.f1));
    }
    order
        .into_iter()
        .map(|key| {
            let mut v = values.remove(&key).expect("grouped key");
            v.sort_by_key(|&(repeat, _)| repeat);
            let (genre, train, test, representation, centralized) = key;
            let mut spec = RunSpec::new(genre, train, test, representation);
            spec.centralized = centralized;
            spec.repeats = v.len();
            spec.test_centering_source = TestCenteringSource::FullCorpus;
            Ok(BootstrapResult::from_values(
                spec,
                v.into_iter().map(|(_, f)| f).collect(),
            ))
        })
        .collect()
}
