//! Oracles and fixtures shared by the integration suites. Each oracle is an
//! independent, deliberately naive computation of something the library does.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use lyricgenre::corpus::{CorpusVariant, Genre, LyricRecord, VariantTag};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Confusion counts by walking every (truth, prediction) pair.
pub fn brute_f1(truth: &[bool], pred: &[bool]) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for i in 0..truth.len() {
        match (truth[i], pred[i]) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        (2 * tp) as f64 / denom as f64
    }
}

/// Result of solving the SVM dual by projected gradient.
pub struct OracleSolution {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub primal: f64,
}

/// Primal `½(‖w‖² + b²) + C Σ max(0, 1 − y(w·x + b))`, written out longhand.
pub fn primal(rows: &[Vec<f64>], labels: &[bool], w: &[f64], b: f64, c: f64) -> f64 {
    let mut reg = b * b;
    for v in w {
        reg += v * v;
    }
    let mut loss = 0.0;
    for (x, &l) in rows.iter().zip(labels) {
        let y = if l { 1.0 } else { -1.0 };
        let mut s = b;
        for j in 0..x.len() {
            s += w[j] * x[j];
        }
        loss += f64::max(0.0, 1.0 - y * s);
    }
    0.5 * reg + c * loss
}

/// Accelerated projected gradient on the box-constrained dual
/// `min ½ αᵀQα − 1ᵀα, 0 ≤ α ≤ C`, with `Q` built explicitly.
pub fn svm_oracle(rows: &[Vec<f64>], labels: &[bool], c: f64, bias: bool, iterations: usize) -> OracleSolution {
    let n = rows.len();
    let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let kernel = |i: usize, j: usize| {
        let dot: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
        y[i] * y[j] * (dot + if bias { 1.0 } else { 0.0 })
    };
    let q: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| kernel(i, j)).collect()).collect();
    // Gershgorin bound on the largest eigenvalue
    let lipschitz = q
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(1e-12, f64::max);
    let step = 1.0 / lipschitz;
    let mut alpha = vec![0.0; n];
    let mut z = alpha.clone();
    let mut t = 1.0f64;
    for _ in 0..iterations {
        let grad: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| q[i][j] * z[j]).sum::<f64>() - 1.0)
            .collect();
        let next: Vec<f64> = (0..n).map(|i| (z[i] - step * grad[i]).clamp(0.0, c)).collect();
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        z = (0..n)
            .map(|i| (next[i] + (t - 1.0) / t_next * (next[i] - alpha[i])).clamp(0.0, c))
            .collect();
        alpha = next;
        t = t_next;
    }
    let d = rows.first().map_or(0, Vec::len);
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    for i in 0..n {
        for j in 0..d {
            w[j] += alpha[i] * y[i] * rows[i][j];
        }
        if bias {
            b += alpha[i] * y[i];
        }
    }
    let p = primal(rows, labels, &w, b, c);
    OracleSolution {
        weights: w,
        bias: b,
        primal: p,
    }
}

/// Smoothed-idf TF-IDF with L2 rows, built as a dense matrix over an
/// explicit, already-filtered vocabulary.
pub fn dense_tfidf(docs: &[Vec<String>], vocabulary: &[String]) -> Vec<Vec<f64>> {
    let n = docs.len() as f64;
    let idf: Vec<f64> = vocabulary
        .iter()
        .map(|term| {
            let df = docs.iter().filter(|d| d.contains(term)).count() as f64;
            ((1.0 + n) / (1.0 + df)).ln() + 1.0
        })
        .collect();
    docs.iter()
        .map(|doc| {
            let mut row: Vec<f64> = vocabulary
                .iter()
                .zip(&idf)
                .map(|(term, idf)| doc.iter().filter(|t| *t == term).count() as f64 * idf)
                .collect();
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for v in &mut row {
                    *v /= norm;
                }
            }
            row
        })
        .collect()
}

/// Standard normal by Box-Muller.
pub fn gaussian(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Bilingual synthetic corpus for the centering experiment.
pub struct Synthetic {
    pub records: Vec<LyricRecord>,
    pub embeddings: HashMap<String, Vec<f64>>,
    pub dimension: usize,
}

/// Two genres per language with class signal `±w` (`‖w‖ = 1`, spread evenly
/// over all coordinates), isotropic Gaussian noise of per-coordinate std
/// `noise_per_coord`, and the second language shifted by `offset · w`.
pub fn synthetic_bilingual(
    per_side: usize,
    dimension: usize,
    noise_per_coord: f64,
    offset: f64,
    seed: u64,
) -> Synthetic {
    let mut r = rng(seed);
    let w: Vec<f64> = (0..dimension)
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } / (dimension as f64).sqrt())
        .collect();
    let mut records = Vec::new();
    let mut embeddings = HashMap::new();
    for (lang, shift) in [("pt", 0.0), ("en", offset)] {
        for i in 0..per_side {
            let first = i % 2 == 0;
            let genre = if first { "Alpha" } else { "Beta" };
            let sign = if first { 1.0 } else { -1.0 };
            let id = format!("{lang}-{i}");
            let v: Vec<f64> = w
                .iter()
                .map(|wi| (sign + shift) * wi + noise_per_coord * gaussian(&mut r))
                .collect();
            records.push(
                LyricRecord::new(&id, format!("song {i}"), lang, Genre::new(genre))
                    .unwrap()
                    .with_source(id.clone(), CorpusVariant::Native),
            );
            embeddings.insert(id, v);
        }
    }
    Synthetic {
        records,
        embeddings,
        dimension,
    }
}

pub fn tag(s: &str) -> VariantTag {
    s.parse().unwrap()
}

/// Corpus with a native PT side and a PT←EN side sharing source ids with EN.
pub fn translated_fixture(n: usize, dim: usize, seed: u64) -> (Vec<LyricRecord>, HashMap<String, Vec<f64>>) {
    let mut r = rng(seed);
    let mut records = Vec::new();
    let mut emb = HashMap::new();
    let variants = [
        ("pt", CorpusVariant::Native, "pt"),
        ("en", CorpusVariant::Native, "en"),
        ("pt", CorpusVariant::TranslatedFrom("en".into()), "pten"),
    ];
    for (lang, variant, prefix) in variants {
        for i in 0..n {
            let g = if i % 3 == 0 { "Rock" } else { "Samba" };
            let source = if prefix == "pten" {
                format!("en-{i}")
            } else {
                format!("{prefix}-{i}")
            };
            let id = format!("{prefix}-{i}");
            let sign = if i % 3 == 0 { 0.4 } else { -0.4 };
            let v: Vec<f64> = (0..dim)
                .map(|k| if k == 0 { sign } else { 0.0 } + r.gen_range(-0.3..0.3))
                .collect();
            emb.insert(id.clone(), v);
            records.push(
                LyricRecord::new(&id, format!("words {i}"), lang, Genre::new(g))
                    .unwrap()
                    .with_source(source, variant.clone()),
            );
        }
    }
    (records, emb)
}

pub fn count_by<T: Ord + Clone>(items: &[T]) -> BTreeMap<T, usize> {
    let mut m = BTreeMap::new();
    for i in items {
        *m.entry(i.clone()).or_default() += 1;
    }
    m
}

pub fn set<T: Ord + Clone>(items: &[T]) -> BTreeSet<T> {
    items.iter().cloned().collect()
}
