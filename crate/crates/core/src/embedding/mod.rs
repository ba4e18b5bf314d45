//! Song embeddings: sentence segmentation, pluggable sentence encoders, mean
//! pooling and per-set centralization.

mod file;
mod provider;
mod segment;

pub use file::{
    load_embedding_file, read_embeddings, save_embedding_file, write_embeddings, EmbeddingTable, MAGIC, VERSION,
};
pub use provider::{
    embed_corpus, embed_song, open_encoder, EmbeddedCorpus, EmbeddingProvider, ExternProvider, MockProvider,
    PooledEncoder, PrecomputedEncoder, ProviderSpec, SongEncoder, DEFAULT_DIMENSION,
};
pub use segment::{segment, segment_with, SegmentConfig, SentenceChunk, TokenCounter, DEFAULT_TOKEN_BUDGET};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SongEmbedding {
    pub record_id: String,
    pub values: Vec<f32>,
    pub provider_tag: String,
}

impl SongEmbedding {
    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| f64::from(v)).collect()
    }
}

/// Component-wise mean of sentence vectors, accumulated in `f64`.
pub fn pool(vectors: &[Vec<f32>]) -> Result<Vec<f32>> {
    let first = vectors
        .first()
        .ok_or(Error::EmptyInput("no sentence embeddings to pool"))?;
    let dim = first.len();
    let mut sum = vec![0.0f64; dim];
    for v in vectors {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        for (s, &x) in sum.iter_mut().zip(v) {
            *s += f64::from(x);
        }
    }
    let n = vectors.len() as f64;
    Ok(sum.into_iter().map(|s| (s / n) as f32).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CentroidSource {
    TrainSet,
    TestCorpus,
}

/// A mean vector subtracted from every point of a set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidTransform {
    pub mean: Vec<f64>,
    pub source: CentroidSource,
}

impl CentroidTransform {
    pub fn fit(rows: &[Vec<f64>], source: CentroidSource) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyInput("cannot centre an empty set"))?;
        let mut mean = vec![0.0f64; first.len()];
        for row in rows {
            if row.len() != mean.len() {
                return Err(Error::DimensionMismatch {
                    expected: mean.len(),
                    got: row.len(),
                });
            }
            for (m, &x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        let n = rows.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        Ok(CentroidTransform { mean, source })
    }

    pub fn dimension(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                got: row.len(),
            });
        }
        Ok(row.iter().zip(&self.mean).map(|(x, m)| x - m).collect())
    }

    pub fn apply_all(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter().map(|r| self.apply(r)).collect()
    }
}

/// Centres rows on their own mean.
pub fn centralize_rows(rows: &[Vec<f64>], source: CentroidSource) -> Result<(Vec<Vec<f64>>, CentroidTransform)> {
    let transform = CentroidTransform::fit(rows, source)?;
    Ok((transform.apply_all(rows)?, transform))
}

/// Centres song embeddings on their own mean; the output rows are `f64`.
pub fn centralize(embeddings: &[SongEmbedding]) -> Result<(Vec<Vec<f64>>, CentroidTransform)> {
    let rows: Vec<Vec<f64>> = embeddings.iter().map(SongEmbedding::to_f64).collect();
    centralize_rows(&rows, CentroidSource::TrainSet)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emb(values: &[f32]) -> SongEmbedding {
        SongEmbedding {
            record_id: "x".into(),
            values: values.to_vec(),
            provider_tag: "t".into(),
        }
    }

    #[test]
    fn pool_is_the_arithmetic_mean() {
        let p = pool(&[vec![0.2, 0.4], vec![0.6, 0.0]]).unwrap();
        assert!((p[0] - 0.4).abs() < 1e-7 && (p[1] - 0.2).abs() < 1e-7, "{p:?}");
        assert_eq!(pool(&[vec![0.1, -0.7]]).unwrap(), vec![0.1, -0.7]);
    }

    #[test]
    fn pool_errors() {
        assert!(matches!(pool(&[]), Err(Error::EmptyInput(_))));
        assert!(matches!(
            pool(&[vec![1.0], vec![1.0, 2.0]]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn centralize_two_points() {
        let (centered, t) = centralize(&[emb(&[1.0, 1.0]), emb(&[3.0, 3.0])]).unwrap();
        assert_eq!(t.mean, vec![2.0, 2.0]);
        assert_eq!(centered, vec![vec![-1.0, -1.0], vec![1.0, 1.0]]);
    }

    #[test]
    fn single_vector_centres_to_zero() {
        let (centered, _) = centralize(&[emb(&[0.3, -0.9, 0.5])]).unwrap();
        assert!(centered[0].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn centroid_dimension_checked() {
        let t = CentroidTransform::fit(&[vec![1.0, 2.0]], CentroidSource::TestCorpus).unwrap();
        assert!(t.apply(&[1.0]).is_err());
        assert!(CentroidTransform::fit(&[], CentroidSource::TrainSet).is_err());
    }
}
