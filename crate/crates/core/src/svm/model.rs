use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::FeatureRow;
use crate::embedding::CentroidTransform;
use crate::error::{Error, Result};

pub const MODEL_VERSION: u32 = 1;

/// How weights are written to disk. Embedding models are dense; bag-of-words
/// models store only nonzero weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WeightLayout {
    #[default]
    Dense,
    Sparse,
}

/// A trained one-vs-all classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub genre: String,
    pub representation_tag: String,
    pub layout: WeightLayout,
    /// Mean subtracted from training rows, when the model was trained centred.
    pub centroid: Option<CentroidTransform>,
    pub seed: u64,
}

impl LinearModel {
    pub fn dimension(&self) -> usize {
        self.weights.len()
    }

    pub fn decision<R: FeatureRow + ?Sized>(&self, x: &R) -> Result<f64> {
        if x.dimension() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                got: x.dimension(),
            });
        }
        Ok(x.dot(&self.weights) + self.bias)
    }

    /// `true` for the positive class; a zero decision counts as positive.
    pub fn predict<R: FeatureRow + ?Sized>(&self, x: &R) -> Result<bool> {
        Ok(self.decision(x)? >= 0.0)
    }

    pub fn predict_all<R: FeatureRow>(&self, rows: &[R]) -> Result<Vec<bool>> {
        rows.iter().map(|r| self.predict(r)).collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&ModelFile::from(self))?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ModelFile =
            serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        file.try_into()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "layout", rename_all = "lowercase")]
enum StoredWeights {
    Dense { values: Vec<f64> },
    Sparse { indices: Vec<usize>, values: Vec<f64> },
}

/// On-disk model document. Floats use the shortest decimal that reads back
/// to the identical `f64`.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    genre: String,
    representation_tag: String,
    dimension: usize,
    c: f64,
    bias: f64,
    weights: StoredWeights,
    centroid: Option<CentroidTransform>,
    seed: u64,
}

impl From<&LinearModel> for ModelFile {
    fn from(m: &LinearModel) -> Self {
        let weights = match m.layout {
            WeightLayout::Dense => StoredWeights::Dense {
                values: m.weights.clone(),
            },
            WeightLayout::Sparse => {
                let (indices, values) = m
                    .weights
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| **w != 0.0)
                    .map(|(i, w)| (i, *w))
                    .unzip();
                StoredWeights::Sparse { indices, values }
            }
        };
        ModelFile {
            version: MODEL_VERSION,
            genre: m.genre.clone(),
            representation_tag: m.representation_tag.clone(),
            dimension: m.weights.len(),
            c: m.c,
            bias: m.bias,
            weights,
            centroid: m.centroid.clone(),
            seed: m.seed,
        }
    }
}

impl TryFrom<ModelFile> for LinearModel {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        if f.version != MODEL_VERSION {
            return Err(Error::Format(format!("unsupported model version {}", f.version)));
        }
        let (weights, layout) = match f.weights {
            StoredWeights::Dense { values } => {
                if values.len() != f.dimension {
                    return Err(Error::DimensionMismatch {
                        expected: f.dimension,
                        got: values.len(),
                    });
                }
                (values, WeightLayout::Dense)
            }
            StoredWeights::Sparse { indices, values } => {
                if indices.len() != values.len() {
                    return Err(Error::Format("sparse weights: index/value count mismatch".into()));
                }
                let mut dense = vec![0.0; f.dimension];
                for (&i, &v) in indices.iter().zip(&values) {
                    *dense
                        .get_mut(i)
                        .ok_or_else(|| Error::Format(format!("sparse weight index {i} out of range")))? = v;
                }
                (dense, WeightLayout::Sparse)
            }
        };
        if let Some(c) = &f.centroid {
            if c.dimension() != f.dimension {
                return Err(Error::DimensionMismatch {
                    expected: f.dimension,
                    got: c.dimension(),
                });
            }
        }
        Ok(LinearModel {
            weights,
            bias: f.bias,
            c: f.c,
            genre: f.genre,
            representation_tag: f.representation_tag,
            layout,
            centroid: f.centroid,
            seed: f.seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::CentroidSource;

    fn model(weights: Vec<f64>, bias: f64) -> LinearModel {
        LinearModel {
            weights,
            bias,
            c: 0.1,
            genre: "Rock".into(),
            representation_tag: "mock:1".into(),
            layout: WeightLayout::Dense,
            centroid: None,
            seed: 3,
        }
    }

    #[test]
    fn decision_and_sign_rule() {
        let m = model(vec![1.0, 0.0], 0.0);
        assert_eq!(m.decision(&[2.0, 5.0][..]).unwrap(), 2.0);
        assert!(m.predict(&[2.0, 5.0][..]).unwrap());
        assert!(m.predict(&[0.0, 7.0][..]).unwrap());
        assert!(!m.predict(&[-0.5, 7.0][..]).unwrap());
        assert!(matches!(m.decision(&[1.0][..]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn files_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let mut dense = model(vec![0.1 + 0.2, -1.0 / 3.0, 1e-300, 0.0], std::f64::consts::PI);
        dense.centroid = Some(CentroidTransform {
            mean: vec![0.7, -0.3, 1.0 / 7.0, 2.0],
            source: CentroidSource::TrainSet,
        });
        let mut sparse = model(vec![0.0, 2.5e-17, 0.0, -9.75], -0.125);
        sparse.layout = WeightLayout::Sparse;
        for (i, m) in [dense, sparse].into_iter().enumerate() {
            let path = dir.path().join(format!("m{i}.json"));
            m.save(&path).unwrap();
            let back = LinearModel::load(&path).unwrap();
            assert_eq!(back, m);
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&back.weights), bits(&m.weights));
        }
        let text = std::fs::read_to_string(dir.path().join("m1.json")).unwrap();
        assert!(text.contains("\"sparse\""));
    }
}
