//! Linear SVM trained by dual coordinate descent, with stratified
//! cross-validated choice of C and one-vs-all orchestration.

mod cv;
mod features;
mod model;
mod solver;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cv::{cv_select_c, stratified_folds, CvEntry, CvReport};
pub use features::FeatureRow;
pub use model::{LinearModel, WeightLayout, MODEL_VERSION};
pub use solver::{primal_objective, solve_dual, DualSolution};

use crate::corpus::Genre;
use crate::error::{Error, Result};

pub const DEFAULT_C_GRID: [f64; 4] = [0.01, 0.1, 1.0, 10.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub c_grid: Vec<f64>,
    pub folds: usize,
    pub max_epochs: usize,
    /// Stop once the largest projected-gradient magnitude in an epoch falls below this.
    pub tolerance: f64,
    pub seed: u64,
    pub fit_bias: bool,
    #[serde(skip)]
    pub record_objective: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c_grid: DEFAULT_C_GRID.to_vec(),
            folds: 5,
            max_epochs: 1000,
            tolerance: 1e-5,
            seed: 0,
            fit_bias: true,
            record_objective: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c_grid.is_empty() || self.c_grid.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::Config(format!(
                "C grid must be non-empty and positive: {:?}",
                self.c_grid
            )));
        }
        if self.folds < 2 {
            return Err(Error::Config(format!("need at least 2 folds, got {}", self.folds)));
        }
        if self.max_epochs == 0 || !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::Config("max_epochs and tolerance must be positive".into()));
        }
        Ok(())
    }
}

pub(crate) fn model_from(solution: DualSolution, c: f64, config: &TrainConfig) -> LinearModel {
    LinearModel {
        weights: solution.weights,
        bias: solution.bias,
        c,
        genre: String::new(),
        representation_tag: String::new(),
        layout: WeightLayout::Dense,
        centroid: None,
        seed: config.seed,
    }
}

/// Trains one binary classifier; `labels[i]` is `true` for the positive class.
pub fn train_binary<R: FeatureRow>(rows: &[R], labels: &[bool], c: f64, config: &TrainConfig) -> Result<LinearModel> {
    let solution = solve_dual(rows, labels, c, config)?;
    Ok(model_from(solution, c, config))
}

/// Training data for one genre of a one-vs-all ensemble.
pub struct GenreTrainingSet<'a, R> {
    pub genre: Genre,
    pub rows: &'a [R],
    pub labels: &'a [bool],
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedGenre {
    pub model: LinearModel,
    pub cv: CvReport,
}

/// Cross-validates C for one genre, then refits on all of its rows.
pub fn train_genre<R: FeatureRow>(set: &GenreTrainingSet<'_, R>, config: &TrainConfig) -> Result<TrainedGenre> {
    let run = || -> Result<TrainedGenre> {
        let cv = cv_select_c(set.rows, set.labels, config)?;
        let mut model = train_binary(set.rows, set.labels, cv.chosen_c, config)?;
        model.genre = set.genre.to_string();
        Ok(TrainedGenre { model, cv })
    };
    run().map_err(|e| e.context(format!("genre `{}`", set.genre)))
}

/// Independent per-genre training; genres run concurrently.
pub fn train_one_vs_all<R: FeatureRow>(
    sets: &[GenreTrainingSet<'_, R>],
    config: &TrainConfig,
) -> Result<BTreeMap<Genre, TrainedGenre>> {
    sets.par_iter()
        .map(|set| train_genre(set, config).map(|t| (set.genre.clone(), t)))
        .collect()
}
