use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::FeatureRow;
use super::solver::solve_dual;
use super::{model_from, TrainConfig};
use crate::error::{Error, Result};
use crate::metrics::f1;
use crate::seed::rng_from;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvEntry {
    pub c: f64,
    pub fold_f1: Vec<f64>,
    pub mean_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    /// Ascending in C.
    pub per_c: Vec<CvEntry>,
    pub chosen_c: f64,
}

/// Fold index for every example. Each class is shuffled separately and dealt
/// round-robin, so every fold receives both classes.
pub fn stratified_folds(labels: &[bool], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {folds}")));
    }
    let mut rng = rng_from(seed, "stratified-folds");
    let mut assignment = vec![0; labels.len()];
    for class in [true, false] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < folds {
            return Err(Error::Stratification {
                class_size: members.len(),
                folds,
            });
        }
        members.shuffle(&mut rng);
        for (k, i) in members.into_iter().enumerate() {
            assignment[i] = k % folds;
        }
    }
    Ok(assignment)
}

/// Stratified k-fold search over `config.c_grid`. The chosen C has the best
/// mean validation f1; ties go to the smaller C.
pub fn cv_select_c<R: FeatureRow>(rows: &[R], labels: &[bool], config: &TrainConfig) -> Result<CvReport> {
    config.validate()?;
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch(rows.len(), labels.len()));
    }
    let assignment = stratified_folds(labels, config.folds, config.seed)?;
    let mut grid = config.c_grid.clone();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|ci| (0..config.folds).map(move |fold| (ci, fold)))
        .collect();
    let scores: Vec<f64> = jobs
        .par_iter()
        .map(|&(ci, fold)| {
            let (mut train_rows, mut train_labels, mut held_rows, mut held_labels) =
                (Vec::new(), Vec::new(), Vec::new(), Vec::new());
            for (i, row) in rows.iter().enumerate() {
                if assignment[i] == fold {
                    held_rows.push(row);
                    held_labels.push(labels[i]);
                } else {
                    train_rows.push(row);
                    train_labels.push(labels[i]);
                }
            }
            let solution = solve_dual(&train_rows, &train_labels, grid[ci], config)?;
            let model = model_from(solution, grid[ci], config);
            f1(&held_labels, &model.predict_all(&held_rows)?)
        })
        .collect::<Result<_>>()?;

    let per_c: Vec<CvEntry> = grid
        .iter()
        .enumerate()
        .map(|(ci, &c)| {
            let fold_f1 = scores[ci * config.folds..(ci + 1) * config.folds].to_vec();
            let mean_f1 = fold_f1.iter().sum::<f64>() / fold_f1.len() as f64;
            CvEntry { c, fold_f1, mean_f1 }
        })
        .collect();
    let mut best = &per_c[0];
    for entry in &per_c[1..] {
        if entry.mean_f1 > best.mean_f1 {
            best = entry;
        }
    }
    Ok(CvReport {
        chosen_c: best.c,
        per_c,
    })
}
