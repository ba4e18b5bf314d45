//! Dual coordinate descent for the L2-regularized, L1-loss (hinge) linear SVM
//!
//! ```text
//! min_w  ½‖w‖² + C Σᵢ max(0, 1 − yᵢ w·xᵢ)
//! ```
//!
//! solved through its box-constrained dual `max_α Σα − ½‖Σ αᵢyᵢxᵢ‖²`,
//! `0 ≤ αᵢ ≤ C`. The bias is an extra constant feature, so it is regularized
//! together with `w`.

use rand::seq::SliceRandom;

use super::features::FeatureRow;
use super::TrainConfig;
use crate::error::{Error, Result};
use crate::seed::rng_from;

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub alphas: Vec<f64>,
    pub epochs: usize,
    pub converged: bool,
    /// Largest projected-gradient magnitude seen in the final epoch.
    pub max_violation: f64,
    /// Primal objective after each epoch, when requested.
    pub primal_trace: Vec<f64>,
    /// Dual objective after each epoch, when requested.
    pub dual_trace: Vec<f64>,
}

pub(crate) fn check_inputs<R: FeatureRow>(rows: &[R], labels: &[bool]) -> Result<usize> {
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch(rows.len(), labels.len()));
    }
    let first = rows.first().ok_or(Error::EmptyInput("no training rows"))?;
    let dim = first.dimension();
    for (i, row) in rows.iter().enumerate() {
        if row.dimension() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: row.dimension(),
            });
        }
        if !row.all_finite() {
            return Err(Error::NonFinite(i));
        }
    }
    if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        return Err(Error::DegenerateLabels);
    }
    Ok(dim)
}

fn sign(label: bool) -> f64 {
    if label {
        1.0
    } else {
        -1.0
    }
}

/// `½(‖w‖² + b²) + C Σ hinge`, with `b` taken as zero when no bias is fitted.
pub fn primal_objective<R: FeatureRow>(rows: &[R], labels: &[bool], weights: &[f64], bias: f64, c: f64) -> f64 {
    let reg = 0.5 * (weights.iter().map(|w| w * w).sum::<f64>() + bias * bias);
    let loss: f64 = rows
        .iter()
        .zip(labels)
        .map(|(x, &y)| (1.0 - sign(y) * (x.dot(weights) + bias)).max(0.0))
        .sum();
    reg + c * loss
}

fn dual_objective(alphas: &[f64], weights: &[f64], bias: f64) -> f64 {
    alphas.iter().sum::<f64>() - 0.5 * (weights.iter().map(|w| w * w).sum::<f64>() + bias * bias)
}

pub fn solve_dual<R: FeatureRow>(rows: &[R], labels: &[bool], c: f64, config: &TrainConfig) -> Result<DualSolution> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::Config(format!("C must be positive, got {c}")));
    }
    let dim = check_inputs(rows, labels)?;
    let n = rows.len();
    let bias_feature = if config.fit_bias { 1.0 } else { 0.0 };
    let y: Vec<f64> = labels.iter().map(|&l| sign(l)).collect();
    let diag: Vec<f64> = rows
        .iter()
        .map(|x| x.squared_norm() + bias_feature * bias_feature)
        .collect();

    let mut alphas = vec![0.0; n];
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng_from(config.seed, "svm-coordinate-order");

    let mut solution = DualSolution {
        weights: Vec::new(),
        bias: 0.0,
        alphas: Vec::new(),
        epochs: 0,
        converged: false,
        max_violation: f64::INFINITY,
        primal_trace: Vec::new(),
        dual_trace: Vec::new(),
    };

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut max_violation = 0.0f64;
        for &i in &order {
            let g = y[i] * (rows[i].dot(&w) + b * bias_feature) - 1.0;
            let a = alphas[i];
            let projected = if a <= 0.0 {
                g.min(0.0)
            } else if a >= c {
                g.max(0.0)
            } else {
                g
            };
            max_violation = max_violation.max(projected.abs());
            if projected == 0.0 {
                continue;
            }
            let updated = if diag[i] > 0.0 {
                (a - g / diag[i]).clamp(0.0, c)
            } else {
                // zero row: the dual is linear in this coordinate
                if g < 0.0 {
                    c
                } else {
                    0.0
                }
            };
            let step = (updated - a) * y[i];
            if step != 0.0 {
                alphas[i] = updated;
                rows[i].add_scaled(step, &mut w);
                b += step * bias_feature;
            }
        }
        solution.epochs = epoch;
        solution.max_violation = max_violation;
        if config.record_objective {
            solution.primal_trace.push(primal_objective(rows, labels, &w, b, c));
            solution.dual_trace.push(dual_objective(&alphas, &w, b));
        }
        if max_violation < config.tolerance {
            solution.converged = true;
            break;
        }
    }
    if !solution.converged {
        log::warn!(
            "dual coordinate descent stopped after {} epochs with violation {:.3e}",
            solution.epochs,
            solution.max_violation
        );
    }
    solution.weights = w;
    solution.bias = b;
    solution.alphas = alphas;
    Ok(solution)
}
