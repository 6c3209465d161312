//! Multinomial logistic regression trained by full-batch gradient descent
//! with classical momentum.
//!
//! Parameters start at zero, so training is fully deterministic: no RNG, no
//! shuffling, one gradient per epoch over the whole table. Weights (not
//! biases) carry a small L2 penalty, and training stops early once the full
//! gradient norm drops below the configured tolerance.

use super::{argmax3, softmax3, training_views, Prediction, TrainConfig};
use crate::error::Result;
use crate::features::FeatureVector;
use crate::signal::MoveLabel;

/// Linear softmax classifier: one weight row and bias per class, in class
/// order (TurnRight, TurnLeft, Waggle).
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: [[f64; 2]; 3],
    pub bias: [f64; 3],
}

impl LogisticModel {
    /// Class probabilities for a feature vector.
    pub fn probabilities(&self, f: FeatureVector) -> [f64; 3] {
        let x = [f.x1, f.x2];
        let mut z = [0.0; 3];
        for c in 0..3 {
            z[c] = self.weights[c][0] * x[0] + self.weights[c][1] * x[1] + self.bias[c];
        }
        softmax3(z)
    }

    pub fn predict(&self, f: FeatureVector) -> Prediction {
        let scores = self.probabilities(f);
        Prediction {
            label: MoveLabel::from_class_index(argmax3(&scores)).expect("argmax is in 0..3"),
            scores,
        }
    }
}

/// Mean cross-entropy over the samples plus `lambda/2 * |W|^2` (biases
/// excluded from the penalty).
pub fn loss(
    weights: &[[f64; 2]; 3],
    bias: &[f64; 3],
    xs: &[[f64; 2]],
    ys: &[usize],
    lambda: f64,
) -> f64 {
    let n = xs.len() as f64;
    let mut total = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let mut z = [0.0; 3];
        for c in 0..3 {
            z[c] = weights[c][0] * x[0] + weights[c][1] * x[1] + bias[c];
        }
        let p = softmax3(z);
        total -= p[y].ln();
    }
    let mut sq = 0.0;
    for row in weights {
        for &w in row {
            sq += w * w;
        }
    }
    total / n + 0.5 * lambda * sq
}

/// Gradient of [`loss`] with respect to weights and biases.
pub fn gradient(
    weights: &[[f64; 2]; 3],
    bias: &[f64; 3],
    xs: &[[f64; 2]],
    ys: &[usize],
    lambda: f64,
) -> ([[f64; 2]; 3], [f64; 3]) {
    let n = xs.len() as f64;
    let mut gw = [[0.0; 2]; 3];
    let mut gb = [0.0; 3];
    for (x, &y) in xs.iter().zip(ys) {
        let mut z = [0.0; 3];
        for c in 0..3 {
            z[c] = weights[c][0] * x[0] + weights[c][1] * x[1] + bias[c];
        }
        let p = softmax3(z);
        for c in 0..3 {
            let d = (p[c] - if c == y { 1.0 } else { 0.0 }) / n;
            gw[c][0] += d * x[0];
            gw[c][1] += d * x[1];
            gb[c] += d;
        }
    }
    for c in 0..3 {
        gw[c][0] += lambda * weights[c][0];
        gw[c][1] += lambda * weights[c][1];
    }
    (gw, gb)
}

/// Trains a logistic model on raw (unstandardized) features.
pub fn train_logistic(table: &crate::features::FeatureTable, cfg: &TrainConfig) -> Result<LogisticModel> {
    train_logistic_traced(table, cfg).map(|(model, _)| model)
}

/// Like [`train_logistic`], but also returns the loss measured at the start
/// of every executed epoch (useful for convergence diagnostics).
pub fn train_logistic_traced(
    table: &crate::features::FeatureTable,
    cfg: &TrainConfig,
) -> Result<(LogisticModel, Vec<f64>)> {
    let (xs, ys) = training_views(table)?;
    let p = cfg.logistic;

    let mut weights = [[0.0; 2]; 3];
    let mut bias = [0.0; 3];
    let mut vw = [[0.0; 2]; 3];
    let mut vb = [0.0; 3];
    let mut trace = Vec::new();

    for _ in 0..p.epochs {
        let (gw, gb) = gradient(&weights, &bias, &xs, &ys, p.l2_lambda);
        let mut norm_sq = 0.0;
        for c in 0..3 {
            norm_sq += gw[c][0] * gw[c][0] + gw[c][1] * gw[c][1] + gb[c] * gb[c];
        }
        if norm_sq.sqrt() < p.grad_tolerance {
            break;
        }
        trace.push(loss(&weights, &bias, &xs, &ys, p.l2_lambda));
        for c in 0..3 {
            for k in 0..2 {
                vw[c][k] = p.momentum * vw[c][k] - p.learning_rate * gw[c][k];
                weights[c][k] += vw[c][k];
            }
            vb[c] = p.momentum * vb[c] - p.learning_rate * gb[c];
            bias[c] += vb[c];
        }
    }

    Ok((LogisticModel { weights, bias }, trace))
}
