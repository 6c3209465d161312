//! One-vs-one support vector machines with an RBF kernel, fit by a
//! simplified sequential minimal optimization (SMO) loop.
//!
//! For every ordered pair of classes present in the table (ascending label
//! code, first class of the pair on the +1 side) a binary soft-margin SVM is
//! solved in the dual. The working-pair heuristic is deterministic: the first
//! index comes from a linear scan for KKT violators, the second maximizes
//! |E_i - E_j| with ties to the lowest index, falling back to an ascending
//! scan — so training is reproducible without any RNG.
//!
//! Expects standardized features — the [`train`](super::train) dispatcher
//! fits and bundles the standardizer automatically.

use super::{Prediction, SvmParams, TrainConfig};
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::signal::MoveLabel;

/// Gaussian kernel `exp(-gamma * |a - b|^2)`.
pub fn rbf_kernel(gamma: f64, a: [f64; 2], b: [f64; 2]) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    (-gamma * (d0 * d0 + d1 * d1)).exp()
}

/// Raw dual solution for one binary problem: one multiplier per training
/// point (zeros included) and the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
}

/// One trained binary separator. `decision > 0` votes for `positive`.
/// `vectors`/`coeffs` hold only the support vectors (alpha above a pruning
/// threshold); `coeffs[k]` is `alpha_k * y_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairClassifier {
    pub positive: MoveLabel,
    pub negative: MoveLabel,
    pub vectors: Vec<[f64; 2]>,
    pub coeffs: Vec<f64>,
    pub bias: f64,
}

impl PairClassifier {
    pub fn decision(&self, gamma: f64, x: [f64; 2]) -> f64 {
        let mut d = self.bias;
        for (v, c) in self.vectors.iter().zip(&self.coeffs) {
            d += c * rbf_kernel(gamma, *v, x);
        }
        d
    }
}

/// The full one-vs-one ensemble (three pairs when all three moves appear in
/// training).
#[derive(Debug, Clone, PartialEq)]
pub struct SvmRbfModel {
    pub gamma: f64,
    pub pairs: Vec<PairClassifier>,
}

impl SvmRbfModel {
    /// Signed decision value of every pair, in pair order.
    pub fn decision_values(&self, f: FeatureVector) -> Vec<f64> {
        self.pairs
            .iter()
            .map(|p| p.decision(self.gamma, [f.x1, f.x2]))
            .collect()
    }

    /// Majority vote over the pairs. Scores are per-class vote counts; vote
    /// ties resolve by the summed signed decision values of the tied classes,
    /// and exact ties there fall to the lowest label code.
    pub fn predict(&self, f: FeatureVector) -> Prediction {
        let x = [f.x1, f.x2];
        let mut votes = [0.0f64; 3];
        let mut sums = [0.0f64; 3];
        for pair in &self.pairs {
            let d = pair.decision(self.gamma, x);
            let p = pair.positive.class_index();
            let n = pair.negative.class_index();
            if d > 0.0 {
                votes[p] += 1.0;
            } else {
                votes[n] += 1.0;
            }
            sums[p] += d;
            sums[n] -= d;
        }
        let top = votes[0].max(votes[1]).max(votes[2]);
        let mut best = 3;
        for c in 0..3 {
            if votes[c] < top {
                continue;
            }
            if best == 3 || sums[c] > sums[best] {
                best = c;
            }
        }
        Prediction {
            label: MoveLabel::from_class_index(best).expect("some class always has the top vote"),
            scores: votes,
        }
    }
}

/// Progress floor: a candidate step smaller than this is treated as no
/// progress, as in the classic simplified SMO.
const MIN_ALPHA_STEP: f64 = 1e-5;
/// Support vectors with multipliers at or below this are pruned from the
/// stored model.
const SV_PRUNE: f64 = 1e-12;
/// Absolute cap on optimization passes before declaring non-convergence.
const TOTAL_PASS_CAP: usize = 10_000;

/// Solves one binary soft-margin problem. `targets` must be +1/-1 with both
/// signs present; `pair` names the two classes for error reporting.
pub fn train_pair(
    points: &[[f64; 2]],
    targets: &[f64],
    params: &SvmParams,
    pair: (MoveLabel, MoveLabel),
) -> Result<PairSolution> {
    smo(points, targets, params, pair, TOTAL_PASS_CAP, |_, _| {})
}

/// The SMO loop, with an `on_update(alphas, bias)` hook fired after every
/// accepted step (used by tests to watch the dual objective).
pub(crate) fn smo(
    points: &[[f64; 2]],
    targets: &[f64],
    params: &SvmParams,
    pair: (MoveLabel, MoveLabel),
    total_pass_cap: usize,
    mut on_update: impl FnMut(&[f64], f64),
) -> Result<PairSolution> {
    if points.len() != targets.len() {
        return Err(Error::ShapeError {
            left: points.len(),
            right: targets.len(),
        });
    }
    let n = points.len();
    let mut has_pos = false;
    let mut has_neg = false;
    for (k, (&y, p)) in targets.iter().zip(points).enumerate() {
        if y != 1.0 && y != -1.0 {
            return Err(Error::InvalidInput(format!(
                "pair target at row {k} must be +1 or -1, got {y}"
            )));
        }
        if !(p[0].is_finite() && p[1].is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite point at row {k}"
            )));
        }
        has_pos |= y > 0.0;
        has_neg |= y < 0.0;
    }
    if !(has_pos && has_neg) {
        return Err(Error::DegenerateLabels);
    }

    // Dense kernel cache; the tables here are small (hundreds of rows).
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            gram[i * n + j] = rbf_kernel(params.gamma, points[i], points[j]);
        }
    }
    let k = |i: usize, j: usize| gram[i * n + j];

    let c = params.c;
    let tol = params.tolerance;
    let mut alphas = vec![0.0f64; n];
    let mut bias = 0.0f64;
    // f_vals[i] tracks the decision value at point i, updated incrementally
    // after every accepted step so error lookups stay O(1).
    let mut f_vals = vec![0.0f64; n];

    // Attempts a joint step on (i, j); returns true if the step was accepted.
    let take_step = |i: usize,
                         j: usize,
                         alphas: &mut Vec<f64>,
                         bias: &mut f64,
                         f_vals: &mut Vec<f64>|
     -> bool {
        if i == j {
            return false;
        }
        let (yi, yj) = (targets[i], targets[j]);
        let (ai_old, aj_old) = (alphas[i], alphas[j]);
        let e_i = f_vals[i] - yi;
        let e_j = f_vals[j] - yj;

        let (lo, hi) = if yi != yj {
            ((aj_old - ai_old).max(0.0), (c + aj_old - ai_old).min(c))
        } else {
            ((ai_old + aj_old - c).max(0.0), (ai_old + aj_old).min(c))
        };
        if lo >= hi {
            return false;
        }
        let eta = 2.0 * k(i, j) - k(i, i) - k(j, j);
        if eta >= 0.0 {
            return false;
        }
        let mut aj_new = aj_old - yj * (e_i - e_j) / eta;
        aj_new = aj_new.clamp(lo, hi);
        if (aj_new - aj_old).abs() < MIN_ALPHA_STEP {
            return false;
        }
        // aj lands exactly on its clip bounds, but ai is reconstructed
        // arithmetically and can leave the box by an ulp; snap it back.
        let ai_new = (ai_old + yi * yj * (aj_old - aj_new)).clamp(0.0, c);

        let b1 = *bias - e_i - yi * (ai_new - ai_old) * k(i, i) - yj * (aj_new - aj_old) * k(i, j);
        let b2 = *bias - e_j - yi * (ai_new - ai_old) * k(i, j) - yj * (aj_new - aj_old) * k(j, j);
        let b_new = if ai_new > 0.0 && ai_new < c {
            b1
        } else if aj_new > 0.0 && aj_new < c {
            b2
        } else {
            (b1 + b2) / 2.0
        };

        let d_i = yi * (ai_new - ai_old);
        let d_j = yj * (aj_new - aj_old);
        let d_b = b_new - *bias;
        for t in 0..n {
            f_vals[t] += d_i * k(i, t) + d_j * k(j, t) + d_b;
        }
        alphas[i] = ai_new;
        alphas[j] = aj_new;
        *bias = b_new;
        true
    };

    let mut quiet_passes = 0;
    let mut total_passes = 0;
    while quiet_passes < params.max_passes {
        total_passes += 1;
        if total_passes > total_pass_cap {
            return Err(Error::ConvergenceFailure {
                a: pair.0,
                b: pair.1,
            });
        }
        let mut changed = 0usize;
        for i in 0..n {
            let e_i = f_vals[i] - targets[i];
            let r_i = e_i * targets[i];
            let violates = (r_i < -tol && alphas[i] < c) || (r_i > tol && alphas[i] > 0.0);
            if !violates {
                continue;
            }
            // Deterministic second choice: maximize |E_i - E_j|, lowest
            // index on ties, then fall back to an ascending scan.
            let mut j_best = usize::MAX;
            let mut gap_best = -1.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let gap = (e_i - (f_vals[j] - targets[j])).abs();
                if gap > gap_best {
                    gap_best = gap;
                    j_best = j;
                }
            }
            let mut stepped = false;
            if j_best != usize::MAX && take_step(i, j_best, &mut alphas, &mut bias, &mut f_vals) {
                stepped = true;
            } else {
                for j in 0..n {
                    if j == i || j == j_best {
                        continue;
                    }
                    if take_step(i, j, &mut alphas, &mut bias, &mut f_vals) {
                        stepped = true;
                        break;
                    }
                }
            }
            if stepped {
                changed += 1;
                on_update(&alphas, bias);
            }
        }
        if changed == 0 {
            quiet_passes += 1;
        } else {
            quiet_passes = 0;
        }
    }

    Ok(PairSolution { alphas, bias })
}

/// Trains the one-vs-one ensemble over every pair of classes present in the
/// table, in ascending label-code order.
pub fn train_svm(table: &crate::features::FeatureTable, cfg: &TrainConfig) -> Result<SvmRbfModel> {
    let (xs, ys) = super::training_views(table)?;
    let mut present = [false; 3];
    for &y in &ys {
        present[y] = true;
    }
    let classes: Vec<usize> = (0..3).filter(|&c| present[c]).collect();

    let mut pairs = Vec::new();
    for a_pos in 0..classes.len() {
        for b_pos in a_pos + 1..classes.len() {
            let (a, b) = (classes[a_pos], classes[b_pos]);
            let mut points = Vec::new();
            let mut targets = Vec::new();
            for (x, &y) in xs.iter().zip(&ys) {
                if y == a {
                    points.push(*x);
                    targets.push(1.0);
                } else if y == b {
                    points.push(*x);
                    targets.push(-1.0);
                }
            }
            let labels = (
                MoveLabel::from_class_index(a).expect("class index in 0..3"),
                MoveLabel::from_class_index(b).expect("class index in 0..3"),
            );
            let sol = train_pair(&points, &targets, &cfg.svm, labels)?;
            let mut vectors = Vec::new();
            let mut coeffs = Vec::new();
            for ((&alpha, &y), p) in sol.alphas.iter().zip(&targets).zip(&points) {
                if alpha > SV_PRUNE {
                    vectors.push(*p);
                    coeffs.push(alpha * y);
                }
            }
            pairs.push(PairClassifier {
                positive: labels.0,
                negative: labels.1,
                vectors,
                coeffs,
                bias: sol.bias,
            });
        }
    }
    Ok(SvmRbfModel {
        gamma: cfg.svm.gamma,
        pairs,
    })
}
