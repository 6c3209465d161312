//! Stratified k-fold evaluation: fold planning, confusion-matrix metrics and
//! the cross-validation driver.
//!
//! Folds are stratified per class (seeded shuffle, then round-robin deal), so
//! every fold sees each move in near-equal proportion. Per fold, the training
//! split is fit from scratch — including feature standardization for the
//! classifiers that use it — and only then sees the held-out rows, so nothing
//! about the test fold leaks into training.

use crate::classifiers::{train, ClassifierKind, TrainConfig};
use crate::error::{Error, Result};
use crate::features::FeatureTable;
use crate::signal::MoveLabel;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Row indices of each test fold. Training rows for fold `i` are everything
/// outside `folds[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    pub folds: Vec<Vec<usize>>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    pub fn test_indices(&self, fold: usize) -> &[usize] {
        &self.folds[fold]
    }

    /// All row indices not in the given test fold, ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != fold)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }
}

/// Splits `labels.len()` rows into `k` stratified folds.
///
/// Within each class (ascending label code) the row indices are shuffled with
/// a seeded RNG and dealt round-robin, so per-class fold counts differ by at
/// most one and the plan is reproducible from the seed.
pub fn stratified_kfold(labels: &[MoveLabel], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidK { k });
    }
    if labels.len() < k {
        return Err(Error::TooFewRows {
            rows: labels.len(),
            min: k,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    for class in MoveLabel::ALL {
        let mut rows: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        rows.shuffle(&mut rng);
        for (pos, row) in rows.into_iter().enumerate() {
            folds[pos % k].push(row);
        }
    }
    Ok(FoldPlan { folds })
}

/// Pooled confusion matrix and the derived scores.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    /// `confusion[truth][predicted]`, class-index order.
    pub confusion: [[usize; 3]; 3],
    pub accuracy: f64,
    /// Support-weighted mean of per-class F1.
    pub f_weighted: f64,
    /// Unweighted mean of F1 over the classes present in the truth.
    pub f_macro: f64,
}

/// Scores a prediction vector against the truth. Empty-ratio conventions:
/// precision, recall and F1 all fall to zero when their denominator is zero,
/// and classes absent from the truth are left out of the macro average.
pub fn compute_metrics(truth: &[MoveLabel], predicted: &[MoveLabel]) -> Result<Metrics> {
    if truth.len() != predicted.len() {
        return Err(Error::ShapeError {
            left: truth.len(),
            right: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::InvalidInput("cannot score zero predictions".into()));
    }

    let mut confusion = [[0usize; 3]; 3];
    for (&t, &p) in truth.iter().zip(predicted) {
        confusion[t.class_index()][p.class_index()] += 1;
    }

    let n = truth.len() as f64;
    let mut correct = 0usize;
    let mut f_weighted = 0.0;
    let mut f_sum = 0.0;
    let mut classes_present = 0usize;
    for c in 0..3 {
        correct += confusion[c][c];
        let tp = confusion[c][c] as f64;
        let support: usize = confusion[c].iter().sum();
        let predicted_c: usize = (0..3).map(|t| confusion[t][c]).sum();
        let precision = if predicted_c == 0 {
            0.0
        } else {
            tp / predicted_c as f64
        };
        let recall = if support == 0 { 0.0 } else { tp / support as f64 };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        if support > 0 {
            f_weighted += (support as f64 / n) * f1;
            f_sum += f1;
            classes_present += 1;
        }
    }

    Ok(Metrics {
        confusion,
        accuracy: correct as f64 / n,
        f_weighted,
        f_macro: f_sum / classes_present as f64,
    })
}

/// Everything a cross-validation run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub classifier: ClassifierKind,
    pub k: usize,
    pub seed: u64,
    pub rows: usize,
    /// Accuracy on each held-out fold, fold order.
    pub fold_accuracies: Vec<f64>,
    /// Metrics over the pooled out-of-fold predictions.
    pub metrics: Metrics,
}

impl EvalReport {
    /// Human-readable key=value rendering with the confusion matrix appended.
    pub fn render(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(out, "classifier={}", self.classifier);
        let _ = writeln!(out, "folds={}", self.k);
        let _ = writeln!(out, "seed={}", self.seed);
        let _ = writeln!(out, "rows={}", self.rows);
        let _ = writeln!(out, "accuracy={:.6}", self.metrics.accuracy);
        let _ = writeln!(out, "f_weighted={:.6}", self.metrics.f_weighted);
        let _ = writeln!(out, "f_macro={:.6}", self.metrics.f_macro);
        for (i, a) in self.fold_accuracies.iter().enumerate() {
            let _ = writeln!(out, "fold_accuracy_{i}={a:.6}");
        }
        let order = MoveLabel::ALL
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(out, "confusion rows=truth cols=predicted order={order}");
        for row in &self.metrics.confusion {
            let _ = writeln!(out, "{} {} {}", row[0], row[1], row[2]);
        }
        out
    }
}

/// Runs seeded, stratified k-fold cross-validation of one classifier over a
/// fully labeled table, pooling the out-of-fold predictions into one
/// confusion matrix.
///
/// Fails with [`Error::DegenerateFold`] if some fold's training split lost a
/// class that the full table contains.
pub fn cross_validate(
    table: &FeatureTable,
    kind: ClassifierKind,
    k: usize,
    cfg: &TrainConfig,
) -> Result<EvalReport> {
    let labels = table.labels()?;
    let plan = stratified_kfold(&labels, k, cfg.seed)?;

    let full_counts = table.class_counts();
    let mut pooled_truth = Vec::with_capacity(labels.len());
    let mut pooled_pred = Vec::with_capacity(labels.len());
    let mut fold_accuracies = Vec::with_capacity(k);

    for fold in 0..k {
        let train_rows = plan.train_indices(fold);
        let train_table = FeatureTable {
            rows: train_rows.iter().map(|&i| table.rows[i].clone()).collect(),
        };
        let train_counts = train_table.class_counts();
        for class in MoveLabel::ALL {
            let c = class.class_index();
            if full_counts[c] > 0 && train_counts[c] == 0 {
                return Err(Error::DegenerateFold { fold, class });
            }
        }

        let model = train(kind, &train_table, cfg)?;
        let mut correct = 0usize;
        for &i in plan.test_indices(fold) {
            let pred = model.predict(table.rows[i].features)?;
            if pred.label == labels[i] {
                correct += 1;
            }
            pooled_truth.push(labels[i]);
            pooled_pred.push(pred.label);
        }
        fold_accuracies.push(correct as f64 / plan.test_indices(fold).len() as f64);
    }

    Ok(EvalReport {
        classifier: kind,
        k,
        seed: cfg.seed,
        rows: labels.len(),
        fold_accuracies,
        metrics: compute_metrics(&pooled_truth, &pooled_pred)?,
    })
}

/// Concatenates tables (e.g. one per recording) into one training pool.
pub fn pool_tables(tables: &[FeatureTable]) -> FeatureTable {
    FeatureTable {
        rows: tables.iter().flat_map(|t| t.rows.clone()).collect(),
    }
}
