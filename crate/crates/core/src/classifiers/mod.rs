//! Three from-scratch classifiers over the two-feature space, plus the
//! shared training configuration, prediction plumbing and model (de)serialization.
//!
//! All three consume a labeled [`FeatureTable`] and predict one of the three
//! moves with a per-class score vector:
//!
//! * [`LogisticModel`] — multinomial logistic regression, full-batch gradient
//!   descent with momentum, trained on raw features.
//! * [`MlpModel`] — a 2-3-3 sigmoid/softmax network, trained on standardized
//!   features.
//! * [`SvmRbfModel`] — one-vs-one RBF-kernel SVMs fit by a simplified SMO,
//!   trained on standardized features.
//!
//! Class order everywhere is ascending label code: TurnRight (-1),
//! TurnLeft (0), Waggle (+1). Score ties resolve toward the lowest code.

mod logistic;
mod mlp;
mod serialize;
mod svm;

pub use logistic::{
    gradient as logistic_gradient, loss as logistic_loss, train_logistic, train_logistic_traced,
    LogisticModel,
};
pub use mlp::{gradient as mlp_gradient, loss as mlp_loss, train_mlp, MlpModel};
pub use serialize::{deserialize_model, serialize_model};
pub use svm::{rbf_kernel, train_pair, train_svm, PairClassifier, PairSolution, SvmRbfModel};

use crate::error::{Error, Result};
use crate::features::{FeatureTable, FeatureVector, Standardizer};
use crate::signal::MoveLabel;

/// Which classifier to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierKind {
    Logistic,
    Mlp,
    Svm,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] =
        [ClassifierKind::Logistic, ClassifierKind::Mlp, ClassifierKind::Svm];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Logistic => "logistic",
            ClassifierKind::Mlp => "mlp",
            ClassifierKind::Svm => "svm",
        }
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<ClassifierKind> {
        match s {
            "logistic" => Ok(ClassifierKind::Logistic),
            "mlp" => Ok(ClassifierKind::Mlp),
            "svm" => Ok(ClassifierKind::Svm),
            other => Err(Error::InvalidInput(format!(
                "unknown classifier kind {other:?} (expected logistic, mlp or svm)"
            ))),
        }
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Hyperparameters for logistic-regression training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticParams {
    pub learning_rate: f64,
    pub momentum: f64,
    /// Epoch cap; training may stop earlier on the gradient tolerance.
    pub epochs: usize,
    /// L2 penalty on weights (biases unregularized).
    pub l2_lambda: f64,
    /// Stop when the full gradient norm falls below this.
    pub grad_tolerance: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            learning_rate: 0.1,
            momentum: 0.2,
            epochs: 10_000,
            l2_lambda: 1e-8,
            grad_tolerance: 1e-6,
        }
    }
}

/// Hyperparameters for MLP training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpParams {
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    /// Weights initialize uniformly in [-init_range, init_range].
    pub init_range: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            learning_rate: 0.3,
            momentum: 0.2,
            epochs: 500,
            init_range: 0.5,
        }
    }
}

/// Hyperparameters for the SMO-based SVM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    /// Soft-margin penalty.
    pub c: f64,
    /// RBF kernel width: K(a, b) = exp(-gamma * |a - b|^2).
    pub gamma: f64,
    /// KKT violation tolerance.
    pub tolerance: f64,
    /// Stop after this many consecutive passes without an update.
    pub max_passes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            gamma: 0.5,
            tolerance: 1e-3,
            max_passes: 10,
        }
    }
}

/// Everything training needs besides the data.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrainConfig {
    /// Seeds the MLP weight init (the only RNG consumer among the three).
    pub seed: u64,
    pub logistic: LogisticParams,
    pub mlp: MlpParams,
    pub svm: SvmParams,
}

/// A classification outcome: the winning move plus per-class scores.
///
/// Scores are probabilities for logistic and MLP models and one-vs-one vote
/// counts for the SVM, indexed in class order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: MoveLabel,
    pub scores: [f64; 3],
}

/// Any of the three trained classifiers.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierModel {
    Logistic(LogisticModel),
    Mlp(MlpModel),
    Svm(SvmRbfModel),
}

impl ClassifierModel {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierModel::Logistic(_) => ClassifierKind::Logistic,
            ClassifierModel::Mlp(_) => ClassifierKind::Mlp,
            ClassifierModel::Svm(_) => ClassifierKind::Svm,
        }
    }

    /// Scores a feature vector. Assumes finite input; the [`TrainedModel`]
    /// wrapper validates.
    pub fn predict(&self, f: FeatureVector) -> Prediction {
        match self {
            ClassifierModel::Logistic(m) => m.predict(f),
            ClassifierModel::Mlp(m) => m.predict(f),
            ClassifierModel::Svm(m) => m.predict(f),
        }
    }
}

/// A classifier bundled with the input normalization it was trained under.
///
/// SVM and MLP models are fitted on standardized features, so the fitted
/// [`Standardizer`] must travel with them — a model file that forgot its
/// normalization would silently misclassify every stream. Logistic models
/// train on raw features and carry none.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub model: ClassifierModel,
    pub standardizer: Option<Standardizer>,
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        self.model.kind()
    }

    /// Validates, normalizes if the bundle carries a standardizer, and scores.
    pub fn predict(&self, f: FeatureVector) -> Result<Prediction> {
        if !(f.x1.is_finite() && f.x2.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite feature vector ({}, {})",
                f.x1, f.x2
            )));
        }
        let g = match &self.standardizer {
            Some(s) => s.apply_vector(f),
            None => f,
        };
        Ok(self.model.predict(g))
    }
}

/// Trains the requested classifier.
///
/// Every kind trains on standardized features and carries its standardizer in
/// the bundle. The drift feature spans hundredths while the peak feature sits
/// near one, and that imbalance alone is enough to stall plain gradient
/// descent, so normalization is part of the training contract rather than a
/// per-kind choice.
pub fn train(kind: ClassifierKind, table: &FeatureTable, cfg: &TrainConfig) -> Result<TrainedModel> {
    match kind {
        ClassifierKind::Logistic => {
            let s = Standardizer::fit(table)?;
            let model = train_logistic(&s.apply(table), cfg)?;
            Ok(TrainedModel {
                model: ClassifierModel::Logistic(model),
                standardizer: Some(s),
            })
        }
        ClassifierKind::Mlp => {
            let s = Standardizer::fit(table)?;
            let model = train_mlp(&s.apply(table), cfg)?;
            Ok(TrainedModel {
                model: ClassifierModel::Mlp(model),
                standardizer: Some(s),
            })
        }
        ClassifierKind::Svm => {
            let s = Standardizer::fit(table)?;
            let model = svm::train_svm(&s.apply(table), cfg)?;
            Ok(TrainedModel {
                model: ClassifierModel::Svm(model),
                standardizer: Some(s),
            })
        }
    }
}

/// Numerically stable softmax over three logits.
pub(crate) fn softmax3(z: [f64; 3]) -> [f64; 3] {
    let m = z[0].max(z[1]).max(z[2]);
    let e = [(z[0] - m).exp(), (z[1] - m).exp(), (z[2] - m).exp()];
    let s = e[0] + e[1] + e[2];
    [e[0] / s, e[1] / s, e[2] / s]
}

/// Index of the largest score; exact ties go to the lowest index, i.e. the
/// lowest label code.
pub(crate) fn argmax3(scores: &[f64; 3]) -> usize {
    let mut best = 0;
    for i in 1..3 {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    best
}

/// Validates a training table and lowers it to parallel feature/class-index
/// vectors. Requires complete labels, finite features and at least two
/// distinct classes.
pub(crate) fn training_views(table: &FeatureTable) -> Result<(Vec<[f64; 2]>, Vec<usize>)> {
    let labels = table.labels()?;
    let mut xs = Vec::with_capacity(table.len());
    for (i, row) in table.rows.iter().enumerate() {
        let f = row.features;
        if !(f.x1.is_finite() && f.x2.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite features at row {i} ({}, {})",
                f.x1, f.x2
            )));
        }
        xs.push([f.x1, f.x2]);
    }
    let ys: Vec<usize> = labels.iter().map(|l| l.class_index()).collect();
    let mut present = [false; 3];
    for &y in &ys {
        present[y] = true;
    }
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(Error::DegenerateLabels);
    }
    Ok((xs, ys))
}
