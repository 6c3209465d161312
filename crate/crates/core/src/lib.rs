//! Streaming segmentation and classification of honeybee dance moves from
//! head-angle time series.
//!
//! The pipeline: a moving-average monitor over sin(theta) detects threshold
//! crossings that bracket the three dance moves (waggle runs, full right
//! turns, full left turns); each bracketed window is reduced to two
//! discriminant features; three small classifiers — multinomial logistic
//! regression, a 2-3-3 MLP, and one-vs-one RBF SVMs — map features to moves.
//! Everything runs identically offline (whole recordings) and online (sample
//! by sample), and the [`replay`] module proves it by re-running recordings
//! through the streaming path.
//!
//! Quick tour:
//!
//! * [`signal`] — trajectories, labels, angle wrapping, moving averages.
//! * [`monitor`] — crossing detection, segmentation, streaming state.
//! * [`features`] — the two discriminants and feature tables.
//! * [`classifiers`] — training, prediction, model files.
//! * [`eval`] — stratified cross-validation and metrics.
//! * [`synth`] — ground-truthed synthetic dances.
//! * [`io`] — CSV formats for every artifact.
//! * [`replay`] — the live decision circuit on recorded data.

pub mod classifiers;
pub mod error;
pub mod eval;
pub mod features;
pub mod io;
pub mod monitor;
pub mod replay;
pub mod signal;
pub mod synth;

pub use classifiers::{
    train, ClassifierKind, ClassifierModel, Prediction, TrainConfig, TrainedModel,
};
pub use error::{Error, Result};
pub use eval::{cross_validate, stratified_kfold, EvalReport, Metrics};
pub use features::{build_feature_table, extract_features, FeatureTable, FeatureVector, Standardizer};
pub use monitor::{
    detect_events, monitoring_series, segment_trajectory, trigger_windows, CrossingDirection,
    CrossingEvent, MonitorConfig, MonitorState, TriggerWindow,
};
pub use replay::{replay_stream, Pace, ReplayLog};
pub use signal::{MoveLabel, Sample, Segment, Trajectory};
pub use synth::{generate_corpus, generate_dance, truth_segments, CorpusRanges, DanceSpec};
