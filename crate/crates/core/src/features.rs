//! The two discriminant features and the feature table plumbing.
//!
//! For a window of head angles, lift to cos(theta), smooth with the trailing
//! moving average, and compute:
//!
//! * `x1` — mean of the first differences of the smoothed series. Measures
//!   the net drift of cos(theta): near zero through a waggle run, negative
//!   while a right turn carries the head from "ahead" to "behind", positive
//!   for the mirror-image left turn.
//! * `x2` — maximum of the smoothed series. Close to 1 whenever the window
//!   contains axis-aligned heading, noticeably lower inside a turn's dip.
//!
//! Together they separate the three moves well enough for a linear model.
//! The same extraction runs on offline segments and on streaming trigger
//! windows; only the slice of angles differs.

use crate::error::{Error, Result};
use crate::monitor::majority_label;
use crate::signal::{self, MoveLabel, Segment, Trajectory};

/// The pair of discriminants extracted from one window of angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    /// Mean first difference of smoothed cos(theta); |x1| <= 2 / window.
    pub x1: f64,
    /// Maximum of smoothed cos(theta); always in [-1, 1].
    pub x2: f64,
}

/// One row of a training/evaluation table.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub features: FeatureVector,
    /// Ground-truth move when known.
    pub label: Option<MoveLabel>,
    /// Which recording the row came from (file stem, bee id, ...).
    pub source: String,
    /// Ordinal of the segment within its recording.
    pub ordinal: usize,
}

/// A list of feature rows; what classifiers train and evaluate on.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureTable {
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Labels of all rows; `Err` if any row is unlabeled (training needs
    /// complete labels).
    pub fn labels(&self) -> Result<Vec<MoveLabel>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r.label.ok_or_else(|| {
                    Error::InvalidInput(format!("row {i} ({}:{}) is unlabeled", r.source, r.ordinal))
                })
            })
            .collect()
    }

    /// How many rows carry each label, in class-index order.
    pub fn class_counts(&self) -> [usize; 3] {
        let mut counts = [0usize; 3];
        for r in &self.rows {
            if let Some(label) = r.label {
                counts[label.class_index()] += 1;
            }
        }
        counts
    }
}

/// Extracts the feature pair from a window of head angles.
///
/// `window` is the smoothing length (the monitor's, 3 by default). Needs at
/// least `window + 2` angles: that leaves >= 3 smoothed values, hence >= 2
/// differences for `x1` and a meaningful max for `x2`.
pub fn extract_features(thetas: &[f64], window: usize) -> Result<FeatureVector> {
    if window == 0 {
        return Err(Error::InvalidWindow);
    }
    if thetas.len() < window + 2 {
        return Err(Error::TooShort {
            len: thetas.len(),
            min: window + 2,
        });
    }
    let (_, cosines) = signal::trig_lift(thetas)?;
    let smoothed = signal::moving_average(&cosines, window)?;
    let diffs = signal::first_difference(&smoothed)?;
    let x1 = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let x2 = smoothed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    debug_assert!(x1.abs() <= 2.0 / window as f64 + 1e-9);
    debug_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&x2));
    Ok(FeatureVector { x1, x2 })
}

/// Runs [`extract_features`] over every segment of a trajectory.
///
/// Rows keep the segment order; labels come from the segment when present,
/// else from the majority ground truth of the underlying samples, else stay
/// None. `source` tags every row with the recording it came from.
pub fn build_feature_table(
    traj: &Trajectory,
    segments: &[Segment],
    window: usize,
    source: &str,
) -> Result<FeatureTable> {
    let thetas = traj.thetas();
    let mut rows = Vec::with_capacity(segments.len());
    for (ordinal, seg) in segments.iter().enumerate() {
        if seg.end > thetas.len() || seg.start >= seg.end {
            return Err(Error::InvalidInput(format!(
                "segment {ordinal} [{}, {}) does not fit a trajectory of {} samples",
                seg.start,
                seg.end,
                thetas.len()
            )));
        }
        if seg.len() < window + 2 {
            return Err(Error::SegmentTooShort {
                ordinal,
                len: seg.len(),
                min: window + 2,
            });
        }
        let features = extract_features(&thetas[seg.start..seg.end], window)?;
        let label = seg.label.or_else(|| majority_label(traj, seg.start, seg.end));
        rows.push(FeatureRow {
            features,
            label,
            source: source.to_string(),
            ordinal,
        });
    }
    Ok(FeatureTable { rows })
}

/// Per-column affine normalization fitted on training rows.
///
/// Uses the sample standard deviation (n - 1 denominator); degenerate
/// columns are clamped to std 1e-9 instead of dividing by zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardizer {
    pub means: [f64; 2],
    pub stds: [f64; 2],
}

/// Smallest standard deviation the standardizer will divide by.
pub const STD_FLOOR: f64 = 1e-9;

impl Standardizer {
    /// Fits means and standard deviations on a table; needs >= 2 rows.
    pub fn fit(table: &FeatureTable) -> Result<Standardizer> {
        let n = table.len();
        if n < 2 {
            return Err(Error::TooFewRows { rows: n, min: 2 });
        }
        let nf = n as f64;
        let mut means = [0.0f64; 2];
        for r in &table.rows {
            means[0] += r.features.x1;
            means[1] += r.features.x2;
        }
        means[0] /= nf;
        means[1] /= nf;
        let mut ss = [0.0f64; 2];
        for r in &table.rows {
            ss[0] += (r.features.x1 - means[0]).powi(2);
            ss[1] += (r.features.x2 - means[1]).powi(2);
        }
        let stds = [
            (ss[0] / (nf - 1.0)).sqrt().max(STD_FLOOR),
            (ss[1] / (nf - 1.0)).sqrt().max(STD_FLOOR),
        ];
        Ok(Standardizer { means, stds })
    }

    pub fn apply_vector(&self, f: FeatureVector) -> FeatureVector {
        FeatureVector {
            x1: (f.x1 - self.means[0]) / self.stds[0],
            x2: (f.x2 - self.means[1]) / self.stds[1],
        }
    }

    /// Standardizes every row, keeping labels, sources and ordinals intact.
    pub fn apply(&self, table: &FeatureTable) -> FeatureTable {
        FeatureTable {
            rows: table
                .rows
                .iter()
                .map(|r| FeatureRow {
                    features: self.apply_vector(r.features),
                    ..r.clone()
                })
                .collect(),
        }
    }

    /// Undoes [`Standardizer::apply_vector`].
    pub fn invert_vector(&self, f: FeatureVector) -> FeatureVector {
        FeatureVector {
            x1: f.x1 * self.stds[0] + self.means[0],
            x2: f.x2 * self.stds[1] + self.means[1],
        }
    }
}
