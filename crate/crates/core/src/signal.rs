//! Core signal types and the three transforms everything else is built from.
//!
//! A dance recording is a [`Trajectory`]: per-frame position plus head angle
//! theta in radians, sampled at a fixed rate (30 Hz for the source videos).
//! The downstream pipeline only ever needs three primitive operations on such
//! series: a trailing moving average, a first difference, and the sin/cos
//! lift of the angle track. They live here so the streaming monitor and the
//! offline feature extractor share one implementation.

use crate::error::{Error, Result};

/// Smallest segment the segmenter will keep before merging (samples).
///
/// Half a second at 30 Hz. Also the default refractory spacing between
/// threshold crossings, so interior segments can never be shorter than this.
pub const DEFAULT_MIN_SEGMENT_LEN: usize = 15;

/// Default sampling rate of the source recordings (frames per second).
pub const DEFAULT_RATE_HZ: f64 = 30.0;

/// One of the three dance moves.
///
/// The numeric codes (-1, 0, +1) follow the labeling convention of the
/// dataset: turn-right = -1, turn-left = 0, waggle = +1. Matrix rows,
/// confusion-matrix axes and tie-breaks all use ascending code order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveLabel {
    TurnRight,
    TurnLeft,
    Waggle,
}

impl MoveLabel {
    /// All labels in ascending code order (-1, 0, +1).
    pub const ALL: [MoveLabel; 3] = [MoveLabel::TurnRight, MoveLabel::TurnLeft, MoveLabel::Waggle];

    /// Dataset code: -1, 0 or +1.
    pub fn code(self) -> i8 {
        match self {
            MoveLabel::TurnRight => -1,
            MoveLabel::TurnLeft => 0,
            MoveLabel::Waggle => 1,
        }
    }

    /// Inverse of [`MoveLabel::code`].
    pub fn from_code(code: i64) -> Option<MoveLabel> {
        match code {
            -1 => Some(MoveLabel::TurnRight),
            0 => Some(MoveLabel::TurnLeft),
            1 => Some(MoveLabel::Waggle),
            _ => None,
        }
    }

    /// Dense index in code order: TurnRight = 0, TurnLeft = 1, Waggle = 2.
    pub fn class_index(self) -> usize {
        match self {
            MoveLabel::TurnRight => 0,
            MoveLabel::TurnLeft => 1,
            MoveLabel::Waggle => 2,
        }
    }

    /// Inverse of [`MoveLabel::class_index`].
    pub fn from_class_index(i: usize) -> Option<MoveLabel> {
        MoveLabel::ALL.get(i).copied()
    }
}

impl std::fmt::Display for MoveLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            MoveLabel::TurnRight => "turn-right",
            MoveLabel::TurnLeft => "turn-left",
            MoveLabel::Waggle => "waggle",
        };
        f.write_str(name)
    }
}

/// One video frame: position, head angle, optional ground-truth label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    /// Frame number; contiguous from 0 within a trajectory.
    pub index: usize,
    pub x: f64,
    pub y: f64,
    /// Head angle in radians, normalized into (-pi, pi].
    pub theta: f64,
    /// Ground-truth move, when the recording is annotated.
    pub label: Option<MoveLabel>,
}

/// A full recording: samples at a fixed rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<Sample>,
    rate_hz: f64,
}

impl Trajectory {
    /// Builds a trajectory, validating the per-sample invariants:
    /// indices contiguous from 0, finite coordinates, finite angles.
    /// Angles outside (-pi, pi] are wrapped into range; in-range angles are
    /// left untouched bit for bit.
    pub fn new(mut samples: Vec<Sample>, rate_hz: f64) -> Result<Trajectory> {
        if !(rate_hz.is_finite() && rate_hz > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sampling rate must be positive and finite, got {rate_hz}"
            )));
        }
        for (i, s) in samples.iter_mut().enumerate() {
            if s.index != i {
                return Err(Error::InvalidInput(format!(
                    "sample indices must be contiguous from 0: expected {i}, got {}",
                    s.index
                )));
            }
            if !s.theta.is_finite() {
                return Err(Error::InvalidAngle { index: i });
            }
            if !(s.x.is_finite() && s.y.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "non-finite position at sample {i}"
                )));
            }
            s.theta = wrap_angle(s.theta);
        }
        Ok(Trajectory { samples, rate_hz })
    }

    /// Test/synthesis helper: a trajectory with only the angle track filled in.
    pub fn from_thetas(thetas: &[f64], rate_hz: f64) -> Result<Trajectory> {
        let samples = thetas
            .iter()
            .enumerate()
            .map(|(i, &theta)| Sample {
                index: i,
                x: 0.0,
                y: 0.0,
                theta,
                label: None,
            })
            .collect();
        Trajectory::new(samples, rate_hz)
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn rate_hz(&self) -> f64 {
        self.rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The angle track as a plain vector.
    pub fn thetas(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.theta).collect()
    }
}

/// Half-open run of samples `[start, end)` within one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    /// Majority ground-truth move, when known.
    pub label: Option<MoveLabel>,
}

impl Segment {
    pub fn new(start: usize, end: usize, label: Option<MoveLabel>) -> Segment {
        debug_assert!(start < end, "segment [{start}, {end}) is empty or reversed");
        Segment { start, end, label }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// Wraps an angle into (-pi, pi]. Values already in range pass through
/// unchanged (bit for bit), so wrapping is idempotent and round-trip safe.
pub fn wrap_angle(theta: f64) -> f64 {
    use std::f64::consts::PI;
    if theta > PI || theta <= -PI {
        // rem_euclid returns [0, 2pi), so pi - that is (-pi, pi].
        PI - (PI - theta).rem_euclid(2.0 * PI)
    } else {
        theta
    }
}

/// Trailing moving average with the given window length.
///
/// `out[i]` is the mean of `series[i..i + window]`, i.e. the average of the
/// window *ending* at input index `i + window - 1`. Output length is
/// `len - window + 1`. Summation runs left to right so the streaming monitor
/// can reproduce every value exactly.
pub fn moving_average(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::InvalidWindow);
    }
    if series.len() < window {
        return Err(Error::EmptyWindow {
            len: series.len(),
            window,
        });
    }
    Ok(series
        .windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect())
}

/// First difference: `out[i] = series[i + 1] - series[i]`.
///
/// Output length is `len - 1`; needs at least two values.
pub fn first_difference(series: &[f64]) -> Result<Vec<f64>> {
    if series.len() < 2 {
        return Err(Error::TooShort {
            len: series.len(),
            min: 2,
        });
    }
    Ok(series.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Lifts an angle track to its (sin, cos) series.
///
/// Rejects non-finite angles with the offending index so stream inputs fail
/// loudly instead of poisoning the monitor.
pub fn trig_lift(thetas: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut sines = Vec::with_capacity(thetas.len());
    let mut cosines = Vec::with_capacity(thetas.len());
    for (index, &t) in thetas.iter().enumerate() {
        if !t.is_finite() {
            return Err(Error::InvalidAngle { index });
        }
        sines.push(t.sin());
        cosines.push(t.cos());
    }
    Ok((sines, cosines))
}
