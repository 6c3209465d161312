//! Threshold monitor: turns the angle stream into crossing events, segments
//! and streaming classification triggers.
//!
//! The monitored quantity is the trailing moving average of sin(theta). A
//! waggle run keeps the head near the dance axis, so the average hovers near
//! sin(axis); a return turn sweeps the head through the "down" direction and
//! drags the average below the threshold (default -0.7). Each crossing —
//! downward when the average drops below the threshold, upward when it comes
//! back — marks the boundary of a move.
//!
//! The same event state machine runs in two modes:
//!
//! * batch: [`monitoring_series`] + [`detect_events`] + [`segment_trajectory`]
//! * streaming: [`MonitorState::stream_step`], one sample at a time, emitting
//!   a [`TriggerWindow`] of recent samples on every crossing
//!
//! Both modes share one detector implementation and sum windows in the same
//! order, so their outputs agree exactly, not just approximately.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::signal::{self, MoveLabel, Sample, Segment, Trajectory, DEFAULT_MIN_SEGMENT_LEN};

/// Tuning knobs for the monitor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorConfig {
    /// Moving-average window over sin(theta), in samples.
    pub window: usize,
    /// Crossing threshold on the averaged signal.
    pub threshold: f64,
    /// Minimum spacing between consecutive events, in samples. Doubles as
    /// the minimum segment length during segmentation.
    pub refractory: usize,
    /// How many recent samples the streaming monitor keeps for feature
    /// extraction (3 seconds at 30 Hz by default).
    pub lookback: usize,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig {
            window: 3,
            threshold: -0.7,
            refractory: DEFAULT_MIN_SEGMENT_LEN,
            lookback: 90,
        }
    }
}

impl MonitorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::InvalidWindow);
        }
        if !self.threshold.is_finite() || self.threshold < -1.0 || self.threshold > 1.0 {
            return Err(Error::InvalidInput(format!(
                "threshold must be a finite value in [-1, 1], got {}",
                self.threshold
            )));
        }
        if self.refractory == 0 {
            return Err(Error::InvalidInput(
                "refractory must be at least 1 sample".into(),
            ));
        }
        if self.lookback < self.window + 2 {
            return Err(Error::InvalidInput(format!(
                "lookback {} is too small: need at least window + 2 = {}",
                self.lookback,
                self.window + 2
            )));
        }
        Ok(())
    }
}

/// Which way the monitored average crossed the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingDirection {
    /// Average dropped below the threshold (a turn has begun dipping).
    Downward,
    /// Average came back up to or above the threshold.
    Upward,
}

/// One threshold crossing, in input-sample coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossingEvent {
    /// Index of the trajectory sample whose window produced the crossing.
    pub index: usize,
    pub direction: CrossingDirection,
}

/// The crossing state machine, shared verbatim by batch and streaming paths.
///
/// Starts armed for a Downward crossing. After firing, it waits for the
/// opposite condition, and never fires two events closer than `refractory`
/// samples apart.
#[derive(Debug, Clone)]
struct EventDetector {
    threshold: f64,
    refractory: usize,
    looking_for: CrossingDirection,
    last_event: Option<usize>,
}

impl EventDetector {
    fn new(cfg: &MonitorConfig) -> Self {
        EventDetector {
            threshold: cfg.threshold,
            refractory: cfg.refractory,
            looking_for: CrossingDirection::Downward,
            last_event: None,
        }
    }

    /// Feed one monitored value (at input coordinate `index`); returns the
    /// event it fires, if any.
    fn observe(&mut self, index: usize, m: f64) -> Option<CrossingEvent> {
        if let Some(last) = self.last_event {
            if index - last < self.refractory {
                return None;
            }
        }
        let fires = match self.looking_for {
            CrossingDirection::Downward => m < self.threshold,
            CrossingDirection::Upward => m >= self.threshold,
        };
        if !fires {
            return None;
        }
        let event = CrossingEvent {
            index,
            direction: self.looking_for,
        };
        self.last_event = Some(index);
        self.looking_for = match self.looking_for {
            CrossingDirection::Downward => CrossingDirection::Upward,
            CrossingDirection::Upward => CrossingDirection::Downward,
        };
        Some(event)
    }
}

/// Moving average of sin(theta) over the trajectory.
///
/// `out[i]` corresponds to input sample `i + window - 1`; the series is
/// `len - window + 1` values long.
pub fn monitoring_series(traj: &Trajectory, cfg: &MonitorConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let (sines, _) = signal::trig_lift(&traj.thetas())?;
    signal::moving_average(&sines, cfg.window)
}

/// Scans a monitoring series for threshold crossings.
///
/// `monitor[0]` is assumed to sit at input coordinate `cfg.window - 1`, which
/// is what [`monitoring_series`] produces. An empty result is perfectly valid
/// (nothing ever crossed).
pub fn detect_events(monitor: &[f64], cfg: &MonitorConfig) -> Vec<CrossingEvent> {
    let mut detector = EventDetector::new(cfg);
    let offset = cfg.window - 1;
    monitor
        .iter()
        .enumerate()
        .filter_map(|(i, &m)| detector.observe(i + offset, m))
        .collect()
}

/// Cuts `[0, len)` at the event indices, then merges runts.
///
/// Every event index becomes a boundary. Segments shorter than `min_len` are
/// merged into their predecessor; a short first segment (which has no
/// predecessor) merges forward instead. A single segment is kept no matter
/// how short, because the tiling must cover the trajectory.
pub(crate) fn segments_from_events(
    events: &[usize],
    len: usize,
    min_len: usize,
) -> Vec<(usize, usize)> {
    let mut bounds = Vec::with_capacity(events.len() + 2);
    bounds.push(0);
    bounds.extend(events.iter().copied().filter(|&e| e > 0 && e < len));
    bounds.push(len);

    let mut raw: Vec<(usize, usize)> = bounds.windows(2).map(|w| (w[0], w[1])).collect();

    // A short leading segment merges forward until it isn't short or is alone.
    while raw.len() > 1 && raw[0].1 - raw[0].0 < min_len {
        let first = raw.remove(0);
        raw[0].0 = first.0;
    }

    let mut out: Vec<(usize, usize)> = Vec::with_capacity(raw.len());
    for seg in raw {
        if seg.1 - seg.0 < min_len {
            if let Some(prev) = out.last_mut() {
                prev.1 = seg.1;
                continue;
            }
        }
        out.push(seg);
    }
    out
}

/// Majority ground-truth label over samples `[start, end)`.
///
/// Ties break toward Waggle, then TurnLeft. Returns None when no sample in
/// the range carries a label.
pub fn majority_label(traj: &Trajectory, start: usize, end: usize) -> Option<MoveLabel> {
    let mut counts = [0usize; 3];
    let mut any = false;
    for s in &traj.samples()[start..end] {
        if let Some(label) = s.label {
            counts[label.class_index()] += 1;
            any = true;
        }
    }
    if !any {
        return None;
    }
    let best = *counts.iter().max().unwrap();
    // preference order on ties: Waggle, TurnLeft, TurnRight
    for label in [MoveLabel::Waggle, MoveLabel::TurnLeft, MoveLabel::TurnRight] {
        if counts[label.class_index()] == best {
            return Some(label);
        }
    }
    unreachable!("a maximum always exists once any label was counted")
}

/// Full offline segmentation: monitor, detect, cut, merge, label.
///
/// Segment labels are majority ground truth when the trajectory is annotated,
/// None otherwise. The returned segments tile `[0, len)` in order.
pub fn segment_trajectory(traj: &Trajectory, cfg: &MonitorConfig) -> Result<Vec<Segment>> {
    let monitor = monitoring_series(traj, cfg)?;
    let events = detect_events(&monitor, cfg);
    let indices: Vec<usize> = events.iter().map(|e| e.index).collect();
    Ok(segments_from_events(&indices, traj.len(), cfg.refractory)
        .into_iter()
        .map(|(start, end)| Segment::new(start, end, majority_label(traj, start, end)))
        .collect())
}

/// What the streaming monitor hands to the classifier on a crossing.
#[derive(Debug, Clone)]
pub struct TriggerWindow {
    pub event: CrossingEvent,
    /// Trailing samples ending at the event, newest last. Runs back to the
    /// previous crossing (the move that just ended), floored at `window + 2`
    /// samples and capped by `lookback` and by the age of the stream.
    pub samples: Vec<Sample>,
}

/// Incremental monitor over a live sample stream.
///
/// Feed samples in index order through [`MonitorState::stream_step`]; the
/// crossings it reports are exactly those [`detect_events`] finds on the same
/// data, and each crossing carries the trailing window described by
/// [`TriggerWindow`].
#[derive(Debug, Clone)]
pub struct MonitorState {
    cfg: MonitorConfig,
    detector: EventDetector,
    /// sin(theta) of the last `window` samples.
    sin_window: VecDeque<f64>,
    /// The last `lookback` samples, for trigger windows.
    buffer: VecDeque<Sample>,
    next_index: usize,
    last_event: Option<usize>,
}

impl MonitorState {
    pub fn new(cfg: MonitorConfig) -> Result<MonitorState> {
        cfg.validate()?;
        Ok(MonitorState {
            detector: EventDetector::new(&cfg),
            sin_window: VecDeque::with_capacity(cfg.window),
            buffer: VecDeque::with_capacity(cfg.lookback),
            next_index: 0,
            last_event: None,
            cfg,
        })
    }

    pub fn config(&self) -> &MonitorConfig {
        &self.cfg
    }

    /// Number of samples consumed so far.
    pub fn samples_seen(&self) -> usize {
        self.next_index
    }

    /// Consumes one sample; returns a trigger when it completes a crossing.
    ///
    /// Samples must arrive with contiguous indices starting at 0, and angles
    /// must be finite.
    pub fn stream_step(&mut self, sample: Sample) -> Result<Option<TriggerWindow>> {
        if sample.index != self.next_index {
            return Err(Error::OutOfOrder {
                expected: self.next_index,
                got: sample.index,
            });
        }
        if !sample.theta.is_finite() {
            return Err(Error::InvalidAngle {
                index: sample.index,
            });
        }
        self.next_index += 1;

        if self.sin_window.len() == self.cfg.window {
            self.sin_window.pop_front();
        }
        self.sin_window.push_back(sample.theta.sin());

        if self.buffer.len() == self.cfg.lookback {
            self.buffer.pop_front();
        }
        self.buffer.push_back(sample);

        if self.sin_window.len() < self.cfg.window {
            return Ok(None); // warm-up: no average defined yet
        }

        // Same order and same division as the batch moving average, so the
        // value is identical bit for bit.
        let m = self.sin_window.iter().sum::<f64>() / self.cfg.window as f64;
        let Some(event) = self.detector.observe(sample.index, m) else {
            return Ok(None);
        };

        let len = trigger_window_len(
            event.index,
            self.last_event,
            self.cfg.window,
            self.cfg.lookback,
        );
        self.last_event = Some(event.index);
        let skip = self.buffer.len() - len;
        let samples: Vec<Sample> = self.buffer.iter().skip(skip).copied().collect();
        Ok(Some(TriggerWindow { event, samples }))
    }
}

/// How many trailing samples a trigger at `index` should carry.
///
/// The window reaches back to the previous event (the move that just ended),
/// floored at `window + 2` (the minimum a feature extraction needs), capped
/// by `lookback` and by how many samples exist at all.
fn trigger_window_len(index: usize, prev_event: Option<usize>, window: usize, lookback: usize) -> usize {
    let available = (index + 1).min(lookback);
    let desired = match prev_event {
        Some(p) => (index - p).max(window + 2),
        None => usize::MAX,
    };
    desired.min(available)
}

/// Offline twin of the streaming trigger emission: the same events with the
/// same trailing windows, computed from a complete trajectory.
pub fn trigger_windows(traj: &Trajectory, cfg: &MonitorConfig) -> Result<Vec<TriggerWindow>> {
    let monitor = monitoring_series(traj, cfg)?;
    let events = detect_events(&monitor, cfg);
    let mut out = Vec::with_capacity(events.len());
    let mut prev: Option<usize> = None;
    for event in events {
        let len = trigger_window_len(event.index, prev, cfg.window, cfg.lookback);
        prev = Some(event.index);
        let start = event.index + 1 - len;
        out.push(TriggerWindow {
            event,
            samples: traj.samples()[start..=event.index].to_vec(),
        });
    }
    Ok(out)
}
