//! Streaming replay: drive the monitor sample by sample, classify each move
//! as its terminating crossing fires, and log what a live decision circuit
//! would have emitted.
//!
//! Every crossing pins down the stretch of samples since the previous one —
//! the move that just ended. The trigger window is featurized and scored on
//! the spot, and the per-trigger classification latency is recorded so
//! real-time feasibility is measurable rather than assumed.

use crate::classifiers::TrainedModel;
use crate::error::Result;
use crate::features::extract_features;
use crate::monitor::{CrossingDirection, MonitorConfig, MonitorState};
use crate::signal::{MoveLabel, Trajectory};
use std::time::{Duration, Instant};

/// Replay pacing: flat out, or one sample per 1/rate seconds like a live
/// camera feed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pace {
    MaxSpeed,
    RealTime,
}

/// One classified trigger.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayEvent {
    /// Sample index at which the crossing fired.
    pub index: usize,
    pub direction: CrossingDirection,
    /// Predicted move for the window that just ended.
    pub label: MoveLabel,
    /// Per-class scores from the classifier.
    pub scores: [f64; 3],
    /// Wall time spent featurizing + classifying this trigger, microseconds.
    pub latency_us: f64,
}

/// Everything one replay produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayLog {
    pub events: Vec<ReplayEvent>,
    pub samples_processed: usize,
    /// Wall time for the whole replay (classification included).
    pub elapsed: Duration,
    /// Triggers whose window was too short to featurize (possible only in
    /// the first couple of samples of a stream).
    pub skipped_triggers: usize,
}

impl ReplayLog {
    /// Samples pushed per second of wall time.
    pub fn throughput(&self) -> f64 {
        self.samples_processed as f64 / self.elapsed.as_secs_f64().max(1e-12)
    }
}

/// Replays a recorded trajectory through the streaming monitor and the given
/// classifier, as if the samples were arriving live.
pub fn replay_stream(
    traj: &Trajectory,
    cfg: &MonitorConfig,
    model: &TrainedModel,
    pace: Pace,
) -> Result<ReplayLog> {
    let mut state = MonitorState::new(*cfg)?;
    let mut events = Vec::new();
    let mut skipped = 0usize;
    let sample_period = Duration::from_secs_f64(1.0 / traj.rate_hz());

    let started = Instant::now();
    for sample in traj.samples() {
        if pace == Pace::RealTime {
            std::thread::sleep(sample_period);
        }
        if let Some(window) = state.stream_step(*sample)? {
            if window.samples.len() < cfg.window + 2 {
                skipped += 1;
                continue;
            }
            let classify_started = Instant::now();
            let thetas: Vec<f64> = window.samples.iter().map(|s| s.theta).collect();
            let features = extract_features(&thetas, cfg.window)?;
            let prediction = model.predict(features)?;
            let latency_us = classify_started.elapsed().as_secs_f64() * 1e6;
            events.push(ReplayEvent {
                index: window.event.index,
                direction: window.event.direction,
                label: prediction.label,
                scores: prediction.scores,
                latency_us,
            });
        }
    }

    Ok(ReplayLog {
        events,
        samples_processed: traj.len(),
        elapsed: started.elapsed(),
        skipped_triggers: skipped,
    })
}
