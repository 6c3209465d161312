//! Synthetic dance generator: labeled head-angle recordings with known
//! ground truth, for tests, benchmarks and demos.
//!
//! A dance is `n_cycles` repetitions of waggle, full right turn, waggle,
//! full left turn. During a waggle run the head oscillates around the dance
//! axis; during a turn it sweeps one full loop at constant rate, starting
//! from the heading the waggle ended on and landing exactly back on the
//! axis. Gaussian noise rides on top of everything, and positions are
//! integrated from the headings so plots look like a figure-eight walk.

use crate::error::{Error, Result};
use crate::signal::{wrap_angle, MoveLabel, Sample, Segment, Trajectory, DEFAULT_MIN_SEGMENT_LEN, DEFAULT_RATE_HZ};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::{PI, TAU};

/// Full description of one synthetic dance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DanceSpec {
    /// Dance axis: the mean heading during waggle runs, radians in (-pi, pi].
    pub axis: f64,
    /// Samples per waggle run.
    pub waggle_len: usize,
    /// Samples per full turn.
    pub turn_len: usize,
    /// Waggle/turn-right/waggle/turn-left repetitions.
    pub n_cycles: usize,
    /// Standard deviation of the Gaussian angle noise, radians.
    pub noise_sd: f64,
    /// Sample rate.
    pub rate_hz: f64,
    /// Lateral head-oscillation frequency during waggle runs.
    pub waggle_freq_hz: f64,
    /// Amplitude of that oscillation, radians.
    pub waggle_amp: f64,
    /// Walked distance per sample, for the integrated x/y track.
    pub step_len: f64,
    /// Shortest segment the downstream pipeline should have to digest;
    /// generation refuses specs whose moves would be near or below it.
    pub min_segment_len: usize,
    pub seed: u64,
}

impl Default for DanceSpec {
    fn default() -> Self {
        DanceSpec {
            axis: 0.0,
            waggle_len: 120,
            turn_len: 80,
            n_cycles: 3,
            noise_sd: 0.05,
            rate_hz: DEFAULT_RATE_HZ,
            waggle_freq_hz: 13.0,
            waggle_amp: 0.3,
            step_len: 1.0,
            min_segment_len: DEFAULT_MIN_SEGMENT_LEN,
            seed: 0,
        }
    }
}

impl DanceSpec {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: String| if ok { Ok(()) } else { Err(Error::InvalidSpec(msg)) };
        check(
            self.axis.is_finite() && self.axis > -PI && self.axis <= PI,
            format!("axis must be a finite angle in (-pi, pi], got {}", self.axis),
        )?;
        check(
            self.waggle_len >= self.min_segment_len + 5,
            format!(
                "waggle_len {} leaves no room above min_segment_len {}",
                self.waggle_len, self.min_segment_len
            ),
        )?;
        check(
            self.turn_len >= self.min_segment_len + 5,
            format!(
                "turn_len {} leaves no room above min_segment_len {}",
                self.turn_len, self.min_segment_len
            ),
        )?;
        check(self.n_cycles >= 1, "n_cycles must be at least 1".into())?;
        check(
            self.noise_sd.is_finite() && self.noise_sd >= 0.0,
            format!("noise_sd must be finite and non-negative, got {}", self.noise_sd),
        )?;
        check(
            self.rate_hz.is_finite() && self.rate_hz > 0.0,
            format!("rate_hz must be positive, got {}", self.rate_hz),
        )?;
        check(
            self.waggle_freq_hz.is_finite() && self.waggle_freq_hz > 0.0,
            format!("waggle_freq_hz must be positive, got {}", self.waggle_freq_hz),
        )?;
        check(
            self.waggle_amp.is_finite() && (0.0..PI / 2.0).contains(&self.waggle_amp),
            format!("waggle_amp must be in [0, pi/2), got {}", self.waggle_amp),
        )?;
        check(
            self.step_len.is_finite() && self.step_len >= 0.0,
            format!("step_len must be finite and non-negative, got {}", self.step_len),
        )?;
        Ok(())
    }

    /// Samples in one waggle/turn/waggle/turn cycle.
    pub fn cycle_len(&self) -> usize {
        2 * (self.waggle_len + self.turn_len)
    }

    /// Total samples in the dance.
    pub fn total_len(&self) -> usize {
        self.n_cycles * self.cycle_len()
    }
}

/// The exact ground-truth tiling for a spec: waggle, turn-right, waggle,
/// turn-left, repeated `n_cycles` times.
pub fn truth_segments(spec: &DanceSpec) -> Vec<Segment> {
    let mut out = Vec::with_capacity(4 * spec.n_cycles);
    let mut start = 0;
    for _ in 0..spec.n_cycles {
        for (len, label) in [
            (spec.waggle_len, MoveLabel::Waggle),
            (spec.turn_len, MoveLabel::TurnRight),
            (spec.waggle_len, MoveLabel::Waggle),
            (spec.turn_len, MoveLabel::TurnLeft),
        ] {
            out.push(Segment {
                start,
                end: start + len,
                label: Some(label),
            });
            start += len;
        }
    }
    out
}

/// Generates one dance. Deterministic: the spec (seed included) pins every
/// bit of the output.
pub fn generate_dance(spec: &DanceSpec) -> Result<Trajectory> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise_dist = if spec.noise_sd > 0.0 {
        Some(Normal::new(0.0, spec.noise_sd).map_err(|e| {
            Error::InvalidSpec(format!("noise distribution rejected: {e}"))
        })?)
    } else {
        None
    };
    let noise = move |rng: &mut ChaCha8Rng| match &noise_dist {
        Some(d) => d.sample(rng),
        None => 0.0,
    };

    let total = spec.total_len();
    let mut thetas = Vec::with_capacity(total);
    let mut t = 0usize; // global sample counter, drives the waggle phase

    // Heading the last waggle sample would have without noise; turns start
    // from it so the centerline stays continuous.
    let mut exit_offset = 0.0f64;

    for _ in 0..spec.n_cycles {
        for half in 0..2 {
            // Waggle run: oscillate around the axis.
            for _ in 0..spec.waggle_len {
                let phase = TAU * spec.waggle_freq_hz * t as f64 / spec.rate_hz;
                let swing = spec.waggle_amp * phase.sin();
                thetas.push(wrap_angle(spec.axis + swing + noise(&mut rng)));
                exit_offset = swing;
                t += 1;
            }
            // Full turn: sweep one loop from the exit heading back onto the
            // axis. Right turns decrease the heading, left turns increase it.
            let span = if half == 0 {
                -(TAU + exit_offset)
            } else {
                TAU - exit_offset
            };
            for s in 1..=spec.turn_len {
                let frac = s as f64 / spec.turn_len as f64;
                let center = spec.axis + exit_offset + span * frac;
                thetas.push(wrap_angle(center + noise(&mut rng)));
                t += 1;
            }
        }
    }
    debug_assert_eq!(thetas.len(), total);

    // Integrate positions along the headings.
    let mut samples = Vec::with_capacity(total);
    let (mut x, mut y) = (0.0f64, 0.0f64);
    let truth = truth_segments(spec);
    let mut seg_iter = truth.iter();
    let mut current = seg_iter.next().expect("at least one segment");
    for (i, &theta) in thetas.iter().enumerate() {
        if i >= current.end {
            current = seg_iter.next().expect("tiling covers the dance");
        }
        samples.push(Sample {
            index: i,
            x,
            y,
            theta,
            label: current.label,
        });
        x += spec.step_len * theta.cos();
        y += spec.step_len * theta.sin();
    }

    Trajectory::new(samples, spec.rate_hz)
}

/// Ranges for a whole corpus of randomized dances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusRanges {
    pub n_dances: usize,
    /// Uniform axis range (radians); both ends inclusive-ish (uniform float).
    pub axis: (f64, f64),
    /// Inclusive waggle-run length range.
    pub waggle_len: (usize, usize),
    /// Inclusive turn length range.
    pub turn_len: (usize, usize),
    /// Inclusive cycle-count range.
    pub n_cycles: (usize, usize),
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for CorpusRanges {
    fn default() -> Self {
        CorpusRanges {
            n_dances: 20,
            axis: (-0.2, 0.2),
            waggle_len: (100, 160),
            turn_len: (70, 100),
            n_cycles: (2, 4),
            noise_sd: 0.05,
            seed: 7,
        }
    }
}

impl CorpusRanges {
    fn validate(&self) -> Result<()> {
        if self.n_dances == 0 {
            return Err(Error::InvalidSpec("corpus needs at least one dance".into()));
        }
        if !(self.axis.0.is_finite() && self.axis.1.is_finite()) || self.axis.0 > self.axis.1 {
            return Err(Error::InvalidSpec(format!(
                "axis range ({}, {}) is empty or non-finite",
                self.axis.0, self.axis.1
            )));
        }
        for (name, (lo, hi)) in [
            ("waggle_len", self.waggle_len),
            ("turn_len", self.turn_len),
            ("n_cycles", self.n_cycles),
        ] {
            if lo > hi {
                return Err(Error::InvalidSpec(format!(
                    "{name} range ({lo}, {hi}) is empty"
                )));
            }
        }
        Ok(())
    }
}

/// Draws `n_dances` specs from the ranges and generates each one. The corpus
/// seed pins both the drawn specs and every per-dance seed.
pub fn generate_corpus(ranges: &CorpusRanges) -> Result<Vec<(DanceSpec, Trajectory)>> {
    ranges.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(ranges.seed);
    let mut out = Vec::with_capacity(ranges.n_dances);
    for _ in 0..ranges.n_dances {
        let axis = if ranges.axis.0 == ranges.axis.1 {
            ranges.axis.0
        } else {
            rng.random_range(ranges.axis.0..ranges.axis.1)
        };
        let spec = DanceSpec {
            axis,
            waggle_len: rng.random_range(ranges.waggle_len.0..=ranges.waggle_len.1),
            turn_len: rng.random_range(ranges.turn_len.0..=ranges.turn_len.1),
            n_cycles: rng.random_range(ranges.n_cycles.0..=ranges.n_cycles.1),
            noise_sd: ranges.noise_sd,
            seed: rng.random(),
            ..DanceSpec::default()
        };
        let traj = generate_dance(&spec)?;
        out.push((spec, traj));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monitor::{detect_events, monitoring_series, MonitorConfig};

    #[test]
    fn truth_tiling_matches_the_spec() {
        let spec = DanceSpec::default();
        let segs = truth_segments(&spec);
        assert_eq!(segs.len(), 12);
        assert_eq!(segs[0].start, 0);
        assert_eq!(segs.last().unwrap().end, spec.total_len());
        for w in segs.windows(2) {
            assert_eq!(w[0].end, w[1].start, "tiling gap");
        }
        let labels: Vec<MoveLabel> = segs.iter().map(|s| s.label.unwrap()).collect();
        use MoveLabel::{TurnLeft, TurnRight, Waggle};
        assert_eq!(
            &labels[..4],
            &[Waggle, TurnRight, Waggle, TurnLeft],
            "cycle order"
        );
        assert_eq!(segs[1].end - segs[1].start, spec.turn_len);
        assert_eq!(segs[2].end - segs[2].start, spec.waggle_len);
    }

    #[test]
    fn generated_samples_carry_the_truth_labels() {
        let spec = DanceSpec {
            n_cycles: 2,
            ..DanceSpec::default()
        };
        let traj = generate_dance(&spec).unwrap();
        assert_eq!(traj.len(), spec.total_len());
        for seg in truth_segments(&spec) {
            for s in &traj.samples()[seg.start..seg.end] {
                assert_eq!(s.label, seg.label, "sample {}", s.index);
            }
        }
    }

    #[test]
    fn generation_is_bitwise_deterministic() {
        let spec = DanceSpec::default();
        let a = generate_dance(&spec).unwrap();
        let b = generate_dance(&spec).unwrap();
        assert_eq!(a.len(), b.len());
        for (sa, sb) in a.samples().iter().zip(b.samples()) {
            assert_eq!(sa.theta.to_bits(), sb.theta.to_bits());
            assert_eq!(sa.x.to_bits(), sb.x.to_bits());
        }
        let c = generate_dance(&DanceSpec {
            seed: 1,
            ..spec
        })
        .unwrap();
        assert!(a
            .samples()
            .iter()
            .zip(c.samples())
            .any(|(sa, sc)| sa.theta != sc.theta));
    }

    #[test]
    fn noiseless_turns_land_exactly_on_the_axis() {
        let spec = DanceSpec {
            axis: 0.4,
            noise_sd: 0.0,
            waggle_amp: 0.0,
            ..DanceSpec::default()
        };
        let traj = generate_dance(&spec).unwrap();
        for seg in truth_segments(&spec) {
            if seg.label != Some(MoveLabel::Waggle) {
                let last = traj.samples()[seg.end - 1].theta;
                assert!(
                    (last - spec.axis).abs() < 1e-9,
                    "turn ended at {last}, axis {}",
                    spec.axis
                );
            }
        }
    }

    #[test]
    fn noiseless_monitor_events_stay_inside_turns() {
        let spec = DanceSpec {
            noise_sd: 0.0,
            ..DanceSpec::default()
        };
        let traj = generate_dance(&spec).unwrap();
        let cfg = MonitorConfig::default();
        let events = detect_events(&monitoring_series(&traj, &cfg).unwrap(), &cfg);
        // One downward and one upward crossing per turn, nothing anywhere else.
        assert_eq!(events.len(), 4 * spec.n_cycles, "events: {events:?}");
        let turns: Vec<Segment> = truth_segments(&spec)
            .into_iter()
            .filter(|s| s.label != Some(MoveLabel::Waggle))
            .collect();
        for ev in &events {
            assert!(
                turns.iter().any(|t| ev.index >= t.start && ev.index < t.end),
                "event at {} is outside every turn",
                ev.index
            );
        }
    }

    #[test]
    fn corpus_respects_its_ranges_and_seed() {
        let ranges = CorpusRanges {
            n_dances: 5,
            ..CorpusRanges::default()
        };
        let corpus = generate_corpus(&ranges).unwrap();
        assert_eq!(corpus.len(), 5);
        for (spec, traj) in &corpus {
            assert!((ranges.axis.0..=ranges.axis.1).contains(&spec.axis));
            assert!((ranges.waggle_len.0..=ranges.waggle_len.1).contains(&spec.waggle_len));
            assert!((ranges.turn_len.0..=ranges.turn_len.1).contains(&spec.turn_len));
            assert!((ranges.n_cycles.0..=ranges.n_cycles.1).contains(&spec.n_cycles));
            assert_eq!(traj.len(), spec.total_len());
        }
        let again = generate_corpus(&ranges).unwrap();
        assert_eq!(corpus.len(), again.len());
        for ((s1, t1), (s2, t2)) in corpus.iter().zip(&again) {
            assert_eq!(s1, s2);
            assert_eq!(t1.samples()[10].theta.to_bits(), t2.samples()[10].theta.to_bits());
        }
        // Dances differ from one another.
        assert_ne!(corpus[0].0.seed, corpus[1].0.seed);
    }

    #[test]
    fn bad_specs_are_refused() {
        let base = DanceSpec::default();
        for spec in [
            DanceSpec { waggle_len: 10, ..base },
            DanceSpec { turn_len: 10, ..base },
            DanceSpec { n_cycles: 0, ..base },
            DanceSpec { noise_sd: -0.1, ..base },
            DanceSpec { rate_hz: 0.0, ..base },
            DanceSpec { waggle_amp: 2.0, ..base },
            DanceSpec { axis: f64::NAN, ..base },
        ] {
            assert!(
                matches!(generate_dance(&spec), Err(Error::InvalidSpec(_))),
                "spec accepted: {spec:?}"
            );
        }
        assert!(matches!(
            generate_corpus(&CorpusRanges {
                turn_len: (100, 70),
                ..CorpusRanges::default()
            }),
            Err(Error::InvalidSpec(_))
        ));
    }
}
