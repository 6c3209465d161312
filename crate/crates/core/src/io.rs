//! CSV readers and writers for every file the tools exchange.
//!
//! The formats are deliberately small — fixed headers, no quoting, no
//! embedded commas — so they are parsed by hand and every parse error can
//! point at its 1-based line. Floats are written with 17 significant digits,
//! which round-trips `f64` exactly.
//!
//! * trajectory: `index,x,y,theta,label`
//! * segments: `start,end,label`
//! * features: `bee_id,segment_idx,x1,x2,label`
//! * scatter: `x1,x2,label`
//! * eval summary: `dataset,classifier,rows,accuracy,f_weighted,f_macro`
//! * event log: `index,direction,label,score_tr,score_tl,score_w,latency_us`
//!
//! The label column holds `waggle`, `turn-right`, `turn-left`, or is empty
//! for unlabeled rows.

use crate::error::{Error, Result};
use crate::eval::EvalReport;
use crate::features::{FeatureRow, FeatureTable, FeatureVector};
use crate::monitor::CrossingDirection;
use crate::replay::ReplayLog;
use crate::signal::{MoveLabel, Sample, Segment, Trajectory};
use std::io::{BufRead, Write};

const TRAJECTORY_HEADER: &str = "index,x,y,theta,label";
const SEGMENTS_HEADER: &str = "start,end,label";
const FEATURES_HEADER: &str = "bee_id,segment_idx,x1,x2,label";
const SCATTER_HEADER: &str = "x1,x2,label";
const EVAL_HEADER: &str = "dataset,classifier,rows,accuracy,f_weighted,f_macro";
const EVENTS_HEADER: &str = "index,direction,label,score_tr,score_tl,score_w,latency_us";

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

fn label_str(label: Option<MoveLabel>) -> String {
    label.map(|l| l.to_string()).unwrap_or_default()
}

fn parse_label(token: &str, line: usize) -> Result<Option<MoveLabel>> {
    match token {
        "" => Ok(None),
        "waggle" => Ok(Some(MoveLabel::Waggle)),
        "turn-right" => Ok(Some(MoveLabel::TurnRight)),
        "turn-left" => Ok(Some(MoveLabel::TurnLeft)),
        other => Err(Error::InvalidLabel {
            line,
            value: other.to_string(),
        }),
    }
}

fn parse_f64(token: &str, line: usize, what: &str) -> Result<f64> {
    token.parse().map_err(|_| Error::CsvParse {
        line,
        msg: format!("bad {what} {token:?}"),
    })
}

fn parse_usize(token: &str, line: usize, what: &str) -> Result<usize> {
    token.parse().map_err(|_| Error::CsvParse {
        line,
        msg: format!("bad {what} {token:?}"),
    })
}

/// Splits a data line into exactly `n` comma-separated fields.
fn fields(line_text: &str, n: usize, line: usize) -> Result<Vec<&str>> {
    let parts: Vec<&str> = line_text.split(',').collect();
    if parts.len() != n {
        return Err(Error::CsvParse {
            line,
            msg: format!("expected {n} columns, found {}", parts.len()),
        });
    }
    Ok(parts)
}

/// Reads non-empty lines, checking the header, and hands each data line with
/// its 1-based line number to the callback.
fn for_each_row(
    reader: impl BufRead,
    header: &str,
    mut row: impl FnMut(usize, &str) -> Result<()>,
) -> Result<()> {
    let mut saw_header = false;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let text = line?;
        let trimmed = text.trim_end_matches('\r');
        if !saw_header {
            if trimmed != header {
                return Err(Error::CsvParse {
                    line: line_no,
                    msg: format!("expected header {header:?}, found {trimmed:?}"),
                });
            }
            saw_header = true;
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        row(line_no, trimmed)?;
    }
    if !saw_header {
        return Err(Error::CsvParse {
            line: 1,
            msg: format!("empty file, expected header {header:?}"),
        });
    }
    Ok(())
}

/// Writes a trajectory, floats at full precision.
pub fn write_trajectory(mut w: impl Write, traj: &Trajectory) -> Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for s in traj.samples() {
        writeln!(
            w,
            "{},{},{},{},{}",
            s.index,
            fmt_f(s.x),
            fmt_f(s.y),
            fmt_f(s.theta),
            label_str(s.label)
        )?;
    }
    Ok(())
}

/// Reads a trajectory. `degrees` converts the theta column from degrees;
/// sample indices must be contiguous from zero.
pub fn read_trajectory(reader: impl BufRead, rate_hz: f64, degrees: bool) -> Result<Trajectory> {
    let mut samples: Vec<Sample> = Vec::new();
    for_each_row(reader, TRAJECTORY_HEADER, |line, text| {
        let f = fields(text, 5, line)?;
        let index = parse_usize(f[0], line, "index")?;
        let expected = samples.len();
        if index != expected {
            return Err(Error::GapError {
                line,
                expected,
                got: index,
            });
        }
        let mut theta = parse_f64(f[3], line, "theta")?;
        if degrees {
            theta = theta.to_radians();
        }
        samples.push(Sample {
            index,
            x: parse_f64(f[1], line, "x")?,
            y: parse_f64(f[2], line, "y")?,
            theta,
            label: parse_label(f[4], line)?,
        });
        Ok(())
    })?;
    Trajectory::new(samples, rate_hz)
}

pub fn write_segments(mut w: impl Write, segments: &[Segment]) -> Result<()> {
    writeln!(w, "{SEGMENTS_HEADER}")?;
    for s in segments {
        writeln!(w, "{},{},{}", s.start, s.end, label_str(s.label))?;
    }
    Ok(())
}

pub fn read_segments(reader: impl BufRead) -> Result<Vec<Segment>> {
    let mut out = Vec::new();
    for_each_row(reader, SEGMENTS_HEADER, |line, text| {
        let f = fields(text, 3, line)?;
        let start = parse_usize(f[0], line, "start")?;
        let end = parse_usize(f[1], line, "end")?;
        if end <= start {
            return Err(Error::CsvParse {
                line,
                msg: format!("segment [{start}, {end}) is empty or reversed"),
            });
        }
        out.push(Segment {
            start,
            end,
            label: parse_label(f[2], line)?,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn write_feature_table(mut w: impl Write, table: &FeatureTable) -> Result<()> {
    writeln!(w, "{FEATURES_HEADER}")?;
    for r in &table.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.source,
            r.ordinal,
            fmt_f(r.features.x1),
            fmt_f(r.features.x2),
            label_str(r.label)
        )?;
    }
    Ok(())
}

pub fn read_feature_table(reader: impl BufRead) -> Result<FeatureTable> {
    let mut rows = Vec::new();
    for_each_row(reader, FEATURES_HEADER, |line, text| {
        let f = fields(text, 5, line)?;
        rows.push(FeatureRow {
            source: f[0].to_string(),
            ordinal: parse_usize(f[1], line, "segment_idx")?,
            features: FeatureVector {
                x1: parse_f64(f[2], line, "x1")?,
                x2: parse_f64(f[3], line, "x2")?,
            },
            label: parse_label(f[4], line)?,
        });
        Ok(())
    })?;
    Ok(FeatureTable { rows })
}

/// Projection of a feature table for plotting: feature pair plus label.
pub fn write_scatter(mut w: impl Write, table: &FeatureTable) -> Result<()> {
    writeln!(w, "{SCATTER_HEADER}")?;
    for r in &table.rows {
        writeln!(
            w,
            "{},{},{}",
            fmt_f(r.features.x1),
            fmt_f(r.features.x2),
            label_str(r.label)
        )?;
    }
    Ok(())
}

/// One summary line per (dataset, report) pair.
pub fn write_eval_csv(mut w: impl Write, rows: &[(String, EvalReport)]) -> Result<()> {
    writeln!(w, "{EVAL_HEADER}")?;
    for (dataset, report) in rows {
        writeln!(
            w,
            "{},{},{},{:.6},{:.6},{:.6}",
            dataset,
            report.classifier,
            report.rows,
            report.metrics.accuracy,
            report.metrics.f_weighted,
            report.metrics.f_macro
        )?;
    }
    Ok(())
}

/// The streaming decision log: one line per classified trigger.
pub fn write_event_log(mut w: impl Write, log: &ReplayLog) -> Result<()> {
    writeln!(w, "{EVENTS_HEADER}")?;
    for e in &log.events {
        let dir = match e.direction {
            CrossingDirection::Downward => "downward",
            CrossingDirection::Upward => "upward",
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{:.3}",
            e.index,
            dir,
            e.label,
            fmt_f(e.scores[0]),
            fmt_f(e.scores[1]),
            fmt_f(e.scores[2]),
            e.latency_us
        )?;
    }
    Ok(())
}
