//! One error type for the whole pipeline.
//!
//! Variants are grouped by the stage that raises them; the CLI maps every
//! variant onto exactly one process exit code via [`Error::exit_code`].

use crate::signal::MoveLabel;

/// Everything that can go wrong between loading a trajectory and writing a report.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    // --- signal transforms ---
    /// Window of zero length was requested.
    #[error("window length must be at least 1")]
    InvalidWindow,
    /// Series shorter than the averaging window: no output values exist.
    #[error("series of length {len} is shorter than window {window}")]
    EmptyWindow { len: usize, window: usize },
    /// Series shorter than the operation's minimum.
    #[error("series of length {len} is too short (need at least {min})")]
    TooShort { len: usize, min: usize },
    /// Angle was NaN or infinite.
    #[error("non-finite angle at sample index {index}")]
    InvalidAngle { index: usize },

    // --- streaming ---
    /// Stream sample arrived with the wrong index.
    #[error("out-of-order sample: expected index {expected}, got {got}")]
    OutOfOrder { expected: usize, got: usize },

    // --- features ---
    /// A segment is too short to produce both features.
    #[error("segment {ordinal} has {len} samples, need at least {min} to extract features")]
    SegmentTooShort {
        ordinal: usize,
        len: usize,
        min: usize,
    },

    // --- classifiers ---
    /// Training table does not contain at least two distinct labels.
    #[error("training requires at least two distinct classes")]
    DegenerateLabels,
    /// Non-finite or structurally invalid input.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The SMO solver hit its hard iteration cap on one one-vs-one subproblem.
    #[error("SMO did not converge for class pair {a:?} vs {b:?}")]
    ConvergenceFailure { a: MoveLabel, b: MoveLabel },
    /// Model file declares a version this build does not read.
    #[error("unsupported model version {found:?} (supported: v1)")]
    UnsupportedVersion { found: String },
    /// Model file is malformed.
    #[error("model parse error at byte {offset}: {msg}")]
    ModelParse { offset: usize, msg: String },

    // --- evaluation / feature tables ---
    /// Fewer rows than the operation needs (folds, standardizer fit, ...).
    #[error("not enough rows: have {rows}, need at least {min}")]
    TooFewRows { rows: usize, min: usize },
    /// k makes no sense.
    #[error("fold count must be at least 2, got {k}")]
    InvalidK { k: usize },
    /// Truth/prediction length mismatch or malformed matrix shape.
    #[error("shape mismatch: {left} vs {right}")]
    ShapeError { left: usize, right: usize },
    /// A training split lost an entire class.
    #[error("fold {fold} has no {class:?} rows left for training")]
    DegenerateFold { fold: usize, class: MoveLabel },

    // --- synthesis ---
    /// Dance spec or corpus ranges fail validation.
    #[error("invalid dance spec: {0}")]
    InvalidSpec(String),

    // --- io ---
    /// Malformed CSV row.
    #[error("parse error at line {line}: {msg}")]
    CsvParse { line: usize, msg: String },
    /// Label column held something outside {-1, 0, 1}.
    #[error("invalid label {value} at line {line} (expected -1, 0 or 1)")]
    InvalidLabel { line: usize, value: String },
    /// Sample indices were not contiguous from 0.
    #[error("index gap at line {line}: expected {expected}, got {got}")]
    GapError {
        line: usize,
        expected: usize,
        got: usize,
    },
    /// Underlying filesystem error.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code the CLI uses for this error.
    ///
    /// 2 = data/usage-of-data problems, 3 = training failed to converge.
    /// (Exit 1 is reserved for command-line usage errors and never produced
    /// by the library.)
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConvergenceFailure { .. } => 3,
            _ => 2,
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convergence_failures_map_to_exit_3_everything_else_to_2() {
        let convergence = Error::ConvergenceFailure {
            a: MoveLabel::TurnRight,
            b: MoveLabel::Waggle,
        };
        assert_eq!(convergence.exit_code(), 3);

        let data_errors: Vec<Error> = vec![
            Error::InvalidWindow,
            Error::EmptyWindow { len: 2, window: 3 },
            Error::TooShort { len: 1, min: 2 },
            Error::InvalidAngle { index: 7 },
            Error::OutOfOrder {
                expected: 4,
                got: 9,
            },
            Error::SegmentTooShort {
                ordinal: 0,
                len: 3,
                min: 5,
            },
            Error::DegenerateLabels,
            Error::InvalidInput("x".into()),
            Error::UnsupportedVersion {
                found: "v99".into(),
            },
            Error::ModelParse {
                offset: 12,
                msg: "bad".into(),
            },
            Error::TooFewRows { rows: 3, min: 5 },
            Error::InvalidK { k: 1 },
            Error::ShapeError { left: 3, right: 4 },
            Error::DegenerateFold {
                fold: 2,
                class: MoveLabel::TurnLeft,
            },
            Error::InvalidSpec("empty".into()),
            Error::CsvParse {
                line: 3,
                msg: "bad".into(),
            },
            Error::InvalidLabel {
                line: 5,
                value: "7".into(),
            },
            Error::GapError {
                line: 6,
                expected: 5,
                got: 7,
            },
            Error::Io(std::io::Error::new(std::io::ErrorKind::Other, "x")),
        ];
        for e in data_errors {
            assert_eq!(e.exit_code(), 2, "{e}");
        }
    }

    #[test]
    fn messages_carry_locations() {
        let e = Error::GapError {
            line: 41,
            expected: 40,
            got: 44,
        };
        let msg = e.to_string();
        assert!(msg.contains("41") && msg.contains("40") && msg.contains("44"));

        let e = Error::ModelParse {
            offset: 123,
            msg: "truncated block".into(),
        };
        assert!(e.to_string().contains("123"));
    }
}
