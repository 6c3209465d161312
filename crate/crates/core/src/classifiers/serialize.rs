//! Plain-text model files.
//!
//! Layout: a `waggle-model v1 <kind>` header, an optional standardizer block,
//! the kind-specific parameter blocks, and an `end` sentinel that catches
//! truncation. Scalars use `key=value` lines; matrices are block headers
//! followed by whitespace-separated rows. Floats print with 17 significant
//! digits so round-trips are exact to the bit.

use super::{
    ClassifierKind, ClassifierModel, LogisticModel, MlpModel, PairClassifier, SvmRbfModel,
    TrainedModel,
};
use crate::error::{Error, Result};
use crate::features::Standardizer;
use crate::signal::MoveLabel;
use std::fmt::Write as _;

const MAGIC: &str = "waggle-model";
const VERSION: &str = "v1";

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

fn push_row(out: &mut String, row: &[f64]) {
    for (i, v) in row.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&fmt_f(*v));
    }
    out.push('\n');
}

/// Renders a trained model (with its normalization, if any) as text.
pub fn serialize_model(model: &TrainedModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {VERSION} {}", model.kind().name());
    if let Some(s) = &model.standardizer {
        out.push_str("standardizer\n");
        push_row(&mut out, &s.means);
        push_row(&mut out, &s.stds);
    }
    match &model.model {
        ClassifierModel::Logistic(m) => {
            out.push_str("weights\n");
            for row in &m.weights {
                push_row(&mut out, row);
            }
            out.push_str("bias\n");
            push_row(&mut out, &m.bias);
        }
        ClassifierModel::Mlp(m) => {
            out.push_str("w1\n");
            for row in &m.w1 {
                push_row(&mut out, row);
            }
            out.push_str("b1\n");
            push_row(&mut out, &m.b1);
            out.push_str("w2\n");
            for row in &m.w2 {
                push_row(&mut out, row);
            }
            out.push_str("b2\n");
            push_row(&mut out, &m.b2);
        }
        ClassifierModel::Svm(m) => {
            let _ = writeln!(out, "gamma={}", fmt_f(m.gamma));
            let _ = writeln!(out, "pairs={}", m.pairs.len());
            for p in &m.pairs {
                let _ = writeln!(out, "pair={} {}", p.positive.code(), p.negative.code());
                let _ = writeln!(out, "bias={}", fmt_f(p.bias));
                let _ = writeln!(out, "nsv={}", p.vectors.len());
                for (v, c) in p.vectors.iter().zip(&p.coeffs) {
                    push_row(&mut out, &[*c, v[0], v[1]]);
                }
            }
        }
    }
    out.push_str("end\n");
    out
}

/// Line cursor that remembers byte offsets for error reporting.
struct Cursor<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
    total: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Cursor<'a> {
        let mut lines = Vec::new();
        let mut offset = 0;
        for line in text.split('\n') {
            let trimmed = line.trim();
            if !trimmed.is_empty() {
                lines.push((offset + (line.len() - line.trim_start().len()), trimmed));
            }
            offset += line.len() + 1;
        }
        Cursor {
            lines,
            pos: 0,
            total: text.len(),
        }
    }

    fn err(&self, offset: usize, msg: impl Into<String>) -> Error {
        Error::ModelParse {
            offset,
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Result<(usize, &'a str)> {
        match self.lines.get(self.pos) {
            Some(&entry) => {
                self.pos += 1;
                Ok(entry)
            }
            None => Err(self.err(self.total, "unexpected end of model file")),
        }
    }

    fn peek(&self) -> Option<&'a str> {
        self.lines.get(self.pos).map(|&(_, s)| s)
    }

    fn expect(&mut self, keyword: &str) -> Result<()> {
        let (off, line) = self.next()?;
        if line == keyword {
            Ok(())
        } else {
            Err(self.err(off, format!("expected {keyword:?}, found {line:?}")))
        }
    }

    /// Parses `key=value`, returning the raw value.
    fn keyed(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (off, line) = self.next()?;
        match line.split_once('=') {
            Some((k, v)) if k == key => Ok((off, v)),
            _ => Err(self.err(off, format!("expected {key}=..., found {line:?}"))),
        }
    }

    /// Parses a line of exactly `n` whitespace-separated floats.
    fn floats(&mut self, n: usize) -> Result<Vec<f64>> {
        let (off, line) = self.next()?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| self.err(off, format!("bad number {t:?}")))
            })
            .collect::<Result<_>>()?;
        if vals.len() != n {
            return Err(self.err(off, format!("expected {n} numbers, found {}", vals.len())));
        }
        Ok(vals)
    }

    fn rows2(&mut self) -> Result<[f64; 2]> {
        let v = self.floats(2)?;
        Ok([v[0], v[1]])
    }

    fn rows3(&mut self) -> Result<[f64; 3]> {
        let v = self.floats(3)?;
        Ok([v[0], v[1], v[2]])
    }
}

/// Parses a model file produced by [`serialize_model`].
pub fn deserialize_model(text: &str) -> Result<TrainedModel> {
    let mut cur = Cursor::new(text);

    let (off, header) = cur.next()?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some(MAGIC) {
        return Err(cur.err(off, "not a model file (missing magic)"));
    }
    match tokens.next() {
        Some(VERSION) => {}
        Some(other) => {
            return Err(Error::UnsupportedVersion {
                found: other.to_string(),
            })
        }
        None => return Err(cur.err(off, "header missing version")),
    }
    let kind: ClassifierKind = match tokens.next() {
        Some(k) => k
            .parse()
            .map_err(|_| cur.err(off, format!("unknown classifier kind {k:?}")))?,
        None => return Err(cur.err(off, "header missing classifier kind")),
    };
    if tokens.next().is_some() {
        return Err(cur.err(off, "trailing tokens in header"));
    }

    let standardizer = if cur.peek() == Some("standardizer") {
        cur.next()?;
        Some(Standardizer {
            means: cur.rows2()?,
            stds: cur.rows2()?,
        })
    } else {
        None
    };

    let model = match kind {
        ClassifierKind::Logistic => {
            cur.expect("weights")?;
            let weights = [cur.rows2()?, cur.rows2()?, cur.rows2()?];
            cur.expect("bias")?;
            let bias = cur.rows3()?;
            ClassifierModel::Logistic(LogisticModel { weights, bias })
        }
        ClassifierKind::Mlp => {
            cur.expect("w1")?;
            let w1 = [cur.rows2()?, cur.rows2()?, cur.rows2()?];
            cur.expect("b1")?;
            let b1 = cur.rows3()?;
            cur.expect("w2")?;
            let w2 = [cur.rows3()?, cur.rows3()?, cur.rows3()?];
            cur.expect("b2")?;
            let b2 = cur.rows3()?;
            ClassifierModel::Mlp(MlpModel { w1, b1, w2, b2 })
        }
        ClassifierKind::Svm => {
            let (goff, gval) = cur.keyed("gamma")?;
            let gamma: f64 = gval
                .parse()
                .map_err(|_| cur.err(goff, format!("bad number {gval:?}")))?;
            let (poff, pval) = cur.keyed("pairs")?;
            let count: usize = pval
                .parse()
                .map_err(|_| cur.err(poff, format!("bad pair count {pval:?}")))?;
            let mut pairs = Vec::with_capacity(count);
            for _ in 0..count {
                let (coff, cval) = cur.keyed("pair")?;
                let codes: Vec<i64> = cval
                    .split_whitespace()
                    .map(|t| {
                        t.parse::<i64>()
                            .map_err(|_| cur.err(coff, format!("bad label code {t:?}")))
                    })
                    .collect::<Result<_>>()?;
                if codes.len() != 2 {
                    return Err(cur.err(coff, "pair needs exactly two label codes"));
                }
                let positive = MoveLabel::from_code(codes[0])
                    .ok_or_else(|| cur.err(coff, format!("unknown label code {}", codes[0])))?;
                let negative = MoveLabel::from_code(codes[1])
                    .ok_or_else(|| cur.err(coff, format!("unknown label code {}", codes[1])))?;
                let (boff, bval) = cur.keyed("bias")?;
                let bias: f64 = bval
                    .parse()
                    .map_err(|_| cur.err(boff, format!("bad number {bval:?}")))?;
                let (noff, nval) = cur.keyed("nsv")?;
                let nsv: usize = nval
                    .parse()
                    .map_err(|_| cur.err(noff, format!("bad vector count {nval:?}")))?;
                let mut vectors = Vec::with_capacity(nsv);
                let mut coeffs = Vec::with_capacity(nsv);
                for _ in 0..nsv {
                    let row = cur.floats(3)?;
                    coeffs.push(row[0]);
                    vectors.push([row[1], row[2]]);
                }
                pairs.push(PairClassifier {
                    positive,
                    negative,
                    vectors,
                    coeffs,
                    bias,
                });
            }
            ClassifierModel::Svm(SvmRbfModel { gamma, pairs })
        }
    };

    cur.expect("end")?;
    if let Some(extra) = cur.peek() {
        let (off, _) = cur.lines[cur.pos];
        return Err(cur.err(off, format!("trailing content {extra:?}")));
    }

    Ok(TrainedModel {
        model,
        standardizer,
    })
}
