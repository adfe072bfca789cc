//! LIBSVM sparse text format: `label index:value index:value ...` per line.

use std::fmt::Write as _;
use std::io::BufRead;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    /// +1 or -1.
    pub label: f64,
    /// `(index, value)` with 1-based, strictly increasing indices.
    pub features: Vec<(usize, f64)>,
}

impl Row {
    /// `<w, x>` using 1-based feature indices into a dense `w`.
    pub fn dot(&self, w: &[f64]) -> f64 {
        self.features.iter().map(|&(i, v)| v * w[i - 1]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub rows: Vec<Row>,
    pub num_features: usize,
}

impl Dataset {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_line(lineno: usize, text: &str) -> Result<Option<Row>> {
    let text = match text.find('#') {
        Some(i) => &text[..i],
        None => text,
    };
    let mut tokens = text.split_whitespace();
    let Some(label_tok) = tokens.next() else {
        return Ok(None);
    };
    let label = match label_tok.parse::<f64>() {
        Ok(l) if l == 1.0 || l == -1.0 => l,
        _ => return Err(parse_err(lineno, format!("malformed label '{label_tok}'"))),
    };
    let mut features = Vec::new();
    let mut last = 0usize;
    for tok in tokens {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| parse_err(lineno, format!("expected index:value, got '{tok}'")))?;
        let idx: usize = idx
            .parse()
            .map_err(|_| parse_err(lineno, format!("malformed index '{idx}'")))?;
        if idx < 1 {
            return Err(parse_err(lineno, "feature index must be at least 1"));
        }
        if idx <= last {
            return Err(parse_err(lineno, format!("non-increasing index {idx} after {last}")));
        }
        let val: f64 = val
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| parse_err(lineno, format!("non-numeric value '{val}'")))?;
        features.push((idx, val));
        last = idx;
    }
    Ok(Some(Row { label, features }))
}

pub fn parse_libsvm<R: BufRead>(reader: R) -> Result<Dataset> {
    let mut data = Dataset::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| parse_err(i + 1, e.to_string()))?;
        if let Some(row) = parse_line(i + 1, &line)? {
            if let Some(&(idx, _)) = row.features.last() {
                data.num_features = data.num_features.max(idx);
            }
            data.rows.push(row);
        }
    }
    Ok(data)
}

pub fn parse_libsvm_str(text: &str) -> Result<Dataset> {
    parse_libsvm(text.as_bytes())
}

/// Canonical serialization: `+1`/`-1` labels and shortest round-trip floats.
pub fn to_libsvm_string(data: &Dataset) -> String {
    let mut out = String::new();
    for row in &data.rows {
        out.push_str(if row.label > 0.0 { "+1" } else { "-1" });
        for (i, v) in &row.features {
            let _ = write!(out, " {i}:{v}");
        }
        out.push('\n');
    }
    out
}

/// A labelled sparse dataset from a planted linear model with label noise.
/// Feature values are rounded to three decimals so the text form is exact.
pub fn synthetic_dataset(rows: usize, features: usize, density: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..features).map(|_| rng.sample(StandardNormal)).collect();
    let mut data = Dataset {
        rows: Vec::with_capacity(rows),
        num_features: 0,
    };
    for _ in 0..rows {
        let mut feats: Vec<(usize, f64)> = Vec::new();
        for i in 1..=features {
            if rng.random::<f64>() < density {
                feats.push((i, (rng.random_range(0.05..1.0f64) * 1000.0).round() / 1000.0));
            }
        }
        if feats.is_empty() {
            let i = rng.random_range(1..=features);
            feats.push((i, 1.0));
        }
        let margin: f64 = feats.iter().map(|&(i, v)| v * w[i - 1]).sum();
        let noise: f64 = rng.sample(StandardNormal);
        let label = if margin / (feats.len() as f64).sqrt() + 0.5 * noise >= 0.0 {
            1.0
        } else {
            -1.0
        };
        data.num_features = data.num_features.max(feats.last().map_or(0, |f| f.0));
        data.rows.push(Row { label, features: feats });
    }
    data
}
