//! Plain-text tensor files.
//!
//! ```text
//! # comment
//! m n
//! i1 i2 ... im value
//! ```
//!
//! Indices are 1-based; `#` starts a comment anywhere on a line.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::{Tensor, TensorError};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("empty tensor file: missing `m n` header")]
    Empty,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: TensorError,
    },
    #[error("{0}")]
    Tensor(#[from] TensorError),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

/// Parses the text format into a validated tensor.
pub fn parse<T: Scalar>(text: &str) -> Result<Tensor<T>, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or(ParseError::Empty)?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 2 {
        return Err(syntax(hline, format!("expected `m n`, found `{header}`")));
    }
    let order: usize = head[0]
        .parse()
        .map_err(|_| syntax(hline, format!("bad order `{}`", head[0])))?;
    let dim: usize = head[1]
        .parse()
        .map_err(|_| syntax(hline, format!("bad dimension `{}`", head[1])))?;
    if order < 2 || dim < 1 {
        return Err(ParseError::Invalid {
            line: hline,
            source: TensorError::BadShape { order, dim },
        });
    }

    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != order + 1 {
            return Err(syntax(
                lineno,
                format!(
                    "expected {} indices and a value, found {} fields",
                    order,
                    fields.len()
                ),
            ));
        }
        let index = fields[..order]
            .iter()
            .map(|f| {
                f.parse::<usize>()
                    .map_err(|_| syntax(lineno, format!("bad index `{f}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let value: f64 = fields[order]
            .parse()
            .map_err(|_| syntax(lineno, format!("bad value `{}`", fields[order])))?;
        // validate per line so errors carry a line number
        Tensor::<T>::new(order, dim, [(index.clone(), T::lit(value))]).map_err(|source| {
            ParseError::Invalid {
                line: lineno,
                source,
            }
        })?;
        if !seen.insert(index.clone()) {
            return Err(ParseError::Invalid {
                line: lineno,
                source: TensorError::DuplicateIndexTuple { index },
            });
        }
        entries.push((index, T::lit(value)));
    }
    Ok(Tensor::new(order, dim, entries)?)
}

pub fn read<T: Scalar>(path: impl AsRef<Path>) -> Result<Tensor<T>, ParseError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ParseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}

/// Serializes a tensor; values are written with round-trip precision.
pub fn to_text<T: Scalar>(tensor: &Tensor<T>) -> String {
    let mut out = format!("{} {}\n", tensor.order(), tensor.dim());
    for (idx, v) in tensor.entries() {
        for i in idx {
            write!(out, "{i} ").unwrap();
        }
        writeln!(out, "{:?}", v.to_f64().unwrap_or(f64::NAN)).unwrap();
    }
    out
}
