//! Sparse triplet text format for generator matrices.
//!
//! ```text
//! triplet <rows> <cols> <nnz>
//! # free-form metadata lines
//! <row> <col> <value>
//! ```
//!
//! Indices are 0-based; values use the shortest round-trip decimal form.

use nalgebra::DMatrix;

use super::DiscreteGenerator;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TripletMatrix {
    pub rows: usize,
    pub cols: usize,
    pub metadata: Vec<String>,
    pub entries: Vec<(usize, usize, f64)>,
}

impl TripletMatrix {
    pub fn from_dense(a: &DMatrix<f64>, metadata: Vec<String>) -> Self {
        let mut entries = Vec::new();
        for r in 0..a.nrows() {
            for c in 0..a.ncols() {
                let v = a[(r, c)];
                if v != 0.0 {
                    entries.push((r, c, v));
                }
            }
        }
        Self {
            rows: a.nrows(),
            cols: a.ncols(),
            metadata,
            entries,
        }
    }

    /// Duplicate entries are summed.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.entries {
            a[(r, c)] += v;
        }
        a
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "triplet {} {} {}\n",
            self.rows,
            self.cols,
            self.entries.len()
        );
        for m in &self.metadata {
            out.push_str("# ");
            out.push_str(m);
            out.push('\n');
        }
        for (r, c, v) in &self.entries {
            out.push_str(&format!("{r} {c} {v}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Parse("empty triplet file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "triplet" {
            return Err(Error::Parse(format!("bad header {header:?}")));
        }
        let num = |s: &str, what: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad {what} {s:?} in header")))
        };
        let rows = num(fields[1], "row count")?;
        let cols = num(fields[2], "column count")?;
        let nnz = num(fields[3], "entry count")?;
        let mut metadata = Vec::new();
        let mut entries = Vec::new();
        for (k, line) in lines {
            let line = line.trim_end();
            if let Some(m) = line.strip_prefix('#') {
                if !entries.is_empty() {
                    return Err(Error::Parse(format!(
                        "line {}: metadata after entries",
                        k + 1
                    )));
                }
                metadata.push(m.strip_prefix(' ').unwrap_or(m).to_string());
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::Parse(format!(
                    "line {}: expected `row col value`",
                    k + 1
                )));
            }
            let r: usize = f[0]
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad row {:?}", k + 1, f[0])))?;
            let c: usize = f[1]
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad column {:?}", k + 1, f[1])))?;
            let v: f64 = f[2]
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad value {:?}", k + 1, f[2])))?;
            if r >= rows || c >= cols {
                return Err(Error::Parse(format!(
                    "line {}: index ({r}, {c}) outside {rows}x{cols}",
                    k + 1
                )));
            }
            if !v.is_finite() {
                return Err(Error::Parse(format!("line {}: non-finite value", k + 1)));
            }
            if entries.len() == nnz {
                return Err(Error::Parse(format!(
                    "more than the declared {nnz} entries"
                )));
            }
            entries.push((r, c, v));
        }
        if entries.len() != nnz {
            return Err(Error::Parse(format!(
                "declared {nnz} entries, found {}",
                entries.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            metadata,
            entries,
        })
    }
}

pub fn export_generator(gen: &DiscreteGenerator) -> String {
    TripletMatrix::from_dense(&gen.matrix, vec![gen.description()]).to_text()
}
