//! alist text format (MacKay): dimensions, maximum degrees, degree lists
//! and 1-based adjacency lists padded with zeros.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::code::SparseMatrix;
use super::puncture::PunctureMask;
use crate::{Error, Result};

pub fn write_alist(h: &SparseMatrix) -> String {
    let cd = h.column_degrees();
    let rd = h.row_degrees();
    let (max_c, max_r) = (cd.iter().copied().max().unwrap_or(0), rd.iter().copied().max().unwrap_or(0));
    let mut s = String::new();
    let join = |v: &mut dyn Iterator<Item = usize>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let _ = writeln!(s, "{} {}", h.cols(), h.rows());
    let _ = writeln!(s, "{max_c} {max_r}");
    let _ = writeln!(s, "{}", join(&mut cd.iter().copied()));
    let _ = writeln!(s, "{}", join(&mut rd.iter().copied()));
    for j in 0..h.cols() {
        let col = h.col(j);
        let _ = writeln!(s, "{}", join(&mut col.iter().map(|i| i + 1).chain(std::iter::repeat_n(0, max_c - col.len()))));
    }
    for i in 0..h.rows() {
        let row = h.row(i);
        let _ = writeln!(s, "{}", join(&mut row.iter().map(|j| j + 1).chain(std::iter::repeat_n(0, max_r - row.len()))));
    }
    s
}

pub fn read_alist(text: &str) -> Result<SparseMatrix> {
    let mut nums = text.split_whitespace().map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("'{t}': {e}"))));
    let mut next = || nums.next().unwrap_or_else(|| Err(Error::Parse("unexpected end of file".into())));
    let (n, m) = (next()?, next()?);
    let (max_c, max_r) = (next()?, next()?);
    let cd = (0..n).map(|_| next()).collect::<Result<Vec<_>>>()?;
    let rd = (0..m).map(|_| next()).collect::<Result<Vec<_>>>()?;
    let mut cols = Vec::with_capacity(n);
    for (j, &d) in cd.iter().enumerate() {
        let entries = (0..max_c).map(|_| next()).collect::<Result<Vec<_>>>()?;
        let col: Vec<usize> = entries.iter().filter(|&&e| e > 0).map(|e| e - 1).collect();
        if col.len() != d {
            return Err(Error::Parse(format!("column {j} lists {} entries, degree says {d}", col.len())));
        }
        cols.push(col);
    }
    let h = SparseMatrix::from_columns(m, cols).map_err(|e| Error::Parse(e.to_string()))?;
    for (i, &d) in rd.iter().enumerate() {
        let entries = (0..max_r).map(|_| next()).collect::<Result<Vec<_>>>()?;
        let mut row: Vec<usize> = entries.iter().filter(|&&e| e > 0).map(|e| e - 1).collect();
        row.sort_unstable();
        if row.len() != d || row != h.row(i) {
            return Err(Error::Parse(format!("row {i} disagrees with the column lists")));
        }
    }
    Ok(h)
}

/// Record stored next to an alist file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeSidecar {
    pub seed: u64,
    pub n_code: usize,
    pub k_info: usize,
    pub girth: Option<usize>,
    pub punctures: Vec<PunctureMask>,
}

impl CodeSidecar {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sidecar serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}
