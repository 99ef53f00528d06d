use log::warn;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{TextUnit, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BowKind {
    News,
    Comment,
}

/// Binary sentence-by-term indicator matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BowMatrix {
    pub kind: BowKind,
    pub data: Array2<f64>,
    /// For each row, the position of its sentence in the input list.
    pub source_rows: Vec<usize>,
}

impl BowMatrix {
    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    /// Column ids set in `row`.
    pub fn row_terms(&self, row: usize) -> Vec<usize> {
        self.data
            .row(row)
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(j, _)| j)
            .collect()
    }
}

/// Maps each unit to a 0/1 row over `vocab`. Units without any vocabulary
/// term are dropped (and logged); `source_rows` records which survived.
pub fn vectorize<T: TextUnit>(units: &[T], vocab: &Vocabulary, kind: BowKind) -> BowMatrix {
    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(units.len());
    let mut source_rows = Vec::with_capacity(units.len());
    for (i, u) in units.iter().enumerate() {
        let cols: Vec<usize> = u.terms().iter().filter_map(|t| vocab.get(t)).collect();
        if cols.is_empty() {
            warn!("{kind:?} sentence {i} has no vocabulary term; dropped");
            continue;
        }
        rows.push(cols);
        source_rows.push(i);
    }
    let mut data = Array2::zeros((rows.len(), vocab.len()));
    for (r, cols) in rows.iter().enumerate() {
        for &c in cols {
            data[[r, c]] = 1.0;
        }
    }
    BowMatrix {
        kind,
        data,
        source_rows,
    }
}
