use nalgebra::DMatrix;

use super::MatVec;
use crate::{Error, Result, C64};

/// Compressed sparse row storage, square.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Validates offsets (monotone, final offset = nnz) and column bounds.
    pub fn new(n: usize, row_offsets: Vec<usize>, col_indices: Vec<usize>, values: Vec<C64>) -> Result<Self> {
        if row_offsets.len() != n + 1 {
            return Err(Error::DimensionMismatch { expected: n + 1, got: row_offsets.len() });
        }
        if col_indices.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: col_indices.len(), got: values.len() });
        }
        if row_offsets[0] != 0 || row_offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument("row offsets must start at 0 and be nondecreasing".into()));
        }
        if row_offsets[n] != col_indices.len() {
            return Err(Error::InvalidArgument("final row offset must equal nnz".into()));
        }
        if let Some(&c) = col_indices.iter().find(|&&c| c >= n) {
            return Err(Error::InvalidArgument(format!("column index {c} out of range for n = {n}")));
        }
        Ok(Self { n, row_offsets, col_indices, values })
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// columns within a row are sorted.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, C64)]) -> Result<Self> {
        let mut counts = vec![0usize; n + 1];
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!("entry ({i}, {j}) out of range for n = {n}")));
            }
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![C64::new(0.0, 0.0); triplets.len()];
        for &(i, j, v) in triplets {
            cols[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
        }
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        for i in 0..n {
            let mut row: Vec<(usize, C64)> = (counts[i]..counts[i + 1]).map(|k| (cols[k], vals[k])).collect();
            row.sort_by_key(|e| e.0);
            for (j, v) in row {
                match col_indices.last() {
                    Some(&last) if last == j && col_indices.len() > row_offsets[i] => {
                        *values.last_mut().unwrap() += v;
                    }
                    _ => {
                        col_indices.push(j);
                        values.push(v);
                    }
                }
            }
            row_offsets.push(col_indices.len());
        }
        Self::new(n, row_offsets, col_indices, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn nnz(&self) -> usize {
        self.values.len()
    }
    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }
    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Iterates `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_offsets[i]..self.row_offsets[i + 1]).map(move |k| (i, self.col_indices[k], self.values[k]))
        })
    }
}

impl MatVec for CsrMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            *yi = acc;
        }
    }

    fn apply_adjoint_into(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (i, &xi) in x.iter().enumerate() {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                y[self.col_indices[k]] += self.values[k].conj() * xi;
            }
        }
    }

    fn to_dense(&self) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.triplets() {
            out[(i, j)] += v;
        }
        out
    }
}
