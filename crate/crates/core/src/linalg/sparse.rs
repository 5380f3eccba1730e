//! Compressed sparse row matrices.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::{Error, Result};

/// CSR matrix with sorted, unique column indices in every row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

/// Largest row or column count accepted by [`CsrMatrix::read_matrix_market`]; the row
/// pointer array is allocated from the declared size before any entry is read.
pub const MAX_MARKET_DIMENSION: usize = 1 << 24;

/// Coordinate-format accumulation buffer.
#[derive(Debug, Clone, Default)]
pub struct TripletBuffer {
    pub nrows: usize,
    pub ncols: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl TripletBuffer {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            ..Default::default()
        }
    }

    pub fn push(&mut self, row: usize, col: usize, val: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.rows.push(row);
        self.cols.push(col);
        self.vals.push(val);
    }

    /// Appends another buffer; entries keep their order.
    pub fn append(&mut self, other: TripletBuffer) {
        self.rows.extend(other.rows);
        self.cols.extend(other.cols);
        self.vals.extend(other.vals);
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }
}

impl CsrMatrix {
    /// Compresses triplets, summing duplicates in insertion order.
    pub fn from_triplets(buf: &TripletBuffer) -> Self {
        let mut counts = vec![0usize; buf.nrows + 1];
        for &r in &buf.rows {
            counts[r + 1] += 1;
        }
        for i in 0..buf.nrows {
            counts[i + 1] += counts[i];
        }
        // stable bucket sort by row, then stable sort by column inside each row
        let mut order = vec![0usize; buf.len()];
        let mut next = counts.clone();
        for (k, &r) in buf.rows.iter().enumerate() {
            order[next[r]] = k;
            next[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(buf.nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for r in 0..buf.nrows {
            let slice = &mut order[counts[r]..counts[r + 1]];
            slice.sort_by_key(|&k| buf.cols[k]);
            let mut last = usize::MAX;
            for &k in slice.iter() {
                let c = buf.cols[k];
                if c == last {
                    *values.last_mut().unwrap() += buf.vals[k];
                } else {
                    col_idx.push(c);
                    values.push(buf.vals[k]);
                    last = c;
                }
            }
            row_ptr.push(col_idx.len());
        }
        let mut m = Self {
            nrows: buf.nrows,
            ncols: buf.ncols,
            row_ptr,
            col_idx,
            values,
            symmetric: false,
        };
        m.symmetric = m.check_symmetric(1e-12);
        m
    }

    pub fn from_dense(dense: &DMatrix<f64>) -> Self {
        let mut buf = TripletBuffer::new(dense.nrows(), dense.ncols());
        for i in 0..dense.nrows() {
            for j in 0..dense.ncols() {
                if dense[(i, j)] != 0.0 {
                    buf.push(i, j, dense[(i, j)]);
                }
            }
        }
        Self::from_triplets(&buf)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
            symmetric: true,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Whether the matrix was symmetric to 1e-12 relative at construction.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    /// `y += Aᵀ x`.
    pub fn mul_transpose_add(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.col_idx[k]] += self.values[k] * xi;
            }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec(x, &mut y);
        y
    }

    pub fn transpose(&self) -> Self {
        let mut buf = TripletBuffer::new(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                buf.push(j, i, v);
            }
        }
        Self::from_triplets(&buf)
    }

    /// `⟨A x, y⟩`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.nrows)
            .map(|i| y[i] * self.row(i).map(|(j, v)| v * x[j]).sum::<f64>())
            .sum()
    }

    /// Largest `|A_ij − A_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        let scale = self.max_abs();
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    fn check_symmetric(&self, tol: f64) -> bool {
        self.nrows == self.ncols && self.asymmetry() <= tol
    }

    /// Scales entries in place; multiplying by a scalar keeps symmetry.
    pub fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
    }

    /// Zeroes rows and columns of constrained unknowns and puts `1` on their diagonal.
    pub fn constrain_symmetric(&self, constrained: &[bool]) -> Self {
        self.constrain(constrained, constrained, true)
    }

    /// Zeroes the given rows and columns; optionally writes a unit diagonal on constrained rows.
    pub fn constrain(&self, rows: &[bool], cols: &[bool], unit_diagonal: bool) -> Self {
        let mut buf = TripletBuffer::new(self.nrows, self.ncols);
        for i in 0..self.nrows {
            if rows[i] {
                if unit_diagonal {
                    buf.push(i, i, 1.0);
                }
                continue;
            }
            for (j, v) in self.row(i) {
                if !cols[j] {
                    buf.push(i, j, v);
                }
            }
        }
        Self::from_triplets(&buf)
    }

    /// Rows `rows` and columns `cols` (both increasing) as a new matrix.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut new_col = vec![usize::MAX; self.ncols];
        for (k, &j) in cols.iter().enumerate() {
            new_col[j] = k;
        }
        let mut buf = TripletBuffer::new(rows.len(), cols.len());
        for (r, &i) in rows.iter().enumerate() {
            for (j, v) in self.row(i) {
                if new_col[j] != usize::MAX {
                    buf.push(r, new_col[j], v);
                }
            }
        }
        Self::from_triplets(&buf)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }

    /// Writes MatrixMarket `coordinate real general` format.
    pub fn write_matrix_market<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                writeln!(out, "{} {} {:.17e}", i + 1, j + 1, v)?;
            }
        }
        Ok(())
    }

    /// Reads MatrixMarket coordinate files (`real`/`integer`, `general`/`symmetric`).
    pub fn read_matrix_market<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let perr = |line: usize, message: &str| Error::Parse {
            line: line + 1,
            message: message.to_string(),
        };
        let (ln, header) = lines.next().ok_or_else(|| perr(0, "empty input"))?;
        let header = header?;
        let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
        if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" || tokens[2] != "coordinate" {
            return Err(perr(ln, "expected '%%MatrixMarket matrix coordinate <field> <symmetry>'"));
        }
        if tokens[3] != "real" && tokens[3] != "integer" {
            return Err(perr(ln, "unsupported field type"));
        }
        let symmetric = match tokens[4].as_str() {
            "general" => false,
            "symmetric" => true,
            _ => return Err(perr(ln, "unsupported symmetry")),
        };
        let mut size: Option<(usize, usize, usize)> = None;
        let mut buf = TripletBuffer::default();
        let mut seen = 0usize;
        for (ln, line) in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('%') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match size {
                None => {
                    if fields.len() != 3 {
                        return Err(perr(ln, "expected 'rows cols entries'"));
                    }
                    let parse = |s: &str| s.parse::<usize>().map_err(|_| perr(ln, "invalid size"));
                    let (r, c, n) = (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
                    if r > MAX_MARKET_DIMENSION || c > MAX_MARKET_DIMENSION {
                        return Err(perr(ln, "dimension exceeds the reader limit"));
                    }
                    if symmetric && r != c {
                        return Err(perr(ln, "symmetric matrix must be square"));
                    }
                    size = Some((r, c, n));
                    buf = TripletBuffer::new(r, c);
                }
                Some((r, c, n)) => {
                    if fields.len() != 3 {
                        return Err(perr(ln, "expected 'row col value'"));
                    }
                    if seen == n {
                        return Err(perr(ln, "more entries than declared"));
                    }
                    let i = fields[0].parse::<usize>().map_err(|_| perr(ln, "invalid row index"))?;
                    let j = fields[1].parse::<usize>().map_err(|_| perr(ln, "invalid column index"))?;
                    let v = fields[2].parse::<f64>().map_err(|_| perr(ln, "invalid value"))?;
                    if i == 0 || j == 0 || i > r || j > c {
                        return Err(perr(ln, "index out of range"));
                    }
                    if !v.is_finite() {
                        return Err(perr(ln, "non-finite value"));
                    }
                    buf.push(i - 1, j - 1, v);
                    if symmetric && i != j {
                        buf.push(j - 1, i - 1, v);
                    }
                    seen += 1;
                }
            }
        }
        match size {
            None => Err(perr(0, "missing size line")),
            Some((_, _, n)) if n != seen => Err(perr(0, "fewer entries than declared")),
            Some(_) => Ok(Self::from_triplets(&buf)),
        }
    }
}
