//! Sparse binary matrices over GF(2).
//!
//! A [`BinaryMatrix`] stores, for every row, the ascending list of column
//! indices holding a one. Rows are kept in their given order and column lists
//! are always sorted, so `==` is structural equality. All transformations
//! return new matrices.

use std::fmt::Write as _;
use std::ops::Deref;

use crate::autom::Permutation;
use crate::error::{check_index, check_len, Error, Result};

/// Binary vector stored one bit per byte (values 0 or 1).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BitVector(Vec<u8>);

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector(vec![0; len])
    }

    /// Builds a vector from bytes, keeping only the least significant bit.
    pub fn from_bits(bits: impl Into<Vec<u8>>) -> Self {
        let mut bits = bits.into();
        for b in &mut bits {
            *b &= 1;
        }
        BitVector(bits)
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.0.iter().map(|&b| b as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector> {
        check_len(self.len(), other.len())?;
        Ok(BitVector(
            self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect(),
        ))
    }

    /// Number of positions where the two vectors differ.
    pub fn distance(&self, other: &[u8]) -> usize {
        self.0
            .iter()
            .zip(other)
            .filter(|(a, b)| a != b)
            .count()
    }
}

impl Deref for BitVector {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl From<Vec<u8>> for BitVector {
    fn from(bits: Vec<u8>) -> Self {
        BitVector::from_bits(bits)
    }
}

impl FromIterator<u8> for BitVector {
    fn from_iter<I: IntoIterator<Item = u8>>(iter: I) -> Self {
        BitVector(iter.into_iter().map(|b| b & 1).collect())
    }
}

/// Sparse M x N matrix over GF(2).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    n_cols: usize,
    rows: Vec<Vec<usize>>,
}

impl BinaryMatrix {
    /// Builds a matrix from per-row column lists. Lists are sorted; an index
    /// outside `0..n_cols` or a repeated index within a row is an error.
    pub fn new(n_cols: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let mut rows = rows;
        for (j, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            if let Some(&c) = row.iter().find(|&&c| c >= n_cols) {
                return Err(Error::Index {
                    index: c,
                    bound: n_cols,
                });
            }
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid(format!("row {j} repeats a column index")));
            }
        }
        Ok(BinaryMatrix { n_cols, rows })
    }

    pub fn identity(n: usize) -> Self {
        BinaryMatrix {
            n_cols: n,
            rows: (0..n).map(|i| vec![i]).collect(),
        }
    }

    /// Builds a matrix from dense 0/1 rows of equal length.
    pub fn from_dense<R: AsRef<[u8]>>(dense: &[R]) -> Result<Self> {
        let n_cols = dense.first().map_or(0, |r| r.as_ref().len());
        let mut rows = Vec::with_capacity(dense.len());
        for r in dense {
            let r = r.as_ref();
            check_len(n_cols, r.len())?;
            rows.push(
                r.iter()
                    .enumerate()
                    .filter(|(_, &b)| b & 1 == 1)
                    .map(|(c, _)| c)
                    .collect(),
            );
        }
        Ok(BinaryMatrix { n_cols, rows })
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|row| {
                let mut d = vec![0u8; self.n_cols];
                for &c in row {
                    d[c] = 1;
                }
                d
            })
            .collect()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, j: usize) -> &[usize] {
        &self.rows[j]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row_vector(&self, j: usize) -> Result<BitVector> {
        check_index(j, self.n_rows())?;
        let mut v = BitVector::zeros(self.n_cols);
        for &c in &self.rows[j] {
            v.0[c] = 1;
        }
        Ok(v)
    }

    /// Row indices of every column, ascending.
    pub fn column_lists(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.n_cols];
        for (j, row) in self.rows.iter().enumerate() {
            for &c in row {
                cols[c].push(j);
            }
        }
        cols
    }

    /// GF(2) rank, computed by elimination on a bit-packed dense copy.
    pub fn rank(&self) -> usize {
        PackedMatrix::from_sparse(self).rref().len()
    }

    /// Returns a copy with row `dst` replaced by `dst XOR src`.
    pub fn row_add(&self, src: usize, dst: usize) -> Result<Self> {
        check_index(src, self.n_rows())?;
        check_index(dst, self.n_rows())?;
        if src == dst {
            return Err(Error::invalid("row_add needs two distinct rows"));
        }
        let mut out = self.clone();
        out.rows[dst] = xor_sorted(&self.rows[src], &self.rows[dst]);
        Ok(out)
    }

    pub fn append_row(&self, row: &[u8]) -> Result<Self> {
        check_len(self.n_cols, row.len())?;
        let mut out = self.clone();
        out.rows.push(
            row.iter()
                .enumerate()
                .filter(|(_, &b)| b & 1 == 1)
                .map(|(c, _)| c)
                .collect(),
        );
        Ok(out)
    }

    pub fn remove_row(&self, idx: usize) -> Result<Self> {
        check_index(idx, self.n_rows())?;
        let mut out = self.clone();
        out.rows.remove(idx);
        Ok(out)
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn stack(&self, other: &BinaryMatrix) -> Result<Self> {
        check_len(self.n_cols, other.n_cols)?;
        let mut out = self.clone();
        out.rows.extend(other.rows.iter().cloned());
        Ok(out)
    }

    pub fn syndrome(&self, v: &[u8]) -> Result<BitVector> {
        check_len(self.n_cols, v.len())?;
        Ok(self
            .rows
            .iter()
            .map(|row| row.iter().fold(0u8, |acc, &c| acc ^ (v[c] & 1)))
            .collect())
    }

    /// True iff `v` satisfies every check. Panics if `v` is shorter than N.
    pub fn satisfies(&self, v: &[u8]) -> bool {
        self.rows
            .iter()
            .all(|row| row.iter().fold(0u8, |acc, &c| acc ^ (v[c] & 1)) == 0)
    }

    /// Column `i` of the result is column `p(i)` of `self`.
    ///
    /// With [`Permutation::apply`] moving position `i` to `p(i)`, decoding
    /// `p.apply(y)` on `H` sees the same graph as decoding `y` on
    /// `H.permute_columns(p)`. Composition: `permute_columns(p.compose(q))`
    /// equals `permute_columns(p)` followed by `permute_columns(q)`.
    pub fn permute_columns(&self, p: &Permutation) -> Result<Self> {
        check_len(self.n_cols, p.len())?;
        let inv = p.inverse();
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut r: Vec<usize> = row.iter().map(|&c| inv.image(c)).collect();
                r.sort_unstable();
                r
            })
            .collect();
        Ok(BinaryMatrix {
            n_cols: self.n_cols,
            rows,
        })
    }

    /// Equality up to a reordering of rows (row multiset equality).
    pub fn same_rows_unordered(&self, other: &BinaryMatrix) -> bool {
        if self.n_cols != other.n_cols || self.n_rows() != other.n_rows() {
            return false;
        }
        let mut a: Vec<&Vec<usize>> = self.rows.iter().collect();
        let mut b: Vec<&Vec<usize>> = other.rows.iter().collect();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }

    /// True iff both matrices have the same row space.
    pub fn same_row_space(&self, other: &BinaryMatrix) -> Result<bool> {
        let stacked = self.stack(other)?;
        let r = stacked.rank();
        Ok(r == self.rank() && r == other.rank())
    }

    /// Parses the alist format (1-based indices, zero padding allowed).
    pub fn from_alist(text: &str) -> Result<Self> {
        AlistReader::new(text).read()
    }

    /// Writes the alist format without padding.
    pub fn to_alist(&self) -> String {
        let cols = self.column_lists();
        let max_col = cols.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n_cols, self.n_rows());
        let _ = writeln!(out, "{max_col} {max_row}");
        let _ = writeln!(out, "{}", join(cols.iter().map(Vec::len)));
        let _ = writeln!(out, "{}", join(self.rows.iter().map(Vec::len)));
        for col in &cols {
            let _ = writeln!(out, "{}", join(col.iter().map(|j| j + 1)));
        }
        for row in &self.rows {
            let _ = writeln!(out, "{}", join(row.iter().map(|c| c + 1)));
        }
        out
    }
}

fn join(items: impl Iterator<Item = usize>) -> String {
    let mut s = String::new();
    for (i, x) in items.enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{x}");
    }
    s
}

/// Symmetric difference of two ascending lists.
fn xor_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

struct AlistReader<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> AlistReader<'a> {
    fn new(text: &'a str) -> Self {
        AlistReader {
            lines: text.lines().enumerate().peekable(),
        }
    }

    /// Next line, optionally skipping blank ones. Returns (line number, ints).
    fn next_line(&mut self, skip_blank: bool, what: &str) -> Result<(usize, Vec<usize>)> {
        loop {
            let Some((i, line)) = self.lines.next() else {
                return Err(Error::parse(0, format!("unexpected end of input, expected {what}")));
            };
            let lineno = i + 1;
            if skip_blank && line.trim().is_empty() {
                continue;
            }
            let ints = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| Error::parse(lineno, format!("bad integer {t:?} in {what}")))
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok((lineno, ints));
        }
    }

    fn fixed(&mut self, count: usize, what: &str) -> Result<(usize, Vec<usize>)> {
        let (line, v) = self.next_line(true, what)?;
        if v.len() != count {
            return Err(Error::parse(
                line,
                format!("{what}: expected {count} values, found {}", v.len()),
            ));
        }
        Ok((line, v))
    }

    /// One neighbour list with `degree` entries; zeros are padding.
    fn list(&mut self, degree: usize, bound: usize, what: &str) -> Result<Vec<usize>> {
        let (line, raw) = self.next_line(degree > 0, what)?;
        let mut v: Vec<usize> = raw.into_iter().filter(|&x| x != 0).collect();
        if v.len() != degree {
            return Err(Error::parse(
                line,
                format!("{what}: declared degree {degree}, found {} entries", v.len()),
            ));
        }
        if let Some(&x) = v.iter().find(|&&x| x > bound) {
            return Err(Error::parse(line, format!("{what}: index {x} exceeds {bound}")));
        }
        for x in &mut v {
            *x -= 1;
        }
        v.sort_unstable();
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::parse(line, format!("{what}: repeated index")));
        }
        Ok(v)
    }

    fn read(mut self) -> Result<BinaryMatrix> {
        let (_, dims) = self.fixed(2, "dimensions")?;
        let (n, m) = (dims[0], dims[1]);
        let (line, maxd) = self.fixed(2, "maximum degrees")?;
        let (col_line, col_deg) = self.fixed(n, "column degrees")?;
        let (row_line, row_deg) = self.fixed(m, "row degrees")?;
        if let Some(&d) = col_deg.iter().find(|&&d| d > maxd[0]) {
            return Err(Error::parse(col_line, format!("column degree {d} exceeds maximum {}", maxd[0])));
        }
        if let Some(&d) = row_deg.iter().find(|&&d| d > maxd[1]) {
            return Err(Error::parse(row_line, format!("row degree {d} exceeds maximum {}", maxd[1])));
        }
        if col_deg.iter().sum::<usize>() != row_deg.iter().sum::<usize>() {
            return Err(Error::parse(line, "column and row degree totals differ"));
        }
        let cols = col_deg
            .iter()
            .enumerate()
            .map(|(i, &d)| self.list(d, m, &format!("column {}", i + 1)))
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::with_capacity(m);
        let mut last_line = 0;
        for (j, &d) in row_deg.iter().enumerate() {
            last_line = self.lines.peek().map_or(0, |(i, _)| i + 1);
            rows.push(self.list(d, n, &format!("row {}", j + 1))?);
        }
        let h = BinaryMatrix { n_cols: n, rows };
        if h.column_lists() != cols {
            return Err(Error::parse(last_line, "column lists disagree with row lists"));
        }
        Ok(h)
    }
}

/// Dense bit-packed matrix used for elimination.
#[derive(Clone, Debug)]
pub(crate) struct PackedMatrix {
    n_rows: usize,
    n_cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl PackedMatrix {
    pub(crate) fn from_sparse(m: &BinaryMatrix) -> Self {
        let words = m.n_cols.div_ceil(64);
        let mut data = vec![0u64; words * m.n_rows()];
        for (j, row) in m.rows.iter().enumerate() {
            for &c in row {
                data[j * words + c / 64] |= 1 << (c % 64);
            }
        }
        PackedMatrix {
            n_rows: m.n_rows(),
            n_cols: m.n_cols,
            words,
            data,
        }
    }

    pub(crate) fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.words + c / 64] >> (c % 64) & 1 == 1
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        let w = self.words;
        let (s, d) = (src * w, dst * w);
        for k in 0..w {
            let x = self.data[s + k];
            self.data[d + k] ^= x;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for k in 0..self.words {
                self.data.swap(a * self.words + k, b * self.words + k);
            }
        }
    }

    /// Brings the matrix to reduced row echelon form and returns the pivot
    /// column of each leading row.
    pub(crate) fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.n_cols {
            if r == self.n_rows {
                break;
            }
            let Some(p) = (r..self.n_rows).find(|&i| self.get(i, c)) else {
                continue;
            };
            self.swap_rows(r, p);
            for i in 0..self.n_rows {
                if i != r && self.get(i, c) {
                    self.xor_row_into(r, i);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }
}
