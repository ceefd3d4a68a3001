//! Quasi-cyclic codes: exponent matrices, lifting and the standard codes.
//!
//! Circulant orientation: an offset `s` in cell `(i, j)` puts a one at row
//! `r`, column `(r + s) mod Z` of block `(i, j)` for every `r in 0..Z`.
//! Cells may list several distinct offsets (a sum of circulants).
//!
//! Base matrix text format: optional `#` comment lines, then a header line
//! `m n Z`, then `m` lines of `n` whitespace-separated cells. A cell is `-`
//! (all-zero block) or a comma-separated list of offsets.

use std::fmt;
use std::str::FromStr;

use crate::autom::{quasi_cyclic_group, Permutation};
use crate::error::{check_len, Error, Result};
use crate::gf2::{BinaryMatrix, BitVector, PackedMatrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<Vec<usize>>,
}

impl BaseMatrix {
    /// `cells` is row-major with `rows * cols` entries.
    pub fn new(rows: usize, cols: usize, cells: Vec<Vec<usize>>) -> Result<Self> {
        check_len(rows * cols, cells.len())?;
        let mut cells = cells;
        for cell in &mut cells {
            cell.sort_unstable();
            if cell.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid("repeated offset in a base matrix cell"));
            }
        }
        Ok(BaseMatrix { rows, cols, cells })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell(&self, i: usize, j: usize) -> &[usize] {
        &self.cells[i * self.cols + j]
    }

    pub fn max_offset(&self) -> Option<usize> {
        self.cells.iter().flatten().copied().max()
    }
}

/// Parses the base matrix text format, returning the matrix and its `Z`.
pub fn parse_base_matrix(text: &str) -> Result<(BaseMatrix, usize)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
    let dims = header
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::parse(hline, format!("bad header value {t:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let [m, n, z] = dims[..] else {
        return Err(Error::parse(hline, "header must be `m n Z`"));
    };
    if z == 0 {
        return Err(Error::parse(hline, "lifting factor must be positive"));
    }
    let mut cells = Vec::with_capacity(m * n);
    for i in 0..m {
        let (line, text) = lines
            .next()
            .ok_or_else(|| Error::parse(hline, format!("expected {m} rows, found {i}")))?;
        let row: Vec<&str> = text.split_whitespace().collect();
        if row.len() != n {
            return Err(Error::parse(line, format!("expected {n} cells, found {}", row.len())));
        }
        for tok in row {
            cells.push(parse_cell(tok, z, line)?);
        }
    }
    if let Some((line, _)) = lines.next() {
        return Err(Error::parse(line, "trailing content after base matrix"));
    }
    let base = BaseMatrix::new(m, n, cells).map_err(|e| Error::parse(hline, e.to_string()))?;
    Ok((base, z))
}

fn parse_cell(tok: &str, z: usize, line: usize) -> Result<Vec<usize>> {
    if tok == "-" {
        return Ok(Vec::new());
    }
    let mut offsets = tok
        .split(',')
        .map(|t| {
            let s = t
                .parse::<usize>()
                .map_err(|_| Error::parse(line, format!("malformed cell {tok:?}")))?;
            if s >= z {
                return Err(Error::parse(line, format!("offset {s} not below Z={z}")));
            }
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    offsets.sort_unstable();
    if offsets.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::parse(line, format!("repeated offset in cell {tok:?}")));
    }
    Ok(offsets)
}

/// Expands every cell into a `z x z` sum of circulants.
pub fn lift(base: &BaseMatrix, z: usize) -> Result<BinaryMatrix> {
    if let Some(s) = base.max_offset().filter(|&s| s >= z) {
        return Err(Error::invalid(format!("offset {s} not below Z={z}")));
    }
    let mut rows = Vec::with_capacity(base.rows * z);
    for i in 0..base.rows {
        for r in 0..z {
            let mut row = Vec::new();
            for j in 0..base.cols {
                row.extend(base.cell(i, j).iter().map(|&s| j * z + (r + s) % z));
            }
            rows.push(row);
        }
    }
    BinaryMatrix::new(base.cols * z, rows)
}

/// Recovers the exponent matrix from a lifted matrix, failing if some block
/// is not a sum of circulants.
pub fn extract_base(h: &BinaryMatrix, z: usize) -> Result<BaseMatrix> {
    if z == 0 || h.n_rows() % z != 0 || h.n_cols() % z != 0 {
        return Err(Error::invalid("matrix dimensions are not multiples of Z"));
    }
    let (m, n) = (h.n_rows() / z, h.n_cols() / z);
    let mut cells = vec![Vec::new(); m * n];
    for i in 0..m {
        for &c in h.row(i * z) {
            cells[i * n + c / z].push(c % z);
        }
    }
    let base = BaseMatrix::new(m, n, cells)?;
    let relifted = lift(&base, z)?;
    if &relifted != h {
        return Err(Error::invalid("matrix is not block-circulant"));
    }
    Ok(base)
}

/// Systematic encoder derived from the reduced row echelon form of `H`.
#[derive(Clone, Debug)]
pub struct Encoder {
    n: usize,
    info_positions: Vec<usize>,
    parity_positions: Vec<usize>,
    // for each parity position, packed mask over the information bits
    parity_masks: Vec<Vec<u64>>,
}

impl Encoder {
    pub fn new(h: &BinaryMatrix) -> Self {
        let mut packed = PackedMatrix::from_sparse(h);
        let pivots = packed.rref();
        let mut is_pivot = vec![false; h.n_cols()];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let info_positions: Vec<usize> = (0..h.n_cols()).filter(|&c| !is_pivot[c]).collect();
        let words = info_positions.len().div_ceil(64);
        let parity_masks = (0..pivots.len())
            .map(|r| {
                let mut mask = vec![0u64; words];
                for (t, &c) in info_positions.iter().enumerate() {
                    if packed.get(r, c) {
                        mask[t / 64] |= 1 << (t % 64);
                    }
                }
                mask
            })
            .collect();
        Encoder {
            n: h.n_cols(),
            info_positions,
            parity_positions: pivots,
            parity_masks,
        }
    }

    pub fn k(&self) -> usize {
        self.info_positions.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Codeword positions carrying the information bits, in order.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn encode(&self, info: &[u8]) -> Result<BitVector> {
        check_len(self.k(), info.len())?;
        let mut packed = vec![0u64; self.k().div_ceil(64)];
        for (t, &b) in info.iter().enumerate() {
            packed[t / 64] |= u64::from(b & 1) << (t % 64);
        }
        let mut c = vec![0u8; self.n];
        for (&pos, &b) in self.info_positions.iter().zip(info) {
            c[pos] = b & 1;
        }
        for (&pos, mask) in self.parity_positions.iter().zip(&self.parity_masks) {
            let ones: u32 = mask.iter().zip(&packed).map(|(m, x)| (m & x).count_ones()).sum();
            c[pos] = (ones & 1) as u8;
        }
        Ok(BitVector::from_bits(c))
    }
}

/// A lifted quasi-cyclic code. Positions in `punctured` belong to the
/// codeword but are never transmitted.
#[derive(Clone, Debug)]
pub struct QcCode {
    name: String,
    base: BaseMatrix,
    z: usize,
    h: BinaryMatrix,
    rank: usize,
    punctured: Vec<usize>,
    encoder: Encoder,
}

impl QcCode {
    /// Lifts `base` and punctures the first `punctured_blocks` column blocks.
    pub fn new(name: impl Into<String>, base: BaseMatrix, z: usize, punctured_blocks: usize) -> Result<Self> {
        if punctured_blocks > base.cols() {
            return Err(Error::Code("more punctured blocks than columns".into()));
        }
        let h = lift(&base, z)?;
        let encoder = Encoder::new(&h);
        let rank = h.n_cols() - encoder.k();
        Ok(QcCode {
            name: name.into(),
            base,
            z,
            h,
            rank,
            punctured: (0..punctured_blocks * z).collect(),
            encoder,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base(&self) -> &BaseMatrix {
        &self.base
    }

    pub fn h(&self) -> &BinaryMatrix {
        &self.h
    }

    pub fn z(&self) -> usize {
        self.z
    }

    /// Number of circulant column blocks.
    pub fn n_blocks(&self) -> usize {
        self.base.cols()
    }

    /// Length of the full codeword, including punctured positions.
    pub fn n(&self) -> usize {
        self.h.n_cols()
    }

    /// Number of transmitted positions.
    pub fn transmitted_len(&self) -> usize {
        self.n() - self.punctured.len()
    }

    pub fn k(&self) -> usize {
        self.encoder.k()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Rate over the transmitted positions.
    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.transmitted_len() as f64
    }

    pub fn punctured(&self) -> &[usize] {
        &self.punctured
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    pub fn encode(&self, info: &[u8]) -> Result<BitVector> {
        self.encoder.encode(info)
    }

    /// The `Z` quasi-cyclic shifts of this code's positions.
    pub fn qc_permutations(&self) -> Vec<Permutation> {
        quasi_cyclic_group(self.z, self.n_blocks())
    }
}

/// Codes from the standards used in the experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StandardCode {
    Ccsds128_64,
    Ccsds256_128,
    Nr5g132_66,
    Nr5g264_132,
    Wifi648_540,
}

impl StandardCode {
    pub const ALL: [StandardCode; 5] = [
        StandardCode::Ccsds128_64,
        StandardCode::Ccsds256_128,
        StandardCode::Nr5g132_66,
        StandardCode::Nr5g264_132,
        StandardCode::Wifi648_540,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StandardCode::Ccsds128_64 => "ccsds_128_64",
            StandardCode::Ccsds256_128 => "ccsds_256_128",
            StandardCode::Nr5g132_66 => "nr5g_132_66",
            StandardCode::Nr5g264_132 => "nr5g_264_132",
            StandardCode::Wifi648_540 => "wifi_648_540",
        }
    }

    /// Transmitted length, information length and lifting factor.
    pub fn parameters(self) -> (usize, usize, usize) {
        match self {
            StandardCode::Ccsds128_64 => (128, 64, 16),
            StandardCode::Ccsds256_128 => (256, 128, 32),
            StandardCode::Nr5g132_66 => (132, 66, 11),
            StandardCode::Nr5g264_132 => (264, 132, 22),
            StandardCode::Wifi648_540 => (648, 540, 27),
        }
    }

    /// 5G codes puncture their first two systematic column blocks.
    pub fn punctured_blocks(self) -> usize {
        match self {
            StandardCode::Nr5g132_66 | StandardCode::Nr5g264_132 => 2,
            _ => 0,
        }
    }

    pub fn base_matrix_text(self) -> &'static str {
        match self {
            StandardCode::Ccsds128_64 => include_str!("../data/ccsds_128_64.qc"),
            StandardCode::Ccsds256_128 => include_str!("../data/ccsds_256_128.qc"),
            StandardCode::Nr5g132_66 => include_str!("../data/nr5g_bg2_z11.qc"),
            StandardCode::Nr5g264_132 => include_str!("../data/nr5g_bg2_z22.qc"),
            StandardCode::Wifi648_540 => include_str!("../data/wifi_648_540.qc"),
        }
    }
}

impl fmt::Display for StandardCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StandardCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StandardCode::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown code {s:?}")))
    }
}

/// Builds a standard code and checks `(N, K, Z)` against its definition.
pub fn load_standard_code(code: StandardCode) -> Result<QcCode> {
    let (base, z) = parse_base_matrix(code.base_matrix_text())?;
    let (n, k, z_expected) = code.parameters();
    if z != z_expected {
        return Err(Error::Code(format!("{code}: data file has Z={z}, expected {z_expected}")));
    }
    let qc = QcCode::new(code.name(), base, z, code.punctured_blocks())?;
    if qc.transmitted_len() != n || qc.k() != k {
        return Err(Error::Code(format!(
            "{code}: lifted to (N={}, K={}), expected ({n}, {k})",
            qc.transmitted_len(),
            qc.k()
        )));
    }
    Ok(qc)
}
