//! Receiver-side modifications of a parity-check matrix that break the
//! quasi-cyclic symmetry of the Tanner graph.
//!
//! Row additions and appended auxiliary checks keep the code unchanged.
//! Removing a check yields a supercode, so an ensemble decoder has to test
//! candidates against the original matrix.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autom::Permutation;
use crate::error::{check_index, check_len, Error, Result};
use crate::gf2::BinaryMatrix;
use crate::qccode::StandardCode;

/// How the decoding matrix is derived from `H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BreakMethod {
    None,
    /// Row `dst` becomes `dst XOR src`.
    RowAdd { src: usize, dst: usize },
    /// Appends the XOR of the listed rows.
    Overcomplete { checks: Vec<usize> },
    /// Deletes one row.
    Undercomplete { idx: usize },
}

impl BreakMethod {
    pub fn kind(&self) -> &'static str {
        match self {
            BreakMethod::None => "none",
            BreakMethod::RowAdd { .. } => "row-add",
            BreakMethod::Overcomplete { .. } => "overcomplete",
            BreakMethod::Undercomplete { .. } => "undercomplete",
        }
    }

    /// Whether the modified matrix may accept words outside the code.
    pub fn needs_membership_check(&self) -> bool {
        matches!(self, BreakMethod::Undercomplete { .. })
    }

    pub fn apply(&self, h: &BinaryMatrix) -> Result<BinaryMatrix> {
        match self {
            BreakMethod::None => Ok(h.clone()),
            BreakMethod::RowAdd { src, dst } => break_row_add(h, *src, *dst),
            BreakMethod::Overcomplete { checks } => break_overcomplete(h, checks),
            BreakMethod::Undercomplete { idx } => break_undercomplete(h, *idx),
        }
    }

    /// Default parameters for `kind` on a given code: check 0 added onto
    /// check 1, check 0 removed, and for the auxiliary check either the
    /// published combination (5G (132,66)) or [`low_degree_combination`].
    pub fn default_for(kind: &str, code: StandardCode, h: &BinaryMatrix) -> Result<Self> {
        Ok(match kind {
            "none" => BreakMethod::None,
            "row-add" => BreakMethod::RowAdd { src: 0, dst: 1 },
            "undercomplete" => BreakMethod::Undercomplete { idx: 0 },
            "overcomplete" => BreakMethod::Overcomplete {
                checks: match code {
                    StandardCode::Nr5g132_66 => vec![51, 53, 58, 71],
                    _ => low_degree_combination(h, 4, 100, 0)?,
                },
            },
            other => return Err(Error::invalid(format!("unknown break method {other:?}"))),
        })
    }

    /// Parses `kind` with parameters such as `idx=0`, `src=0,dst=1` or
    /// `checks=51,53,58,71` (bare numbers extend the previous key).
    pub fn parse(kind: &str, params: &str) -> Result<Self> {
        let params = parse_params(params)?;
        let one = |key: &str| -> Result<usize> {
            match params.iter().find(|(k, _)| k == key) {
                Some((_, v)) if v.len() == 1 => Ok(v[0]),
                _ => Err(Error::invalid(format!("{kind} needs a single `{key}=` value"))),
            }
        };
        Ok(match kind {
            "none" => BreakMethod::None,
            "row-add" => BreakMethod::RowAdd {
                src: one("src")?,
                dst: one("dst")?,
            },
            "undercomplete" => BreakMethod::Undercomplete { idx: one("idx")? },
            "overcomplete" => BreakMethod::Overcomplete {
                checks: params
                    .iter()
                    .find(|(k, _)| k == "checks")
                    .map(|(_, v)| v.clone())
                    .ok_or_else(|| Error::invalid("overcomplete needs `checks=`"))?,
            },
            other => return Err(Error::invalid(format!("unknown break method {other:?}"))),
        })
    }

    /// Parameter string accepted by [`BreakMethod::parse`].
    pub fn params(&self) -> String {
        match self {
            BreakMethod::None => String::new(),
            BreakMethod::RowAdd { src, dst } => format!("src={src},dst={dst}"),
            BreakMethod::Overcomplete { checks } => format!(
                "checks={}",
                checks.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
            ),
            BreakMethod::Undercomplete { idx } => format!("idx={idx}"),
        }
    }
}

impl fmt::Display for BreakMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BreakMethod::None => f.write_str("none"),
            _ => write!(f, "{}({})", self.kind(), self.params()),
        }
    }
}

impl FromStr for BreakMethod {
    type Err = Error;

    /// `kind` or `kind:params`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, params) = s.split_once(':').unwrap_or((s, ""));
        BreakMethod::parse(kind, params)
    }
}

fn parse_params(s: &str) -> Result<Vec<(String, Vec<usize>)>> {
    let mut out: Vec<(String, Vec<usize>)> = Vec::new();
    for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (key, value) = match tok.split_once('=') {
            Some((k, v)) => (Some(k.trim()), v.trim()),
            None => (None, tok),
        };
        let value: usize = value
            .parse()
            .map_err(|_| Error::invalid(format!("bad parameter value {value:?}")))?;
        match key {
            Some(k) => out.push((k.to_string(), vec![value])),
            None => out
                .last_mut()
                .ok_or_else(|| Error::invalid(format!("value {value} without a key")))?
                .1
                .push(value),
        }
    }
    Ok(out)
}

pub fn break_row_add(h: &BinaryMatrix, src: usize, dst: usize) -> Result<BinaryMatrix> {
    h.row_add(src, dst)
}

/// Appends the XOR of the listed (distinct) rows.
pub fn break_overcomplete(h: &BinaryMatrix, checks: &[usize]) -> Result<BinaryMatrix> {
    if checks.len() < 2 {
        return Err(Error::invalid("an auxiliary check combines at least two rows"));
    }
    let mut sorted = checks.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("auxiliary check lists a row twice"));
    }
    let mut aux = vec![0u8; h.n_cols()];
    for &j in checks {
        check_index(j, h.n_rows())?;
        for &c in h.row(j) {
            aux[c] ^= 1;
        }
    }
    h.append_row(&aux)
}

pub fn break_undercomplete(h: &BinaryMatrix, idx: usize) -> Result<BinaryMatrix> {
    h.remove_row(idx)
}

/// True iff permuting the columns by `p` gives the same matrix up to row order.
pub fn is_equivariant(h: &BinaryMatrix, p: &Permutation) -> Result<bool> {
    check_len(h.n_cols(), p.len())?;
    Ok(h.permute_columns(p)?.same_rows_unordered(h))
}

/// Shifts `d` for which `h` is equivariant to the quasi-cyclic shift by `d`.
pub fn equivariant_shifts(h: &BinaryMatrix, z: usize) -> Result<Vec<usize>> {
    if z == 0 || h.n_cols() % z != 0 {
        return Err(Error::invalid("column count is not a multiple of Z"));
    }
    let n_blocks = h.n_cols() / z;
    let mut out = Vec::new();
    for d in 0..z {
        if is_equivariant(h, &Permutation::quasi_cyclic(d, z, n_blocks)?)? {
            out.push(d);
        }
    }
    Ok(out)
}

/// Draws `draws` random sets of `size` distinct rows and returns the one
/// whose XOR has the smallest nonzero weight (first draw wins ties).
pub fn low_degree_combination(h: &BinaryMatrix, size: usize, draws: usize, seed: u64) -> Result<Vec<usize>> {
    if size < 2 || size > h.n_rows() {
        return Err(Error::invalid(format!("cannot pick {size} of {} rows", h.n_rows())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(usize, Vec<usize>)> = None;
    let mut acc = vec![0u8; h.n_cols()];
    for _ in 0..draws {
        let mut pick = sample(&mut rng, h.n_rows(), size).into_vec();
        pick.sort_unstable();
        acc.fill(0);
        for &j in &pick {
            for &c in h.row(j) {
                acc[c] ^= 1;
            }
        }
        let weight = acc.iter().filter(|&&b| b == 1).count();
        if weight > 0 && best.as_ref().is_none_or(|(w, _)| weight < *w) {
            best = Some((weight, pick));
        }
    }
    best.map(|(_, p)| p)
        .ok_or_else(|| Error::invalid("every drawn combination was the zero row"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qccode::load_standard_code;

    #[test]
    fn parse_methods() {
        assert_eq!(
            BreakMethod::parse("undercomplete", "idx=0").unwrap(),
            BreakMethod::Undercomplete { idx: 0 }
        );
        assert_eq!(
            BreakMethod::parse("row-add", "src=0,dst=1").unwrap(),
            BreakMethod::RowAdd { src: 0, dst: 1 }
        );
        assert_eq!(
            "overcomplete:checks=51,53,58,71".parse::<BreakMethod>().unwrap(),
            BreakMethod::Overcomplete {
                checks: vec![51, 53, 58, 71]
            }
        );
        assert_eq!("none".parse::<BreakMethod>().unwrap(), BreakMethod::None);
        assert!(BreakMethod::parse("undercomplete", "").is_err());
        assert!(BreakMethod::parse("sideways", "").is_err());
        assert!(BreakMethod::parse("row-add", "src=x").is_err());
        for m in [
            BreakMethod::RowAdd { src: 2, dst: 5 },
            BreakMethod::Overcomplete { checks: vec![1, 2, 3] },
            BreakMethod::Undercomplete { idx: 4 },
        ] {
            assert_eq!(BreakMethod::parse(m.kind(), &m.params()).unwrap(), m);
        }
    }

    #[test]
    fn overcomplete_rejects_duplicates() {
        let h = BinaryMatrix::identity(4);
        assert!(break_overcomplete(&h, &[0, 0]).is_err());
        assert!(break_overcomplete(&h, &[1]).is_err());
        assert!(break_overcomplete(&h, &[1, 4]).is_err());
        let g = break_overcomplete(&h, &[1, 3]).unwrap();
        assert_eq!(g.row(4), &[1, 3]);
    }

    #[test]
    fn published_modifications_of_5g_code() {
        let code = load_standard_code(StandardCode::Nr5g132_66).unwrap();
        let h = code.h();
        let over = break_overcomplete(h, &[51, 53, 58, 71]).unwrap();
        assert_eq!(over.n_rows(), h.n_rows() + 1);
        assert_eq!(over.row(h.n_rows()).len(), 11);
        assert_eq!(over.rank(), h.rank());

        let added = break_row_add(h, 0, 1).unwrap();
        assert_eq!(added.rank(), h.rank());
        assert!(added.same_row_space(h).unwrap());

        let under = break_undercomplete(h, 0).unwrap();
        assert_eq!(under.n_rows(), h.n_rows() - 1);
        assert_eq!(under.n_cols() - under.rank(), code.k() + 1);
        let d1 = Permutation::quasi_cyclic(1, code.z(), code.n_blocks()).unwrap();
        assert!(!is_equivariant(&under, &d1).unwrap());
        assert!(is_equivariant(&under, &Permutation::identity(h.n_cols())).unwrap());
    }

    #[test]
    fn original_matrix_is_equivariant_to_every_shift() {
        let code = load_standard_code(StandardCode::Ccsds128_64).unwrap();
        assert_eq!(equivariant_shifts(code.h(), 16).unwrap(), (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn heuristic_is_seeded_and_nonzero() {
        let code = load_standard_code(StandardCode::Ccsds128_64).unwrap();
        let a = low_degree_combination(code.h(), 4, 100, 0).unwrap();
        assert_eq!(a, low_degree_combination(code.h(), 4, 100, 0).unwrap());
        assert_eq!(a.len(), 4);
        let g = break_overcomplete(code.h(), &a).unwrap();
        assert!(!g.row(g.n_rows() - 1).is_empty());
    }
}
