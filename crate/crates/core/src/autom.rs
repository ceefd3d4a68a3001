//! Codeword-position permutations and the quasi-cyclic automorphism group.
//!
//! Convention: [`Permutation::apply`] moves the symbol at position `i` to
//! position `p(i)`, i.e. `apply(p, v)[p(i)] == v[i]`. Composition follows
//! function composition, `p.compose(q)(i) == p(q(i))`, so applying
//! `p.compose(q)` is the same as applying `q` first and then `p`.

use crate::error::{check_len, Error, Result};
use crate::gf2::BinaryMatrix;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    /// `map[i]` is the image of `i`. Fails unless `map` is a bijection.
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &x in &map {
            if x >= n || std::mem::replace(&mut seen[x], true) {
                return Err(Error::invalid(format!(
                    "not a permutation of 0..{n}: image {x} repeated or out of range"
                )));
            }
        }
        Ok(Permutation { map })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            map: (0..n).collect(),
        }
    }

    /// Quasi-cyclic shift by `d` within each of `n_blocks` blocks of size `z`.
    pub fn quasi_cyclic(d: usize, z: usize, n_blocks: usize) -> Result<Self> {
        if z == 0 || d >= z {
            return Err(Error::invalid(format!("shift {d} outside 0..{z}")));
        }
        let map = (0..z * n_blocks)
            .map(|i| if i % z + d >= z { i + d - z } else { i + d })
            .collect();
        Ok(Permutation { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn image(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &x) in self.map.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { map: inv }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Ok(Permutation {
            map: other.map.iter().map(|&x| self.map[x]).collect(),
        })
    }

    pub fn apply<T: Copy>(&self, v: &[T]) -> Result<Vec<T>> {
        check_len(self.len(), v.len())?;
        let mut out = v.to_vec();
        self.apply_into(v, &mut out);
        Ok(out)
    }

    /// `apply(inverse(p), v)` without building the inverse.
    pub fn apply_inverse<T: Copy>(&self, v: &[T]) -> Result<Vec<T>> {
        check_len(self.len(), v.len())?;
        Ok(self.map.iter().map(|&x| v[x]).collect())
    }

    /// Writes `apply(self, v)` into `out`. Panics on length mismatch.
    pub fn apply_into<T: Copy>(&self, v: &[T], out: &mut [T]) {
        assert_eq!(v.len(), self.len());
        assert_eq!(out.len(), self.len());
        for (i, &x) in self.map.iter().enumerate() {
            out[x] = v[i];
        }
    }
}

/// All `z` quasi-cyclic shifts, `d = 0..z`.
pub fn quasi_cyclic_group(z: usize, n_blocks: usize) -> Vec<Permutation> {
    (0..z)
        .map(|d| Permutation::quasi_cyclic(d, z, n_blocks).expect("d < z"))
        .collect()
}

/// True iff `p` maps the code of `h` onto itself, i.e. the column-permuted
/// matrix spans the same row space.
pub fn is_automorphism(h: &BinaryMatrix, p: &Permutation) -> Result<bool> {
    check_len(h.n_cols(), p.len())?;
    if p.is_identity() {
        return Ok(true);
    }
    let permuted = h.permute_columns(p)?;
    Ok(h.stack(&permuted)?.rank() == h.rank())
}
