//! Automorphism ensemble decoding.
//!
//! Each branch permutes the channel LLRs with one automorphism, runs BP on
//! the shared decoding matrix and maps the hard decision back. Candidates
//! are checked against the original matrix and the most likely valid one is
//! selected. Branches are independent, so running them in parallel yields
//! the same outcome as running them in order.

use crate::autom::{is_automorphism, Permutation};
use crate::bpdec::{BpDecoder, DecodeOutcome, DecoderConfig, TannerGraph};
use crate::error::{check_len, Error, Result};
use crate::gf2::{BinaryMatrix, BitVector};

#[derive(Clone, Debug)]
pub struct EnsembleConfig {
    pub perms: Vec<Permutation>,
    pub decoder: DecoderConfig,
    /// Matrix the constituent decoders run on.
    pub htilde: BinaryMatrix,
    /// Matrix defining code membership.
    pub h_orig: BinaryMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleOutcome {
    pub selected: DecodeOutcome,
    pub candidate_index: usize,
    pub per_branch: Vec<DecodeOutcome>,
    pub any_valid: bool,
    pub max_iterations: usize,
    pub sum_iterations: usize,
}

impl EnsembleOutcome {
    /// Picks the winner among `per_branch` and fills in the summary fields.
    pub(crate) fn from_branches(per_branch: Vec<DecodeOutcome>, y: &[f64]) -> Result<Self> {
        if per_branch.is_empty() {
            return Err(Error::invalid("ensemble produced no candidates"));
        }
        let valid: Vec<usize> = (0..per_branch.len()).filter(|&j| per_branch[j].valid).collect();
        let any_valid = !valid.is_empty();
        let pool: Vec<usize> = if any_valid { valid } else { (0..per_branch.len()).collect() };
        let candidates: Vec<&[u8]> = pool.iter().map(|&j| per_branch[j].hard_bits.as_slice()).collect();
        let candidate_index = pool[select_ml(&candidates, y)?];
        Ok(EnsembleOutcome {
            selected: per_branch[candidate_index].clone(),
            candidate_index,
            max_iterations: per_branch.iter().map(|b| b.iterations_used).max().unwrap_or(0),
            sum_iterations: per_branch.iter().map(|b| b.iterations_used).sum(),
            any_valid,
            per_branch,
        })
    }

    pub fn converged_branches(&self) -> usize {
        self.per_branch.iter().filter(|b| b.converged).count()
    }

    /// True if at least two branches returned different words.
    pub fn branches_disagree(&self) -> bool {
        let first = &self.per_branch[0].hard_bits;
        self.per_branch.iter().any(|b| &b.hard_bits != first)
    }
}

/// Index of the candidate closest to `y` in Euclidean distance after BPSK
/// mapping; ties go to the lowest index.
///
/// All BPSK words have the same energy, so minimising the distance is the
/// same as maximising the correlation `sum y_i x_i`, which is what is
/// computed.
pub fn select_ml<C: AsRef<[u8]>>(candidates: &[C], y: &[f64]) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, c) in candidates.iter().enumerate() {
        let c = c.as_ref();
        check_len(y.len(), c.len())?;
        let corr: f64 = c
            .iter()
            .zip(y)
            .map(|(&b, &v)| if b & 1 == 0 { v } else { -v })
            .sum();
        if best.is_none_or(|(_, b)| corr > b) {
            best = Some((j, corr));
        }
    }
    best.map(|(j, _)| j)
        .ok_or_else(|| Error::invalid("no candidates to select from"))
}

/// A configured ensemble with prebuilt graphs.
#[derive(Clone, Debug)]
pub struct AutomorphismEnsemble {
    perms: Vec<Permutation>,
    decoder: DecoderConfig,
    tilde: TannerGraph,
    orig: TannerGraph,
}

impl AutomorphismEnsemble {
    /// Validates dimensions and that every permutation is an automorphism
    /// of the code of `h_orig`.
    pub fn new(cfg: EnsembleConfig) -> Result<Self> {
        cfg.decoder.validate()?;
        if cfg.perms.is_empty() {
            return Err(Error::invalid("ensemble needs at least one permutation"));
        }
        let n = cfg.h_orig.n_cols();
        check_len(n, cfg.htilde.n_cols())?;
        for (j, p) in cfg.perms.iter().enumerate() {
            check_len(n, p.len())?;
            if !is_automorphism(&cfg.h_orig, p)? {
                return Err(Error::invalid(format!("permutation {j} is not an automorphism")));
            }
        }
        Ok(AutomorphismEnsemble {
            perms: cfg.perms,
            decoder: cfg.decoder,
            tilde: TannerGraph::new(&cfg.htilde),
            orig: TannerGraph::new(&cfg.h_orig),
        })
    }

    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn n(&self) -> usize {
        self.orig.n_vars()
    }

    fn branch(&self, dec: &mut BpDecoder<'_>, p: &Permutation, lch: &[f64]) -> Result<DecodeOutcome> {
        let permuted = p.apply(lch)?;
        let out = dec.decode(&permuted)?;
        let hard_bits: BitVector = p.apply_inverse(&out.hard_bits)?.into();
        let valid = self.orig.satisfies(&hard_bits);
        Ok(DecodeOutcome {
            hard_bits,
            total_llr: p.apply_inverse(&out.total_llr)?,
            iterations_used: out.iterations_used,
            converged: out.converged,
            valid,
        })
    }

    fn check_input(&self, y: &[f64], lch: &[f64]) -> Result<()> {
        check_len(self.n(), y.len())?;
        check_len(self.n(), lch.len())
    }

    /// Runs all branches in order.
    pub fn decode(&self, y: &[f64], lch: &[f64]) -> Result<EnsembleOutcome> {
        self.check_input(y, lch)?;
        let mut dec = BpDecoder::new(&self.tilde, self.decoder)?;
        let branches = self
            .perms
            .iter()
            .map(|p| self.branch(&mut dec, p, lch))
            .collect::<Result<Vec<_>>>()?;
        EnsembleOutcome::from_branches(branches, y)
    }

    /// Runs the branches on the rayon pool; same result as [`Self::decode`].
    #[cfg(feature = "parallel")]
    pub fn decode_parallel(&self, y: &[f64], lch: &[f64]) -> Result<EnsembleOutcome> {
        use rayon::prelude::*;
        self.check_input(y, lch)?;
        let branches = self
            .perms
            .par_iter()
            .map_init(
                || BpDecoder::new(&self.tilde, self.decoder).expect("validated config"),
                |dec, p| self.branch(dec, p, lch),
            )
            .collect::<Result<Vec<_>>>()?;
        EnsembleOutcome::from_branches(branches, y)
    }
}

/// One-shot ensemble decode; see [`AutomorphismEnsemble`].
pub fn aed_decode(cfg: EnsembleConfig, y: &[f64], lch: &[f64]) -> Result<EnsembleOutcome> {
    AutomorphismEnsemble::new(cfg)?.decode(y, lch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::modulate;
    use crate::qccode::{load_standard_code, StandardCode};

    #[test]
    fn single_candidate() {
        assert_eq!(select_ml(&[vec![0u8, 1]], &[0.3, 0.2]).unwrap(), 0);
        assert!(select_ml::<Vec<u8>>(&[], &[]).is_err());
    }

    #[test]
    fn exact_match_wins() {
        let zero = vec![0u8; 6];
        let mut flipped = zero.clone();
        flipped[2] = 1;
        let y = modulate(&zero);
        assert_eq!(select_ml(&[flipped.clone(), zero.clone()], &y).unwrap(), 1);
        assert_eq!(select_ml(&[zero.clone(), flipped], &y).unwrap(), 0);
        // ties go to the first
        assert_eq!(select_ml(&[zero.clone(), zero], &y).unwrap(), 0);
    }

    #[test]
    fn rejects_non_automorphisms() {
        let code = load_standard_code(StandardCode::Ccsds128_64).unwrap();
        let mut map: Vec<usize> = (0..code.n()).collect();
        map.swap(0, 1);
        let cfg = EnsembleConfig {
            perms: vec![Permutation::new(map).unwrap()],
            decoder: DecoderConfig::default(),
            htilde: code.h().clone(),
            h_orig: code.h().clone(),
        };
        assert!(AutomorphismEnsemble::new(cfg).is_err());
    }

    #[test]
    fn noiseless_frame_all_branches_agree() {
        let code = load_standard_code(StandardCode::Ccsds128_64).unwrap();
        let info: Vec<u8> = (0..code.k()).map(|i| (i * 7 % 3 == 0) as u8).collect();
        let c = code.encode(&info).unwrap();
        let y = modulate(&c);
        let lch: Vec<f64> = y.iter().map(|v| 10.0 * v).collect();
        let cfg = EnsembleConfig {
            perms: code.qc_permutations(),
            decoder: DecoderConfig::default(),
            htilde: code.h().remove_row(0).unwrap(),
            h_orig: code.h().clone(),
        };
        let out = aed_decode(cfg, &y, &lch).unwrap();
        assert!(out.any_valid);
        assert_eq!(out.per_branch.len(), 16);
        assert!(out.per_branch.iter().all(|b| b.hard_bits == c && b.valid));
        assert_eq!(out.selected.hard_bits, c);
        assert_eq!(out.max_iterations, 1);
        assert_eq!(out.sum_iterations, 16);
    }

    #[test]
    fn invalid_candidates_are_filtered() {
        // three candidates; the closest one is not a codeword
        let y = [1.0, 1.0, 1.0, -0.1];
        let mk = |bits: [u8; 4], valid: bool| DecodeOutcome {
            hard_bits: bits.to_vec().into(),
            total_llr: vec![0.0; 4],
            iterations_used: 3,
            converged: true,
            valid,
        };
        let out = EnsembleOutcome::from_branches(
            vec![mk([0, 0, 0, 0], true), mk([0, 0, 0, 1], false), mk([1, 1, 1, 1], true)],
            &y,
        )
        .unwrap();
        assert_eq!(out.candidate_index, 0);
        assert!(out.any_valid);
        let none = EnsembleOutcome::from_branches(
            vec![mk([1, 1, 1, 1], false), mk([0, 0, 0, 1], false)],
            &y,
        )
        .unwrap();
        assert!(!none.any_valid);
        assert_eq!(none.candidate_index, 1);
    }
}
