//! Saturated belief propagation (SBP), the reference ensemble.
//!
//! The `S` least reliable channel LLRs are replaced by `+sat` or `-sat` in
//! all `2^S` combinations and each modified input is decoded by plain BP.

use crate::aed::EnsembleOutcome;
use crate::bpdec::{BpDecoder, DecodeOutcome, DecoderConfig, TannerGraph};
use crate::error::{check_len, Error, Result};
use crate::gf2::BinaryMatrix;

/// Indices of the `s` smallest `|lch|`, least reliable first. Equal
/// magnitudes are ordered by index.
pub fn least_reliable(lch: &[f64], s: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..lch.len()).collect();
    idx.sort_by(|&a, &b| lch[a].abs().total_cmp(&lch[b].abs()).then(a.cmp(&b)));
    idx.truncate(s);
    idx
}

/// Input of branch `pattern`: bit `t` of `pattern` set means position
/// `positions[t]` gets `-sat`, otherwise `+sat`.
pub fn saturate(lch: &[f64], positions: &[usize], pattern: usize, sat: f64) -> Vec<f64> {
    let mut out = lch.to_vec();
    for (t, &i) in positions.iter().enumerate() {
        out[i] = if pattern >> t & 1 == 1 { -sat } else { sat };
    }
    out
}

/// All `2^s` branch inputs in pattern order.
pub fn sbp_inputs(lch: &[f64], s: usize, sat: f64) -> Result<Vec<Vec<f64>>> {
    check_params(lch.len(), s, sat)?;
    let pos = least_reliable(lch, s);
    Ok((0..1usize << s).map(|p| saturate(lch, &pos, p, sat)).collect())
}

fn check_params(n: usize, s: usize, sat: f64) -> Result<()> {
    if s == 0 || s >= n {
        return Err(Error::invalid(format!("S={s} must lie in 1..{n}")));
    }
    if s >= usize::BITS as usize - 1 {
        return Err(Error::invalid(format!("2^{s} branches are not feasible")));
    }
    if !(sat > 0.0 && sat.is_finite()) {
        return Err(Error::invalid(format!("saturation value {sat} must be positive")));
    }
    Ok(())
}

/// SBP decoder bound to one parity-check matrix.
#[derive(Clone, Debug)]
pub struct SaturatedBp {
    graph: TannerGraph,
    cfg: DecoderConfig,
    s: usize,
    sat: f64,
    stop_after: Option<usize>,
}

impl SaturatedBp {
    /// `stop_after = Some(k)` stops launching branches once `k` of them
    /// have converged.
    pub fn new(h: &BinaryMatrix, cfg: DecoderConfig, s: usize, sat: f64, stop_after: Option<usize>) -> Result<Self> {
        cfg.validate()?;
        check_params(h.n_cols(), s, sat)?;
        if stop_after == Some(0) {
            return Err(Error::invalid("stop_after must be positive"));
        }
        Ok(SaturatedBp {
            graph: TannerGraph::new(h),
            cfg,
            s,
            sat,
            stop_after,
        })
    }

    pub fn branches(&self) -> usize {
        1 << self.s
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// Decodes one frame. `per_branch` holds only the launched branches, in
    /// pattern order. The winner is the valid candidate best correlated
    /// with `lch`.
    pub fn decode(&self, lch: &[f64]) -> Result<EnsembleOutcome> {
        check_len(self.graph.n_vars(), lch.len())?;
        let pos = least_reliable(lch, self.s);
        let mut dec = BpDecoder::new(&self.graph, self.cfg)?;
        let mut branches: Vec<DecodeOutcome> = Vec::with_capacity(self.branches());
        let mut converged = 0;
        for p in 0..self.branches() {
            let out = dec.decode(&saturate(lch, &pos, p, self.sat))?;
            converged += usize::from(out.converged);
            branches.push(out);
            if self.stop_after.is_some_and(|k| converged >= k) {
                break;
            }
        }
        EnsembleOutcome::from_branches(branches, lch)
    }
}

/// One-shot SBP decode; see [`SaturatedBp`].
pub fn sbp_decode(
    h: &BinaryMatrix,
    lch: &[f64],
    s: usize,
    sat: f64,
    cfg: &DecoderConfig,
    stop_after: Option<usize>,
) -> Result<EnsembleOutcome> {
    SaturatedBp::new(h, *cfg, s, sat, stop_after)?.decode(lch)
}
