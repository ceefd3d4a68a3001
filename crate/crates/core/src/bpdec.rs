//! Sum-product belief propagation with flooding and layered schedules.
//!
//! Every per-node reduction (the variable-node sums and the check-node tanh
//! products) is evaluated in ascending order of message magnitude. The result
//! of a node update therefore depends only on the multiset of incoming
//! messages, never on how the neighbours are labelled, which makes the
//! decoder bit-exactly equivariant to graph automorphisms such as the
//! quasi-cyclic shifts of a lifted matrix. Negating all inputs negates all
//! messages exactly as long as no node sees two messages of equal magnitude
//! and opposite sign.

use crate::error::{check_len, Error, Result};
use crate::gf2::{BinaryMatrix, BitVector};

/// Largest |L/2| passed to `tanh`; beyond this `tanh` is 1 in f64.
pub const TANH_ARG_LIMIT: f64 = 19.07;
/// Largest magnitude passed to `atanh`.
pub const ATANH_INPUT_LIMIT: f64 = 1.0 - 1e-15;
pub const DEFAULT_LLR_CLIP: f64 = 64.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Schedule {
    /// All check nodes, then all variable nodes.
    Flooding,
    /// Check nodes in row order, totals refreshed after each check.
    Layered,
}

impl std::str::FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flooding" => Ok(Schedule::Flooding),
            "layered" => Ok(Schedule::Layered),
            _ => Err(Error::invalid(format!("unknown schedule {s:?}"))),
        }
    }
}

impl std::fmt::Display for Schedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Schedule::Flooding => "flooding",
            Schedule::Layered => "layered",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoderConfig {
    pub max_iter: usize,
    pub schedule: Schedule,
    /// Magnitude bound for messages and total LLRs.
    pub llr_clip: f64,
    /// Stop after the first iteration whose hard decision satisfies all checks.
    pub early_stop: bool,
}

impl DecoderConfig {
    pub fn new(max_iter: usize, schedule: Schedule) -> Self {
        DecoderConfig {
            max_iter,
            schedule,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        if !(self.llr_clip > 0.0) {
            return Err(Error::invalid("llr_clip must be positive"));
        }
        Ok(())
    }
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            max_iter: 32,
            schedule: Schedule::Flooding,
            llr_clip: DEFAULT_LLR_CLIP,
            early_stop: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOutcome {
    pub hard_bits: BitVector,
    pub total_llr: Vec<f64>,
    pub iterations_used: usize,
    /// Hard decision satisfies every check of the decoding matrix.
    pub converged: bool,
    /// Hard decision is a codeword of the reference code. Equals `converged`
    /// until an ensemble decoder checks it against another matrix.
    pub valid: bool,
}

/// Edge lists of a parity-check matrix. Edges are numbered row by row.
#[derive(Clone, Debug)]
pub struct TannerGraph {
    n_vars: usize,
    check_start: Vec<usize>,
    edge_var: Vec<usize>,
    var_start: Vec<usize>,
    var_edges: Vec<usize>,
}

impl TannerGraph {
    pub fn new(h: &BinaryMatrix) -> Self {
        let mut check_start = Vec::with_capacity(h.n_rows() + 1);
        let mut edge_var = Vec::with_capacity(h.nnz());
        check_start.push(0);
        for row in h.rows() {
            edge_var.extend_from_slice(row);
            check_start.push(edge_var.len());
        }
        let mut degree = vec![0usize; h.n_cols()];
        for &v in &edge_var {
            degree[v] += 1;
        }
        let mut var_start = Vec::with_capacity(h.n_cols() + 1);
        var_start.push(0);
        for d in &degree {
            var_start.push(var_start.last().unwrap() + d);
        }
        let mut fill = var_start.clone();
        let mut var_edges = vec![0; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[fill[v]] = e;
            fill[v] += 1;
        }
        TannerGraph {
            n_vars: h.n_cols(),
            check_start,
            edge_var,
            var_start,
            var_edges,
        }
    }

    pub fn n_checks(&self) -> usize {
        self.check_start.len() - 1
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_edges(&self) -> usize {
        self.edge_var.len()
    }

    /// True iff `bits` satisfies every check.
    pub fn satisfies(&self, bits: &[u8]) -> bool {
        self.check_start.windows(2).all(|w| {
            self.edge_var[w[0]..w[1]]
                .iter()
                .fold(0u8, |acc, &v| acc ^ bits[v])
                == 0
        })
    }
}

#[inline]
fn clip(x: f64, bound: f64) -> f64 {
    x.clamp(-bound, bound)
}

/// `tanh(x / 2)` for `x >= 0`. Away from zero `exp` is accurate and
/// cheaper than `expm1`.
#[inline]
fn tanh_half(x: f64) -> f64 {
    let x = x.min(2.0 * TANH_ARG_LIMIT);
    if x < 1.0 {
        let e = x.exp_m1();
        e / (e + 2.0)
    } else {
        1.0 - 2.0 / (x.exp() + 1.0)
    }
}

/// `2 atanh(p)` for `0 <= p < 1`. For `p >= 1/2`, `1 - p` is exact and a
/// plain logarithm suffices.
#[inline]
fn two_atanh(p: f64) -> f64 {
    if p < 0.5 {
        2.0 * p.atanh()
    } else {
        ((1.0 + p) / (1.0 - p)).ln()
    }
}

fn insertion_sort_by<T: Copy>(v: &mut [T], less: impl Fn(&T, &T) -> bool) {
    for i in 1..v.len() {
        let x = v[i];
        let mut j = i;
        while j > 0 && less(&x, &v[j - 1]) {
            v[j] = v[j - 1];
            j -= 1;
        }
        v[j] = x;
    }
}

/// Ascending magnitude; equal magnitudes put the negative value first.
#[inline]
fn magnitude_less(a: f64, b: f64) -> bool {
    match a.abs().total_cmp(&b.abs()) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => a.total_cmp(&b).is_lt(),
    }
}

#[derive(Clone, Copy, Debug)]
struct TanhEntry {
    magnitude: f64,
    negative: bool,
    slot: usize,
}

#[derive(Clone, Copy, Debug)]
struct SumEntry {
    value: f64,
    slot: usize,
}

/// Scratch space for node updates.
#[derive(Clone, Debug, Default)]
struct NodeScratch {
    tanh: Vec<TanhEntry>,
    sum: Vec<SumEntry>,
    partial: Vec<f64>,
}

impl NodeScratch {
    /// Writes into `out[k]` the check-node message that excludes `inputs[k]`.
    fn check_node(&mut self, inputs: &[f64], out: &mut [f64]) {
        let buf = &mut self.tanh;
        buf.clear();
        let mut negatives = 0usize;
        for (slot, &v) in inputs.iter().enumerate() {
            let negative = v.is_sign_negative();
            negatives += usize::from(negative);
            buf.push(TanhEntry {
                magnitude: tanh_half(v.abs()),
                negative,
                slot,
            });
        }
        insertion_sort_by(buf, |a, b| a.magnitude < b.magnitude);
        // suffix[k] = product of magnitudes after position k
        let suffix = &mut self.partial;
        suffix.clear();
        suffix.resize(buf.len(), 1.0);
        for k in (0..buf.len().saturating_sub(1)).rev() {
            suffix[k] = suffix[k + 1] * buf[k + 1].magnitude;
        }
        let mut prefix = 1.0;
        for k in 0..buf.len() {
            let p = prefix * suffix[k];
            prefix *= buf[k].magnitude;
            let magnitude = two_atanh(p.min(ATANH_INPUT_LIMIT));
            let negative = (negatives - usize::from(buf[k].negative)) % 2 == 1;
            out[buf[k].slot] = if negative { -magnitude } else { magnitude };
        }
    }

    /// Writes into `out[k]` the clipped variable-node message that excludes
    /// `inputs[k]` and returns the clipped total.
    fn variable_node(&mut self, lch: f64, inputs: &[f64], out: &mut [f64], bound: f64) -> f64 {
        let buf = &mut self.sum;
        buf.clear();
        buf.extend(
            inputs
                .iter()
                .enumerate()
                .map(|(slot, &value)| SumEntry { value, slot }),
        );
        insertion_sort_by(buf, |a, b| magnitude_less(a.value, b.value));
        let suffix = &mut self.partial;
        suffix.clear();
        suffix.resize(buf.len(), 0.0);
        for k in (0..buf.len().saturating_sub(1)).rev() {
            suffix[k] = suffix[k + 1] + buf[k + 1].value;
        }
        let mut prefix = lch;
        for k in 0..buf.len() {
            out[buf[k].slot] = clip(prefix + suffix[k], bound);
            prefix += buf[k].value;
        }
        clip(prefix, bound)
    }
}

/// Variable-node rule: `lch` plus every incoming message except `exclude`,
/// clipped to `±clip_bound`.
pub fn vn_update(lch: f64, incoming: &[f64], exclude: Option<usize>, clip_bound: f64) -> f64 {
    let mut scratch = NodeScratch::default();
    let mut out = vec![0.0; incoming.len()];
    let total = scratch.variable_node(lch, incoming, &mut out, clip_bound);
    match exclude {
        Some(k) => out[k],
        None => total,
    }
}

/// Check-node rule: `2 atanh(prod_{i != exclude} tanh(L_i / 2))`.
pub fn cn_update(incoming: &[f64], exclude: usize) -> f64 {
    assert!(exclude < incoming.len(), "exclude index out of range");
    let mut scratch = NodeScratch::default();
    let mut out = vec![0.0; incoming.len()];
    scratch.check_node(incoming, &mut out);
    out[exclude]
}

/// Reusable decoder state for one graph.
#[derive(Clone, Debug)]
pub struct BpDecoder<'g> {
    graph: &'g TannerGraph,
    cfg: DecoderConfig,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    total: Vec<f64>,
    hard: Vec<u8>,
    gather: Vec<f64>,
    result: Vec<f64>,
    scratch: NodeScratch,
}

impl<'g> BpDecoder<'g> {
    pub fn new(graph: &'g TannerGraph, cfg: DecoderConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(BpDecoder {
            graph,
            cfg,
            v2c: vec![0.0; graph.n_edges()],
            c2v: vec![0.0; graph.n_edges()],
            total: vec![0.0; graph.n_vars()],
            hard: vec![0; graph.n_vars()],
            gather: Vec::new(),
            result: Vec::new(),
            scratch: NodeScratch::default(),
        })
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.cfg
    }

    pub fn graph(&self) -> &'g TannerGraph {
        self.graph
    }

    pub fn decode(&mut self, lch: &[f64]) -> Result<DecodeOutcome> {
        check_len(self.graph.n_vars(), lch.len())?;
        let bound = self.cfg.llr_clip;
        match self.cfg.schedule {
            Schedule::Flooding => {
                for (e, &v) in self.graph.edge_var.iter().enumerate() {
                    self.v2c[e] = clip(lch[v], bound);
                }
            }
            Schedule::Layered => {
                self.c2v.fill(0.0);
                for (t, &l) in self.total.iter_mut().zip(lch) {
                    *t = clip(l, bound);
                }
            }
        }
        let mut iterations = 0;
        let mut converged = false;
        for it in 1..=self.cfg.max_iter {
            match self.cfg.schedule {
                Schedule::Flooding => self.flooding_iteration(lch),
                Schedule::Layered => self.layered_iteration(),
            }
            for (h, &t) in self.hard.iter_mut().zip(&self.total) {
                *h = u8::from(t < 0.0);
            }
            iterations = it;
            converged = self.graph.satisfies(&self.hard);
            if converged && self.cfg.early_stop {
                break;
            }
        }
        Ok(DecodeOutcome {
            hard_bits: BitVector::from_bits(self.hard.clone()),
            total_llr: self.total.clone(),
            iterations_used: iterations,
            converged,
            valid: converged,
        })
    }

    fn flooding_iteration(&mut self, lch: &[f64]) {
        let g = self.graph;
        let bound = self.cfg.llr_clip;
        for w in g.check_start.windows(2) {
            let (a, b) = (w[0], w[1]);
            self.scratch.check_node(&self.v2c[a..b], &mut self.c2v[a..b]);
        }
        for i in 0..g.n_vars {
            let edges = &g.var_edges[g.var_start[i]..g.var_start[i + 1]];
            self.gather.clear();
            self.gather.extend(edges.iter().map(|&e| self.c2v[e]));
            self.result.resize(edges.len(), 0.0);
            self.total[i] = self
                .scratch
                .variable_node(lch[i], &self.gather, &mut self.result, bound);
            for (&e, &m) in edges.iter().zip(&self.result) {
                self.v2c[e] = m;
            }
        }
    }

    fn layered_iteration(&mut self) {
        let g = self.graph;
        let bound = self.cfg.llr_clip;
        for w in g.check_start.windows(2) {
            let (a, b) = (w[0], w[1]);
            self.gather.clear();
            for e in a..b {
                let v = g.edge_var[e];
                self.gather.push(clip(self.total[v] - self.c2v[e], bound));
            }
            self.scratch.check_node(&self.gather, &mut self.c2v[a..b]);
            for (k, e) in (a..b).enumerate() {
                let v = g.edge_var[e];
                self.total[v] = clip(self.gather[k] + self.c2v[e], bound);
            }
        }
    }
}

/// Decodes one frame on `h`. Builds the graph on every call; use
/// [`BpDecoder`] to decode many frames.
pub fn decode(h: &BinaryMatrix, lch: &[f64], cfg: &DecoderConfig) -> Result<DecodeOutcome> {
    let graph = TannerGraph::new(h);
    BpDecoder::new(&graph, *cfg)?.decode(lch)
}
