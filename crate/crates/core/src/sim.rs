//! Monte Carlo BLER/BER simulation over the BPSK/AWGN channel.
//!
//! Frame `k` draws its noise from ChaCha8 stream `2k` and its payload from
//! stream `2k + 1` of the run seed, so every frame is reproducible on its
//! own. Frames are evaluated in fixed-size chunks and tallied in index
//! order, which makes the stopping point, and therefore every reported
//! number, independent of the number of worker threads.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aed::{AutomorphismEnsemble, EnsembleConfig, EnsembleOutcome};
use crate::baseline::SaturatedBp;
use crate::bpdec::{BpDecoder, DecoderConfig, Schedule, TannerGraph, DEFAULT_LLR_CLIP};
use crate::channel::{ebno_to_sigma, llr, modulate, transmit};
use crate::error::{Error, Result};
use crate::gf2::{BinaryMatrix, BitVector};
use crate::qccode::{load_standard_code, QcCode, StandardCode};
use crate::symbreak::BreakMethod;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959963984540054;

/// Frames per scheduling unit.
const CHUNK: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecoderKind {
    /// Single BP decoder using the configured schedule.
    Bp,
    /// Single BP decoder with the layered schedule.
    Layered,
    Aed,
    Sbp,
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bp" => Ok(DecoderKind::Bp),
            "layered" => Ok(DecoderKind::Layered),
            "aed" => Ok(DecoderKind::Aed),
            "sbp" => Ok(DecoderKind::Sbp),
            _ => Err(Error::invalid(format!("unknown decoder {s:?}"))),
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoderKind::Bp => "bp",
            DecoderKind::Layered => "layered",
            DecoderKind::Aed => "aed",
            DecoderKind::Sbp => "sbp",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Payload {
    AllZero,
    RandomEncoded,
}

impl FromStr for Payload {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all_zero" => Ok(Payload::AllZero),
            "random_encoded" => Ok(Payload::RandomEncoded),
            _ => Err(Error::invalid(format!("unknown payload {s:?}"))),
        }
    }
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Payload::AllZero => "all_zero",
            Payload::RandomEncoded => "random_encoded",
        })
    }
}

/// Everything that determines a simulation run.
///
/// The field names double as the keys of the `key=value` configuration
/// format read by [`RunConfig::parse`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub code: StandardCode,
    pub decoder: DecoderKind,
    /// `none`, `row-add`, `overcomplete` or `undercomplete`.
    pub break_method: String,
    /// Parameters for `break_method`; empty selects the defaults.
    pub break_params: String,
    /// Number of automorphisms for AED or of saturated positions for SBP.
    /// `None` selects `Z` for AED and `floor(log2 Z)` for SBP.
    pub ensemble: Option<usize>,
    pub max_iter: usize,
    pub schedule: Schedule,
    pub llr_clip: f64,
    pub early_stop: bool,
    pub ebno: Vec<f64>,
    pub min_block_errors: usize,
    pub max_frames: usize,
    pub seed: u64,
    pub payload: Payload,
    pub sbp_sat: f64,
    /// Stop launching SBP branches after this many have converged.
    pub sbp_stop_after: Option<usize>,
    /// Replaces the noise level derived from Eb/N0.
    pub sigma: Option<f64>,
}

impl RunConfig {
    pub fn new(code: StandardCode, decoder: DecoderKind) -> Self {
        RunConfig {
            code,
            decoder,
            break_method: "none".into(),
            break_params: String::new(),
            ensemble: None,
            max_iter: 32,
            schedule: Schedule::Flooding,
            llr_clip: DEFAULT_LLR_CLIP,
            early_stop: true,
            ebno: Vec::new(),
            min_block_errors: 100,
            max_frames: 10_000_000,
            seed: 0,
            payload: Payload::AllZero,
            sbp_sat: DEFAULT_LLR_CLIP,
            sbp_stop_after: None,
            sigma: None,
        }
    }

    /// Parses `key=value` lines. Blank lines and `#` comments are skipped.
    /// `code` and `decoder` are required unless supplied by `base`.
    pub fn parse(text: &str, base: Option<RunConfig>) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, format!("expected key=value, got {line:?}")))?;
            pairs.push((i + 1, k.trim().to_string(), v.trim().to_string()));
        }
        let find = |key: &str| pairs.iter().find(|(_, k, _)| k == key).map(|(_, _, v)| v.as_str());
        let mut cfg = match base {
            Some(b) => b,
            None => {
                let code = find("code").ok_or_else(|| Error::invalid("missing key `code`"))?;
                let decoder = find("decoder").ok_or_else(|| Error::invalid("missing key `decoder`"))?;
                RunConfig::new(code.parse()?, decoder.parse()?)
            }
        };
        for (line, k, v) in &pairs {
            cfg.set(k, v).map_err(|e| Error::parse(*line, e.to_string()))?;
        }
        Ok(cfg)
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::invalid(format!("bad value {v:?} for `{key}`")))
        }
        fn opt<T: FromStr>(key: &str, v: &str) -> Result<Option<T>> {
            if v.is_empty() || v == "none" {
                Ok(None)
            } else {
                num(key, v).map(Some)
            }
        }
        match key {
            "code" => self.code = value.parse()?,
            "decoder" => self.decoder = value.parse()?,
            "break_method" => self.break_method = value.to_string(),
            "break_params" => self.break_params = value.to_string(),
            "ensemble" => self.ensemble = opt(key, value)?,
            "max_iter" => self.max_iter = num(key, value)?,
            "schedule" => self.schedule = value.parse()?,
            "llr_clip" => self.llr_clip = num(key, value)?,
            "early_stop" => self.early_stop = num(key, value)?,
            "ebno" => self.ebno = parse_grid(value)?,
            "min_block_errors" => self.min_block_errors = num(key, value)?,
            "max_frames" => self.max_frames = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "payload" => self.payload = value.parse()?,
            "sbp_sat" => self.sbp_sat = num(key, value)?,
            "sbp_stop_after" => self.sbp_stop_after = opt(key, value)?,
            "sigma" => self.sigma = opt(key, value)?,
            _ => return Err(Error::invalid(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_block_errors == 0 {
            return Err(Error::invalid("min_block_errors must be at least 1"));
        }
        if self.max_frames == 0 {
            return Err(Error::invalid("max_frames must be at least 1"));
        }
        if self.ebno.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("Eb/N0 values must be finite"));
        }
        if self.sigma.is_some_and(|s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::invalid("sigma must be positive"));
        }
        self.decoder_config().validate()
    }

    pub fn decoder_config(&self) -> DecoderConfig {
        DecoderConfig {
            max_iter: self.max_iter,
            schedule: match self.decoder {
                DecoderKind::Layered => Schedule::Layered,
                _ => self.schedule,
            },
            llr_clip: self.llr_clip,
            early_stop: self.early_stop,
        }
    }

    /// The break method with its parameters resolved against `code`.
    pub fn resolve_break(&self, code: &QcCode) -> Result<BreakMethod> {
        if self.break_params.trim().is_empty() {
            BreakMethod::default_for(&self.break_method, self.code, code.h())
        } else {
            BreakMethod::parse(&self.break_method, &self.break_params)
        }
    }
}

/// Parses `start:step:stop` (inclusive), a comma-separated list or a
/// single value.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::invalid(format!("bad Eb/N0 grid {s:?}"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop): (f64, f64, f64) = (
                start.parse().map_err(|_| bad())?,
                step.parse().map_err(|_| bad())?,
                stop.parse().map_err(|_| bad())?,
            );
            if !(step > 0.0) || stop < start || !start.is_finite() || !stop.is_finite() {
                return Err(bad());
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
            // rounding keeps 1.0 + 3 * 0.1 printing as 1.3
            Ok((0..n)
                .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
                .collect())
        }
        [list] => list
            .split(',')
            .map(|v| v.trim().parse().map_err(|_| bad()))
            .collect(),
        _ => Err(bad()),
    }
}

/// Noisy observation of one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameInput {
    pub codeword: BitVector,
    /// Channel output; zero at punctured positions.
    pub y: Vec<f64>,
    pub lch: Vec<f64>,
}

/// Tally of one decoded frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FrameOutcome {
    pub block_error: bool,
    pub bit_errors: usize,
    pub branches: usize,
    pub sum_iterations: usize,
    pub max_iterations: usize,
    pub converged_branches: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointResult {
    pub ebno_db: f64,
    pub frames: usize,
    pub block_errors: usize,
    pub bit_errors: usize,
    pub bler: f64,
    pub ber: f64,
    /// Iterations per constituent decoder.
    pub avg_iterations: f64,
    /// Per-frame maximum over constituent decoders, averaged over frames.
    pub avg_max_iterations: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Constituent decoders run per frame.
    pub avg_branches: f64,
    /// Constituent decoders per frame whose output satisfied their checks.
    pub avg_converged: f64,
}

impl PointResult {
    fn from_tally(ebno_db: f64, n: usize, t: &Tally) -> Self {
        let frames = t.frames.max(1) as f64;
        let (ci_low, ci_high) = wilson_interval(t.block_errors, t.frames);
        PointResult {
            ebno_db,
            frames: t.frames,
            block_errors: t.block_errors,
            bit_errors: t.bit_errors,
            bler: t.block_errors as f64 / frames,
            ber: t.bit_errors as f64 / (frames * n as f64),
            avg_iterations: t.sum_iterations as f64 / t.branches.max(1) as f64,
            avg_max_iterations: t.max_iterations as f64 / frames,
            ci_low,
            ci_high,
            avg_branches: t.branches as f64 / frames,
            avg_converged: t.converged as f64 / frames,
        }
    }
}

/// Wilson score interval at 95% confidence for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let low = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    (low, (centre + half).min(1.0))
}

#[derive(Default)]
struct Tally {
    frames: usize,
    block_errors: usize,
    bit_errors: usize,
    branches: usize,
    sum_iterations: usize,
    max_iterations: usize,
    converged: usize,
}

impl Tally {
    fn add(&mut self, f: &FrameOutcome) {
        self.frames += 1;
        self.block_errors += usize::from(f.block_error);
        self.bit_errors += f.bit_errors;
        self.branches += f.branches;
        self.sum_iterations += f.sum_iterations;
        self.max_iterations += f.max_iterations;
        self.converged += f.converged_branches;
    }
}

enum Engine {
    Bp { graph: TannerGraph, cfg: DecoderConfig },
    Aed(AutomorphismEnsemble),
    Sbp(SaturatedBp),
}

/// A run configuration bound to its code and decoder.
pub struct Simulator {
    cfg: RunConfig,
    code: QcCode,
    htilde: BinaryMatrix,
    engine: Engine,
}

impl Simulator {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let code = load_standard_code(cfg.code)?;
        let htilde = cfg.resolve_break(&code)?.apply(code.h())?;
        let dcfg = cfg.decoder_config();
        let engine = match cfg.decoder {
            DecoderKind::Bp | DecoderKind::Layered => Engine::Bp {
                graph: TannerGraph::new(&htilde),
                cfg: dcfg,
            },
            DecoderKind::Aed => {
                let z = code.z();
                let l = cfg.ensemble.unwrap_or(z);
                if l == 0 || l > z {
                    return Err(Error::invalid(format!(
                        "ensemble size {l} must lie in 1..={z} for quasi-cyclic permutations"
                    )));
                }
                let mut perms = code.qc_permutations();
                perms.truncate(l);
                Engine::Aed(AutomorphismEnsemble::new(EnsembleConfig {
                    perms,
                    decoder: dcfg,
                    htilde: htilde.clone(),
                    h_orig: code.h().clone(),
                })?)
            }
            DecoderKind::Sbp => {
                let s = cfg.ensemble.unwrap_or(code.z().ilog2() as usize);
                Engine::Sbp(SaturatedBp::new(&htilde, dcfg, s, cfg.sbp_sat, cfg.sbp_stop_after)?)
            }
        };
        Ok(Simulator {
            cfg,
            code,
            htilde,
            engine,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn code(&self) -> &QcCode {
        &self.code
    }

    /// The matrix the constituent decoders run on.
    pub fn htilde(&self) -> &BinaryMatrix {
        &self.htilde
    }

    pub fn sigma(&self, ebno_db: f64) -> Result<f64> {
        match self.cfg.sigma {
            Some(s) => Ok(s),
            None => ebno_to_sigma(ebno_db, self.code.rate()),
        }
    }

    /// Codeword, channel output and LLRs of frame `k`.
    pub fn frame_input(&self, k: u64, sigma: f64) -> Result<FrameInput> {
        let codeword = match self.cfg.payload {
            Payload::AllZero => BitVector::zeros(self.code.n()),
            Payload::RandomEncoded => {
                let mut rng = frame_rng(self.cfg.seed, 2 * k + 1);
                let info: Vec<u8> = (0..self.code.k()).map(|_| rng.random::<bool>() as u8).collect();
                self.code.encode(&info)?
            }
        };
        let mut rng = frame_rng(self.cfg.seed, 2 * k);
        let mut y = transmit(&modulate(&codeword), sigma, &mut rng);
        for &i in self.code.punctured() {
            y[i] = 0.0;
        }
        let lch = llr(&y, sigma);
        Ok(FrameInput { codeword, y, lch })
    }

    /// Decodes one frame with the configured decoder. A single BP decoder
    /// is reported as a one-branch ensemble.
    pub fn decode(&self, input: &FrameInput) -> Result<EnsembleOutcome> {
        match &self.engine {
            Engine::Bp { graph, cfg } => {
                let out = BpDecoder::new(graph, *cfg)?.decode(&input.lch)?;
                EnsembleOutcome::from_branches(vec![out], &input.y)
            }
            Engine::Aed(e) => e.decode(&input.y, &input.lch),
            Engine::Sbp(s) => s.decode(&input.lch),
        }
    }

    pub fn run_frame(&self, k: u64, sigma: f64) -> Result<FrameOutcome> {
        let input = self.frame_input(k, sigma)?;
        let out = self.decode(&input)?;
        let bit_errors = out.selected.hard_bits.distance(&input.codeword);
        Ok(FrameOutcome {
            block_error: bit_errors > 0,
            bit_errors,
            branches: out.per_branch.len(),
            sum_iterations: out.sum_iterations,
            max_iterations: out.max_iterations,
            converged_branches: out.converged_branches(),
        })
    }

    /// Simulates frames `0, 1, ...` until `min_block_errors` errors or
    /// `max_frames` frames. `workers = None` uses the global thread pool.
    pub fn run_point(&self, ebno_db: f64, workers: Option<usize>) -> Result<PointResult> {
        let sigma = self.sigma(ebno_db)?;
        let mut tally = Tally::default();
        let mut next = 0usize;
        with_workers(workers, || {
            while next < self.cfg.max_frames && tally.block_errors < self.cfg.min_block_errors {
                let end = (next + CHUNK).min(self.cfg.max_frames);
                for f in self.run_chunk(next, end, sigma)? {
                    tally.add(&f);
                    if tally.block_errors >= self.cfg.min_block_errors {
                        break;
                    }
                }
                next = end;
            }
            Ok(())
        })?;
        Ok(PointResult::from_tally(ebno_db, self.code.n(), &tally))
    }

    #[cfg(feature = "parallel")]
    fn run_chunk(&self, start: usize, end: usize, sigma: f64) -> Result<Vec<FrameOutcome>> {
        use rayon::prelude::*;
        (start..end)
            .into_par_iter()
            .map(|k| self.run_frame(k as u64, sigma))
            .collect()
    }

    #[cfg(not(feature = "parallel"))]
    fn run_chunk(&self, start: usize, end: usize, sigma: f64) -> Result<Vec<FrameOutcome>> {
        (start..end).map(|k| self.run_frame(k as u64, sigma)).collect()
    }

    pub fn run_sweep(&self, workers: Option<usize>) -> Result<Vec<PointResult>> {
        if self.cfg.ebno.is_empty() {
            return Err(Error::invalid("empty Eb/N0 grid"));
        }
        self.cfg.ebno.iter().map(|&e| self.run_point(e, workers)).collect()
    }
}

fn frame_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[cfg(feature = "parallel")]
fn with_workers<T>(workers: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T>
where
    T: Send,
{
    match workers {
        None => f(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
            .install(f),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_workers<T>(_workers: Option<usize>, f: impl FnOnce() -> Result<T>) -> Result<T> {
    f()
}

/// Runs a single grid point; see [`Simulator::run_point`].
pub fn run_point(cfg: &RunConfig, ebno_db: f64) -> Result<PointResult> {
    Simulator::new(cfg.clone())?.run_point(ebno_db, None)
}

/// Runs every grid point in order.
pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<PointResult>> {
    Simulator::new(cfg.clone())?.run_sweep(None)
}

pub const CSV_HEADER: &str = "ebno_db,frames,block_errors,bit_errors,bler,ber,avg_iter,avg_max_iter,ci_low,ci_high";

pub fn write_csv<W: Write>(results: &[PointResult], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in results {
        writeln!(
            out,
            "{:.3},{},{},{},{:.5e},{:.5e},{:.4},{:.4},{:.5e},{:.5e}",
            r.ebno_db,
            r.frames,
            r.block_errors,
            r.bit_errors,
            r.bler,
            r.ber,
            r.avg_iterations,
            r.avg_max_iterations,
            r.ci_low,
            r.ci_high
        )?;
    }
    out.flush()?;
    Ok(())
}
