//! Automorphism ensemble decoding (AED) of quasi-cyclic LDPC codes.
//!
//! The crate covers GF(2) matrices, QC code construction and encoding, the
//! BPSK/AWGN channel, sum-product belief propagation, symmetry-breaking
//! modifications of the parity-check matrix, ensemble decoding over the
//! quasi-cyclic automorphisms, a saturated-BP baseline and a Monte Carlo
//! harness.
//!
//! With the `parallel` feature (on by default) Monte Carlo frames and
//! ensemble branches run on the rayon pool. Results do not depend on it.

pub mod aed;
pub mod autom;
pub mod baseline;
pub mod bpdec;
pub mod channel;
pub mod error;
pub mod gf2;
pub mod qccode;
pub mod sim;
pub mod symbreak;

pub use aed::{aed_decode, select_ml, AutomorphismEnsemble, EnsembleConfig, EnsembleOutcome};
pub use autom::{is_automorphism, quasi_cyclic_group, Permutation};
pub use baseline::{sbp_decode, SaturatedBp};
pub use bpdec::{decode, BpDecoder, DecodeOutcome, DecoderConfig, Schedule, TannerGraph};
pub use error::{Error, Result};
pub use gf2::{BinaryMatrix, BitVector};
pub use qccode::{load_standard_code, QcCode, StandardCode};
pub use sim::{run_point, run_sweep, write_csv, PointResult, RunConfig, Simulator};
pub use symbreak::{is_equivariant, BreakMethod};
