//! BPSK over the binary-input AWGN channel.
//!
//! Bit 0 maps to +1 and bit 1 to -1. LLRs are natural-log ratios of bit 0
//! over bit 1, so a positive LLR favours bit 0.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::gf2::BitVector;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams {
    pub ebno_db: f64,
    pub rate: f64,
    pub sigma: f64,
}

impl ChannelParams {
    pub fn new(ebno_db: f64, rate: f64) -> Result<Self> {
        Ok(ChannelParams {
            ebno_db,
            rate,
            sigma: ebno_to_sigma(ebno_db, rate)?,
        })
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }
}

/// Noise standard deviation for unit-energy BPSK:
/// `sigma^2 = 1 / (2 R 10^(EbN0/10))`.
pub fn ebno_to_sigma(ebno_db: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::invalid(format!("code rate {rate} outside (0, 1]")));
    }
    let ebno = 10f64.powf(ebno_db / 10.0);
    Ok((1.0 / (2.0 * rate * ebno)).sqrt())
}

pub fn modulate(c: &[u8]) -> Vec<f64> {
    c.iter().map(|&b| if b & 1 == 0 { 1.0 } else { -1.0 }).collect()
}

/// Adds i.i.d. Gaussian noise of standard deviation `sigma`.
pub fn transmit<R: Rng + ?Sized>(x: &[f64], sigma: f64, rng: &mut R) -> Vec<f64> {
    if sigma == 0.0 {
        return x.to_vec();
    }
    let normal = Normal::new(0.0, sigma).expect("finite positive sigma");
    x.iter().map(|&s| s + normal.sample(rng)).collect()
}

/// Channel LLRs `2 y / sigma^2`.
pub fn llr(y: &[f64], sigma: f64) -> Vec<f64> {
    let scale = 2.0 / (sigma * sigma);
    y.iter().map(|&v| scale * v).collect()
}

/// Sign decision; an LLR of exactly zero decides bit 0.
pub fn hard_decision(llr: &[f64]) -> BitVector {
    llr.iter().map(|&l| u8::from(l < 0.0)).collect()
}
