//! Independent reference implementations used by the integration tests and
//! the acceptance harness. Nothing here calls into the library's algorithms.
#![allow(dead_code)]

use std::path::PathBuf;

/// splitmix64, also used by `data/cn_reference.py`.
pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u = 1.0 - self.next_f64();
        let v = self.next_f64();
        (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    }
}

/// Textbook Gaussian elimination on a dense copy, no bit packing.
pub fn naive_rank(rows: &[Vec<u8>], n_cols: usize) -> usize {
    let mut m: Vec<Vec<u8>> = rows.to_vec();
    let mut rank = 0;
    for col in 0..n_cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][col] == 1) else { continue };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && m[r][col] == 1 {
                for c in 0..n_cols {
                    m[r][c] ^= m[rank][c];
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Syndrome of `v` under dense `rows`.
pub fn dense_syndrome(rows: &[Vec<u8>], v: &[u8]) -> Vec<u8> {
    rows.iter()
        .map(|r| r.iter().zip(v).fold(0, |acc, (&a, &b)| acc ^ (a & b)))
        .collect()
}

/// Index of the candidate with the smallest squared Euclidean distance
/// between its BPSK image and `y`; first index on ties.
pub fn brute_force_ml(candidates: &[Vec<u8>], y: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in candidates.iter().enumerate() {
        let d: f64 = c
            .iter()
            .zip(y)
            .map(|(&b, &v)| {
                let x = if b == 0 { 1.0 } else { -1.0 };
                (v - x) * (v - x)
            })
            .sum();
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

/// One check-node case of the reference fixture.
pub struct CnCase {
    pub inputs: Vec<f64>,
    pub exclude: usize,
    pub expected: f64,
}

/// The 10^4 cases of `data/cn_reference.txt` with their replayed inputs.
pub fn cn_reference_cases() -> Vec<CnCase> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("..")
        .join("core")
        .join("tests")
        .join("data")
        .join("cn_reference.txt");
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut rng = SplitMix64(2024);
    text.lines()
        .map(|line| {
            let d = 2 + rng.below(11) as usize;
            let inputs: Vec<f64> = (0..d).map(|_| rng.next_f64() * 16.0 - 8.0).collect();
            let exclude = rng.below(d as u64) as usize;
            CnCase {
                inputs,
                exclude,
                expected: line.trim().parse().expect("reference value"),
            }
        })
        .collect()
}
