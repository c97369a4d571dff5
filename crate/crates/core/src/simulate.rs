//! BPSK over AWGN with sum-product decoding.
//!
//! Frames run in fixed-size batches; every frame draws from its own seeded
//! ChaCha stream, so results do not depend on the number of threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::algebra::BinaryPcm;

/// Magnitude cap on messages.
pub const LLR_CLIP: f64 = 31.75;
pub const DEFAULT_MAX_ITERS: usize = 50;
const BATCH: usize = 64;

/// Dense GF(2) row-reduction state.
struct Gf2Rows {
    words: usize,
    rows: Vec<Vec<u64>>,
}

impl Gf2Rows {
    fn new(h: &BinaryPcm) -> Self {
        let words = h.cols().div_ceil(64);
        let rows = (0..h.rows())
            .map(|i| {
                let mut r = vec![0u64; words];
                for &j in h.row(i) {
                    r[j / 64] ^= 1 << (j % 64);
                }
                r
            })
            .collect();
        Gf2Rows { words, rows }
    }

    fn bit(row: &[u64], j: usize) -> bool {
        row[j / 64] >> (j % 64) & 1 == 1
    }

    /// Reduced row echelon form; returns the pivot column of each kept row.
    fn rref(&mut self, cols: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            let Some(p) = (r..self.rows.len()).find(|&i| Self::bit(&self.rows[i], c)) else {
                continue;
            };
            self.rows.swap(r, p);
            let pivot = self.rows[r].clone();
            for (i, row) in self.rows.iter_mut().enumerate() {
                if i != r && Self::bit(row, c) {
                    for w in 0..self.words {
                        row[w] ^= pivot[w];
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == self.rows.len() {
                break;
            }
        }
        self.rows.truncate(r);
        pivots
    }
}

pub fn gf2_rank(h: &BinaryPcm) -> usize {
    Gf2Rows::new(h).rref(h.cols()).len()
}

/// Code rate `(n - rank H) / n`.
pub fn code_rate(h: &BinaryPcm) -> f64 {
    (h.cols() - gf2_rank(h)) as f64 / h.cols() as f64
}

/// Uniformly random codeword: free positions drawn at random, pivots solved.
pub fn random_codeword<R: Rng + ?Sized>(h: &BinaryPcm, rng: &mut R) -> Vec<u8> {
    let mut g = Gf2Rows::new(h);
    let pivots = g.rref(h.cols());
    let mut word = vec![0u8; h.cols()];
    let mut is_pivot = vec![false; h.cols()];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    for (j, b) in word.iter_mut().enumerate() {
        if !is_pivot[j] {
            *b = rng.random_range(0..2);
        }
    }
    for (row, &p) in g.rows.iter().zip(&pivots) {
        let parity = word
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != p && Gf2Rows::bit(row, j))
            .fold(0u8, |acc, (_, &b)| acc ^ b);
        word[p] = parity;
    }
    word
}

pub fn encode_zero_codeword(h: &BinaryPcm) -> Vec<u8> {
    vec![0; h.cols()]
}

pub fn syndrome_is_zero(h: &BinaryPcm, word: &[u8]) -> bool {
    (0..h.rows()).all(|i| h.row(i).iter().fold(0u8, |acc, &j| acc ^ word[j]) == 0)
}

/// Eb/N0 operating point for a code of rate `rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPoint {
    pub ebn0_db: f64,
    pub rate: f64,
}

impl ChannelPoint {
    /// Noise variance per real dimension for unit-energy BPSK.
    pub fn variance(&self) -> f64 {
        1.0 / (2.0 * self.rate * 10f64.powf(self.ebn0_db / 10.0))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub bits: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
}

/// Flooding sum-product decoder in the tanh domain.
#[derive(Debug, Clone)]
pub struct SumProduct {
    h: BinaryPcm,
    /// Edges are numbered check-major; `check_start[i]..check_start[i+1]`.
    check_start: Vec<usize>,
    edge_var: Vec<usize>,
    var_edges: Vec<Vec<usize>>,
    max_iters: usize,
}

impl SumProduct {
    pub fn new(h: &BinaryPcm, max_iters: usize) -> Self {
        let mut check_start = vec![0];
        let mut edge_var = Vec::new();
        let mut var_edges = vec![Vec::new(); h.cols()];
        for i in 0..h.rows() {
            for &j in h.row(i) {
                var_edges[j].push(edge_var.len());
                edge_var.push(j);
            }
            check_start.push(edge_var.len());
        }
        SumProduct {
            h: h.clone(),
            check_start,
            edge_var,
            var_edges,
            max_iters,
        }
    }

    pub fn pcm(&self) -> &BinaryPcm {
        &self.h
    }

    /// Decodes channel LLRs (positive favors bit 0).
    pub fn decode(&self, llr: &[f64]) -> DecodeResult {
        let n = self.h.cols();
        let mut bits: Vec<u8> = llr.iter().map(|&l| u8::from(l < 0.0)).collect();
        if syndrome_is_zero(&self.h, &bits) {
            return DecodeResult {
                bits,
                converged: true,
                iterations: 0,
            };
        }
        let clip = |x: f64| x.clamp(-LLR_CLIP, LLR_CLIP);
        let mut v2c: Vec<f64> = self.edge_var.iter().map(|&j| clip(llr[j])).collect();
        let mut c2v = vec![0.0; v2c.len()];
        let mut t = Vec::new();
        for it in 1..=self.max_iters {
            for i in 0..self.check_start.len() - 1 {
                let r = self.check_start[i]..self.check_start[i + 1];
                t.clear();
                t.extend(v2c[r.clone()].iter().map(|&m| (m / 2.0).tanh()));
                // Exclusive products via a forward and a backward pass.
                let mut fwd = 1.0;
                for (k, e) in r.clone().enumerate() {
                    c2v[e] = fwd;
                    fwd *= t[k];
                }
                let mut bwd = 1.0;
                for (k, e) in r.clone().enumerate().rev() {
                    let p = (c2v[e] * bwd).clamp(-1.0 + 1e-15, 1.0 - 1e-15);
                    c2v[e] = clip(2.0 * p.atanh());
                    bwd *= t[k];
                }
            }
            for j in 0..n {
                let total: f64 = llr[j] + self.var_edges[j].iter().map(|&e| c2v[e]).sum::<f64>();
                bits[j] = u8::from(total < 0.0);
                for &e in &self.var_edges[j] {
                    v2c[e] = clip(total - c2v[e]);
                }
            }
            if syndrome_is_zero(&self.h, &bits) {
                return DecodeResult {
                    bits,
                    converged: true,
                    iterations: it,
                };
            }
        }
        DecodeResult {
            bits,
            converged: false,
            iterations: self.max_iters,
        }
    }
}

/// Per-point Monte-Carlo stop rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopRule {
    pub min_frame_errors: u64,
    pub max_frames: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            min_frame_errors: 100,
            max_frames: 100_000,
        }
    }
}

/// Transmitted codeword choice.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Transmit {
    #[default]
    AllZero,
    /// A fresh uniformly random codeword per frame.
    Random,
}

/// Statistics of one operating point. BER counts all `n` channel bits.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub ebn0_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub avg_iters: f64,
}

#[derive(Default, Clone, Copy)]
struct Tally {
    frames: u64,
    bit_errors: u64,
    frame_errors: u64,
    iters: u64,
}

fn frame_rng(seed: u64, point: usize, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (point as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(frame);
    rng
}

fn simulate_frame(
    decoder: &SumProduct,
    sigma: f64,
    transmit: Transmit,
    rng: &mut ChaCha8Rng,
) -> Tally {
    let h = decoder.pcm();
    let word = match transmit {
        Transmit::AllZero => encode_zero_codeword(h),
        Transmit::Random => random_codeword(h, rng),
    };
    let var = sigma * sigma;
    let llr: Vec<f64> = word
        .iter()
        .map(|&b| {
            let s = if b == 0 { 1.0 } else { -1.0 };
            let noise: f64 = rng.sample(StandardNormal);
            2.0 * (s + sigma * noise) / var
        })
        .collect();
    let out = decoder.decode(&llr);
    let errs = out.bits.iter().zip(&word).filter(|(a, b)| a != b).count() as u64;
    Tally {
        frames: 1,
        bit_errors: errs,
        frame_errors: u64::from(errs > 0),
        iters: out.iterations as u64,
    }
}

/// Runs the BER loop at each Eb/N0 (dB) in `points`.
pub fn run_ber(
    h: &BinaryPcm,
    points: &[f64],
    stop: StopRule,
    max_iters: usize,
    transmit: Transmit,
    seed: u64,
) -> Vec<SimResult> {
    let decoder = SumProduct::new(h, max_iters);
    let rate = code_rate(h);
    points
        .iter()
        .enumerate()
        .map(|(pi, &ebn0_db)| {
            let sigma = ChannelPoint { ebn0_db, rate }.variance().sqrt();
            let mut total = Tally::default();
            while total.frame_errors < stop.min_frame_errors && total.frames < stop.max_frames {
                let start = total.frames;
                let count = (stop.max_frames - start).min(BATCH as u64);
                let batch: Vec<Tally> = (start..start + count)
                    .into_par_iter()
                    .map(|f| simulate_frame(&decoder, sigma, transmit, &mut frame_rng(seed, pi, f)))
                    .collect();
                for t in batch {
                    total.frames += t.frames;
                    total.bit_errors += t.bit_errors;
                    total.frame_errors += t.frame_errors;
                    total.iters += t.iters;
                }
            }
            let frames = total.frames.max(1) as f64;
            SimResult {
                ebn0_db,
                frames: total.frames,
                bit_errors: total.bit_errors,
                frame_errors: total.frame_errors,
                ber: total.bit_errors as f64 / (frames * h.cols() as f64),
                fer: total.frame_errors as f64 / frames,
                avg_iters: total.iters as f64 / frames,
            }
        })
        .collect()
}
