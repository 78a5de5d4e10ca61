//! 2x1 Alamouti space-time block code.
//!
//! Slot 1 sends `(x1, x2)` from antennas 1 and 2, slot 2 sends `(-x2*, x1*)`.
//! With a channel held constant over both slots the receiver stacks
//! `[y1, y2*]`, and the effective matrix `H = [[h1, h2], [h2*, -h1*]]` has
//! `H^H H = (|h1|^2 + |h2|^2) I`, so the pseudo-inverse decouples the two
//! symbols.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quasi-static path gains for one two-slot block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelBlock {
    pub h1: Complex64,
    pub h2: Complex64,
    /// Total complex noise variance per received sample.
    pub noise_variance: f64,
}

impl ChannelBlock {
    pub fn new(h1: Complex64, h2: Complex64, noise_variance: f64) -> Self {
        Self { h1, h2, noise_variance }
    }

    pub fn gain(&self) -> f64 {
        self.h1.norm_sqr() + self.h2.norm_sqr()
    }

    /// `[[h1, h2], [h2*, -h1*]]`, row-major.
    pub fn effective_matrix(&self) -> [[Complex64; 2]; 2] {
        [[self.h1, self.h2], [self.h2.conj(), -self.h1.conj()]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StbcBlock {
    pub x1: Complex64,
    pub x2: Complex64,
}

impl StbcBlock {
    /// Antenna outputs in slot 1.
    pub fn slot1(&self) -> (Complex64, Complex64) {
        (self.x1, self.x2)
    }

    /// Antenna outputs in slot 2.
    pub fn slot2(&self) -> (Complex64, Complex64) {
        (-self.x2.conj(), self.x1.conj())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceivedPair {
    pub y1: Complex64,
    pub y2: Complex64,
}

/// The two transmit-antenna streams, same length as the (padded) input.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaStreams {
    pub antenna1: Vec<Complex64>,
    pub antenna2: Vec<Complex64>,
    /// 1 when the last symbol was repeated to complete a pair.
    pub pad: usize,
}

impl AntennaStreams {
    pub fn pairs(&self) -> usize {
        self.antenna1.len() / 2
    }
}

/// Odd-length input repeats its last symbol; strip `pad` after combining.
pub fn alamouti_encode(symbols: &[Complex64]) -> AntennaStreams {
    let mut padded = symbols.to_vec();
    let pad = symbols.len() % 2;
    if let Some(&last) = symbols.last().filter(|_| pad == 1) {
        padded.push(last);
    }
    let mut antenna1 = Vec::with_capacity(padded.len());
    let mut antenna2 = Vec::with_capacity(padded.len());
    for pair in padded.chunks_exact(2) {
        let block = StbcBlock { x1: pair[0], x2: pair[1] };
        let (a1, a2) = block.slot1();
        let (b1, b2) = block.slot2();
        antenna1.extend([a1, b1]);
        antenna2.extend([a2, b2]);
    }
    AntennaStreams { antenna1, antenna2, pad }
}

/// Pseudo-inverse combiner:
/// `x1 = (h1* y1 + h2 y2*) / g`, `x2 = (h2* y1 - h1 y2*) / g`, `g = |h1|^2 + |h2|^2`.
pub fn alamouti_combine(rx: ReceivedPair, ch: &ChannelBlock) -> Result<(Complex64, Complex64)> {
    let g = ch.gain();
    if g == 0.0 {
        return Err(Error::ChannelSingular);
    }
    let y2c = rx.y2.conj();
    let x1 = (ch.h1.conj() * rx.y1 + ch.h2 * y2c) / g;
    let x2 = (ch.h2.conj() * rx.y1 - ch.h1 * y2c) / g;
    Ok((x1, x2))
}

/// Closed-form BER of 2x1 Alamouti BPSK over Rayleigh fading:
/// `p = 1/2 - 1/2 (1 + 2/ebn0)^(-1/2)`, `Pe = p^2 (1 + 2(1 - p))`.
pub fn stbc_theoretical_ber(ebn0_linear: f64) -> Result<f64> {
    if ebn0_linear.is_nan() || ebn0_linear <= 0.0 {
        return Err(Error::NonPositiveEbN0(ebn0_linear));
    }
    let p = 0.5 - 0.5 / (1.0 + 2.0 / ebn0_linear).sqrt();
    Ok(p * p * (1.0 + 2.0 * (1.0 - p)))
}
