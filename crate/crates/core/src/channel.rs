//! AWGN and flat Rayleigh channels with Eb/N0 noise calibration.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::alamouti::{AntennaStreams, ChannelBlock};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Awgn,
    Rayleigh,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 2] = [ChannelKind::Awgn, ChannelKind::Rayleigh];

    pub fn token(self) -> &'static str {
        match self {
            ChannelKind::Awgn => "awgn",
            ChannelKind::Rayleigh => "rayleigh",
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "awgn" => Ok(ChannelKind::Awgn),
            "rayleigh" => Ok(ChannelKind::Rayleigh),
            other => Err(Error::Config(format!("unknown channel '{other}' (expected awgn or rayleigh)"))),
        }
    }
}

/// Noise variance for a target Eb/N0:
/// `sigma^2 = P / (ebn0 * bits_per_symbol * code_rate)`, where `P` is the
/// received signal energy per modulation symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseCalibration {
    pub target_ebn0_db: f64,
    pub measured_signal_power: f64,
    pub bits_per_symbol: usize,
    pub code_rate: f64,
    pub noise_variance: f64,
}

impl NoiseCalibration {
    pub fn new(
        target_ebn0_db: f64,
        measured_signal_power: f64,
        bits_per_symbol: usize,
        code_rate: f64,
    ) -> Result<Self> {
        if !target_ebn0_db.is_finite() {
            return Err(Error::Config(format!("Eb/N0 {target_ebn0_db} dB is not finite")));
        }
        if measured_signal_power.is_nan()
            || measured_signal_power <= 0.0
            || bits_per_symbol == 0
            || code_rate.is_nan()
            || code_rate <= 0.0
        {
            return Err(Error::Config("calibration needs positive signal power, bits per symbol and code rate".into()));
        }
        let ebn0 = db_to_linear(target_ebn0_db);
        let noise_variance = measured_signal_power / (ebn0 * bits_per_symbol as f64 * code_rate);
        Ok(Self { target_ebn0_db, measured_signal_power, bits_per_symbol, code_rate, noise_variance })
    }

    /// Zero-variance calibration; the channel adds nothing.
    pub fn noiseless() -> Self {
        Self {
            target_ebn0_db: f64::INFINITY,
            measured_signal_power: 1.0,
            bits_per_symbol: 1,
            code_rate: 1.0,
            noise_variance: 0.0,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// One draw from CN(0, variance).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * scale, im * scale)
}

/// Adds circularly symmetric Gaussian noise of total variance
/// `calib.noise_variance`. A zero variance returns the input untouched and
/// consumes no randomness.
pub fn awgn<R: Rng + ?Sized>(signal: &[Complex64], calib: &NoiseCalibration, rng: &mut R) -> Vec<Complex64> {
    if calib.noise_variance == 0.0 {
        return signal.to_vec();
    }
    signal.iter().map(|&s| s + complex_gaussian(rng, calib.noise_variance)).collect()
}

/// Independent CN(0, 1) gain pairs, one per block.
pub fn rayleigh_blocks<R: Rng + ?Sized>(count: usize, noise_variance: f64, rng: &mut R) -> Vec<ChannelBlock> {
    (0..count)
        .map(|_| {
            let h1 = complex_gaussian(rng, 1.0);
            let h2 = complex_gaussian(rng, 1.0);
            ChannelBlock::new(h1, h2, noise_variance)
        })
        .collect()
}

/// Unit-gain blocks used by the non-fading channel.
pub fn unit_blocks(count: usize, noise_variance: f64) -> Vec<ChannelBlock> {
    let one = Complex64::new(1.0, 0.0);
    vec![ChannelBlock::new(one, one, noise_variance); count]
}

/// Two-antenna transmission through the channel: per slot
/// `y = h1 a1 + h2 a2 + n`. The AWGN kind fixes `h1 = h2 = 1`; the Rayleigh
/// kind takes gains from `blocks`, one per slot pair.
pub fn apply_channel<R: Rng + ?Sized>(
    streams: &AntennaStreams,
    kind: ChannelKind,
    blocks: &[ChannelBlock],
    calib: &NoiseCalibration,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if streams.antenna1.len() != streams.antenna2.len() || !streams.antenna1.len().is_multiple_of(2) {
        return Err(Error::LengthMismatch { expected: streams.antenna1.len(), got: streams.antenna2.len() });
    }
    let pairs = streams.pairs();
    let faded: Vec<Complex64> = match kind {
        ChannelKind::Awgn => streams.antenna1.iter().zip(&streams.antenna2).map(|(a, b)| a + b).collect(),
        ChannelKind::Rayleigh => {
            if blocks.len() != pairs {
                return Err(Error::LengthMismatch { expected: pairs, got: blocks.len() });
            }
            streams
                .antenna1
                .iter()
                .zip(&streams.antenna2)
                .enumerate()
                .map(|(i, (a, b))| {
                    let ch = &blocks[i / 2];
                    ch.h1 * a + ch.h2 * b
                })
                .collect()
        }
    };
    Ok(awgn(&faded, calib, rng))
}

/// Single-antenna path used by the calibration bypass: `y = h x + n`, with
/// `h = 1` when `gains` is `None`.
pub fn apply_single_antenna<R: Rng + ?Sized>(
    signal: &[Complex64],
    gains: Option<&[Complex64]>,
    calib: &NoiseCalibration,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let faded: Vec<Complex64> = match gains {
        None => signal.to_vec(),
        Some(h) => {
            if h.len() != signal.len() {
                return Err(Error::LengthMismatch { expected: signal.len(), got: h.len() });
            }
            signal.iter().zip(h).map(|(x, g)| x * g).collect()
        }
    };
    Ok(awgn(&faded, calib, rng))
}

/// `10 log10(sigma_x^2 / sigma_e^2)`: mean square of `original` over the
/// mean square error of `reconstructed`. Returns `+inf` when the two match.
pub fn measure_snr(original: &[Complex64], reconstructed: &[Complex64]) -> Result<f64> {
    if original.len() != reconstructed.len() {
        return Err(Error::LengthMismatch { expected: original.len(), got: reconstructed.len() });
    }
    if original.is_empty() {
        return Err(Error::EmptyFrame);
    }
    let n = original.len() as f64;
    let signal = original.iter().map(|x| x.norm_sqr()).sum::<f64>() / n;
    let error = original.iter().zip(reconstructed).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>() / n;
    if error == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal / error).log10())
}
