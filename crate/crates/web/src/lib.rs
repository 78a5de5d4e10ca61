//! Browser bindings for the link simulator.
//!
//! Each export returns a JSON string; the page in `www/` parses and plots it.
//! The `*_json` functions carry the logic so they can be tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use mccdma::alamouti::{alamouti_combine, alamouti_encode, ReceivedPair};
use mccdma::channel::{apply_channel, rayleigh_blocks, unit_blocks, ChannelKind, NoiseCalibration};
use mccdma::fec::BitFrame;
use mccdma::link::{random_bits, sweep, FrameRngs, LinkConfig};
use mccdma::modem::{modulate, ModulationScheme};
use mccdma::results::{overlay_theory, Theory};
use mccdma::wavelet::{idwt_synthesize, SubbandFrame, WaveletSpec};
use mccdma::{Error, Result};

/// Largest bit budget accepted from the page, to keep the tab responsive.
pub const MAX_BITS: usize = 200_000;
pub const MAX_POINTS: usize = 20_000;

#[derive(Serialize)]
struct CurveOut {
    label: String,
    snr_db: Vec<f64>,
    ber: Vec<f64>,
    errors: Vec<u64>,
    theory: Vec<f64>,
}

#[derive(Serialize)]
struct ConstellationOut {
    reference: Vec<[f64; 2]>,
    received: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct WaveformOut {
    name: String,
    subbands: usize,
    samples: Vec<f64>,
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::Io(e.to_string()))
}

#[allow(clippy::too_many_arguments)]
pub fn ber_curve_json(
    scheme: &str,
    channel: &str,
    coded: bool,
    users: usize,
    bits: usize,
    snr_min: f64,
    snr_max: f64,
    seed: u64,
) -> Result<String> {
    if bits == 0 || bits > MAX_BITS {
        return Err(Error::Config(format!("bits must be in 1..={MAX_BITS}")));
    }
    if !snr_min.is_finite() || !snr_max.is_finite() || snr_min > snr_max || snr_max - snr_min > 40.0 {
        return Err(Error::Config("SNR range must satisfy min <= max within 40 dB".into()));
    }
    let grid: Vec<f64> = (0..=(snr_max - snr_min).floor() as usize).map(|i| snr_min + i as f64).collect();
    let cfg = LinkConfig {
        scheme: scheme.parse()?,
        channel: channel.parse()?,
        coded,
        users,
        bits_per_user: bits,
        snr_grid_db: grid,
        seed,
        ..LinkConfig::default()
    };
    cfg.validate()?;
    let mut curves = vec![sweep(&cfg)?];
    overlay_theory(&mut curves, Theory::AlamoutiBpsk)?;
    let curve = &curves[0];
    json(&CurveOut {
        label: cfg.label(),
        snr_db: curve.points.iter().map(|p| p.snr_db).collect(),
        ber: curve.points.iter().map(|p| p.ber).collect(),
        errors: curve.points.iter().map(|p| p.bit_errors).collect(),
        theory: curve.points.iter().filter_map(|p| p.theory).collect(),
    })
}

/// Equalized symbols after the 2x1 combiner, single user, no spreading.
pub fn constellation_json(scheme: &str, channel: &str, snr_db: f64, count: usize, seed: u64) -> Result<String> {
    if count == 0 || count > MAX_POINTS {
        return Err(Error::Config(format!("count must be in 1..={MAX_POINTS}")));
    }
    let scheme: ModulationScheme = scheme.parse()?;
    let kind: ChannelKind = channel.parse()?;
    let mut rngs = FrameRngs::new(seed);
    let bits = BitFrame::new(random_bits(&mut rngs.source, count * scheme.bits_per_symbol()));
    let symbols = modulate(&bits, scheme).samples;
    let streams = alamouti_encode(&symbols);
    // Both antennas transmit at full power, so the receiver sees energy 2 per symbol.
    let calib = NoiseCalibration::new(snr_db, 2.0, scheme.bits_per_symbol(), 1.0)?;
    let blocks = match kind {
        ChannelKind::Awgn => unit_blocks(streams.pairs(), calib.noise_variance),
        ChannelKind::Rayleigh => rayleigh_blocks(streams.pairs(), calib.noise_variance, &mut rngs.fading),
    };
    let rx = apply_channel(&streams, kind, &blocks, &calib, &mut rngs.noise)?;
    let mut received = Vec::with_capacity(rx.len());
    for (pair, ch) in rx.chunks_exact(2).zip(&blocks) {
        let (x1, x2) = alamouti_combine(ReceivedPair { y1: pair[0], y2: pair[1] }, ch)?;
        received.extend([[x1.re, x1.im], [x2.re, x2.im]]);
    }
    received.truncate(symbols.len());
    json(&ConstellationOut { reference: scheme.constellation().iter().map(|c| [c.re, c.im]).collect(), received })
}

/// Time-domain waveform of one wavelet-packet subcarrier.
pub fn subcarrier_waveform_json(taps: usize, subcarriers: usize, subband: usize) -> Result<String> {
    let spec = WaveletSpec::for_subcarriers(taps, subcarriers)?;
    if subband >= spec.subbands() {
        return Err(Error::Config(format!("subband {subband} out of range 0..{}", spec.subbands())));
    }
    // A few symbols per band so longer filters wrap less visibly.
    let mut frame = SubbandFrame::zeros(spec.subbands(), 4);
    frame.bands[subband][1].re = 1.0;
    let samples = idwt_synthesize(&frame, &spec)?.iter().map(|c| c.re).collect();
    json(&WaveformOut { name: spec.name(), subbands: spec.subbands(), samples })
}

fn js(r: Result<String>) -> std::result::Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e.to_string()))
}

/// BER sweep at 1 dB steps with the closed-form Alamouti BPSK curve attached.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn ber_curve(
    scheme: &str,
    channel: &str,
    coded: bool,
    users: usize,
    bits: usize,
    snr_min: f64,
    snr_max: f64,
    seed: u64,
) -> std::result::Result<String, JsValue> {
    js(ber_curve_json(scheme, channel, coded, users, bits, snr_min, snr_max, seed))
}

#[wasm_bindgen]
pub fn constellation(
    scheme: &str,
    channel: &str,
    snr_db: f64,
    count: usize,
    seed: u64,
) -> std::result::Result<String, JsValue> {
    js(constellation_json(scheme, channel, snr_db, count, seed))
}

#[wasm_bindgen]
pub fn subcarrier_waveform(taps: usize, subcarriers: usize, subband: usize) -> std::result::Result<String, JsValue> {
    js(subcarrier_waveform_json(taps, subcarriers, subband))
}
