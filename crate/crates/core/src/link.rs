//! End-to-end link: source bits through coding, spreading, wavelet-packet
//! multicarrier modulation, Alamouti transmission, channel and back.
//!
//! Randomness is split into independent ChaCha streams per SNR point, per
//! frame and per purpose (source bits, fading, noise), all derived from the
//! master seed. Results therefore do not depend on how frames and points are
//! scheduled, and coded/uncoded runs with the same seed see the same source
//! bits and the same channel draws in the same order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::alamouti::{alamouti_combine, alamouti_encode, ChannelBlock, ReceivedPair};
use crate::channel::{
    apply_channel, apply_single_antenna, complex_gaussian, rayleigh_blocks, unit_blocks, ChannelKind, NoiseCalibration,
};
use crate::error::{Error, Result};
use crate::fec::{conv_encode, viterbi_decode, BitFrame, CodeConfig, InterleaverLayout};
use crate::modem::{demodulate, mean_power, modulate, ModulationScheme, SymbolFrame};
use crate::spreader::{despread, hadamard_codebook, spread, superpose, ChipFrame, HadamardCodebook};
use crate::wavelet::{dwt_analyze, idwt_synthesize, SubbandFrame, WaveletSpec};

/// Full description of one BER experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkConfig {
    pub users: usize,
    /// Processing gain; also the number of wavelet subcarriers.
    pub gain: usize,
    pub scheme: ModulationScheme,
    pub coded: bool,
    pub channel: ChannelKind,
    pub wavelet: WaveletSpec,
    /// Symbols per subcarrier in one wavelet frame. The Rayleigh channel is
    /// held constant over a frame and drawn independently across frames.
    pub frame_symbols: usize,
    pub code: CodeConfig,
    pub interleaver: InterleaverLayout,
    pub snr_grid_db: Vec<f64>,
    pub bits_per_user: usize,
    /// Upper bound on information bits per user per codeword.
    pub frame_bits: usize,
    pub seed: u64,
    /// Single antenna, no spreading, wavelet or STBC.
    pub calibration_bypass: bool,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            users: 4,
            gain: 8,
            scheme: ModulationScheme::Bpsk,
            coded: true,
            channel: ChannelKind::Rayleigh,
            wavelet: WaveletSpec::for_subcarriers(4, 8).expect("db2 over 8 subcarriers"),
            frame_symbols: 1,
            code: CodeConfig::default(),
            interleaver: InterleaverLayout::default(),
            snr_grid_db: (0..=10).map(f64::from).collect(),
            bits_per_user: 10_000,
            frame_bits: 10_000,
            seed: 0x5eed_2012,
            calibration_bypass: false,
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.users == 0 {
            return fail("at least one user is required".into());
        }
        if self.gain == 0 || !self.gain.is_power_of_two() {
            return fail(format!("processing gain {} must be a power of two", self.gain));
        }
        if self.users > self.gain {
            return fail(format!(
                "{} users cannot share processing gain {}; use --users <= --gain",
                self.users, self.gain
            ));
        }
        if self.wavelet.subbands() != self.gain {
            return fail(format!(
                "wavelet tree has {} subbands but the processing gain is {}",
                self.wavelet.subbands(),
                self.gain
            ));
        }
        if self.frame_symbols == 0 {
            return fail("frame must hold at least one symbol per subcarrier".into());
        }
        if self.snr_grid_db.is_empty() {
            return fail("SNR grid is empty".into());
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return fail("SNR grid contains non-finite values".into());
        }
        if self.snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return fail("SNR grid must be strictly increasing".into());
        }
        if self.bits_per_user == 0 || self.frame_bits == 0 {
            return fail("bit budget must be positive".into());
        }
        if self.coded {
            self.code.validate()?;
        }
        Ok(())
    }

    pub fn code_rate(&self) -> f64 {
        if self.coded {
            self.code.rate()
        } else {
            1.0
        }
    }

    /// `users,scheme,channel,coded` summary used in output files.
    pub fn label(&self) -> String {
        format!(
            "{} users, {}, {}, {}",
            self.users,
            self.scheme,
            self.channel,
            if self.coded { "coded" } else { "uncoded" }
        )
    }
}

/// Error tally for one user.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserCount {
    pub errors: u64,
    pub bits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub bits_counted: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub per_user: Vec<UserCount>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theory: Option<f64>,
}

impl BerPoint {
    pub fn from_counts(snr_db: f64, per_user: Vec<UserCount>) -> Self {
        let bits_counted = per_user.iter().map(|u| u.bits).sum();
        let bit_errors = per_user.iter().map(|u| u.errors).sum();
        let ber = if bits_counted == 0 { 0.0 } else { bit_errors as f64 / bits_counted as f64 };
        Self { snr_db, bits_counted, bit_errors, ber, per_user, theory: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerCurve {
    pub config: LinkConfig,
    pub points: Vec<BerPoint>,
}

/// SplitMix64 finalizer, used to derive independent child seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(parent: u64, index: u64) -> u64 {
    mix(parent ^ mix(index))
}

const STREAM_SOURCE: u64 = 0x50;
const STREAM_FADING: u64 = 0xfa;
const STREAM_NOISE: u64 = 0x40;

/// Random streams for one frame.
pub struct FrameRngs {
    pub source: ChaCha8Rng,
    pub fading: ChaCha8Rng,
    pub noise: ChaCha8Rng,
}

impl FrameRngs {
    pub fn new(frame_seed: u64) -> Self {
        let rng = |tag| ChaCha8Rng::seed_from_u64(derive_seed(frame_seed, tag));
        Self { source: rng(STREAM_SOURCE), fading: rng(STREAM_FADING), noise: rng(STREAM_NOISE) }
    }
}

pub fn random_bits<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<u8> {
    let mut bits = Vec::with_capacity(len);
    while bits.len() < len {
        let word: u64 = rng.random();
        let take = (len - bits.len()).min(64);
        bits.extend((0..take).map(|i| ((word >> i) & 1) as u8));
    }
    bits
}

/// A validated chain ready to move frames.
#[derive(Debug, Clone)]
pub struct Link {
    cfg: LinkConfig,
    codebook: HadamardCodebook,
}

struct UserTx {
    /// Length of the codeword before interleaver padding.
    encoded_len: usize,
    /// Bits handed to the mapper.
    tx_len: usize,
    symbols: SymbolFrame,
}

impl Link {
    pub fn new(cfg: LinkConfig) -> Result<Self> {
        cfg.validate()?;
        let codebook = hadamard_codebook(cfg.gain, cfg.users)?;
        Ok(Self { cfg, codebook })
    }

    pub fn config(&self) -> &LinkConfig {
        &self.cfg
    }

    pub fn codebook(&self) -> &HadamardCodebook {
        &self.codebook
    }

    fn encode_user(&self, src: &BitFrame) -> Result<UserTx> {
        let (encoded_len, tx) = if self.cfg.coded {
            let coded = conv_encode(src, &self.cfg.code)?;
            let len = coded.len();
            (len, self.cfg.interleaver.interleave_padded(&coded)?)
        } else {
            (src.len(), src.clone())
        };
        Ok(UserTx { encoded_len, tx_len: tx.len(), symbols: modulate(&tx, self.cfg.scheme) })
    }

    fn decode_user(&self, tx: &UserTx, symbols: Vec<Complex64>, info_len: usize) -> Result<BitFrame> {
        let frame = SymbolFrame { samples: symbols, scheme: self.cfg.scheme };
        let mut hard = demodulate(&frame, self.cfg.scheme)?;
        hard.bits.truncate(tx.tx_len);
        if !self.cfg.coded {
            return Ok(hard);
        }
        let coded = self.cfg.interleaver.deinterleave_padded(&hard, tx.encoded_len)?;
        let mut data = viterbi_decode(&coded, &self.cfg.code)?;
        data.bits.truncate(info_len);
        Ok(data)
    }

    /// Sends one frame per user and returns the decoded information bits.
    /// `ebn0_db = None` runs the channel without noise.
    pub fn transceive(
        &self,
        sources: &[BitFrame],
        ebn0_db: Option<f64>,
        rngs: &mut FrameRngs,
    ) -> Result<Vec<BitFrame>> {
        if sources.len() != self.cfg.users {
            return Err(Error::LengthMismatch { expected: self.cfg.users, got: sources.len() });
        }
        let info_len = sources[0].len();
        if sources.iter().any(|s| s.len() != info_len) {
            return Err(Error::Config("all users must send frames of equal length".into()));
        }
        let txs = sources.iter().map(|s| self.encode_user(s)).collect::<Result<Vec<_>>>()?;
        let bps = self.cfg.scheme.bits_per_symbol();
        let rate = self.cfg.code_rate();

        let received: Vec<Vec<Complex64>> = if self.cfg.calibration_bypass {
            txs.iter()
                .map(|tx| {
                    let x = &tx.symbols.samples;
                    let calib = match ebn0_db {
                        Some(db) => NoiseCalibration::new(db, mean_power(x), bps, rate)?,
                        None => NoiseCalibration::noiseless(),
                    };
                    match self.cfg.channel {
                        ChannelKind::Awgn => apply_single_antenna(x, None, &calib, &mut rngs.noise),
                        ChannelKind::Rayleigh => {
                            let h: Vec<Complex64> =
                                (0..x.len()).map(|_| complex_gaussian(&mut rngs.fading, 1.0)).collect();
                            let y = apply_single_antenna(x, Some(&h), &calib, &mut rngs.noise)?;
                            Ok(y.iter().zip(&h).map(|(y, h)| y / h).collect())
                        }
                    }
                })
                .collect::<Result<_>>()?
        } else {
            self.multicarrier(&txs, ebn0_db, bps, rate, rngs)?
        };

        txs.iter()
            .zip(received)
            .enumerate()
            .map(|(user, (tx, symbols))| {
                let mut out = self.decode_user(tx, symbols, info_len)?;
                out.owner_user = Some(user);
                Ok(out)
            })
            .collect()
    }

    fn multicarrier(
        &self,
        txs: &[UserTx],
        ebn0_db: Option<f64>,
        bps: usize,
        rate: f64,
        rngs: &mut FrameRngs,
    ) -> Result<Vec<Vec<Complex64>>> {
        let g = self.cfg.gain;
        let l = self.cfg.frame_symbols;
        let spec = &self.cfg.wavelet;
        let n_sym = txs[0].symbols.len();

        let chips = txs
            .iter()
            .enumerate()
            .map(|(u, tx)| spread(&tx.symbols.samples, self.codebook.code(u)))
            .collect::<Result<Vec<_>>>()?;
        let mut composite = superpose(&chips)?.chips;
        let frames = n_sym.div_ceil(l);
        composite.resize(frames * l * g, Complex64::new(0.0, 0.0));

        // Symbol s of frame f puts chip i on subcarrier i at position s.
        let mut time = Vec::with_capacity(composite.len());
        for frame in composite.chunks(l * g) {
            let mut sub = SubbandFrame::zeros(g, l);
            for (s, symbol) in frame.chunks(g).enumerate() {
                for (i, &chip) in symbol.iter().enumerate() {
                    sub.bands[i][s] = chip;
                }
            }
            time.extend(idwt_synthesize(&sub, spec)?);
        }

        let streams = alamouti_encode(&time);
        let calib = match ebn0_db {
            Some(db) => {
                let per_sample = mean_power(&streams.antenna1) + mean_power(&streams.antenna2);
                let per_symbol = per_sample * g as f64 / self.cfg.users as f64;
                NoiseCalibration::new(db, per_symbol, bps, rate)?
            }
            None => NoiseCalibration::noiseless(),
        };
        let frame_len = l * g;
        let pairs = streams.pairs();
        let blocks: Vec<ChannelBlock> = match self.cfg.channel {
            ChannelKind::Awgn => unit_blocks(pairs, calib.noise_variance),
            ChannelKind::Rayleigh => {
                let per_frame = rayleigh_blocks(frames, calib.noise_variance, &mut rngs.fading);
                (0..pairs).map(|p| per_frame[(2 * p / frame_len).min(frames - 1)]).collect()
            }
        };
        let rx = apply_channel(&streams, self.cfg.channel, &blocks, &calib, &mut rngs.noise)?;

        let mut estimate = Vec::with_capacity(rx.len());
        for (pair, ch) in rx.chunks_exact(2).zip(&blocks) {
            let (x1, x2) = alamouti_combine(ReceivedPair { y1: pair[0], y2: pair[1] }, ch)?;
            estimate.extend([x1, x2]);
        }
        estimate.truncate(time.len());

        let mut chips_rx = Vec::with_capacity(composite.len());
        for frame in estimate.chunks(frame_len) {
            let sub = dwt_analyze(frame, spec)?;
            for s in 0..l {
                chips_rx.extend(sub.bands.iter().map(|band| band[s]));
            }
        }
        chips_rx.truncate(n_sym * g);
        let chips_rx = ChipFrame { chips: chips_rx, chips_per_symbol: g };
        (0..self.cfg.users).map(|u| despread(&chips_rx, self.codebook.code(u))).collect()
    }
}

fn frame_sizes(total: usize, max: usize) -> Vec<usize> {
    let frames = total.div_ceil(max);
    let base = total / frames;
    let extra = total % frames;
    (0..frames).map(|i| base + usize::from(i < extra)).collect()
}

fn run_frame(link: &Link, snr_db: Option<f64>, frame_seed: u64, len: usize) -> Result<Vec<UserCount>> {
    let mut rngs = FrameRngs::new(frame_seed);
    let users = link.cfg.users;
    let sources: Vec<BitFrame> =
        (0..users).map(|u| BitFrame::for_user(random_bits(&mut rngs.source, len), u)).collect();
    let decoded = link.transceive(&sources, snr_db, &mut rngs)?;
    Ok(sources
        .iter()
        .zip(&decoded)
        .map(|(s, d)| UserCount {
            errors: s.bits.iter().zip(&d.bits).filter(|(a, b)| a != b).count() as u64,
            bits: s.len() as u64,
        })
        .collect())
}

fn accumulate(counts: Vec<Vec<UserCount>>, users: usize) -> Vec<UserCount> {
    counts.into_iter().fold(vec![UserCount::default(); users], |mut acc, frame| {
        for (a, f) in acc.iter_mut().zip(frame) {
            a.errors += f.errors;
            a.bits += f.bits;
        }
        acc
    })
}

fn point_counts(link: &Link, snr_db: Option<f64>, seed: u64) -> Result<Vec<UserCount>> {
    let sizes = frame_sizes(link.cfg.bits_per_user, link.cfg.frame_bits);
    let job = |(i, &len): (usize, &usize)| run_frame(link, snr_db, derive_seed(seed, i as u64), len);
    #[cfg(feature = "parallel")]
    let counts = sizes.par_iter().enumerate().map(job).collect::<Result<Vec<_>>>()?;
    #[cfg(not(feature = "parallel"))]
    let counts = sizes.iter().enumerate().map(job).collect::<Result<Vec<_>>>()?;
    Ok(accumulate(counts, link.cfg.users))
}

/// BER at one Eb/N0 value (dB). Deterministic in `(cfg, snr_db, seed)`.
pub fn run_point(cfg: &LinkConfig, snr_db: f64, seed: u64) -> Result<BerPoint> {
    let link = Link::new(cfg.clone())?;
    Ok(BerPoint::from_counts(snr_db, point_counts(&link, Some(snr_db), seed)?))
}

/// Same chain with the noise switched off.
pub fn run_noiseless(cfg: &LinkConfig, seed: u64) -> Result<BerPoint> {
    let link = Link::new(cfg.clone())?;
    Ok(BerPoint::from_counts(f64::INFINITY, point_counts(&link, None, seed)?))
}

/// Seed for grid point `index`; independent of the rest of the grid.
pub fn point_seed(master: u64, index: usize) -> u64 {
    derive_seed(master, 0x1000 + index as u64)
}

pub fn sweep(cfg: &LinkConfig) -> Result<BerCurve> {
    let link = Link::new(cfg.clone())?;
    let job = |(i, &snr): (usize, &f64)| {
        point_counts(&link, Some(snr), point_seed(cfg.seed, i)).map(|c| BerPoint::from_counts(snr, c))
    };
    #[cfg(feature = "parallel")]
    let points = cfg.snr_grid_db.par_iter().enumerate().map(job).collect::<Result<Vec<_>>>()?;
    #[cfg(not(feature = "parallel"))]
    let points = cfg.snr_grid_db.iter().enumerate().map(job).collect::<Result<Vec<_>>>()?;
    Ok(BerCurve { config: cfg.clone(), points })
}
