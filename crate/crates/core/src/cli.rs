//! Command-line front end.

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{ArgAction, Parser};

use crate::channel::ChannelKind;
use crate::error::{Error, Result};
use crate::fec::{constraint_length_for, parse_generators, CodeConfig, InterleaverLayout};
use crate::link::LinkConfig;
use crate::modem::ModulationScheme;
use crate::results::{OutputFormat, Theory};
use crate::wavelet::{parse_wavelet_name, WaveletSpec};

#[derive(Debug, Parser)]
#[command(name = "mccdma", version, about = "BER simulator for wavelet MC-CDMA with Alamouti STBC")]
struct Args {
    /// bpsk | qpsk | 4qam | dbpsk
    #[arg(long)]
    scheme: Option<String>,
    /// awgn | rayleigh
    #[arg(long)]
    channel: Option<String>,
    #[arg(long, action = ArgAction::SetTrue, conflicts_with = "uncoded")]
    coded: bool,
    #[arg(long, action = ArgAction::SetTrue)]
    uncoded: bool,
    #[arg(long)]
    users: Option<usize>,
    /// Processing gain (and number of subcarriers).
    #[arg(long)]
    gain: Option<usize>,
    /// Information bits per user per SNR point.
    #[arg(long)]
    bits: Option<usize>,
    /// SNR grid in dB as MIN:STEP:MAX.
    #[arg(long)]
    snr: Option<String>,
    /// Daubechies wavelet, dbN with N = taps / 2.
    #[arg(long)]
    wavelet: Option<String>,
    /// Symbols per subcarrier in one wavelet frame (fading coherence).
    #[arg(long = "frame-symbols")]
    frame_symbols: Option<usize>,
    /// Octal generator polynomials, e.g. 7,5.
    #[arg(long)]
    generators: Option<String>,
    /// Interleaver block shape RxC.
    #[arg(long)]
    interleaver: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// table1: every scheme, coded and uncoded, over both channels.
    #[arg(long)]
    preset: Option<String>,
    /// Overlay a closed-form curve (alamouti-bpsk).
    #[arg(long)]
    theory: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json
    #[arg(long, default_value = "csv")]
    format: String,
    /// Single antenna, no spreading, wavelet or STBC.
    #[arg(long = "bypass-calibration", action = ArgAction::SetTrue)]
    bypass_calibration: bool,
    /// Print the Walsh-Hadamard codebook and exit.
    #[arg(long = "print-codebook", action = ArgAction::SetTrue)]
    print_codebook: bool,
}

/// Everything the binary needs to run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub configs: Vec<LinkConfig>,
    pub theory: Option<Theory>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub print_codebook: bool,
}

/// Expands `MIN:STEP:MAX` (inclusive of MAX within rounding).
pub fn parse_snr_range(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::Config(format!("--snr '{text}' is not MIN:STEP:MAX"));
    let nums = parts.iter().map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<Vec<_>>>()?;
    let (min, step, max) = match nums[..] {
        [min, step, max] => (min, step, max),
        [single] => return Ok(vec![single]),
        _ => return Err(bad()),
    };
    if step.is_nan() || step <= 0.0 || max < min || !min.is_finite() || !max.is_finite() {
        return Err(Error::Config(format!("--snr '{text}' needs STEP > 0 and MIN <= MAX")));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| min + i as f64 * step).collect())
}

pub fn parse_cli<I, T>(args: I) -> Result<RunPlan>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(args).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Error::Help(e.to_string()),
        _ => Error::Config(e.to_string()),
    })?;
    let mut base = LinkConfig::default();
    if let Some(s) = &args.scheme {
        base.scheme = s.parse()?;
    }
    if let Some(c) = &args.channel {
        base.channel = c.parse()?;
    }
    if args.coded {
        base.coded = true;
    }
    if args.uncoded {
        base.coded = false;
    }
    if let Some(u) = args.users {
        base.users = u;
    }
    if let Some(g) = args.gain {
        base.gain = g;
        if g == 0 || !g.is_power_of_two() {
            return Err(Error::Config(format!("--gain {g} must be a power of two")));
        }
    }
    let taps = match &args.wavelet {
        Some(name) => parse_wavelet_name(name)?,
        None => base.wavelet.taps,
    };
    base.wavelet = WaveletSpec::for_subcarriers(taps, base.gain)?;
    if let Some(b) = args.bits {
        base.bits_per_user = b;
    }
    if let Some(l) = args.frame_symbols {
        base.frame_symbols = l;
    }
    if let Some(snr) = &args.snr {
        base.snr_grid_db = parse_snr_range(snr)?;
    }
    if let Some(g) = &args.generators {
        let gens = parse_generators(g)?;
        base.code = CodeConfig::from_generators(gens.clone(), constraint_length_for(&gens))?;
    }
    if let Some(shape) = &args.interleaver {
        base.interleaver = shape.parse::<InterleaverLayout>()?;
    }
    if let Some(seed) = args.seed {
        base.seed = seed;
    }
    base.calibration_bypass = args.bypass_calibration;

    let configs = match args.preset.as_deref() {
        None => vec![base],
        Some("table1") => table1_grid(&base),
        Some(other) => return Err(Error::Config(format!("unknown preset '{other}' (expected table1)"))),
    };
    for cfg in &configs {
        cfg.validate()?;
    }
    Ok(RunPlan {
        configs,
        theory: args.theory.as_deref().map(str::parse).transpose()?,
        out: args.out,
        format: args.format.parse()?,
        print_codebook: args.print_codebook,
    })
}

/// Every scheme, uncoded then coded, AWGN then Rayleigh, all on one seed.
pub fn table1_grid(base: &LinkConfig) -> Vec<LinkConfig> {
    let mut out = Vec::with_capacity(16);
    for channel in ChannelKind::ALL {
        for scheme in ModulationScheme::ALL {
            for coded in [false, true] {
                out.push(LinkConfig { channel, scheme, coded, ..base.clone() });
            }
        }
    }
    out
}
