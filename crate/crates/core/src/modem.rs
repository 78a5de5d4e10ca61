//! Hard-decision mapper and demapper for BPSK, QPSK, 4QAM and DBPSK.
//!
//! All constellations have unit average energy. QPSK uses natural binary
//! labelling of the phases {1, j, -1, -j}; 4QAM uses Gray labelling of
//! (+-1 +- j)/sqrt(2). The two therefore share a point set but differ in how
//! symbol errors turn into bit errors.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fec::BitFrame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModulationScheme {
    Bpsk,
    Qpsk,
    #[serde(rename = "4qam")]
    Qam4,
    Dbpsk,
}

impl ModulationScheme {
    pub const ALL: [ModulationScheme; 4] =
        [ModulationScheme::Bpsk, ModulationScheme::Qpsk, ModulationScheme::Qam4, ModulationScheme::Dbpsk];

    pub fn bits_per_symbol(self) -> usize {
        match self {
            ModulationScheme::Bpsk | ModulationScheme::Dbpsk => 1,
            ModulationScheme::Qpsk | ModulationScheme::Qam4 => 2,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            ModulationScheme::Bpsk => "bpsk",
            ModulationScheme::Qpsk => "qpsk",
            ModulationScheme::Qam4 => "4qam",
            ModulationScheme::Dbpsk => "dbpsk",
        }
    }

    /// Constellation points indexed by their bit label (first bit is the MSB).
    pub fn constellation(self) -> Vec<Complex64> {
        match self {
            ModulationScheme::Bpsk | ModulationScheme::Dbpsk => {
                vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]
            }
            ModulationScheme::Qpsk => (0..4).map(|i| Complex64::i().powu(i)).collect(),
            ModulationScheme::Qam4 => (0..4u8).map(qam4_point).collect(),
        }
    }
}

impl fmt::Display for ModulationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for ModulationScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bpsk" => Ok(ModulationScheme::Bpsk),
            "qpsk" => Ok(ModulationScheme::Qpsk),
            "4qam" | "qam4" => Ok(ModulationScheme::Qam4),
            "dbpsk" => Ok(ModulationScheme::Dbpsk),
            other => Err(Error::Config(format!("unknown scheme '{other}' (expected bpsk, qpsk, 4qam or dbpsk)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    pub samples: Vec<Complex64>,
    pub scheme: ModulationScheme,
}

impl SymbolFrame {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean_energy(&self) -> f64 {
        mean_power(&self.samples)
    }
}

pub fn mean_power(samples: &[Complex64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64
}

// Gray: first bit picks the quadrature sign, second bit the in-phase sign.
fn qam4_point(label: u8) -> Complex64 {
    let i = if label & 1 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    let q = if label & 2 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    Complex64::new(i, q)
}

/// Maps bits to unit-energy symbols. Two-bit schemes zero-pad an odd-length
/// frame by one bit; the caller strips it after demapping. DBPSK prepends a
/// `+1` reference symbol.
pub fn modulate(bits: &BitFrame, scheme: ModulationScheme) -> SymbolFrame {
    let samples = match scheme {
        ModulationScheme::Bpsk => {
            bits.bits.iter().map(|&b| Complex64::new(if b == 0 { 1.0 } else { -1.0 }, 0.0)).collect()
        }
        ModulationScheme::Qpsk | ModulationScheme::Qam4 => {
            let points = scheme.constellation();
            bits.bits
                .chunks(2)
                .map(|pair| {
                    let label = (pair[0] << 1) | pair.get(1).copied().unwrap_or(0);
                    points[label as usize]
                })
                .collect()
        }
        ModulationScheme::Dbpsk => {
            let mut phase = Complex64::new(1.0, 0.0);
            let mut out = Vec::with_capacity(bits.len() + 1);
            out.push(phase);
            for &b in &bits.bits {
                if b == 1 {
                    phase = -phase;
                }
                out.push(phase);
            }
            out
        }
    };
    SymbolFrame { samples, scheme }
}

/// Minimum-distance hard decisions; DBPSK is detected non-coherently from
/// the phase of `s[k] * conj(s[k-1])` and consumes the reference symbol.
pub fn demodulate(symbols: &SymbolFrame, scheme: ModulationScheme) -> Result<BitFrame> {
    if symbols.is_empty() {
        return Err(Error::EmptyFrame);
    }
    let s = &symbols.samples;
    let bits = match scheme {
        ModulationScheme::Bpsk => s.iter().map(|x| u8::from(x.re < 0.0)).collect(),
        ModulationScheme::Qpsk => s
            .iter()
            .flat_map(|x| {
                // Nearest of {1, j, -1, -j}.
                let idx = if x.re.abs() >= x.im.abs() {
                    if x.re >= 0.0 {
                        0
                    } else {
                        2
                    }
                } else if x.im >= 0.0 {
                    1
                } else {
                    3
                };
                [idx >> 1, idx & 1]
            })
            .collect(),
        ModulationScheme::Qam4 => s.iter().flat_map(|x| [u8::from(x.im < 0.0), u8::from(x.re < 0.0)]).collect(),
        ModulationScheme::Dbpsk => s.windows(2).map(|w| u8::from((w[1] * w[0].conj()).re < 0.0)).collect(),
    };
    Ok(BitFrame::new(bits))
}
