//! CSV and JSON persistence for BER curves.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::alamouti::stbc_theoretical_ber;
use crate::channel::db_to_linear;
use crate::error::{Error, Result};
use crate::link::BerCurve;

pub const CSV_HEADER: [&str; 8] = ["users", "scheme", "channel", "coded", "snr_db", "bits", "errors", "ber"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown format '{other}' (expected csv or json)"))),
        }
    }
}

/// Closed-form reference curves that can be overlaid on simulated points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theory {
    #[serde(rename = "alamouti-bpsk")]
    AlamoutiBpsk,
}

impl Theory {
    pub fn ber(self, snr_db: f64) -> Result<f64> {
        match self {
            Theory::AlamoutiBpsk => stbc_theoretical_ber(db_to_linear(snr_db)),
        }
    }
}

impl FromStr for Theory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alamouti-bpsk" => Ok(Theory::AlamoutiBpsk),
            other => Err(Error::Config(format!("unknown theory curve '{other}' (expected alamouti-bpsk)"))),
        }
    }
}

/// Fills the `theory` field of every point.
pub fn overlay_theory(curves: &mut [BerCurve], theory: Theory) -> Result<()> {
    for point in curves.iter_mut().flat_map(|c| c.points.iter_mut()) {
        point.theory = Some(theory.ber(point.snr_db)?);
    }
    Ok(())
}

/// Top-level JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub curves: Vec<BerCurve>,
}

pub fn to_csv(curves: &[BerCurve]) -> Result<String> {
    let with_theory = curves.iter().flat_map(|c| &c.points).any(|p| p.theory.is_some());
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    if with_theory {
        header.push("theory");
    }
    w.write_record(&header).map_err(io)?;
    for curve in curves {
        let cfg = &curve.config;
        for p in &curve.points {
            let mut row = vec![
                cfg.users.to_string(),
                cfg.scheme.to_string(),
                cfg.channel.to_string(),
                cfg.coded.to_string(),
                format!("{:.6}", p.snr_db),
                p.bits_counted.to_string(),
                p.bit_errors.to_string(),
                format!("{:.6e}", p.ber),
            ];
            if with_theory {
                row.push(p.theory.map(|t| format!("{t:.6e}")).unwrap_or_default());
            }
            w.write_record(&row).map_err(io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn to_json(curves: &[BerCurve]) -> Result<String> {
    let doc = ResultsFile { curves: curves.to_vec() };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn from_json(text: &str) -> Result<Vec<BerCurve>> {
    let doc: ResultsFile = serde_json::from_str(text).map_err(|e| Error::Io(e.to_string()))?;
    Ok(doc.curves)
}

pub fn render(curves: &[BerCurve], format: OutputFormat) -> Result<String> {
    if curves.is_empty() {
        return Err(Error::Config("nothing to emit: no curves".into()));
    }
    match format {
        OutputFormat::Csv => to_csv(curves),
        OutputFormat::Json => to_json(curves),
    }
}

pub fn emit_results(curves: &[BerCurve], format: OutputFormat, path: &Path) -> Result<()> {
    let text = render(curves, format)?;
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
