//! Link-level simulator for a wavelet-packet MC-CDMA downlink with 2x1
//! Alamouti space-time block coding and interleaved convolutional coding.
//!
//! The chain, per user: source bits, convolutional encoder and block
//! interleaver, mapper, Walsh-Hadamard spreading. Users are summed, the chips
//! are placed one per subcarrier on a Daubechies wavelet-packet synthesis
//! tree, and the resulting time samples are paired into Alamouti blocks.
//! The receiver inverts every stage with perfect channel knowledge.
//!
//! ```
//! use mccdma::link::{run_noiseless, LinkConfig};
//!
//! let cfg = LinkConfig { bits_per_user: 500, ..LinkConfig::default() };
//! assert_eq!(run_noiseless(&cfg, 1).unwrap().bit_errors, 0);
//! ```

pub mod alamouti;
pub mod channel;
#[cfg(feature = "cli")]
pub mod cli;
pub mod error;
pub mod fec;
pub mod link;
pub mod modem;
pub mod results;
pub mod spreader;
pub mod wavelet;

pub use error::{Error, Result};
