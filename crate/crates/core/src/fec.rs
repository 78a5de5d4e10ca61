//! Bit-level convolutional coding, hard-decision Viterbi decoding and block
//! interleaving.
//!
//! The encoder is a rate `1/n` feed-forward shift register. Generators are
//! given in octal with the most significant bit tapping the current input,
//! so `(7, 5)` is the classic constraint-length-3 code with free distance 5.
//! Frames are zero-terminated: `K - 1` tail bits flush the register.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite sequence of binary values, optionally tagged with the user it
/// belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitFrame {
    pub bits: Vec<u8>,
    pub owner_user: Option<usize>,
}

impl BitFrame {
    /// Panics if any element is not 0 or 1.
    pub fn new(bits: Vec<u8>) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "bit frame holds non-binary values");
        Self { bits, owner_user: None }
    }

    pub fn for_user(bits: Vec<u8>, user: usize) -> Self {
        let mut frame = Self::new(bits);
        frame.owner_user = Some(user);
        frame
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    /// Keeps the owner tag, replaces the payload.
    fn with_bits(&self, bits: Vec<u8>) -> Self {
        Self { bits, owner_user: self.owner_user }
    }
}

impl From<Vec<u8>> for BitFrame {
    fn from(bits: Vec<u8>) -> Self {
        Self::new(bits)
    }
}

/// Convolutional code description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeConfig {
    pub rate_numerator: usize,
    pub rate_denominator: usize,
    pub constraint_length: usize,
    /// Generator polynomials, one per output bit.
    pub generators: Vec<u32>,
    pub traceback_depth: usize,
}

impl Default for CodeConfig {
    /// Rate 1/2, K = 3, generators (7, 5) octal.
    fn default() -> Self {
        Self {
            rate_numerator: 1,
            rate_denominator: 2,
            constraint_length: 3,
            generators: vec![0o7, 0o5],
            traceback_depth: 15,
        }
    }
}

impl CodeConfig {
    /// Builds a rate `1/n` code from octal generators, with traceback depth
    /// set to five constraint lengths.
    pub fn from_generators(generators: Vec<u32>, constraint_length: usize) -> Result<Self> {
        let cfg = Self {
            rate_numerator: 1,
            rate_denominator: generators.len(),
            constraint_length,
            generators,
            traceback_depth: 5 * constraint_length,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.constraint_length;
        if self.rate_numerator != 1 {
            return Err(Error::InvalidCode(format!(
                "only rate 1/n encoders are supported, got numerator {}",
                self.rate_numerator
            )));
        }
        if self.rate_denominator != self.rate_numerator + 1 {
            return Err(Error::InvalidCode(format!(
                "rate must be r/(r+1), got {}/{}",
                self.rate_numerator, self.rate_denominator
            )));
        }
        if self.generators.len() != self.rate_denominator {
            return Err(Error::InvalidCode(format!(
                "{} generators given for {} output bits",
                self.generators.len(),
                self.rate_denominator
            )));
        }
        if !(2..=16).contains(&k) {
            return Err(Error::InvalidCode(format!("constraint length {k} outside 2..=16")));
        }
        for &g in &self.generators {
            if g == 0 || g >= (1 << k) {
                return Err(Error::InvalidCode(format!("generator {g:o} does not fit in {k} bits")));
            }
        }
        if self.traceback_depth < 5 * k {
            return Err(Error::InvalidCode(format!(
                "traceback depth {} below 5 x constraint length",
                self.traceback_depth
            )));
        }
        Ok(())
    }

    pub fn rate(&self) -> f64 {
        self.rate_numerator as f64 / self.rate_denominator as f64
    }

    fn outputs(&self) -> usize {
        self.generators.len()
    }

    fn num_states(&self) -> usize {
        1 << (self.constraint_length - 1)
    }

    /// Output bits for `(input, state)` packed LSB-first.
    fn branch_output(&self, reg: u32) -> u32 {
        self.generators.iter().enumerate().fold(0, |acc, (i, &g)| acc | (((g & reg).count_ones() & 1) << i))
    }
}

/// Parses octal generator text such as `"7,5"` or `"133, 171"`.
pub fn parse_generators(text: &str) -> Result<Vec<u32>> {
    text.split(',')
        .map(|tok| {
            let tok = tok.trim();
            u32::from_str_radix(tok, 8).map_err(|_| Error::InvalidCode(format!("'{tok}' is not an octal generator")))
        })
        .collect()
}

/// Smallest constraint length that holds every generator.
pub fn constraint_length_for(generators: &[u32]) -> usize {
    generators.iter().map(|&g| 32 - g.leading_zeros() as usize).max().unwrap_or(0)
}

pub fn conv_encode(data: &BitFrame, cfg: &CodeConfig) -> Result<BitFrame> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyFrame);
    }
    let k = cfg.constraint_length;
    let n = cfg.outputs();
    let mut out = Vec::with_capacity((data.len() + k - 1) * n);
    let mut state = 0u32;
    let tail = std::iter::repeat_n(0u8, k - 1);
    for u in data.bits.iter().copied().chain(tail) {
        let reg = (u32::from(u) << (k - 1)) | state;
        let word = cfg.branch_output(reg);
        out.extend((0..n).map(|i| ((word >> i) & 1) as u8));
        state = reg >> 1;
    }
    Ok(data.with_bits(out))
}

/// Hard-decision Viterbi decoder with a sliding traceback window.
///
/// Survivor decisions are kept for `traceback_depth` steps. Once the window
/// is full, each step emits the bit `traceback_depth - 1` steps back along
/// the survivor of the best state. The zero tail pins the final state to 0,
/// from which the remaining bits are recovered. Equal metrics resolve to the
/// lower-indexed predecessor, and to the lower-indexed state when picking
/// the best survivor.
pub fn viterbi_decode(coded: &BitFrame, cfg: &CodeConfig) -> Result<BitFrame> {
    cfg.validate()?;
    let n = cfg.outputs();
    if !coded.len().is_multiple_of(n) {
        return Err(Error::MisalignedCodeword(coded.len()));
    }
    let k = cfg.constraint_length;
    let steps = coded.len() / n;
    if steps < k {
        return Err(Error::EmptyFrame);
    }
    let data_len = steps - (k - 1);
    let states = cfg.num_states();
    let mask = (states - 1) as u32;
    let top = k - 2;
    let depth = cfg.traceback_depth;

    // Branch output for the transition into `next` from predecessor bit `b`.
    let branch: Vec<[u32; 2]> = (0..states as u32)
        .map(|next| {
            let reg0 = next << 1;
            [cfg.branch_output(reg0), cfg.branch_output(reg0 | 1)]
        })
        .collect();

    const UNREACHED: u32 = u32::MAX / 2;
    let mut metric = vec![UNREACHED; states];
    metric[0] = 0;
    let mut next_metric = vec![0u32; states];
    let mut ring = vec![vec![0u8; states]; depth];
    let mut decoded = Vec::with_capacity(steps);

    let trace = |ring: &[Vec<u8>], from_step: usize, mut state: u32, count: usize| -> u32 {
        for j in 0..count {
            let slot = (from_step - j) % depth;
            let b = u32::from(ring[slot][state as usize]);
            state = ((state << 1) | b) & mask;
        }
        state
    };

    for t in 0..steps {
        let rx = coded.bits[t * n..(t + 1) * n].iter().enumerate().fold(0u32, |acc, (i, &b)| acc | (u32::from(b) << i));
        let slot = t % depth;
        for next in 0..states {
            let p0 = (next << 1) & mask as usize;
            let p1 = p0 | 1;
            let m0 = metric[p0] + (branch[next][0] ^ rx).count_ones();
            let m1 = metric[p1] + (branch[next][1] ^ rx).count_ones();
            if m1 < m0 {
                next_metric[next] = m1;
                ring[slot][next] = 1;
            } else {
                next_metric[next] = m0;
                ring[slot][next] = 0;
            }
        }
        std::mem::swap(&mut metric, &mut next_metric);
        let floor = *metric.iter().min().expect("at least two states");
        if floor > 0 {
            metric.iter_mut().for_each(|m| *m -= floor);
        }
        if t + 1 >= depth {
            let best = (0..states).min_by_key(|&s| (metric[s], s)).expect("at least two states") as u32;
            let state = trace(&ring, t, best, depth - 1);
            decoded.push((state >> top) as u8);
        }
    }

    // Flush: the terminated path ends in state 0.
    let already = decoded.len();
    let remaining = steps - already;
    let mut tail = Vec::with_capacity(remaining);
    let mut state = 0u32;
    for j in 0..remaining {
        let t = steps - 1 - j;
        tail.push((state >> top) as u8);
        let b = u32::from(ring[t % depth][state as usize]);
        state = ((state << 1) | b) & mask;
    }
    decoded.extend(tail.into_iter().rev());
    decoded.truncate(data_len);
    Ok(coded.with_bits(decoded))
}

/// Row-write / column-read block interleaver dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterleaverShape {
    pub rows: usize,
    pub cols: usize,
}

impl InterleaverShape {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidShape(format!("{rows}x{cols}")));
        }
        Ok(Self { rows, cols })
    }

    /// `rows` fixed, enough columns to hold `len` bits.
    pub fn covering(len: usize, rows: usize) -> Result<Self> {
        Self::new(rows, len.div_ceil(rows).max(1))
    }

    pub fn size(&self) -> usize {
        self.rows * self.cols
    }
}

impl fmt::Display for InterleaverShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

impl FromStr for InterleaverShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (r, c) =
            s.split_once(['x', 'X']).ok_or_else(|| Error::InvalidShape(format!("'{s}' is not of the form RxC")))?;
        let parse = |t: &str| {
            t.trim().parse::<usize>().map_err(|_| Error::InvalidShape(format!("'{s}' is not of the form RxC")))
        };
        Self::new(parse(r)?, parse(c)?)
    }
}

fn check_shape(frame: &BitFrame, shape: InterleaverShape) -> Result<()> {
    if frame.len() != shape.size() {
        return Err(Error::ShapeMismatch { rows: shape.rows, cols: shape.cols, len: frame.len() });
    }
    Ok(())
}

pub fn interleave(frame: &BitFrame, shape: InterleaverShape) -> Result<BitFrame> {
    check_shape(frame, shape)?;
    let InterleaverShape { rows, cols } = shape;
    let mut out = vec![0u8; frame.len()];
    for c in 0..cols {
        for r in 0..rows {
            out[c * rows + r] = frame.bits[r * cols + c];
        }
    }
    Ok(frame.with_bits(out))
}

pub fn deinterleave(frame: &BitFrame, shape: InterleaverShape) -> Result<BitFrame> {
    check_shape(frame, shape)?;
    let InterleaverShape { rows, cols } = shape;
    let mut out = vec![0u8; frame.len()];
    for c in 0..cols {
        for r in 0..rows {
            out[r * cols + c] = frame.bits[c * rows + r];
        }
    }
    Ok(frame.with_bits(out))
}

/// How a coded stream is mapped onto interleaver blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterleaverLayout {
    /// One block over the whole frame: `rows` x ceil(len / rows).
    Covering { rows: usize },
    /// Fixed block shape applied repeatedly along the stream.
    Blocks(InterleaverShape),
}

impl Default for InterleaverLayout {
    fn default() -> Self {
        InterleaverLayout::Covering { rows: 10 }
    }
}

impl fmt::Display for InterleaverLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InterleaverLayout::Covering { rows } => write!(f, "{rows}xauto"),
            InterleaverLayout::Blocks(shape) => write!(f, "{shape}"),
        }
    }
}

impl InterleaverLayout {
    fn block_shape(&self, len: usize) -> Result<InterleaverShape> {
        match *self {
            InterleaverLayout::Covering { rows } => InterleaverShape::covering(len, rows),
            InterleaverLayout::Blocks(shape) => Ok(shape),
        }
    }

    /// Zero-pads to whole blocks and interleaves each block. The returned
    /// frame is longer than the input by the pad count.
    pub fn interleave_padded(&self, frame: &BitFrame) -> Result<BitFrame> {
        let shape = self.block_shape(frame.len())?;
        let padded_len = frame.len().div_ceil(shape.size()).max(1) * shape.size();
        let mut bits = frame.bits.clone();
        bits.resize(padded_len, 0);
        let mut out = Vec::with_capacity(padded_len);
        for chunk in bits.chunks(shape.size()) {
            out.extend(interleave(&BitFrame::new(chunk.to_vec()), shape)?.bits);
        }
        Ok(frame.with_bits(out))
    }

    /// Inverse of [`Self::interleave_padded`]; `original_len` is the length
    /// before padding.
    pub fn deinterleave_padded(&self, frame: &BitFrame, original_len: usize) -> Result<BitFrame> {
        let shape = self.block_shape(original_len)?;
        if !frame.len().is_multiple_of(shape.size()) || frame.len() < original_len {
            return Err(Error::ShapeMismatch { rows: shape.rows, cols: shape.cols, len: frame.len() });
        }
        let mut out = Vec::with_capacity(frame.len());
        for chunk in frame.bits.chunks(shape.size()) {
            out.extend(deinterleave(&BitFrame::new(chunk.to_vec()), shape)?.bits);
        }
        out.truncate(original_len);
        Ok(frame.with_bits(out))
    }

    /// Length after padding for an input of `len` bits.
    pub fn padded_len(&self, len: usize) -> Result<usize> {
        let shape = self.block_shape(len)?;
        Ok(len.div_ceil(shape.size()).max(1) * shape.size())
    }
}

impl FromStr for InterleaverLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(InterleaverLayout::Blocks(s.parse()?))
    }
}
