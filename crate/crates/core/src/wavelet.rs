//! Daubechies orthonormal filter bank arranged as a full wavelet-packet tree.
//!
//! The synthesis tree is the multicarrier modulator: each of the `2^levels`
//! leaves is one subcarrier, and every leaf has the same length. Filtering is
//! periodic, so analysis exactly inverts synthesis for any frame whose length
//! is a multiple of `2^levels`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveletFamily {
    Daubechies,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaveletSpec {
    pub family: WaveletFamily,
    pub taps: usize,
    pub levels: usize,
}

impl WaveletSpec {
    pub fn daubechies(taps: usize, levels: usize) -> Result<Self> {
        daubechies_lowpass(taps)?;
        Ok(Self { family: WaveletFamily::Daubechies, taps, levels })
    }

    /// Tree depth needed for `subcarriers` leaves.
    pub fn for_subcarriers(taps: usize, subcarriers: usize) -> Result<Self> {
        if subcarriers == 0 || !subcarriers.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(subcarriers));
        }
        Self::daubechies(taps, subcarriers.trailing_zeros() as usize)
    }

    pub fn subbands(&self) -> usize {
        1 << self.levels
    }

    /// `dbN` name, N = taps / 2.
    pub fn name(&self) -> String {
        format!("db{}", self.taps / 2)
    }
}

/// Parses `dbN` into a tap count of `2N`.
pub fn parse_wavelet_name(name: &str) -> Result<usize> {
    let n = name
        .trim()
        .strip_prefix("db")
        .and_then(|n| n.parse::<usize>().ok())
        .ok_or_else(|| Error::Config(format!("wavelet '{name}' is not of the form dbN")))?;
    let taps = 2 * n;
    daubechies_lowpass(taps)?;
    Ok(taps)
}

impl fmt::Display for WaveletSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} x{} levels", self.name(), self.levels)
    }
}

impl FromStr for WaveletFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "daubechies" => Ok(WaveletFamily::Daubechies),
            _ => Err(Error::Config(format!("unknown wavelet family '{s}'"))),
        }
    }
}

const SQRT_3: f64 = 1.732_050_807_568_877_2;

const DB3: [f64; 6] = [
    0.332_670_552_950_082_63,
    0.806_891_509_311_092_5,
    0.459_877_502_118_491_54,
    -0.135_011_020_010_254_58,
    -0.085_441_273_882_026_66,
    0.035_226_291_885_709_54,
];

const DB4: [f64; 8] = [
    0.230_377_813_308_896_5,
    0.714_846_570_552_915_7,
    0.630_880_767_929_858_9,
    -0.027_983_769_416_859_854,
    -0.187_034_811_719_093_09,
    0.030_841_381_835_560_764,
    0.032_883_011_666_885_2,
    -0.010_597_401_785_069_032,
];

fn daubechies_lowpass(taps: usize) -> Result<Vec<f64>> {
    match taps {
        2 => Ok(vec![std::f64::consts::FRAC_1_SQRT_2; 2]),
        4 => {
            let d = 4.0 * std::f64::consts::SQRT_2;
            Ok(vec![(1.0 + SQRT_3) / d, (3.0 + SQRT_3) / d, (3.0 - SQRT_3) / d, (1.0 - SQRT_3) / d])
        }
        6 => Ok(DB3.to_vec()),
        8 => Ok(DB4.to_vec()),
        other => Err(Error::UnsupportedTaps(other)),
    }
}

/// Low-pass `h` and quadrature-mirror high-pass `g[n] = (-1)^n h[taps-1-n]`.
pub fn daubechies_filters(taps: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let h = daubechies_lowpass(taps)?;
    let g = (0..taps).map(|n| if n % 2 == 0 { h[taps - 1 - n] } else { -h[taps - 1 - n] }).collect();
    Ok((h, g))
}

/// Equal-length coefficient sequences, one per leaf of the packet tree.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandFrame {
    pub bands: Vec<Vec<Complex64>>,
}

impl SubbandFrame {
    pub fn zeros(bands: usize, len: usize) -> Self {
        Self { bands: vec![vec![Complex64::new(0.0, 0.0); len]; bands] }
    }

    pub fn band_len(&self) -> usize {
        self.bands.first().map_or(0, Vec::len)
    }
}

struct FilterPair {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl FilterPair {
    fn new(spec: &WaveletSpec) -> Result<Self> {
        let (lo, hi) = daubechies_filters(spec.taps)?;
        Ok(Self { lo, hi })
    }

    fn analyze(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = x.len();
        let half = n / 2;
        let mut a = vec![0.0; half];
        let mut d = vec![0.0; half];
        for k in 0..half {
            for (t, (&h, &g)) in self.lo.iter().zip(&self.hi).enumerate() {
                let v = x[(2 * k + t) % n];
                a[k] += h * v;
                d[k] += g * v;
            }
        }
        (a, d)
    }

    fn synthesize(&self, a: &[f64], d: &[f64]) -> Vec<f64> {
        let n = 2 * a.len();
        let mut x = vec![0.0; n];
        for k in 0..a.len() {
            for (t, (&h, &g)) in self.lo.iter().zip(&self.hi).enumerate() {
                x[(2 * k + t) % n] += h * a[k] + g * d[k];
            }
        }
        x
    }

    fn analyze_tree(&self, x: &[f64], levels: usize) -> Vec<Vec<f64>> {
        let mut nodes = vec![x.to_vec()];
        for _ in 0..levels {
            nodes = nodes
                .iter()
                .flat_map(|node| {
                    let (a, d) = self.analyze(node);
                    [a, d]
                })
                .collect();
        }
        nodes
    }

    fn synthesize_tree(&self, leaves: Vec<Vec<f64>>, levels: usize) -> Vec<f64> {
        let mut nodes = leaves;
        for _ in 0..levels {
            nodes = nodes.chunks(2).map(|pair| self.synthesize(&pair[0], &pair[1])).collect();
        }
        nodes.pop().unwrap_or_default()
    }
}

fn split(v: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    (v.iter().map(|c| c.re).collect(), v.iter().map(|c| c.im).collect())
}

fn join(re: Vec<f64>, im: Vec<f64>) -> Vec<Complex64> {
    re.into_iter().zip(im).map(|(r, i)| Complex64::new(r, i)).collect()
}

/// Inverse packet transform: leaves in natural (low-then-high) order to a
/// time-domain frame of `2^levels * band_len` samples.
pub fn idwt_synthesize(subbands: &SubbandFrame, spec: &WaveletSpec) -> Result<Vec<Complex64>> {
    let count = subbands.bands.len();
    if count == 0 || !count.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(count));
    }
    if count != spec.subbands() {
        return Err(Error::LengthMismatch { expected: spec.subbands(), got: count });
    }
    let len = subbands.band_len();
    if let Some(bad) = subbands.bands.iter().find(|b| b.len() != len) {
        return Err(Error::LengthMismatch { expected: len, got: bad.len() });
    }
    if len == 0 {
        return Err(Error::EmptyFrame);
    }
    let filters = FilterPair::new(spec)?;
    let (re, im): (Vec<_>, Vec<_>) = subbands.bands.iter().map(|b| split(b)).unzip();
    let re = filters.synthesize_tree(re, spec.levels);
    let im = filters.synthesize_tree(im, spec.levels);
    Ok(join(re, im))
}

/// Forward packet transform, exact inverse of [`idwt_synthesize`].
pub fn dwt_analyze(signal: &[Complex64], spec: &WaveletSpec) -> Result<SubbandFrame> {
    let g = spec.subbands();
    if signal.is_empty() {
        return Err(Error::EmptyFrame);
    }
    if !signal.len().is_multiple_of(g) {
        return Err(Error::LengthMismatch { expected: signal.len().div_ceil(g) * g, got: signal.len() });
    }
    let filters = FilterPair::new(spec)?;
    let (re, im) = split(signal);
    let re = filters.analyze_tree(&re, spec.levels);
    let im = filters.analyze_tree(&im, spec.levels);
    Ok(SubbandFrame { bands: re.into_iter().zip(im).map(|(r, i)| join(r, i)).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn haar_filters() {
        let (h, g) = daubechies_filters(2).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(h, vec![r, r]);
        assert_eq!(g, vec![r, -r]);
    }

    #[test]
    fn filter_invariants() {
        for taps in [2, 4, 6, 8] {
            let (h, g) = daubechies_filters(taps).unwrap();
            assert!((h.iter().sum::<f64>() - std::f64::consts::SQRT_2).abs() < 1e-12, "taps {taps}");
            assert!((h.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(g.iter().sum::<f64>().abs() < 1e-12);
            // Double-shift orthogonality.
            for shift in (2..taps).step_by(2) {
                let dot: f64 = (0..taps - shift).map(|n| h[n] * h[n + shift]).sum();
                assert!(dot.abs() < 1e-12, "taps {taps} shift {shift}");
            }
            // taps/2 vanishing moments of the high-pass.
            for p in 0..taps / 2 {
                let m: f64 = g.iter().enumerate().map(|(n, &v)| v * (n as f64).powi(p as i32)).sum();
                assert!(m.abs() < 1e-9, "taps {taps} moment {p}: {m}");
            }
        }
    }

    #[test]
    fn d4_closed_form() {
        // Two vanishing moments plus orthonormality fix D4 up to reflection.
        let (h, _) = daubechies_filters(4).unwrap();
        let s3 = 3f64.sqrt();
        let d = 4.0 * 2f64.sqrt();
        let want = [(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d];
        for (a, b) in h.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn unsupported_taps() {
        assert_eq!(daubechies_filters(3), Err(Error::UnsupportedTaps(3)));
        assert_eq!(daubechies_filters(10), Err(Error::UnsupportedTaps(10)));
        assert_eq!(parse_wavelet_name("db2").unwrap(), 4);
        assert!(parse_wavelet_name("sym4").is_err());
        assert!(parse_wavelet_name("db7").is_err());
    }

    #[test]
    fn zero_subbands_give_zero_signal() {
        let spec = WaveletSpec::daubechies(4, 3).unwrap();
        let out = idwt_synthesize(&SubbandFrame::zeros(8, 4), &spec).unwrap();
        assert_eq!(out.len(), 32);
        assert!(out.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn constant_signal_has_no_detail() {
        let spec = WaveletSpec::daubechies(4, 3).unwrap();
        let sub = dwt_analyze(&vec![c(2.5, -1.0); 64], &spec).unwrap();
        for (i, band) in sub.bands.iter().enumerate().skip(1) {
            assert!(band.iter().all(|x| x.norm() < 1e-12), "band {i}");
        }
        assert!(sub.bands[0].iter().all(|x| x.norm() > 1.0));
    }

    #[test]
    fn bad_shapes() {
        let spec = WaveletSpec::daubechies(4, 3).unwrap();
        assert_eq!(idwt_synthesize(&SubbandFrame::zeros(6, 2), &spec), Err(Error::NotPowerOfTwo(6)));
        assert!(idwt_synthesize(&SubbandFrame::zeros(4, 2), &spec).is_err());
        assert!(dwt_analyze(&[c(1.0, 0.0); 12], &spec).is_err());
        assert!(WaveletSpec::for_subcarriers(4, 6).is_err());
    }

    #[test]
    fn impulse_round_trip_and_orthonormal_basis() {
        // Frame of 64 samples, G = 8 leaves of length 8.
        for taps in [2, 4, 8] {
            let spec = WaveletSpec::daubechies(taps, 3).unwrap();
            let mut basis = Vec::new();
            for band in 0..8 {
                for pos in 0..8 {
                    let mut sub = SubbandFrame::zeros(8, 8);
                    sub.bands[band][pos] = c(1.0, 0.0);
                    let wave = idwt_synthesize(&sub, &spec).unwrap();
                    let back = dwt_analyze(&wave, &spec).unwrap();
                    for (b, vals) in back.bands.iter().enumerate() {
                        for (p, v) in vals.iter().enumerate() {
                            let want = if (b, p) == (band, pos) { 1.0 } else { 0.0 };
                            assert!((v - c(want, 0.0)).norm() < 1e-10);
                        }
                    }
                    basis.push(wave);
                }
            }
            for (i, a) in basis.iter().enumerate() {
                for (j, b) in basis.iter().enumerate() {
                    let dot: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - c(want, 0.0)).norm() < 1e-10, "taps {taps} basis {i},{j}");
                }
            }
        }
    }

    #[test]
    fn short_frames_reconstruct() {
        // One coefficient per leaf: periodization folds the filter.
        for taps in [2, 4, 6, 8] {
            let spec = WaveletSpec::daubechies(taps, 3).unwrap();
            let x: Vec<Complex64> = (0..8).map(|i| c(i as f64 - 3.5, (i * i) as f64 * 0.1)).collect();
            let sub = dwt_analyze(&x, &spec).unwrap();
            assert_eq!(sub.band_len(), 1);
            assert!(max_err(&idwt_synthesize(&sub, &spec).unwrap(), &x) < 1e-12);
        }
    }

    fn signal(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
        prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0).prop_map(|(a, b)| c(a, b)), len)
    }

    proptest! {
        #[test]
        fn perfect_reconstruction(
            taps in prop::sample::select(vec![2usize, 4, 8]),
            levels in 1usize..=3,
            blocks in 1usize..6,
            raw in signal(48),
        ) {
            let spec = WaveletSpec::daubechies(taps, levels).unwrap();
            let n = blocks * spec.subbands();
            let x = &raw[..n.min(raw.len())];
            prop_assume!(x.len() % spec.subbands() == 0);
            let sub = dwt_analyze(x, &spec).unwrap();
            let y = idwt_synthesize(&sub, &spec).unwrap();
            prop_assert!(max_err(&y, x) <= 1e-10);
            let again = dwt_analyze(&y, &spec).unwrap();
            for (a, b) in again.bands.iter().zip(&sub.bands) {
                prop_assert!(max_err(a, b) <= 1e-10);
            }
            let e_time: f64 = x.iter().map(|v| v.norm_sqr()).sum();
            let e_coef: f64 = sub.bands.iter().flatten().map(|v| v.norm_sqr()).sum();
            prop_assert!((e_time - e_coef).abs() <= 1e-10 * e_time.max(1.0));
        }

        #[test]
        fn linearity(x in signal(32), y in signal(32), a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let spec = WaveletSpec::daubechies(4, 3).unwrap();
            let mix: Vec<Complex64> = x.iter().zip(&y).map(|(p, q)| p * a + q * b).collect();
            let tx = dwt_analyze(&x, &spec).unwrap();
            let ty = dwt_analyze(&y, &spec).unwrap();
            let tm = dwt_analyze(&mix, &spec).unwrap();
            for band in 0..8 {
                let want: Vec<Complex64> =
                    tx.bands[band].iter().zip(&ty.bands[band]).map(|(p, q)| p * a + q * b).collect();
                prop_assert!(max_err(&tm.bands[band], &want) <= 1e-10);
            }
        }
    }
}
