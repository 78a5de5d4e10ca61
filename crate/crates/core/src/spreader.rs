//! Walsh-Hadamard spreading codes and the MC-CDMA copier/despreader.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Sylvester Hadamard matrix with user-to-row assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HadamardCodebook {
    order: usize,
    rows: Vec<Vec<i8>>,
    assignment: Vec<usize>,
}

impl HadamardCodebook {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rows(&self) -> &[Vec<i8>] {
        &self.rows
    }

    pub fn users(&self) -> usize {
        self.assignment.len()
    }

    /// Spreading row assigned to `user`.
    pub fn code(&self, user: usize) -> &[i8] {
        &self.rows[self.assignment[user]]
    }
}

impl fmt::Display for HadamardCodebook {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Walsh-Hadamard codebook, order {}", self.order)?;
        for (idx, row) in self.rows.iter().enumerate() {
            let user = self.assignment.iter().position(|&r| r == idx);
            let chips: String = row.iter().map(|&c| if c > 0 { '+' } else { '-' }).collect();
            match user {
                Some(u) => writeln!(f, "row {idx:>3}  {chips}  user {u}")?,
                None => writeln!(f, "row {idx:>3}  {chips}")?,
            }
        }
        Ok(())
    }
}

pub fn hadamard_codebook(order: usize, users: usize) -> Result<HadamardCodebook> {
    if order == 0 || !order.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(order));
    }
    if users > order {
        return Err(Error::TooManyUsers { users, order });
    }
    let mut rows: Vec<Vec<i8>> = vec![vec![1]];
    while rows.len() < order {
        let n = rows.len();
        let mut next = Vec::with_capacity(2 * n);
        for row in &rows {
            next.push(row.iter().chain(row.iter()).copied().collect());
        }
        for row in &rows {
            next.push(row.iter().copied().chain(row.iter().map(|&c| -c)).collect());
        }
        debug_assert_eq!(next.len(), 2 * n);
        rows = next;
    }
    Ok(HadamardCodebook { order, rows, assignment: (0..users).collect() })
}

/// Spread chips, `chips_per_symbol` per data symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct ChipFrame {
    pub chips: Vec<Complex64>,
    pub chips_per_symbol: usize,
}

impl ChipFrame {
    pub fn symbols(&self) -> usize {
        self.chips.len() / self.chips_per_symbol
    }
}

pub fn spread(symbols: &[Complex64], code: &[i8]) -> Result<ChipFrame> {
    if code.is_empty() {
        return Err(Error::EmptyCode);
    }
    let chips = symbols.iter().flat_map(|&d| code.iter().map(move |&c| d * f64::from(c))).collect();
    Ok(ChipFrame { chips, chips_per_symbol: code.len() })
}

pub fn superpose(frames: &[ChipFrame]) -> Result<ChipFrame> {
    let first = frames.first().ok_or(Error::EmptyFrame)?;
    let mut sum = first.clone();
    for f in &frames[1..] {
        if f.chips.len() != sum.chips.len() || f.chips_per_symbol != sum.chips_per_symbol {
            return Err(Error::LengthMismatch { expected: sum.chips.len(), got: f.chips.len() });
        }
        sum.chips.iter_mut().zip(&f.chips).for_each(|(a, b)| *a += b);
    }
    Ok(sum)
}

/// Correlates each group of `code.len()` chips with `code`, scaled by 1/G.
pub fn despread(chips: &ChipFrame, code: &[i8]) -> Result<Vec<Complex64>> {
    let g = code.len();
    if g == 0 {
        return Err(Error::EmptyCode);
    }
    if !chips.chips.len().is_multiple_of(g) {
        return Err(Error::LengthMismatch { expected: chips.chips.len().div_ceil(g) * g, got: chips.chips.len() });
    }
    let scale = 1.0 / g as f64;
    Ok(chips
        .chips
        .chunks(g)
        .map(|block| block.iter().zip(code).map(|(x, &c)| x * f64::from(c)).sum::<Complex64>() * scale)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn order_two_base_case() {
        let cb = hadamard_codebook(2, 2).unwrap();
        assert_eq!(cb.rows(), &[vec![1, 1], vec![1, -1]]);
    }

    #[test]
    fn order_eight_is_orthogonal() {
        let cb = hadamard_codebook(8, 4).unwrap();
        for (i, a) in cb.rows().iter().enumerate() {
            for (j, b) in cb.rows().iter().enumerate() {
                let dot: i32 = a.iter().zip(b).map(|(&x, &y)| i32::from(x) * i32::from(y)).sum();
                assert_eq!(dot, if i == j { 8 } else { 0 });
            }
        }
        assert_eq!(cb.code(0), &[1; 8]);
    }

    #[test]
    fn codebook_errors() {
        assert_eq!(hadamard_codebook(6, 2), Err(Error::NotPowerOfTwo(6)));
        assert_eq!(hadamard_codebook(0, 0), Err(Error::NotPowerOfTwo(0)));
        assert_eq!(hadamard_codebook(8, 9), Err(Error::TooManyUsers { users: 9, order: 8 }));
    }

    #[test]
    fn spread_examples() {
        assert_eq!(spread(&[c(1.0, 0.0)], &[1, -1]).unwrap().chips, vec![c(1.0, 0.0), c(-1.0, 0.0)]);
        assert!(spread(&[c(0.0, 0.0)], &[1, -1, 1, 1]).unwrap().chips.iter().all(|x| x.norm() == 0.0));
        let (a, b) = (c(0.5, 2.0), c(-1.0, 0.25));
        assert_eq!(spread(&[a, b], &[1, 1]).unwrap().chips, vec![a, a, b, b]);
        assert_eq!(spread(&[a], &[]), Err(Error::EmptyCode));
    }

    #[test]
    fn superpose_examples() {
        let f = spread(&[c(1.0, -2.0), c(0.5, 0.5)], &[1, -1]).unwrap();
        assert_eq!(superpose(std::slice::from_ref(&f)).unwrap(), f);
        let neg = ChipFrame { chips: f.chips.iter().map(|x| -x).collect(), chips_per_symbol: 2 };
        assert!(superpose(&[f.clone(), neg]).unwrap().chips.iter().all(|x| x.norm() == 0.0));
        let short = ChipFrame { chips: vec![c(1.0, 0.0); 2], chips_per_symbol: 2 };
        assert!(matches!(superpose(&[f, short]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn superpose_matches_direct_sum() {
        let frames: Vec<ChipFrame> = (0..4)
            .map(|u| ChipFrame {
                chips: (0..16).map(|i| c((u * 16 + i) as f64 * 0.1, -(i as f64))).collect(),
                chips_per_symbol: 8,
            })
            .collect();
        let sum = superpose(&frames).unwrap();
        for i in 0..16 {
            let direct: Complex64 = frames.iter().map(|f| f.chips[i]).sum();
            assert_eq!(sum.chips[i], direct);
        }
    }

    #[test]
    fn despread_misaligned() {
        let f = ChipFrame { chips: vec![c(1.0, 0.0); 7], chips_per_symbol: 8 };
        assert!(matches!(despread(&f, &[1; 8]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn codebook_dump_lists_users() {
        let dump = hadamard_codebook(4, 2).unwrap().to_string();
        assert!(dump.contains("row   1  +-+-  user 1"));
        assert!(dump.contains("row   3  +--+\n"));
    }

    fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
        prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| c(a, b)), len)
    }

    proptest! {
        #[test]
        fn multi_user_separation(users in 1usize..=8, syms in prop::collection::vec(complex_vec(12), 8)) {
            let cb = hadamard_codebook(8, users).unwrap();
            let frames: Vec<ChipFrame> =
                syms.iter().take(users).enumerate().map(|(u, s)| spread(s, cb.code(u)).unwrap()).collect();
            let composite = superpose(&frames).unwrap();
            for (u, want) in syms.iter().take(users).enumerate() {
                let got = despread(&composite, cb.code(u)).unwrap();
                for (g, w) in got.iter().zip(want) {
                    prop_assert!((g - w).norm() <= 1e-12);
                }
            }
            // Unassigned rows see nothing.
            if users < 8 {
                let idle = &cb.rows()[users];
                prop_assert!(despread(&composite, idle).unwrap().iter().all(|x| x.norm() <= 1e-12));
            }
        }

        #[test]
        fn spreading_scales_energy_by_gain(syms in complex_vec(20)) {
            let cb = hadamard_codebook(8, 1).unwrap();
            let chips = spread(&syms, cb.code(0)).unwrap();
            let e_in: f64 = syms.iter().map(|s| s.norm_sqr()).sum();
            let e_out: f64 = chips.chips.iter().map(|s| s.norm_sqr()).sum();
            prop_assert!((e_out - 8.0 * e_in).abs() <= 1e-9 * e_out.max(1.0));
        }
    }
}
