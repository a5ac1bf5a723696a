//! Exponential sums `S(k) = sum_a exp(-2 pi i a k / P)` over integer atoms.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dense transform we are willing to allocate.
pub const FFT_MEMORY_BUDGET: u64 = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpSumMethod {
    Naive,
    Fft,
}

/// `exp(-2 pi i num / den)` for `0 <= num < den`.
#[inline]
pub fn unit_root(num: u64, den: u64) -> Complex64 {
    let angle = -std::f64::consts::TAU * (num as f64 / den as f64);
    Complex64::from_polar(1.0, angle)
}

/// Residue of `a * k` modulo `period`, exact for any `i64` frequency.
#[inline]
pub fn mul_mod(a: u64, k: i64, period: u64) -> u64 {
    let k = k.rem_euclid(period as i64) as u128;
    ((a as u128 * k) % period as u128) as u64
}

pub fn exp_sum_naive(atoms: &[u64], k: i64, period: u64) -> Complex64 {
    atoms
        .iter()
        .map(|&a| unit_root(mul_mod(a, k, period), period))
        .sum()
}

/// Forward DFT of length `period` of a sparse real signal. Entry `k` of the
/// result is `sum_m w(m) exp(-2 pi i m k / period)`.
pub fn weighted_dft<I>(period: u64, entries: I) -> Result<Vec<Complex64>>
where
    I: IntoIterator<Item = (u64, f64)>,
{
    if period > FFT_MEMORY_BUDGET {
        return Err(Error::ResourceLimit(format!(
            "dense transform of length {period} exceeds the budget {FFT_MEMORY_BUDGET}"
        )));
    }
    let len = period as usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for (m, w) in entries {
        buf[(m % period) as usize].re += w;
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(len);
    fft.process(&mut buf);
    Ok(buf)
}

/// `S(k)` for every `k` in `[0, period)`.
pub fn exp_sum_table(atoms: &[u64], period: u64) -> Result<Vec<Complex64>> {
    weighted_dft(period, atoms.iter().map(|&a| (a, 1.0)))
}

/// Single exponential sum by either route. The FFT route builds the whole
/// table, so callers needing many frequencies should use [`exp_sum_table`].
pub fn exp_sum(atoms: &[u64], k: i64, period: u64, method: ExpSumMethod) -> Result<Complex64> {
    if let Some(&a) = atoms.iter().find(|&&a| a >= period) {
        return Err(Error::InvalidParams(format!(
            "atom {a} is outside [0, {period})"
        )));
    }
    match method {
        ExpSumMethod::Naive => Ok(exp_sum_naive(atoms, k, period)),
        ExpSumMethod::Fft => {
            let table = exp_sum_table(atoms, period)?;
            Ok(table[k.rem_euclid(period as i64) as usize])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_sum() {
        for k in 0..16 {
            let s = exp_sum(&[0, 8], k, 16, ExpSumMethod::Naive).unwrap();
            let expected = if k % 2 == 0 { 2.0 } else { 0.0 };
            assert!((s - Complex64::new(expected, 0.0)).norm() < 1e-12, "k = {k}");
        }
        let s = exp_sum(&[0, 8], 3, 16, ExpSumMethod::Fft).unwrap();
        assert!(s.norm() < 1e-12);
    }

    #[test]
    fn zero_frequency_counts_atoms() {
        let atoms = [0, 1, 2, 15];
        for method in [ExpSumMethod::Naive, ExpSumMethod::Fft] {
            let s = exp_sum(&atoms, 0, 16, method).unwrap();
            assert!((s - Complex64::new(4.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn parseval_for_indicator() {
        let table = exp_sum_table(&[0, 1, 2, 15], 16).unwrap();
        let energy: f64 = table.iter().map(|s| s.norm_sqr()).sum();
        assert!((energy - 64.0).abs() < 1e-10);
    }

    #[test]
    fn negative_and_large_frequencies_reduce() {
        let atoms = [3, 5, 11];
        let a = exp_sum_naive(&atoms, -5, 16);
        let b = exp_sum_naive(&atoms, 11, 16);
        let c = exp_sum_naive(&atoms, 11 + 16 * 1_000_000_007, 16);
        assert!((a - b).norm() < 1e-12 && (b - c).norm() < 1e-12);
        assert!((a - exp_sum_naive(&atoms, 5, 16).conj()).norm() < 1e-12);
    }

    #[test]
    fn rejects_out_of_range_atoms_and_huge_periods() {
        assert!(exp_sum(&[16], 1, 16, ExpSumMethod::Naive).is_err());
        assert!(matches!(
            exp_sum_table(&[0], FFT_MEMORY_BUDGET * 2),
            Err(Error::ResourceLimit(_))
        ));
    }
}
