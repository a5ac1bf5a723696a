//! Fourier coefficients of `mu_j` and `f_ell dmu_j`.
//!
//! With atoms stored as integers `v` at scale `P = N^j`,
//!
//! ```text
//! (f_ell dmu_j)^(xi) = exp(-i pi xi/P) sinc(xi/P) t^-j sum_{v in Y} exp(-2 pi i v xi / P)
//! ```
//!
//! where `Y` is the set of level-`j` atoms inside `F_ell` (all atoms for
//! `ell = 0`) and `sinc(x) = sin(pi x)/(pi x)`. At integer `xi = k` the
//! exponential sum only depends on `k mod P`, so one FFT of length `P` gives
//! every integer coefficient.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construction::Construction;
use crate::dft::{exp_sum_naive, exp_sum_table, mul_mod, FFT_MEMORY_BUDGET};
use crate::error::{Error, Result};
use crate::level::LevelSet;
use crate::params::ConstructionParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    Mu,
    FEll(usize),
}

impl Weight {
    pub fn ell(self) -> usize {
        match self {
            Weight::Mu => 0,
            Weight::FEll(ell) => ell,
        }
    }

    pub fn label(self) -> String {
        match self {
            Weight::Mu => "mu".into(),
            Weight::FEll(ell) => format!("f{ell}"),
        }
    }
}

/// `sin(pi x)` with the argument reduced first, so that integer `x` gives 0.
pub fn sin_pi(x: f64) -> f64 {
    let n = x.round();
    let s = (PI * (x - n)).sin();
    if n.rem_euclid(2.0) == 1.0 {
        -s
    } else {
        s
    }
}

pub fn cos_pi(x: f64) -> f64 {
    let n = x.round();
    let c = (PI * (x - n)).cos();
    if n.rem_euclid(2.0) == 1.0 {
        -c
    } else {
        c
    }
}

pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        sin_pi(x) / (PI * x)
    }
}

/// `(1 - exp(-2 pi i k/P)) / (2 pi i k/P)`, equal to 1 at `k = 0` and exactly
/// 0 at nonzero multiples of `P`.
pub fn interval_factor(k: i64, period: u64) -> Complex64 {
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let r = k.rem_euclid(period as i64) as u64;
    if r == 0 {
        return Complex64::new(0.0, 0.0);
    }
    // exp(-i pi k/P) sin(pi k/P) only depends on k mod P.
    let x = r as f64 / period as f64;
    let s = (PI * x).sin();
    let phase = Complex64::new((PI * x).cos(), -(PI * x).sin());
    phase * (s / (PI * k as f64 / period as f64))
}

/// Same factor at a real frequency: `exp(-i pi xi/P) sinc(xi/P)`.
pub fn interval_factor_real(xi: f64, period: u64) -> Complex64 {
    let x = xi / period as f64;
    Complex64::new(cos_pi(x), -sin_pi(x)) * sinc(x)
}

/// `mu_j^(k)` computed straight from the atoms.
pub fn mu_hat(level: &LevelSet, params: &ConstructionParams, k: i64) -> Complex64 {
    let period = params.scale(level.j);
    interval_factor(k, period) * exp_sum_naive(&level.atoms, k, period)
        / params.t_pow(level.j) as f64
}

/// `(f_ell dmu_j)^(k)` computed straight from the restricted atoms.
pub fn f_mu_hat(construction: &Construction, j: usize, ell: usize, k: i64) -> Result<Complex64> {
    let params = &construction.params;
    let atoms = construction.restricted_atoms(j, ell)?;
    let period = params.scale(j);
    Ok(interval_factor(k, period) * exp_sum_naive(&atoms, k, period) / params.t_pow(j) as f64)
}

/// `(f_ell dmu_j)^(xi)` for real `xi`, from the closed sinc form.
pub fn f_mu_hat_real(construction: &Construction, j: usize, ell: usize, xi: f64) -> Result<Complex64> {
    let params = &construction.params;
    let atoms = construction.restricted_atoms(j, ell)?;
    let period = params.scale(j);
    Ok(interval_factor_real(xi, period) * exp_sum_real(&atoms, xi, period) / params.t_pow(j) as f64)
}

/// `sum_v exp(-2 pi i v xi / P)` for real `xi`. The integer part of `xi` is
/// reduced exactly so large frequencies keep their phase accuracy.
pub fn exp_sum_real(atoms: &[u64], xi: f64, period: u64) -> Complex64 {
    let whole = xi.floor();
    let frac = xi - whole;
    let whole = whole as i64;
    atoms
        .iter()
        .map(|&v| {
            let turns = (mul_mod(v, whole, period) as f64 + v as f64 * frac) / period as f64;
            Complex64::from_polar(1.0, -2.0 * PI * turns.fract())
        })
        .sum()
}

/// Integer-frequency coefficients of one weighted level measure, backed by a
/// periodic table of exponential sums when the period fits in memory.
#[derive(Debug, Clone)]
pub struct SpectrumTable {
    pub j: usize,
    pub weight: Weight,
    pub period: u64,
    pub mass: f64,
    atoms: Vec<u64>,
    t_pow: f64,
    table: Option<Vec<Complex64>>,
}

impl SpectrumTable {
    pub fn new(construction: &Construction, j: usize, weight: Weight) -> Result<Self> {
        let params = &construction.params;
        let atoms = construction.restricted_atoms(j, weight.ell())?;
        let period = params.scale(j);
        let table = if period <= FFT_MEMORY_BUDGET {
            Some(exp_sum_table(&atoms, period)?)
        } else {
            None
        };
        let t_pow = params.t_pow(j) as f64;
        Ok(SpectrumTable {
            j,
            weight,
            period,
            mass: atoms.len() as f64 / t_pow,
            atoms,
            t_pow,
            table,
        })
    }

    pub fn atoms(&self) -> &[u64] {
        &self.atoms
    }

    /// `S(k)` over the (restricted) atoms.
    pub fn exp_sum(&self, k: i64) -> Complex64 {
        match &self.table {
            Some(table) => table[k.rem_euclid(self.period as i64) as usize],
            None => exp_sum_naive(&self.atoms, k, self.period),
        }
    }

    pub fn coef(&self, k: i64) -> Complex64 {
        interval_factor(k, self.period) * self.exp_sum(k) / self.t_pow
    }

    pub fn spectrum(&self, frequencies: Vec<i64>) -> Spectrum {
        let coefficients = frequencies.par_iter().map(|&k| self.coef(k)).collect();
        Spectrum {
            j: self.j,
            weight: self.weight,
            frequencies,
            coefficients,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub j: usize,
    pub weight: Weight,
    pub frequencies: Vec<i64>,
    pub coefficients: Vec<Complex64>,
}

impl Spectrum {
    /// CSV with header `k,re,im,abs`, values at full precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut text = String::with_capacity(64 * self.frequencies.len() + 16);
        text.push_str("k,re,im,abs\n");
        for (k, z) in self.frequencies.iter().zip(&self.coefficients) {
            text.push_str(&format!("{k},{:e},{:e},{:e}\n", z.re, z.im, z.norm()));
        }
        out.write_all(text.as_bytes())?;
        Ok(())
    }
}

/// `sum_{k < P} |S(k)|^2` against `P |atoms|`.
pub fn parseval_relative_error(atoms: &[u64], period: u64) -> Result<f64> {
    let table = exp_sum_table(atoms, period)?;
    let lhs: f64 = table.iter().map(|z| z.norm_sqr()).sum();
    let rhs = period as f64 * atoms.len() as f64;
    Ok((lhs - rhs).abs() / rhs)
}

/// Outcome of checking a frequency-indexed inequality `lhs(k) <= rhs(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub j: usize,
    pub ell: usize,
    pub checked: u64,
    /// `max_k lhs(k) / rhs(k)`; the inequality holds iff this is at most 1.
    pub max_ratio: f64,
    pub witness_k: i64,
}

impl BoundCheck {
    pub fn passed(&self) -> bool {
        self.max_ratio <= 1.0
    }

    /// `1 - max_ratio`: nonnegative when the bound holds.
    pub fn slack(&self) -> f64 {
        1.0 - self.max_ratio
    }
}

/// Frequencies for decay checks: every `k` in `[1, dense)` plus `extra`.
#[derive(Debug, Clone)]
pub struct FrequencyPlan {
    pub dense: i64,
    pub extra: Vec<i64>,
}

impl FrequencyPlan {
    /// Dense range plus a deterministic sample of `count` frequencies
    /// beyond it, spread log-uniformly up to `max`.
    pub fn with_sample(dense: i64, count: usize, max: i64, seed: u64) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let lo = (dense.max(2) as f64).ln();
        let hi = (max as f64).ln();
        let mut extra: Vec<i64> = (0..count)
            .map(|_| rng.gen_range(lo..hi).exp() as i64)
            .filter(|&k| k >= dense)
            .collect();
        extra.sort_unstable();
        extra.dedup();
        FrequencyPlan { dense, extra }
    }

    fn len(&self) -> u64 {
        (self.dense.max(1) - 1) as u64 + self.extra.len() as u64
    }

    /// Largest `f(k)` over the plan and its witness. Dense ranges are cut
    /// into fixed chunks so the reduction does not depend on thread count.
    fn max_over<F>(&self, f: F) -> (f64, i64)
    where
        F: Fn(i64) -> f64 + Sync,
    {
        const CHUNK: i64 = 1 << 14;
        let starts: Vec<i64> = (1..self.dense.max(1)).step_by(CHUNK as usize).collect();
        let dense = starts
            .par_iter()
            .map(|&s| {
                (s..(s + CHUNK).min(self.dense))
                    .map(|k| (f(k), k))
                    .fold((f64::NEG_INFINITY, 0), pick_max)
            })
            .collect::<Vec<_>>();
        let extra = self.extra.par_iter().map(|&k| (f(k), k)).collect::<Vec<_>>();
        dense
            .into_iter()
            .chain(extra)
            .fold((f64::NEG_INFINITY, 0), pick_max)
    }
}

fn pick_max(acc: (f64, i64), item: (f64, i64)) -> (f64, i64) {
    if item.0 > acc.0 || (item.0 == acc.0 && item.1 < acc.1) {
        item
    } else {
        acc
    }
}

/// Checks `|c_{j+1}(k) - c_j(k)| <= C min(1, N^(j+1)/|k|) t^(-(j+1)/2) ln(8 N^(j+1))`
/// for the weight `f_ell` (`ell = 0` is `mu` itself). Only `k > 0` is scanned:
/// both sides are even in `k` because the measures are real.
pub fn telescope_check(
    construction: &Construction,
    j: usize,
    ell: usize,
    c: f64,
    plan: &FrequencyPlan,
) -> Result<BoundCheck> {
    if ell > j {
        return Err(Error::LevelOrder { ell, j });
    }
    let weight = if ell == 0 { Weight::Mu } else { Weight::FEll(ell) };
    let lower = SpectrumTable::new(construction, j, weight)?;
    let upper = SpectrumTable::new(construction, j + 1, weight)?;
    let params = &construction.params;
    let (max_ratio, witness_k) = plan.max_over(|k| {
        let lhs = (upper.coef(k) - lower.coef(k)).norm();
        lhs / params.telescope_rhs(c, j, k)
    });
    let zero_gap = (upper.coef(0) - lower.coef(0)).norm();
    let max_ratio = max_ratio.max(zero_gap / params.telescope_rhs(c, j, 0));
    Ok(BoundCheck {
        name: if ell == 0 {
            "telescoping-mu".into()
        } else {
            "telescoping-f-ell".into()
        },
        j,
        ell,
        checked: plan.len() + 1,
        max_ratio,
        witness_k,
    })
}

/// Checks `|(f_ell dmu_h)^(k)| <= N^h t^(-ell/2) / (pi |k|)` for `k != 0`.
pub fn trivial_bound_check(
    construction: &Construction,
    h: usize,
    ell: usize,
    plan: &FrequencyPlan,
) -> Result<BoundCheck> {
    let weight = if ell == 0 { Weight::Mu } else { Weight::FEll(ell) };
    let table = SpectrumTable::new(construction, h, weight)?;
    let params = &construction.params;
    let numerator = params.scale(h) as f64 * (params.t as f64).powf(-(ell as f64) / 2.0);
    let (max_ratio, witness_k) = plan.max_over(|k| {
        table.coef(k).norm() * PI * k as f64 / numerator
    });
    Ok(BoundCheck {
        name: "trivial-decay".into(),
        j: h,
        ell,
        checked: plan.len(),
        max_ratio,
        witness_k,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OctaveRow {
    pub octave: u32,
    pub k_lo: i64,
    pub k_hi: i64,
    pub max_abs: f64,
    pub argmax_k: i64,
    /// `max |c(k)| (1 + |k|)^(beta/2)` over the octave.
    pub max_weighted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub j: usize,
    pub weight: Weight,
    pub beta: f64,
    pub sup_constant: f64,
    pub octaves: Vec<OctaveRow>,
    /// Least-squares slope of `ln max|c|` against `ln argmax k` over octaves
    /// with a nonzero maximum.
    pub fitted_exponent: Option<f64>,
    /// Largest octave value of the weighted maximum over the median one.
    pub flatness: Option<f64>,
}

/// Sup constant and per-octave maxima of `|c(k)| (1 + |k|)^(beta/2)` over
/// the nonzero frequencies of a spectrum. Octave `i` holds `2^i <= |k| < 2^(i+1)`.
pub fn decay_report(spectrum: &Spectrum, beta: f64) -> Result<DecayReport> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParams(format!("beta must be positive, got {beta}")));
    }
    let mut octaves: Vec<OctaveRow> = Vec::new();
    let mut sup_constant = 0.0f64;
    let mut any = false;
    for (&k, z) in spectrum.frequencies.iter().zip(&spectrum.coefficients) {
        if k == 0 {
            continue;
        }
        any = true;
        let kabs = k.unsigned_abs();
        let octave = 63 - kabs.leading_zeros();
        let abs = z.norm();
        let weighted = abs * (1.0 + kabs as f64).powf(beta / 2.0);
        sup_constant = sup_constant.max(weighted);
        let row = match octaves.iter_mut().find(|r| r.octave == octave) {
            Some(row) => row,
            None => {
                octaves.push(OctaveRow {
                    octave,
                    k_lo: 1i64 << octave,
                    k_hi: (1i64 << (octave + 1)) - 1,
                    max_abs: 0.0,
                    argmax_k: k,
                    max_weighted: 0.0,
                });
                octaves.last_mut().unwrap()
            }
        };
        if abs > row.max_abs {
            row.max_abs = abs;
            row.argmax_k = k;
        }
        row.max_weighted = row.max_weighted.max(weighted);
    }
    if !any {
        return Err(Error::Empty("spectrum has no nonzero frequencies"));
    }
    octaves.sort_by_key(|r| r.octave);

    let points: Vec<(f64, f64)> = octaves
        .iter()
        .filter(|r| r.max_abs > 0.0)
        .map(|r| ((r.argmax_k.unsigned_abs() as f64).ln(), r.max_abs.ln()))
        .collect();
    let fitted_exponent = least_squares_slope(&points);

    let mut weighted: Vec<f64> = octaves.iter().map(|r| r.max_weighted).collect();
    weighted.sort_by(f64::total_cmp);
    let flatness = if weighted.is_empty() || weighted[weighted.len() / 2] == 0.0 {
        None
    } else {
        let median = if weighted.len() % 2 == 1 {
            weighted[weighted.len() / 2]
        } else {
            0.5 * (weighted[weighted.len() / 2 - 1] + weighted[weighted.len() / 2])
        };
        Some(weighted[weighted.len() - 1] / median)
    };

    Ok(DecayReport {
        j: spectrum.j,
        weight: spectrum.weight,
        beta,
        sup_constant,
        octaves,
        fitted_exponent,
        flatness,
    })
}

fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `sum_{j >= 0} min(1, N^(j+1)/|k|) t^(-(j+1)/2) ln(8 N^(j+1))`, summed until
/// the damped terms drop below `1e-15`.
pub fn series_sum(params: &ConstructionParams, k: i64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParams("the series is only defined for k != 0".into()));
    }
    if params.t <= 1 {
        return Err(Error::InvalidParams("the series diverges for t <= 1".into()));
    }
    let ln_n = (params.n as f64).ln();
    let ln_k = (k.unsigned_abs() as f64).ln();
    let ln_t = (params.t as f64).ln();
    let mut sum = 0.0;
    for m in 1usize.. {
        let mf = m as f64;
        let damp = (mf * ln_n - ln_k).min(0.0).exp();
        let term = damp * (-mf / 2.0 * ln_t).exp() * params.log_8_n_pow(m);
        sum += term;
        if mf * ln_n >= ln_k && term < 1e-15 {
            break;
        }
    }
    Ok(sum)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub k: i64,
    pub lhs_sum: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Series sum against `C |k|^(-beta/2)`, with `C` chosen so the ratio is 1
/// at the smallest `|k|` in `ks`.
pub fn series_bound_check(
    params: &ConstructionParams,
    beta: f64,
    ks: &[i64],
) -> Result<Vec<SeriesRow>> {
    let kmin = ks
        .iter()
        .copied()
        .filter(|&k| k != 0)
        .min_by_key(|k| k.unsigned_abs())
        .ok_or(Error::Empty("no nonzero frequency"))?;
    let c = series_sum(params, kmin)? * (kmin.unsigned_abs() as f64).powf(beta / 2.0);
    ks.iter()
        .filter(|&&k| k != 0)
        .map(|&k| {
            let lhs_sum = series_sum(params, k)?;
            let rhs = c * (k.unsigned_abs() as f64).powf(-beta / 2.0);
            Ok(SeriesRow {
                k,
                lhs_sum,
                rhs,
                ratio: lhs_sum / rhs,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::build_construction;
    use crate::params::{derive_params, ParamOverrides};

    fn desk(j_max: usize) -> Construction {
        let params = derive_params(
            4,
            2,
            1,
            &ParamOverrides {
                j_max: Some(j_max),
                seed: Some(7),
                ..Default::default()
            },
        )
        .unwrap();
        build_construction(&params).unwrap()
    }

    #[test]
    fn lebesgue_level_has_no_nonzero_coefficients() {
        let c = desk(2);
        let params = &c.params;
        assert_eq!(mu_hat(&c.levels[0], params, 0), Complex64::new(1.0, 0.0));
        for k in [1, -1, 5, 1000] {
            assert_eq!(mu_hat(&c.levels[0], params, k).norm(), 0.0);
        }
    }

    #[test]
    fn level_one_decays_like_one_over_k() {
        let c = desk(2);
        let bound = 16.0 / (4.0 * PI);
        assert!((bound - 1.273).abs() < 1e-3);
        for k in 1..5000i64 {
            let v = mu_hat(&c.levels[1], &c.params, k).norm();
            assert!(v * k as f64 <= bound * (1.0 + 1e-12), "k = {k}");
        }
    }

    #[test]
    fn masses_at_zero() {
        let c = desk(3);
        for j in 0..=3 {
            for ell in 0..=j {
                let v = f_mu_hat(&c, j, ell, 0).unwrap();
                assert!((v.re - 2f64.powi(-(ell as i32))).abs() < 1e-12 && v.im.abs() < 1e-15);
            }
        }
        assert!((f_mu_hat(&c, 2, 2, 0).unwrap().re - 0.25).abs() < 1e-15);
        assert!(matches!(f_mu_hat(&c, 1, 2, 0), Err(Error::LevelOrder { .. })));
    }

    #[test]
    fn ell_zero_is_mu() {
        let c = desk(3);
        for k in [-7, 1, 33, 4097] {
            let a = f_mu_hat(&c, 3, 0, k).unwrap();
            let b = mu_hat(&c.levels[3], &c.params, k);
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn real_frequency_form() {
        let c = desk(3);
        for xi in [0.3, -2.7, 11.25] {
            let v = f_mu_hat_real(&c, 0, 0, xi).unwrap();
            let expected = Complex64::from_polar(1.0, -PI * xi) * sinc(xi);
            assert!((v - expected).norm() < 1e-14);
        }
        for k in [-300i64, -1, 1, 2, 17, 255, 4096, 100_001] {
            let a = f_mu_hat_real(&c, 3, 1, k as f64).unwrap();
            let b = f_mu_hat(&c, 3, 1, k).unwrap();
            assert!((a - b).norm() < 1e-12, "k = {k}");
        }
        for m in [1i64, -2, 3] {
            let xi = (4096 * m) as f64;
            assert!(f_mu_hat_real(&c, 3, 2, xi).unwrap().norm() < 1e-15);
        }
    }

    #[test]
    fn table_agrees_with_naive_and_is_conjugate_symmetric() {
        let c = desk(3);
        let table = SpectrumTable::new(&c, 3, Weight::FEll(1)).unwrap();
        for k in [1i64, 2, 99, 4095, 4097, 123_456] {
            let naive = f_mu_hat(&c, 3, 1, k).unwrap();
            assert!((table.coef(k) - naive).norm() < 1e-12);
            assert!((table.coef(-k) - table.coef(k).conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn decay_report_on_exact_power_law() {
        let frequencies: Vec<i64> = (1..8).collect();
        let coefficients = frequencies
            .iter()
            .map(|&k| Complex64::new((k as f64).powf(-0.5), 0.0))
            .collect();
        let s = Spectrum {
            j: 0,
            weight: Weight::Mu,
            frequencies,
            coefficients,
        };
        let r = decay_report(&s, 0.4).unwrap();
        assert!((r.fitted_exponent.unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(r.octaves.len(), 3);
        assert!(r.octaves.iter().all(|o| o.max_weighted <= r.sup_constant));
    }

    #[test]
    fn decay_report_of_lebesgue_is_zero() {
        let c = desk(1);
        let s = SpectrumTable::new(&c, 0, Weight::Mu).unwrap().spectrum((0..100).collect());
        let r = decay_report(&s, 0.4).unwrap();
        assert_eq!(r.sup_constant, 0.0);
        assert_eq!(r.fitted_exponent, None);
        let empty = SpectrumTable::new(&c, 0, Weight::Mu).unwrap().spectrum(vec![0]);
        assert!(matches!(decay_report(&empty, 0.4), Err(Error::Empty(_))));
    }

    #[test]
    fn telescoping_at_zero_and_beyond_period() {
        let c = desk(3);
        let p = &c.params;
        // min(1, N^(j+1)/|k|) switches to the damped branch at |k| >= N^(j+1)
        let base = p.telescope_rhs(1.0, 1, 1);
        assert!((p.telescope_rhs(1.0, 1, 512) - base / 2.0).abs() < 1e-12);
        let plan = FrequencyPlan::with_sample(1 << 12, 200, 1 << 40, 1);
        let check = telescope_check(&c, 1, 1, 2.0 * p.c_rot, &plan).unwrap();
        assert!(check.passed());
    }

    #[test]
    fn series_sum_by_direct_summation() {
        let p = derive_params(4, 2, 1, &ParamOverrides::default()).unwrap();
        // Independent evaluation in plain powers for k = 16.
        let mut expected = 0.0;
        for j in 0..200 {
            let scale = 16f64.powi(j + 1);
            expected += (scale / 16.0).min(1.0) * 4f64.powf(-(j + 1) as f64 / 2.0) * (8.0 * scale).ln();
        }
        let got = series_sum(&p, 16).unwrap();
        assert!((got - expected).abs() < 1e-13 * expected);
        assert!(series_sum(&p, 0).is_err());
    }
}
