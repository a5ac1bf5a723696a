//! `L^p(R)` norms of `(f_ell dmu_j)^`, `L^q(dmu)` masses, restriction ratios,
//! the Holder step linking `L^{2r}` to `L^p`, the truncated energy integral
//! and the ball condition.
//!
//! Quadrature works on the grid `xi = i/m`. Writing `P = N^j`, the
//! exponential sum at `i/m` is entry `i mod mP` of one DFT of length `mP`,
//! so a whole grid costs one FFT plus a pass over the samples.

use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bspline::bspline_integers;
use crate::construction::Construction;
use crate::dft::{exp_sum_table, FFT_MEMORY_BUDGET};
use crate::energy::exact_l2r_norm;
use crate::error::{Error, Result};
use crate::params::ConstructionParams;
use crate::spectral::{sin_pi, sinc};
use crate::thresholds::Thresholds;

/// Largest relative change tolerated when the step is halved.
pub const SELF_CHECK_TOLERANCE: f64 = 1e-3;

const CHUNK: u64 = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    ExactBspline,
    Quadrature,
    LowerBound,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    #[serde(rename = "K")]
    pub cutoff: f64,
    pub h: f64,
}

/// `value` is the `p`-th power `int |phi|^p`; [`NormEstimate::norm`] takes
/// the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub j: usize,
    pub ell: usize,
    pub p: f64,
    pub value: f64,
    pub method: NormMethod,
    pub tail_bound: f64,
    /// The same trapezoid rule continued over `|xi| > K`, summed in closed
    /// form. `value + tail_sum` is the full-line trapezoid sum.
    pub tail_sum: Option<f64>,
    pub grid: Option<Grid>,
    /// Largest `|phi|` seen on the grid.
    pub grid_sup: Option<f64>,
}

impl NormEstimate {
    pub fn norm(&self) -> f64 {
        self.value.powf(1.0 / self.p)
    }

    /// Grid sum plus its continuation; equal to `value` for exact methods.
    pub fn full_line(&self) -> f64 {
        self.value + self.tail_sum.unwrap_or(0.0)
    }
}

const BERNOULLI_OVER_FACTORIAL: [f64; 6] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
];

/// Hurwitz zeta `sum_{q >= 0} (a + q)^(-s)` for `s > 1`, `a > 0`, by
/// Euler-Maclaurin after shifting `a` past 10.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    debug_assert!(s > 1.0 && a > 0.0);
    let mut head = 0.0;
    let mut x = a;
    while x < 10.0 {
        head += x.powf(-s);
        x += 1.0;
    }
    let mut tail = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // term k: B_2k / (2k)! * s (s+1) ... (s+2k-2) * x^(-s-2k+1)
    let mut rising = s;
    let mut power = x.powf(-s - 1.0);
    let x2 = x * x;
    for (k, c) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        tail += c * rising * power;
        let k = k as f64 + 1.0;
        rising *= (s + 2.0 * k - 1.0) * (s + 2.0 * k);
        power /= x2;
    }
    head + tail
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraturePlan {
    /// `K = cutoff_periods * N^j`.
    pub cutoff_periods: u64,
    /// Grid step is `1 / subdivisions`.
    pub subdivisions: u64,
    pub self_check: bool,
}

impl Default for QuadraturePlan {
    fn default() -> Self {
        QuadraturePlan {
            cutoff_periods: 32,
            subdivisions: 4,
            self_check: true,
        }
    }
}

/// Neumaier-compensated sum of `f(i)` for `i` in `[lo, hi)`, reduced over
/// fixed chunks so the result does not depend on the thread count.
fn chunked_sum<F>(lo: u64, hi: u64, f: F) -> f64
where
    F: Fn(u64) -> f64 + Sync,
{
    let starts: Vec<u64> = (lo..hi).step_by(CHUNK as usize).collect();
    let parts: Vec<(f64, f64)> = starts
        .par_iter()
        .map(|&s| {
            let mut acc = (0.0, 0.0);
            for i in s..(s + CHUNK).min(hi) {
                neumaier(&mut acc, f(i));
            }
            acc
        })
        .collect();
    let mut acc = (0.0, 0.0);
    for (s, c) in parts {
        neumaier(&mut acc, s);
        neumaier(&mut acc, c);
    }
    acc.0 + acc.1
}

fn neumaier(acc: &mut (f64, f64), x: f64) {
    let t = acc.0 + x;
    if acc.0.abs() >= x.abs() {
        acc.1 += (acc.0 - t) + x;
    } else {
        acc.1 += (x - t) + acc.0;
    }
    acc.0 = t;
}

/// `|(f_ell dmu_j)^(i/m)|` for all grid points, backed by one DFT.
struct GridSampler {
    table: Vec<Complex64>,
    len: u64,
    t_pow: f64,
}

impl GridSampler {
    fn new(construction: &Construction, j: usize, ell: usize, subdivisions: u64) -> Result<Self> {
        let params = &construction.params;
        let period = params.scale(j);
        let len = period
            .checked_mul(subdivisions)
            .filter(|&l| l <= FFT_MEMORY_BUDGET)
            .ok_or_else(|| {
                Error::ResourceLimit(format!(
                    "quadrature table of length {period} x {subdivisions}"
                ))
            })?;
        let atoms = construction.restricted_atoms(j, ell)?;
        Ok(GridSampler {
            table: exp_sum_table(&atoms, len)?,
            len,
            t_pow: params.t_pow(j) as f64,
        })
    }

    fn abs(&self, i: u64) -> f64 {
        let s = self.table[(i % self.len) as usize].norm();
        sinc(i as f64 / self.len as f64).abs() * s / self.t_pow
    }

    /// Symmetric trapezoid for `int_{-K}^{K} |phi|^p` with `K = n h`.
    fn trapezoid(&self, n: u64, h: f64, p: f64) -> f64 {
        let f = |i: u64| self.abs(i).powf(p);
        let interior = chunked_sum(1, n, f);
        h * (f(0) + 2.0 * interior + f(n))
    }

    /// `h f(n) + 2 h sum_{i > n} f(i)` with `f = |phi|^p` and `n` a multiple
    /// of the table length `L`. Since `|phi(i/m)| = G(i mod L) L / (pi i)` with
    /// `G` periodic, the sum over `i = n + s + qL` is a Hurwitz zeta in `q`.
    fn continuation(&self, n: u64, h: f64, p: f64) -> f64 {
        let len = self.len;
        debug_assert_eq!(n % len, 0);
        let g = |s: u64| {
            let i = s % len;
            let sin = sin_pi(i as f64 / len as f64).abs();
            (sin * self.table[i as usize].norm() / self.t_pow).powf(p)
        };
        let sum = chunked_sum(1, len + 1, |s| {
            let gs = g(s);
            if gs == 0.0 {
                0.0
            } else {
                gs * hurwitz_zeta(p, (n + s) as f64 / len as f64)
            }
        });
        let scale = std::f64::consts::PI.powf(-p);
        h * self.abs(n).powf(p) + 2.0 * h * scale * sum
    }

    fn sup(&self, n: u64) -> f64 {
        let starts: Vec<u64> = (0..=n).step_by(CHUNK as usize).collect();
        starts
            .par_iter()
            .map(|&s| {
                (s..(s + CHUNK).min(n + 1))
                    .map(|i| self.abs(i))
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// `2 (N^j t^(-ell/2) / pi)^p K^(1-p) / (p - 1)`, from the envelope
/// `|phi(xi)| <= N^j t^(-ell/2) / (pi |xi|)`.
pub fn tail_bound(params: &ConstructionParams, j: usize, ell: usize, p: f64, cutoff: f64) -> Result<f64> {
    if p <= 1.0 {
        return Err(Error::DivergentTail { p });
    }
    let amplitude = params.scale(j) as f64 / (params.sqrt_t_pow(ell) as f64 * std::f64::consts::PI);
    Ok(2.0 * amplitude.powf(p) * cutoff.powf(1.0 - p) / (p - 1.0))
}

/// `int |(f_ell dmu_j)^|^p` over `[-K, K]` for every `p` in `ps`, sharing
/// one grid.
pub fn lp_norm_quadrature(
    construction: &Construction,
    j: usize,
    ell: usize,
    ps: &[f64],
    plan: &QuadraturePlan,
) -> Result<Vec<NormEstimate>> {
    if ell > j {
        return Err(Error::LevelOrder { ell, j });
    }
    if plan.subdivisions < 4 || plan.cutoff_periods == 0 {
        return Err(Error::InvalidParams(format!(
            "quadrature needs step <= 1/4 and a positive cutoff, got {plan:?}"
        )));
    }
    if let Some(&p) = ps.iter().find(|&&p| p.is_nan() || p < 1.0) {
        return Err(Error::InvalidParams(format!("p = {p} must be at least 1")));
    }
    let params = &construction.params;
    let cutoff = (plan.cutoff_periods * params.scale(j)) as f64;
    let tails = ps
        .iter()
        .map(|&p| tail_bound(params, j, ell, p, cutoff))
        .collect::<Result<Vec<_>>>()?;

    let m = plan.subdivisions;
    let n = plan.cutoff_periods * params.scale(j) * m;
    let h = 1.0 / m as f64;
    let sampler = GridSampler::new(construction, j, ell, m)?;
    let values: Vec<f64> = ps.iter().map(|&p| sampler.trapezoid(n, h, p)).collect();
    let continuations: Vec<f64> = ps.iter().map(|&p| sampler.continuation(n, h, p)).collect();
    let grid_sup = sampler.sup(n);
    drop(sampler);

    if plan.self_check {
        let fine = GridSampler::new(construction, j, ell, 2 * m)?;
        for (&p, &coarse) in ps.iter().zip(&values) {
            let refined = fine.trapezoid(2 * n, h / 2.0, p);
            let relative_change = (refined - coarse).abs() / refined.abs().max(f64::MIN_POSITIVE);
            if relative_change > SELF_CHECK_TOLERANCE {
                return Err(Error::GridTooCoarse { relative_change });
            }
        }
    }

    Ok(ps
        .iter()
        .zip(values)
        .zip(tails)
        .zip(continuations)
        .map(|(((&p, value), tail), cont)| NormEstimate {
            j,
            ell,
            p,
            value,
            method: NormMethod::Quadrature,
            tail_bound: tail,
            tail_sum: Some(cont),
            grid: Some(Grid { cutoff, h }),
            grid_sup: Some(grid_sup),
        })
        .collect())
}

/// `||(f_ell dmu_j)^||_{2r}^{2r}` from the exact B-spline identity.
pub fn lp_norm_exact(construction: &Construction, j: usize, ell: usize, r: u32) -> Result<NormEstimate> {
    let exact = exact_l2r_norm(construction, j, ell, r)?;
    Ok(NormEstimate {
        j,
        ell,
        p: 2.0 * r as f64,
        value: exact.value_f64(),
        method: NormMethod::ExactBspline,
        tail_bound: 0.0,
        tail_sum: None,
        grid: None,
        grid_sup: None,
    })
}

/// Exact route for even integer `p`, quadrature otherwise.
pub fn lp_norm(
    construction: &Construction,
    j: usize,
    ell: usize,
    p: f64,
    plan: &QuadraturePlan,
) -> Result<NormEstimate> {
    if p >= 2.0 && p.fract() == 0.0 && (p as u64).is_multiple_of(2) {
        lp_norm_exact(construction, j, ell, (p / 2.0) as u32)
    } else {
        let mut v = lp_norm_quadrature(construction, j, ell, &[p], plan)?;
        Ok(v.remove(0))
    }
}

/// Plancherel: `||(f_ell dmu_j)^||_2^2 = N^j t^(-2j) |F_ell cap A_j|`.
pub fn plancherel_l2(construction: &Construction, j: usize, ell: usize) -> Result<NormEstimate> {
    let params = &construction.params;
    let count = construction.restricted_atoms(j, ell)?.len() as f64;
    Ok(NormEstimate {
        j,
        ell,
        p: 2.0,
        value: params.scale(j) as f64 * count / (params.t_pow(j) as f64).powi(2),
        method: NormMethod::ClosedForm,
        tail_bound: 0.0,
        tail_sum: None,
        grid: None,
        grid_sup: None,
    })
}

/// `||f_ell||_{L^q(dmu)} = t^(-ell/(2q))`.
pub fn lq_mass(params: &ConstructionParams, ell: usize, q: f64) -> f64 {
    (params.sqrt_t_pow(ell) as f64).powf(-1.0 / q)
}

/// `mu_j(F_ell)` from counting restricted atoms, against `t^(-ell/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassCheck {
    pub j: usize,
    pub ell: usize,
    pub count: u64,
    pub expected_count: u64,
    pub mass: f64,
}

impl MassCheck {
    pub fn exact(&self) -> bool {
        self.count == self.expected_count
    }
}

pub fn mass_check(construction: &Construction, j: usize, ell: usize) -> Result<MassCheck> {
    let params = &construction.params;
    let count = construction.restricted_atoms(j, ell)?.len() as u64;
    Ok(MassCheck {
        j,
        ell,
        count,
        expected_count: params.sqrt_t_pow(ell) * params.t_pow(j - ell),
        mass: count as f64 / params.t_pow(j) as f64,
    })
}

/// `C_{2r} N^ell r^(-ell-1) t^(-ell(p+1)/2)`, the lower bound for
/// `||(f_ell dmu)^||_p^p` obtained from the `L^{2r}` bound through Holder.
pub fn lp_lower_bound(params: &ConstructionParams, ell: usize, p: f64, r: u32) -> f64 {
    let c = bspline_integers(r).c_2r().to_f64().unwrap_or(f64::NAN);
    let ell_f = ell as f64;
    c * (params.n as f64).powf(ell_f)
        * (r as f64).powf(-ell_f - 1.0)
        * (params.t as f64).powf(-ell_f * (p + 1.0) / 2.0)
}

/// Smallest `r` with `r > 1/alpha` and `2r >= p`.
pub fn holder_order(alpha: f64, p: f64) -> u32 {
    let from_alpha = (1.0 / alpha).floor() as u32 + 1;
    from_alpha.max((p / 2.0).ceil() as u32)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub j: usize,
    pub ell: usize,
    pub p: f64,
    pub q: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
    pub method: NormMethod,
    pub thresholds: Thresholds,
    pub in_failing_range: bool,
    pub in_pq_failing_region: bool,
    /// `lp_lower_bound^(1/p)`, a floor for the numerator.
    pub lower_bound: f64,
    pub r: u32,
    pub slack: f64,
}

/// `||(f_ell dmu_j)^||_p / ||f_ell||_{L^q(dmu)}`.
pub fn restriction_ratio(
    construction: &Construction,
    j: usize,
    ell: usize,
    p: f64,
    q: f64,
    plan: &QuadraturePlan,
) -> Result<RatioReport> {
    if q < 1.0 {
        return Err(Error::InvalidParams(format!("q = {q} must be at least 1")));
    }
    let params = &construction.params;
    let estimate = lp_norm(construction, j, ell, p, plan)?;
    let numerator = estimate.full_line().powf(1.0 / p);
    let denominator = lq_mass(params, ell, q);
    let thresholds = Thresholds::new(params.alpha.value);
    let r = holder_order(params.alpha.value, p);
    let lower_bound = lp_lower_bound(params, ell, p, r).powf(1.0 / p);
    Ok(RatioReport {
        j,
        ell,
        p,
        q,
        numerator,
        denominator,
        ratio: numerator / denominator,
        method: estimate.method,
        thresholds,
        in_failing_range: thresholds.in_failing_range(p),
        in_pq_failing_region: q > 1.0 && thresholds.in_pq_failing_region(p, q),
        lower_bound,
        r,
        slack: 1.0 - lower_bound / numerator,
    })
}

/// CSV with columns `ell,p,q,numerator,denominator,ratio,lower_bound,slack`.
pub fn write_ratio_csv<W: Write>(reports: &[RatioReport], mut out: W) -> Result<()> {
    let mut text = String::from("ell,p,q,numerator,denominator,ratio,lower_bound,slack\n");
    for r in reports {
        text.push_str(&format!(
            "{},{},{},{:e},{:e},{:e},{:e},{:e}\n",
            r.ell, r.p, r.q, r.numerator, r.denominator, r.ratio, r.lower_bound, r.slack
        ));
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

/// `||phi||_{2r}^{2r} <= ||phi||_p^p ||phi||_inf^{2r-p}` with
/// `||phi||_inf <= t^(-ell/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub j: usize,
    pub ell: usize,
    pub p: f64,
    pub r: u32,
    /// `||phi||_{2r}^{2r}`, exact.
    pub lhs: f64,
    pub lp_power: f64,
    pub lp_method: NormMethod,
    pub sup_bound: f64,
    pub grid_sup: Option<f64>,
    pub rhs: f64,
    pub slack: f64,
    /// `lhs / sup_bound^(2r-p)`, the floor for `||phi||_p^p` the chain gives.
    pub implied_lower: f64,
    pub lp_lower_bound: f64,
}

impl HolderReport {
    pub fn chain_holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + 1e-12)
    }

    pub fn implied_holds(&self) -> bool {
        self.implied_lower >= self.lp_lower_bound
    }

    pub fn sup_holds(&self) -> bool {
        self.grid_sup.is_none_or(|s| s <= self.sup_bound * (1.0 + 1e-12))
    }

    pub fn passed(&self) -> bool {
        self.chain_holds() && self.implied_holds() && self.sup_holds()
    }
}

pub fn holder_chain_check(
    construction: &Construction,
    j: usize,
    ell: usize,
    p: f64,
    r: u32,
    plan: &QuadraturePlan,
) -> Result<HolderReport> {
    if !(p >= 1.0 && p <= 2.0 * r as f64) {
        return Err(Error::InvalidParams(format!("need 1 <= p <= 2r, got p = {p}, r = {r}")));
    }
    let params = &construction.params;
    let lhs = exact_l2r_norm(construction, j, ell, r)?.value_f64();
    let lp = lp_norm(construction, j, ell, p, plan)?;
    let sup_bound = 1.0 / params.sqrt_t_pow(ell) as f64;
    let gap = 2.0 * r as f64 - p;
    let rhs = lp.value * sup_bound.powf(gap);
    Ok(HolderReport {
        j,
        ell,
        p,
        r,
        lhs,
        lp_power: lp.value,
        lp_method: lp.method,
        sup_bound,
        grid_sup: lp.grid_sup,
        rhs,
        slack: 1.0 - lhs / rhs,
        implied_lower: lhs / sup_bound.powf(gap),
        lp_lower_bound: lp_lower_bound(params, ell, p, r),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyIntegralRow {
    #[serde(rename = "K")]
    pub cutoff: u64,
    pub value: f64,
}

/// `int_{1 <= |xi| <= K} |mu_j^(xi)|^2 |xi|^(gamma - 1)` for each cutoff.
pub fn energy_integral(
    construction: &Construction,
    j: usize,
    gamma: f64,
    cutoffs: &[u64],
    subdivisions: u64,
) -> Result<Vec<EnergyIntegralRow>> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParams(format!("gamma = {gamma} must lie in (0, 1)")));
    }
    if subdivisions < 4 {
        return Err(Error::InvalidParams("energy integral needs step <= 1/4".into()));
    }
    let sampler = GridSampler::new(construction, j, 0, subdivisions)?;
    let m = subdivisions;
    let h = 1.0 / m as f64;
    let f = |i: u64| {
        let xi = i as f64 * h;
        sampler.abs(i).powi(2) * xi.powf(gamma - 1.0)
    };
    let mut rows = Vec::with_capacity(cutoffs.len());
    for &cutoff in cutoffs {
        if cutoff < 1 {
            return Err(Error::InvalidParams("energy integral cutoff must be at least 1".into()));
        }
        let (lo, hi) = (m, cutoff * m);
        let interior = chunked_sum(lo + 1, hi, f);
        let half = 0.5 * (f(lo) + if hi > lo { f(hi) } else { -f(lo) });
        rows.push(EnergyIntegralRow {
            cutoff,
            value: 2.0 * h * (half + interior),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallRow {
    pub m: usize,
    pub surviving: usize,
    /// `sup mu_j(I) / |I|^alpha` over N-adic intervals of length `N^-m`.
    pub adic_sup: f64,
    /// Whether every surviving interval has ratio exactly 1.
    pub adic_exact: bool,
    /// Same over unions of two adjacent intervals.
    pub window_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallReport {
    pub j: usize,
    pub alpha: f64,
    pub rows: Vec<BallRow>,
    pub adic_sup: f64,
    pub window_sup: f64,
}

impl BallReport {
    pub fn adic_exact(&self) -> bool {
        self.rows.iter().all(|r| r.adic_exact)
    }
}

/// Masses of N-adic intervals at every level `m <= j`, computed exactly from
/// atom counts. `N^alpha = t` turns `|I|^alpha` into `t^-m`.
pub fn ball_condition_report(construction: &Construction, j: usize) -> Result<BallReport> {
    let params = &construction.params;
    let level = construction.level(j)?;
    let t_j = BigInt::from(params.t_pow(j));
    let two_alpha = 2f64.powf(params.alpha.value);
    let mut rows = Vec::with_capacity(j + 1);
    for m in 0..=j {
        let width = params.scale(j - m);
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for &v in &level.atoms {
            *counts.entry(v / width).or_insert(0) += 1;
        }
        let t_m = BigInt::from(params.t_pow(m));
        let ratio = |c: u64| BigRational::new(BigInt::from(c) * &t_m, t_j.clone());
        let one = BigRational::from_integer(1.into());
        let adic_exact = counts.values().all(|&c| ratio(c) == one);
        let adic_sup = counts
            .values()
            .map(|&c| ratio(c).to_f64().unwrap_or(f64::NAN))
            .fold(0.0, f64::max);
        let window_sup = counts
            .iter()
            .flat_map(|(&u, &c)| {
                let right = counts.get(&(u + 1)).copied().unwrap_or(0);
                let left = if u > 0 && !counts.contains_key(&(u - 1)) { c } else { 0 };
                [c + right, left]
            })
            .map(|c| ratio(c).to_f64().unwrap_or(f64::NAN) / two_alpha)
            .fold(0.0, f64::max);
        rows.push(BallRow {
            m,
            surviving: counts.len(),
            adic_sup,
            adic_exact,
            window_sup,
        });
    }
    Ok(BallReport {
        j,
        alpha: params.alpha.value,
        adic_sup: rows.iter().map(|r| r.adic_sup).fold(0.0, f64::max),
        window_sup: rows.iter().map(|r| r.window_sup).fold(0.0, f64::max),
        rows,
    })
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
    fn sinc_squared_integral() {
        let c = desk(1);
        let est = lp_norm_quadrature(&c, 0, 0, &[2.0], &QuadraturePlan::default()).unwrap();
        let e = &est[0];
        assert!(e.value <= 1.0 && 1.0 - e.value <= e.tail_bound, "{e:?}");
        assert_eq!(e.grid_sup, Some(1.0));
    }

    #[test]
    fn quadrature_matches_exact_route() {
        let c = desk(2);
        let plan = QuadraturePlan {
            cutoff_periods: 128,
            ..Default::default()
        };
        for (j, ell) in [(1, 1), (2, 1), (2, 2)] {
            let q = lp_norm_quadrature(&c, j, ell, &[2.0, 4.0], &plan).unwrap();
            for (est, r) in q.iter().zip([1u32, 2]) {
                let exact = lp_norm_exact(&c, j, ell, r).unwrap().value;
                assert!((est.value - exact).abs() / exact < 5e-3, "{j} {ell} {r}");
                assert!(exact - est.value <= est.tail_bound);
            }
            let pl = plancherel_l2(&c, j, ell).unwrap().value;
            let ex = lp_norm_exact(&c, j, ell, 1).unwrap().value;
            assert!((pl - ex).abs() <= 1e-12 * pl);
        }
    }

    #[test]
    fn hurwitz_values() {
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((hurwitz_zeta(2.0, 1.0) - pi2 / 6.0).abs() < 1e-13);
        assert!((hurwitz_zeta(2.0, 0.5) - pi2 / 2.0).abs() < 1e-13);
        assert!((hurwitz_zeta(3.0, 1.0) - 1.2020569031595942).abs() < 1e-13);
        assert!((hurwitz_zeta(2.5, 40.0) - (hurwitz_zeta(2.5, 39.0) - 39f64.powf(-2.5))).abs() < 1e-15);
    }

    #[test]
    fn full_line_trapezoid_is_exact_for_even_p() {
        let c = desk(2);
        for (j, ell) in [(0, 0), (1, 1), (2, 1)] {
            let q = lp_norm_quadrature(&c, j, ell, &[2.0, 4.0, 3.0], &QuadraturePlan::default()).unwrap();
            for (est, r) in q.iter().zip([1u32, 2]) {
                let exact = lp_norm_exact(&c, j, ell, r).unwrap().value;
                assert!((est.full_line() - exact).abs() <= 1e-9 * exact, "{j} {ell} {r}");
            }
            assert!(q[2].tail_sum.unwrap() <= q[2].tail_bound);
        }
    }

    #[test]
    fn p_one_is_flagged() {
        let c = desk(1);
        assert!(matches!(
            lp_norm_quadrature(&c, 1, 0, &[1.0], &QuadraturePlan::default()),
            Err(Error::DivergentTail { .. })
        ));
    }

    #[test]
    fn masses() {
        let c = desk(3);
        assert_eq!(lq_mass(&c.params, 2, 1.0), 0.25);
        assert_eq!(lq_mass(&c.params, 2, 2.0), 0.5);
        assert_eq!(lq_mass(&c.params, 0, 3.0), 1.0);
        for j in 0..=3 {
            for ell in 0..=j {
                let m = mass_check(&c, j, ell).unwrap();
                assert!(m.exact(), "{m:?}");
                assert_eq!(m.mass, lq_mass(&c.params, ell, 1.0));
            }
        }
    }

    #[test]
    fn ratio_thresholds() {
        let c = desk(2);
        let r = restriction_ratio(&c, 2, 0, 4.0, 2.0, &QuadraturePlan::default()).unwrap();
        assert_eq!(r.denominator, 1.0);
        assert_eq!(r.method, NormMethod::ExactBspline);
        assert_eq!(r.thresholds.p_sharp, 6.0);
        assert!(r.in_failing_range && r.in_pq_failing_region);
        let mut csv = Vec::new();
        write_ratio_csv(&[r], &mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().starts_with("ell,p,q,"));
    }

    #[test]
    fn holder_chain() {
        let c = desk(3);
        let eq = holder_chain_check(&c, 2, 1, 6.0, 3, &QuadraturePlan::default()).unwrap();
        assert_eq!(eq.lhs, eq.rhs);
        let odd = holder_chain_check(&c, 3, 1, 3.0, 2, &QuadraturePlan::default()).unwrap();
        assert!(odd.passed(), "{odd:?}");
        assert!(odd.slack >= 0.0);
    }

    #[test]
    fn lebesgue_energy_integral_converges() {
        let c = desk(1);
        let rows = energy_integral(&c, 0, 0.5, &[1, 16, 256, 4096], 8).unwrap();
        assert_eq!(rows[0].value, 0.0);
        let d1 = rows[2].value - rows[1].value;
        let d2 = rows[3].value - rows[2].value;
        assert!(d1 > 0.0 && d2 > 0.0 && d2 < d1);
    }

    #[test]
    fn ball_condition() {
        let c = desk(3);
        let b = ball_condition_report(&c, 3).unwrap();
        assert!(b.adic_exact());
        assert_eq!(b.adic_sup, 1.0);
        assert!(b.window_sup <= 2f64.powf(0.5) + 1e-12);
        assert_eq!(b.rows[3].surviving, 64);
    }
}
