//! Scalar parameters of the randomized Cantor construction.
//!
//! Everything is derived from three integers: the base `N0`, the digit count
//! `t0 < N0` and the power `n0`. The working base is `N = N0^(2 n0)` with
//! `t = t0^(2 n0)` digits kept per block, so that `N^alpha = t` holds exactly
//! for `alpha = log t0 / log N0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of frequencies that may be checked exhaustively per level.
pub const DEFAULT_K_BUDGET: u64 = 1 << 22;
pub const DEFAULT_MAX_RETRIES: usize = 64;
pub const DEFAULT_C_ETA: f64 = 192.0;
pub const DEFAULT_C_ROT: f64 = 6144.0;

/// Largest level scale `N^j` we allow. Products `atom * k` are formed in
/// `u128`, frequencies are stored as `i64`.
const MAX_SCALE: u64 = 1 << 62;

/// `log(numerator) / log(denominator)`, kept symbolically next to its value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alpha {
    pub log_numerator: u64,
    pub log_denominator: u64,
    pub value: f64,
}

impl Alpha {
    pub fn new(log_numerator: u64, log_denominator: u64) -> Self {
        let value = (log_numerator as f64).ln() / (log_denominator as f64).ln();
        Alpha {
            log_numerator,
            log_denominator,
            value,
        }
    }
}

/// Optional settings layered over the defaults by [`derive_params`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamOverrides {
    pub j_max: Option<usize>,
    pub seed: Option<u64>,
    pub c_eta: Option<f64>,
    pub c_rot: Option<f64>,
    pub ap_offset: Option<u64>,
    pub ap_gap: Option<u64>,
    pub k_budget: Option<u64>,
    pub max_retries: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    /// `N0`.
    #[serde(rename = "N0")]
    pub base_n: u64,
    /// `t0`.
    pub t0: u64,
    /// `n0`.
    pub n0: u32,
    /// `N = N0^(2 n0)`.
    #[serde(rename = "N")]
    pub n: u64,
    /// `t = t0^(2 n0)`.
    pub t: u64,
    /// `t0^n0`, the progression length.
    pub sqrt_t: u64,
    pub alpha: Alpha,
    pub j_max: usize,
    pub seed: u64,
    /// Coefficient in front of `t^-1 ln(8 N^(j+2))` in the base-block tolerance.
    pub c_eta: f64,
    /// Constant in the rotation thresholds.
    pub c_rot: f64,
    pub ap_offset: u64,
    pub ap_gap: u64,
    pub k_budget: u64,
    pub max_retries: usize,
}

pub fn derive_params(
    base_n: u64,
    t0: u64,
    n0: u32,
    overrides: &ParamOverrides,
) -> Result<ConstructionParams> {
    if t0 <= 1 || t0 >= base_n {
        return Err(Error::InvalidParams(format!(
            "need 1 < t0 < N0, got t0 = {t0}, N0 = {base_n}"
        )));
    }
    if n0 == 0 {
        return Err(Error::InvalidParams("n0 must be at least 1".into()));
    }
    let overflow = || Error::Overflow(format!("N0^(2 n0) for N0 = {base_n}, n0 = {n0}"));
    let n = base_n.checked_pow(2 * n0).ok_or_else(overflow)?;
    let t = t0.checked_pow(2 * n0).ok_or_else(overflow)?;
    let sqrt_t = t0.pow(n0);
    if sqrt_t >= n {
        return Err(Error::InvalidParams(format!(
            "progression length {sqrt_t} does not fit in [0, {n})"
        )));
    }

    let j_max = overrides.j_max.unwrap_or(4);
    if j_max == 0 {
        return Err(Error::InvalidParams("j_max must be at least 1".into()));
    }
    scale_checked(n, j_max + 1)?;

    let ap_offset = overrides.ap_offset.unwrap_or(0);
    let ap_gap = overrides.ap_gap.unwrap_or((n - 1) / (sqrt_t - 1));
    if ap_gap == 0 {
        return Err(Error::InvalidParams("ap_gap must be at least 1".into()));
    }

    let params = ConstructionParams {
        base_n,
        t0,
        n0,
        n,
        t,
        sqrt_t,
        alpha: Alpha::new(t0, base_n),
        j_max,
        seed: overrides.seed.unwrap_or(0),
        c_eta: overrides.c_eta.unwrap_or(DEFAULT_C_ETA),
        c_rot: overrides.c_rot.unwrap_or(DEFAULT_C_ROT),
        ap_offset,
        ap_gap,
        k_budget: overrides.k_budget.unwrap_or(DEFAULT_K_BUDGET),
        max_retries: overrides.max_retries.unwrap_or(DEFAULT_MAX_RETRIES),
    };
    params.validate()?;
    Ok(params)
}

fn scale_checked(n: u64, j: usize) -> Result<u64> {
    let exp = u32::try_from(j).map_err(|_| Error::Overflow(format!("level {j}")))?;
    match n.checked_pow(exp) {
        Some(v) if v <= MAX_SCALE => Ok(v),
        _ => Err(Error::Overflow(format!("N^{j} with N = {n} exceeds 2^62"))),
    }
}

impl ConstructionParams {
    /// Re-checks every invariant; used after deserializing a manifest.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.t0 <= 1 || self.t0 >= self.base_n {
            return bad(format!("need 1 < t0 < N0, got {} and {}", self.t0, self.base_n));
        }
        if Some(self.n) != self.base_n.checked_pow(2 * self.n0)
            || Some(self.t) != self.t0.checked_pow(2 * self.n0)
            || self.sqrt_t.checked_mul(self.sqrt_t) != Some(self.t)
        {
            return bad("N, t, sqrt(t) are inconsistent with N0, t0, n0".into());
        }
        if self.t >= self.n {
            return bad("t must be smaller than N".into());
        }
        if !(self.c_eta > 0.0 && self.c_rot > 0.0) {
            return bad("c_eta and c_rot must be positive".into());
        }
        if self.k_budget == 0 {
            return bad("k_budget must be positive".into());
        }
        scale_checked(self.n, self.j_max + 1)?;
        self.progression_end()?;
        Ok(())
    }

    fn progression_end(&self) -> Result<u64> {
        let err = || Error::ProgressionOutOfRange {
            offset: self.ap_offset,
            gap: self.ap_gap,
            len: self.sqrt_t,
            modulus: self.n,
        };
        let last = (self.sqrt_t - 1)
            .checked_mul(self.ap_gap)
            .and_then(|v| v.checked_add(self.ap_offset))
            .ok_or_else(err)?;
        if last >= self.n {
            return Err(err());
        }
        Ok(last)
    }

    /// `N^j`. Only valid for `j <= j_max + 1`, which `validate` guarantees fits.
    pub fn scale(&self, j: usize) -> u64 {
        self.n.pow(j as u32)
    }

    pub fn t_pow(&self, j: usize) -> u64 {
        self.t.pow(j as u32)
    }

    pub fn sqrt_t_pow(&self, j: usize) -> u64 {
        self.sqrt_t.pow(j as u32)
    }

    /// `ln(8 N^m)` without forming `N^m`.
    pub fn log_8_n_pow(&self, m: usize) -> f64 {
        8f64.ln() + m as f64 * (self.n as f64).ln()
    }

    /// Base-block tolerance for level `j`: `eta_j^2 = c_eta t^-1 ln(8 N^(j+2))`.
    pub fn eta(&self, j: usize) -> f64 {
        (self.c_eta / self.t as f64 * self.log_8_n_pow(j + 2)).sqrt()
    }

    /// Rotation threshold for the full sum over `A_j`.
    pub fn lambda(&self, j: usize) -> f64 {
        self.c_rot * (self.t as f64).powf(-((j + 1) as f64) / 2.0) * self.log_8_n_pow(j + 1)
    }

    /// Rotation threshold for the sum restricted to `F_ell`.
    pub fn lambda_ell(&self, j: usize, ell: usize) -> f64 {
        let exponent = -((j + 1) as f64) / 2.0 + ell as f64 / 4.0;
        self.c_rot * (self.t as f64).powf(exponent) * self.log_8_n_pow(j + 1)
    }

    /// Right-hand side of the telescoping decay bound with constant `c`:
    /// `c min(1, N^(j+1)/|k|) t^(-(j+1)/2) ln(8 N^(j+1))`.
    pub fn telescope_rhs(&self, c: f64, j: usize, k: i64) -> f64 {
        let scale = self.scale(j + 1) as f64;
        let damp = if k == 0 {
            1.0
        } else {
            (scale / k.unsigned_abs() as f64).min(1.0)
        };
        c * damp * (self.t as f64).powf(-((j + 1) as f64) / 2.0) * self.log_8_n_pow(j + 1)
    }
}
