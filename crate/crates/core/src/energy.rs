//! Additive energy of the structured pieces `F_ell cap A_j` and the exact
//! `L^{2r}` norm of `(f_ell dmu_j)^`.
//!
//! For a finite integer set `Y` and `r >= 1`, `g(z)` counts the `r`-tuples of
//! `Y` with sum `z`, and `M_Y = sum_z g(z)^2` counts the `2r`-tuples with
//! equal half-sums. Expanding `|sum_Y e(-a eta)|^{2r}` against `sinc^{2r}`
//! turns the `L^{2r}` norm into `sum_d corr(d) B_{2r}(d)`, where
//! `corr(d) = sum_z g(z) g(z + d)` and only `|d| < r` survives because the
//! B-spline is supported in `(-r, r)`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::bspline::{bspline_integers, BsplineTable};
use crate::construction::Construction;
use crate::error::{Error, Result};
use crate::ntt;
use crate::params::ConstructionParams;

/// Dense convolution is used while `r (max Y - min Y)` stays below this.
pub const DENSE_RANGE_LIMIT: u64 = 1 << 27;

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTable {
    pub r: u32,
    pub y_len: usize,
    /// `g` is stored densely from `offset = r min(Y)`.
    pub offset: i64,
    pub g: Vec<u64>,
    /// `M_Y = sum g^2 = corr(0)`.
    pub m: u128,
    /// `corr[d]` for `0 <= d < r`; `corr(-d) = corr(d)`.
    pub correlation: Vec<u128>,
}

impl EnergyTable {
    pub fn support_size(&self) -> usize {
        self.g.iter().filter(|&&c| c > 0).count()
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.g
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(move |(i, _)| self.offset + i as i64)
    }

    pub fn g_at(&self, z: i64) -> u64 {
        usize::try_from(z - self.offset)
            .ok()
            .and_then(|i| self.g.get(i).copied())
            .unwrap_or(0)
    }

    pub fn total(&self) -> u128 {
        self.g.iter().map(|&c| c as u128).sum()
    }
}

/// Distribution of `r`-fold sums of `Y`, with `M_Y` and the correlations.
pub fn sum_distribution(y: &[i64], r: u32) -> Result<EnergyTable> {
    if y.is_empty() {
        return Err(Error::Empty("Y"));
    }
    if r == 0 {
        return Err(Error::InvalidParams("r must be at least 1".into()));
    }
    let mut sorted = y.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParams("Y must consist of distinct integers".into()));
    }
    let min = sorted[0];
    let span = (sorted[sorted.len() - 1] - min) as u64;
    let total_bits = (sorted.len() as f64).log2() * r as f64;
    if total_bits >= 63.0 {
        return Err(Error::Overflow(format!(
            "|Y|^r = {}^{r} does not fit the exact counters",
            sorted.len()
        )));
    }
    let range = span
        .checked_mul(r as u64)
        .ok_or_else(|| Error::Overflow("r (max Y - min Y)".into()))?;
    let offset = min
        .checked_mul(r as i64)
        .ok_or_else(|| Error::Overflow("r min Y".into()))?;
    let shifted: Vec<u64> = sorted.iter().map(|&v| (v - min) as u64).collect();

    let g = if range < DENSE_RANGE_LIMIT {
        ntt::indicator_power(&shifted, r)
    } else {
        sparse_power(&shifted, r, range)?
    };

    let correlation: Vec<u128> = (0..r as usize)
        .map(|d| {
            g.iter()
                .zip(g.iter().skip(d))
                .map(|(&a, &b)| a as u128 * b as u128)
                .sum()
        })
        .collect();
    Ok(EnergyTable {
        r,
        y_len: sorted.len(),
        offset,
        m: correlation[0],
        g,
        correlation,
    })
}

/// Iterated sparse convolution, for spans too wide for a dense buffer. The
/// result is still returned densely, so it is only usable when the support
/// is small; beyond that we refuse.
fn sparse_power(shifted: &[u64], r: u32, range: u64) -> Result<Vec<u64>> {
    let mut current: BTreeMap<u64, u64> = shifted.iter().map(|&v| (v, 1)).collect();
    for _ in 1..r {
        let mut next = BTreeMap::new();
        for (&z, &c) in &current {
            for &v in shifted {
                *next.entry(z + v).or_insert(0u64) += c;
            }
        }
        current = next;
    }
    if range >= DENSE_RANGE_LIMIT * 8 {
        return Err(Error::ResourceLimit(format!(
            "sum range {range} too wide for a dense table"
        )));
    }
    let mut g = vec![0u64; range as usize + 1];
    for (z, c) in current {
        g[z as usize] = c;
    }
    Ok(g)
}

/// `M_Y` for `Y = N^j (F_ell cap A_j)`.
pub fn additive_energy(construction: &Construction, j: usize, ell: usize, r: u32) -> Result<u128> {
    Ok(energy_table(construction, j, ell, r)?.m)
}

pub fn energy_table(construction: &Construction, j: usize, ell: usize, r: u32) -> Result<EnergyTable> {
    let y: Vec<i64> = construction
        .restricted_atoms(j, ell)?
        .into_iter()
        .map(|v| v as i64)
        .collect();
    sum_distribution(&y, r)
}

/// Lower bound for `M_{F_ell cap A_j}` and the quantities of its proof.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBound {
    /// `r^(-ell-1) t^((2r-1) ell/2) (t^{2r}/N)^(j-ell)`.
    pub bound: BigRational,
    /// `(r sqrt(t))^ell r N^(j-ell)`, an upper bound for the sumset size.
    pub sumset_bound: BigUint,
    /// `|Y|^{2r} / sumset_bound`.
    pub holder_floor: BigRational,
}

impl EnergyBound {
    pub fn bound_f64(&self) -> f64 {
        self.bound.to_f64().unwrap_or(f64::NAN)
    }
}

pub fn energy_lower_bound(
    params: &ConstructionParams,
    j: usize,
    ell: usize,
    r: u32,
) -> Result<EnergyBound> {
    if ell > j {
        return Err(Error::LevelOrder { ell, j });
    }
    let big = |v: u64| BigInt::from(v);
    let rr = big(r as u64);
    let tail = (j - ell) as u32;
    let ell32 = ell as u32;
    let numerator =
        big(params.sqrt_t).pow((2 * r - 1) * ell32) * big(params.t).pow(2 * r * tail);
    let denominator = rr.pow(ell32 + 1) * big(params.n).pow(tail);
    let bound = BigRational::new(numerator, denominator);

    let sumset = (rr.clone() * big(params.sqrt_t)).pow(ell32) * rr * big(params.n).pow(tail);
    let y_len = big(params.sqrt_t).pow(ell32) * big(params.t).pow(tail);
    let holder_floor = BigRational::new(y_len.pow(2 * r), sumset.clone());
    Ok(EnergyBound {
        bound,
        sumset_bound: sumset.to_biguint().expect("positive"),
        holder_floor,
    })
}

/// Energy of one `(j, ell, r)` instance against its lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyCheck {
    pub j: usize,
    pub ell: usize,
    pub r: u32,
    #[serde(rename = "M")]
    pub m: u128,
    pub support_size: usize,
    pub sumset_bound: String,
    pub lower_bound: f64,
    /// `1 - lower_bound / M`, nonnegative when the bound holds.
    pub slack: f64,
    pub bound_holds: bool,
    pub sumset_holds: bool,
    pub holder_floor_holds: bool,
}

impl EnergyCheck {
    pub fn passed(&self) -> bool {
        self.bound_holds && self.sumset_holds && self.holder_floor_holds
    }
}

pub fn energy_check(construction: &Construction, j: usize, ell: usize, r: u32) -> Result<EnergyCheck> {
    let table = energy_table(construction, j, ell, r)?;
    energy_check_from_table(&construction.params, j, ell, &table)
}

pub fn energy_check_from_table(
    params: &ConstructionParams,
    j: usize,
    ell: usize,
    table: &EnergyTable,
) -> Result<EnergyCheck> {
    let r = table.r;
    let bound = energy_lower_bound(params, j, ell, r)?;
    let m = BigRational::from_integer(BigInt::from(table.m));
    let support = table.support_size();
    let support_big = BigUint::from(support);
    let floor_actual = cauchy_schwarz_floor(table.y_len, support, r);
    Ok(EnergyCheck {
        j,
        ell,
        r,
        m: table.m,
        support_size: support,
        sumset_bound: bound.sumset_bound.to_string(),
        lower_bound: bound.bound_f64(),
        slack: 1.0 - bound.bound_f64() / table.m as f64,
        bound_holds: m >= bound.bound,
        sumset_holds: support_big <= bound.sumset_bound,
        holder_floor_holds: m >= floor_actual && floor_actual >= bound.holder_floor,
    })
}

/// Cauchy-Schwarz floor `|Y|^{2r} / |supp g|` for `M_Y`.
pub fn cauchy_schwarz_floor(y_len: usize, support: usize, r: u32) -> BigRational {
    BigRational::new(BigInt::from(y_len).pow(2 * r), BigInt::from(support.max(1)))
}

/// `||(f_ell dmu_j)^||_{2r}^{2r}` in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactNorm {
    pub j: usize,
    pub ell: usize,
    pub r: u32,
    /// `(N^j / t^{2rj}) sum_{|d| < r} corr(d) B_{2r}(d)`.
    pub value: BigRational,
    /// The `d = 0` term alone, `(N^j / t^{2rj}) C_{2r} M`.
    pub diagonal: BigRational,
}

impl ExactNorm {
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }
}

pub fn exact_l2r_norm(construction: &Construction, j: usize, ell: usize, r: u32) -> Result<ExactNorm> {
    let table = energy_table(construction, j, ell, r)?;
    let spline = bspline_integers(r);
    exact_l2r_from_table(&construction.params, j, ell, &table, &spline)
}

pub fn exact_l2r_from_table(
    params: &ConstructionParams,
    j: usize,
    ell: usize,
    table: &EnergyTable,
    spline: &BsplineTable,
) -> Result<ExactNorm> {
    let r = table.r;
    if spline.r != r {
        return Err(Error::InvalidParams("B-spline order does not match r".into()));
    }
    let mut sum = BigRational::zero();
    for (d, &c) in table.correlation.iter().enumerate() {
        let weight = if d == 0 { 1 } else { 2 };
        sum += spline.at(d as i64) * BigRational::from_integer(BigInt::from(c * weight));
    }
    let prefactor = BigRational::new(
        BigInt::from(params.n).pow(j as u32),
        BigInt::from(params.t).pow(2 * r * j as u32),
    );
    let diagonal =
        prefactor.clone() * spline.c_2r().clone() * BigRational::from_integer(BigInt::from(table.m));
    Ok(ExactNorm {
        j,
        ell,
        r,
        value: prefactor * sum,
        diagonal,
    })
}

/// `C_{2r} N^ell r^(-ell-1) t^(-ell(2r+1)/2)` and whether `r > 1/alpha`.
pub fn l2r_lower_bound(params: &ConstructionParams, ell: usize, r: u32) -> (BigRational, bool) {
    let spline = bspline_integers(r);
    let ell32 = ell as u32;
    let value = spline.c_2r().clone()
        * BigRational::new(
            BigInt::from(params.n).pow(ell32),
            BigInt::from(r).pow(ell32 + 1) * BigInt::from(params.sqrt_t).pow(ell32 * (2 * r + 1)),
        );
    let in_hypothesis = r as f64 * params.alpha.value > 1.0;
    (value, in_hypothesis)
}

/// Exact `L^{2r}` norm against its lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2rCheck {
    pub j: usize,
    pub ell: usize,
    pub r: u32,
    pub value: f64,
    pub diagonal: f64,
    pub lower_bound: f64,
    /// Whether `r > 1/alpha`, the range where the bound is asserted.
    pub in_hypothesis: bool,
    /// Exact rational comparison `value >= lower_bound`.
    pub holds: bool,
    pub diagonal_holds: bool,
    pub slack: f64,
}

pub fn l2r_check(construction: &Construction, j: usize, ell: usize, r: u32) -> Result<L2rCheck> {
    let table = energy_table(construction, j, ell, r)?;
    l2r_check_from_table(&construction.params, j, ell, &table)
}

pub fn l2r_check_from_table(
    params: &ConstructionParams,
    j: usize,
    ell: usize,
    table: &EnergyTable,
) -> Result<L2rCheck> {
    let r = table.r;
    let norm = exact_l2r_from_table(params, j, ell, table, &bspline_integers(r))?;
    let (bound, in_hypothesis) = l2r_lower_bound(params, ell, r);
    let value = norm.value_f64();
    let lower_bound = bound.to_f64().unwrap_or(f64::NAN);
    Ok(L2rCheck {
        j,
        ell,
        r,
        value,
        diagonal: norm.diagonal.to_f64().unwrap_or(f64::NAN),
        lower_bound,
        in_hypothesis,
        holds: norm.value >= bound,
        diagonal_holds: norm.value >= norm.diagonal,
        slack: 1.0 - lower_bound / value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::build_construction;
    use crate::params::{derive_params, ParamOverrides};
    use num_traits::One;

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
    fn two_point_set() {
        let t = sum_distribution(&[0, 1], 2).unwrap();
        assert_eq!(t.g, vec![1, 2, 1]);
        assert_eq!(t.m, 6);
        let t = sum_distribution(&[0, 7], 3).unwrap();
        assert_eq!(
            t.support().map(|z| t.g_at(z)).collect::<Vec<_>>(),
            vec![1, 3, 3, 1]
        );
        assert_eq!(t.m, 20);
    }

    #[test]
    fn order_one_is_the_indicator() {
        let y = [3, -4, 10, 11];
        let t = sum_distribution(&y, 1).unwrap();
        assert_eq!(t.m, 4);
        assert_eq!(t.support().collect::<Vec<_>>(), vec![-4, 3, 10, 11]);
    }

    #[test]
    fn translation_invariance_and_totals() {
        let y = [0, 1, 2, 15, 33];
        let shifted: Vec<i64> = y.iter().map(|v| v + 1000).collect();
        for r in 1..=3 {
            let a = sum_distribution(&y, r).unwrap();
            let b = sum_distribution(&shifted, r).unwrap();
            assert_eq!(a.m, b.m);
            assert_eq!(a.correlation, b.correlation);
            assert_eq!(a.total(), 5u128.pow(r));
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(sum_distribution(&[], 2), Err(Error::Empty(_))));
        assert!(sum_distribution(&[1, 1], 2).is_err());
        assert!(sum_distribution(&[1, 2], 0).is_err());
    }

    #[test]
    fn sparse_route_agrees_with_dense() {
        let shifted = [0u64, 3, 4, 9, 100];
        let dense = ntt::indicator_power(&shifted, 3);
        let sparse = sparse_power(&shifted, 3, 300).unwrap();
        assert_eq!(dense, sparse);
    }

    #[test]
    fn lower_bound_example() {
        let c = desk(2);
        let b = energy_lower_bound(&c.params, 1, 1, 3).unwrap();
        assert_eq!(b.bound, BigRational::new(32.into(), 9.into()));
        assert_eq!(additive_energy(&c, 1, 1, 3).unwrap(), 20);
        let root = energy_lower_bound(&c.params, 0, 0, 3).unwrap();
        assert_eq!(root.bound, BigRational::new(1.into(), 3.into()));
        assert_eq!(additive_energy(&c, 0, 0, 3).unwrap(), 1);
        assert!(matches!(energy_lower_bound(&c.params, 1, 2, 2), Err(Error::LevelOrder { .. })));
    }

    #[test]
    fn plancherel_case() {
        let c = desk(2);
        let v = exact_l2r_norm(&c, 1, 1, 1).unwrap();
        assert_eq!(v.value, BigRational::from_integer(2.into()));
        let v = exact_l2r_norm(&c, 0, 0, 1).unwrap();
        assert_eq!(v.value, BigRational::one());
    }

    #[test]
    fn energy_bound_example() {
        let c = desk(1);
        let (bound, ok) = l2r_lower_bound(&c.params, 1, 3);
        // C_6 * 16 / (9 * 128)
        assert_eq!(bound, BigRational::new(11.into(), 20.into()) * BigRational::new(16.into(), 1152.into()));
        assert!(ok);
        let (zero, _) = l2r_lower_bound(&c.params, 0, 3);
        assert_eq!(zero, BigRational::new(11.into(), 60.into()));
        assert!(!l2r_lower_bound(&c.params, 1, 2).1);
    }
}
