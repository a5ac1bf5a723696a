//! Centered cardinal B-splines at integer arguments, in exact arithmetic.
//!
//! The order-`n` spline is the `n`-fold convolution of the box `1_[-1/2, 1/2]`,
//! which is also the Fourier transform of `sinc^n`. For even order `2r` its
//! integer values are obtained from the truncated-power expansion
//!
//! ```text
//! B_n(x) = 1/(n-1)! sum_{k=0}^{n} (-1)^k C(n, k) (x + n/2 - k)_+^(n-1)
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

#[derive(Debug, Clone, PartialEq)]
pub struct BsplineTable {
    pub r: u32,
    /// `values[d]` is `B_{2r}(d)` for `0 <= d < r`; the spline is even and
    /// vanishes for `|d| >= r`.
    pub values: Vec<BigRational>,
}

impl BsplineTable {
    /// `C_{2r} = B_{2r}(0) = integral of sinc^{2r}`.
    pub fn c_2r(&self) -> &BigRational {
        &self.values[0]
    }

    pub fn at(&self, d: i64) -> BigRational {
        self.values
            .get(d.unsigned_abs() as usize)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Sum over all integers; equal to 1 by partition of unity.
    pub fn integer_sum(&self) -> BigRational {
        let tail: BigRational = self.values[1..].iter().cloned().sum();
        self.values[0].clone() + tail * BigRational::from_integer(2.into())
    }
}

impl Serialize for BsplineTable {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("BsplineTable", 3)?;
        st.serialize_field("r", &self.r)?;
        let text: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        st.serialize_field("values", &text)?;
        st.serialize_field("c_2r", &self.c_2r().to_f64())?;
        st.end()
    }
}

fn binomial(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// Order-`2r` values at `d = 0, 1, ..., r - 1`.
pub fn bspline_integers(r: u32) -> BsplineTable {
    assert!(r >= 1, "order 2r needs r >= 1");
    let n = 2 * r;
    let factorial: BigInt = (1..n).map(BigInt::from).product();
    let values = (0..r as i64)
        .map(|d| {
            let mut acc = BigInt::zero();
            for k in 0..=n {
                let shift = d + r as i64 - k as i64;
                if shift <= 0 {
                    continue;
                }
                let term = binomial(n, k) * BigInt::from(shift).pow(n - 1);
                if k % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            BigRational::new(acc, factorial.clone())
        })
        .collect::<Vec<_>>();
    debug_assert!(values.iter().all(|v| v.is_positive()));
    BsplineTable { r, values }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn known_values() {
        assert_eq!(bspline_integers(1).values, vec![q(1, 1)]);
        assert_eq!(bspline_integers(2).values, vec![q(2, 3), q(1, 6)]);
        assert_eq!(*bspline_integers(3).c_2r(), q(11, 20));
        assert_eq!(bspline_integers(2).at(-1), q(1, 6));
        assert_eq!(bspline_integers(2).at(2), q(0, 1));
    }

    #[test]
    fn partition_of_unity_and_positivity() {
        for r in 1..=8 {
            let table = bspline_integers(r);
            assert_eq!(table.integer_sum(), q(1, 1), "r = {r}");
            assert!(table.values.iter().all(|v| v.is_positive()));
            assert!(table.values.windows(2).all(|w| w[0] > w[1]));
        }
    }
}
