//! Number-theoretic transform over the prime `p = 2^64 - 2^32 + 1`.
//!
//! Used for exact convolution powers of 0/1 indicators: every count we need is
//! below `p`, so the modular result is the integer result.

pub const P: u64 = 0xFFFF_FFFF_0000_0001;
const EPSILON: u64 = 0xFFFF_FFFF; // 2^64 mod p
/// Generator of the multiplicative group.
const GENERATOR: u64 = 7;
/// `p - 1 = 2^32 * (2^32 - 1)`.
pub const MAX_LOG_LEN: u32 = 32;

#[inline]
fn reduce128(x: u128) -> u64 {
    let lo = x as u64;
    let hi = (x >> 64) as u64;
    let hi_hi = hi >> 32;
    let hi_lo = hi & EPSILON;
    // x = lo + hi_lo 2^64 + hi_hi 2^96, with 2^64 = EPSILON and 2^96 = -1.
    let (mut t0, borrow) = lo.overflowing_sub(hi_hi);
    if borrow {
        t0 = t0.wrapping_sub(EPSILON);
    }
    let t1 = hi_lo * EPSILON;
    let (res, carry) = t0.overflowing_add(t1);
    let r = res.wrapping_add(EPSILON * carry as u64);
    if r >= P {
        r - P
    } else {
        r
    }
}

#[inline]
pub fn mul(a: u64, b: u64) -> u64 {
    reduce128(a as u128 * b as u128)
}

#[inline]
pub fn add(a: u64, b: u64) -> u64 {
    let (s, carry) = a.overflowing_add(b);
    let s = if carry { s.wrapping_add(EPSILON) } else { s };
    if s >= P {
        s - P
    } else {
        s
    }
}

#[inline]
pub fn sub(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        P - (b - a)
    }
}

pub fn pow(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul(acc, base);
        }
        base = mul(base, base);
        exp >>= 1;
    }
    acc
}

fn inverse(a: u64) -> u64 {
    pow(a, P - 2)
}

/// In-place transform of a power-of-two length buffer.
pub fn transform(buf: &mut [u64], inverse_dir: bool) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "NTT length must be a power of two");
    let log_n = n.trailing_zeros();
    assert!(log_n <= MAX_LOG_LEN, "NTT length exceeds 2^32");

    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }

    let mut len = 2;
    while len <= n {
        let mut w_len = pow(GENERATOR, (P - 1) / len as u64);
        if inverse_dir {
            w_len = inverse(w_len);
        }
        let half = len / 2;
        let twiddles: Vec<u64> = std::iter::successors(Some(1u64), |&w| Some(mul(w, w_len)))
            .take(half)
            .collect();
        for chunk in buf.chunks_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((a, b), &w) in lo.iter_mut().zip(hi.iter_mut()).zip(&twiddles) {
                let u = *a;
                let v = mul(*b, w);
                *a = add(u, v);
                *b = sub(u, v);
            }
        }
        len <<= 1;
    }

    if inverse_dir {
        let scale = inverse(n as u64);
        for x in buf.iter_mut() {
            *x = mul(*x, scale);
        }
    }
}

/// `r`-fold convolution power of a 0/1 indicator given by its positions.
/// Entry `z` of the result counts `r`-tuples of positions summing to `z`;
/// the result has length `r * max(positions) + 1`. The caller must ensure
/// every count is below `p`.
pub fn indicator_power(positions: &[u64], r: u32) -> Vec<u64> {
    let max = positions.iter().copied().max().unwrap_or(0);
    let out_len = (r as u64 * max + 1) as usize;
    let len = out_len.next_power_of_two();
    let mut buf = vec![0u64; len];
    for &x in positions {
        buf[x as usize] = 1;
    }
    transform(&mut buf, false);
    for x in buf.iter_mut() {
        *x = pow(*x, r as u64);
    }
    transform(&mut buf, true);
    buf.truncate(out_len);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reduction_matches_u128_modulo() {
        let samples = [0u64, 1, 2, EPSILON, P - 1, P - 2, u64::MAX, 1 << 63, 0x1234_5678_9ABC_DEF0];
        for &a in &samples {
            for &b in &samples {
                let expected = ((a as u128 * b as u128) % P as u128) as u64;
                assert_eq!(mul(a % P, b % P), ((a % P) as u128 * (b % P) as u128 % P as u128) as u64);
                assert_eq!(reduce128(a as u128 * b as u128), expected);
            }
        }
    }

    #[test]
    fn root_has_full_order() {
        let w = pow(GENERATOR, (P - 1) >> MAX_LOG_LEN);
        assert_eq!(pow(w, 1 << MAX_LOG_LEN), 1);
        assert_ne!(pow(w, 1 << (MAX_LOG_LEN - 1)), 1);
    }

    #[test]
    fn small_power() {
        assert_eq!(indicator_power(&[0, 1], 2), vec![1, 2, 1]);
        assert_eq!(indicator_power(&[0, 5], 3), vec![1, 0, 0, 0, 0, 3, 0, 0, 0, 0, 3, 0, 0, 0, 0, 1]);
    }

    proptest! {
        #[test]
        fn matches_schoolbook(set in proptest::collection::btree_set(0u64..200, 1..30), r in 1u32..4) {
            let positions: Vec<u64> = set.into_iter().collect();
            let mut expected = vec![1u64];
            for _ in 0..r {
                let mut next = vec![0u64; expected.len() + 200];
                for (z, &c) in expected.iter().enumerate() {
                    for &x in &positions {
                        next[z + x as usize] += c;
                    }
                }
                expected = next;
            }
            let got = indicator_power(&positions, r);
            expected.truncate(got.len());
            prop_assert_eq!(got, expected);
        }
    }
}
