//! Exact rational helpers and rounding-guarded logarithms.
//!
//! Floors and ceilings of logarithms are first estimated in floating point and
//! then settled by exact comparisons against integer or rational powers, so a
//! boundary case such as `log_2 32 = 5` never flips through rounding.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// `num / den` as an exact rational. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_int(v: u64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Base-2 logarithm of a positive big integer, accurate to f64 precision even
/// when the value does not fit an f64.
pub fn log2_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return libm::log2(x.to_f64().unwrap_or(f64::INFINITY));
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    libm::log2(top) + shift as f64
}

/// Base-2 logarithm of a positive rational.
pub fn log2_rational(x: &Rational) -> f64 {
    debug_assert!(x.is_positive());
    log2_biguint(x.numer().magnitude()) - log2_biguint(x.denom().magnitude())
}

pub fn to_f64(x: &Rational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    sign * libm::exp2(log2_rational(&x.abs()))
}

/// `base^k` for a possibly negative exponent.
pub fn pow_rational(base: &Rational, k: i64) -> Rational {
    let e = k.unsigned_abs();
    let p: Rational = Pow::pow(base, e);
    if k >= 0 {
        p
    } else {
        p.recip()
    }
}

/// Largest integer `k` with `base^k <= x`. Requires `x > 0` and `base > 1`.
pub fn floor_log(base: &Rational, x: &Rational) -> i64 {
    assert!(x.is_positive(), "logarithm of a non-positive value");
    assert!(*base > Rational::one(), "logarithm base must exceed 1");
    let est = log2_rational(x) / log2_rational(base);
    let mut k = libm::floor(est) as i64;
    while pow_rational(base, k) > *x {
        k -= 1;
    }
    while pow_rational(base, k + 1) <= *x {
        k += 1;
    }
    k
}

/// Smallest integer `k` with `base^k >= x`. Requires `x > 0` and `base > 1`.
pub fn ceil_log(base: &Rational, x: &Rational) -> i64 {
    assert!(x.is_positive(), "logarithm of a non-positive value");
    assert!(*base > Rational::one(), "logarithm base must exceed 1");
    let est = log2_rational(x) / log2_rational(base);
    let mut k = libm::ceil(est) as i64;
    while pow_rational(base, k) < *x {
        k += 1;
    }
    while pow_rational(base, k - 1) >= *x {
        k -= 1;
    }
    k
}

/// Ceiling of a rational as a big integer.
pub fn ceil_int(x: &Rational) -> BigInt {
    let (q, r) = x.numer().div_mod_floor(x.denom());
    if r.is_zero() {
        q
    } else {
        q + 1
    }
}

/// `Some(k)` when `x = base^k` exactly for an integer `k`.
pub fn exact_log(base: u64, x: &Rational) -> Option<i64> {
    if !x.is_positive() {
        return None;
    }
    let b = from_int(base);
    let k = floor_log(&b, x);
    (pow_rational(&b, k) == *x).then_some(k)
}

pub fn is_nonneg(x: &BigInt) -> bool {
    x.sign() != Sign::Minus
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_boundaries_are_exact() {
        let two = from_int(2);
        assert_eq!(ceil_log(&two, &from_int(32)), 5);
        assert_eq!(floor_log(&two, &from_int(32)), 5);
        assert_eq!(ceil_log(&two, &from_int(33)), 6);
        assert_eq!(floor_log(&two, &from_int(31)), 4);
        assert_eq!(floor_log(&two, &ratio(1, 8)), -3);
        assert_eq!(ceil_log(&two, &ratio(1, 7)), -2);
        let three = from_int(3);
        assert_eq!(ceil_log(&three, &from_int(243)), 5);
        assert_eq!(ceil_log(&three, &from_int(244)), 6);
    }

    #[test]
    fn huge_values() {
        let x = Rational::from_integer(BigInt::from(1u8) << 5000usize);
        assert_eq!(floor_log(&from_int(2), &x), 5000);
        assert_eq!(ceil_log(&from_int(2), &(x.clone() + Rational::one())), 5001);
        assert_eq!(exact_log(2, &x), Some(5000));
        assert_eq!(exact_log(2, &ratio(3, 4)), None);
    }

    #[test]
    fn ceil_of_rationals() {
        assert_eq!(ceil_int(&ratio(7, 2)), BigInt::from(4));
        assert_eq!(ceil_int(&ratio(8, 2)), BigInt::from(4));
        assert_eq!(ceil_int(&ratio(-7, 2)), BigInt::from(-3));
    }
}
