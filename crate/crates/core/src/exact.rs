//! Exact rational arithmetic used by the recoupling evaluator.
//!
//! Recoupling coefficients are ratios of factorials and grow quickly, so all
//! exact computation runs over arbitrary-precision rationals. `ExactValue` is
//! an alias rather than a newtype: the full `BigRational` operator surface is
//! the API we want, and the helpers below cover the recurring idioms.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

/// Exact rational number; the result type of all exact evaluation paths.
pub type ExactValue = BigRational;

/// `n` as an exact value.
pub fn from_int(n: i64) -> ExactValue {
    BigRational::from_integer(BigInt::from(n))
}

/// `p / q` as an exact value. Panics if `q == 0`.
pub fn ratio(p: i64, q: i64) -> ExactValue {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// `n!` as a big integer.
pub fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    acc
}

/// `(-1)^n` as a big integer.
pub fn sign_pow(n: u64) -> BigInt {
    if n.is_multiple_of(2) {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

/// The signed dimension `(-1)^n (n+1)` of the spin-`n` representation: the
/// value of a free loop, and the coefficient of an internal spin in vertex
/// expansion.
pub fn signed_dimension(n: u64) -> ExactValue {
    ExactValue::from_integer(sign_pow(n) * BigInt::from(n + 1))
}

/// Nearest `f64` to an exact value (round-trips through a scaled quotient so
/// values far outside the integer range still convert sensibly).
pub fn to_f64(v: &ExactValue) -> f64 {
    // BigRational -> f64 has no built-in; divide as big integers with 64
    // extra bits of headroom, then scale back.
    const SHIFT: usize = 64;
    if v.is_zero() {
        return 0.0;
    }
    let scaled = (v.numer() << SHIFT) / v.denom();
    let mut x = 0.0f64;
    let (sign, digits) = scaled.to_u64_digits();
    for &d in digits.iter().rev() {
        x = x * 1.8446744073709552e19 + d as f64;
    }
    if sign == num::bigint::Sign::Minus {
        x = -x;
    }
    x / 1.8446744073709552e19
}

/// Numerator and denominator in lowest terms as decimal strings, denominator
/// positive. Suitable for JSON output without loss.
pub fn to_decimal_strings(v: &ExactValue) -> (String, String) {
    let reduced = v.reduced();
    let (mut num, mut den) = (reduced.numer().clone(), reduced.denom().clone());
    if den.is_negative() {
        num = -num;
        den = -den;
    }
    (num.to_string(), den.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_small_values() {
        assert_eq!(factorial(0), BigInt::from(1));
        assert_eq!(factorial(1), BigInt::from(1));
        assert_eq!(factorial(5), BigInt::from(120));
        assert_eq!(factorial(12), BigInt::from(479_001_600u64));
    }

    #[test]
    fn sign_alternates() {
        assert_eq!(sign_pow(0), BigInt::from(1));
        assert_eq!(sign_pow(1), BigInt::from(-1));
        assert_eq!(sign_pow(7), BigInt::from(-1));
        assert_eq!(sign_pow(10), BigInt::from(1));
    }

    #[test]
    fn f64_conversion_matches_small_rationals() {
        assert_eq!(to_f64(&ratio(1, 2)), 0.5);
        assert_eq!(to_f64(&ratio(-3, 4)), -0.75);
        assert_eq!(to_f64(&from_int(0)), 0.0);
        let big = factorial(25); // exceeds u64 but well inside f64 range
        let v = ExactValue::from_integer(big.clone());
        let expect: f64 = (2..=25).map(|k| k as f64).product();
        assert!((to_f64(&v) - expect).abs() / expect < 1e-12);
    }

    #[test]
    fn decimal_strings_are_reduced_and_den_positive() {
        let v = ExactValue::new(BigInt::from(6), BigInt::from(-4));
        let (n, d) = to_decimal_strings(&v);
        assert_eq!((n.as_str(), d.as_str()), ("-3", "2"));
    }
}
