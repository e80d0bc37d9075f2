//! Helpers around the exact rational scalar used everywhere in this crate.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

pub use num_rational::BigRational;

/// `n` as an exact rational.
pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `n/d` as an exact rational.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `p^e` as an exact rational; `e` may be negative.
pub fn prime_pow(p: u64, e: i64) -> BigRational {
    let mag = BigInt::from(p).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(mag)
    } else {
        BigRational::new(BigInt::one(), mag)
    }
}

/// `10^-e` as an exact rational, for tolerances like `1e-30`.
pub fn ten_pow_neg(e: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(10u32).pow(e))
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d & 1 == 0 {
        d >>= 1;
        r += 1;
    }
    // This witness set decides primality for all n < 2^64.
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// Parses an exact rational from `a/b`, an integer, or a decimal string with
/// optional exponent (`1.5`, `-0.25`, `1e-12`, `2.5e3`). Decimals convert
/// exactly since base-10 expansions are finite.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("cannot parse `{s}` as a rational"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let negative = int_part.starts_with('-');
    let int_digits = int_part.trim_start_matches(['-', '+']);
    if !int_digits.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let mut digits = String::with_capacity(int_digits.len() + frac_part.len());
    digits.push_str(int_digits);
    digits.push_str(frac_part);
    if digits.is_empty() {
        return Err(bad());
    }
    let mut value = BigRational::from_integer(digits.parse::<BigInt>().map_err(|_| bad())?);
    if negative {
        value = -value;
    }
    let shift = exp - frac_part.len() as i64;
    let scale = BigInt::from(10u32).pow(shift.unsigned_abs() as u32);
    if shift >= 0 {
        value *= BigRational::from_integer(scale);
    } else {
        value /= BigRational::from_integer(scale);
    }
    Ok(value)
}

/// Renders `q` as a decimal string with `sig` significant digits, switching
/// to scientific notation outside a comfortable plain range. The rational is
/// the authoritative value; this is a convenience rendering.
pub fn decimal_string(q: &BigRational, sig: usize) -> String {
    if q.is_zero() {
        return "0".into();
    }
    let sig = sig.max(1);
    let negative = q.is_negative();
    let num = q.numer().abs().to_biguint().expect("abs");
    let den = q.denom().abs().to_biguint().expect("abs");
    // decimal exponent of the leading digit
    let mut exp: i64 = num.to_string().len() as i64 - den.to_string().len() as i64;
    let ten = BigUint::from(10u32);
    let scaled_ge_one = |e: i64| -> bool {
        // num/den >= 10^e ?
        if e >= 0 {
            num >= &den * ten.pow(e as u32)
        } else {
            &num * ten.pow((-e) as u32) >= den
        }
    };
    if !scaled_ge_one(exp) {
        exp -= 1;
    }
    debug_assert!(scaled_ge_one(exp) && !scaled_ge_one(exp + 1));
    // first `sig` digits of |q| / 10^exp, rounded half-up
    let shift = sig as i64 - 1 - exp;
    let (n, d) = if shift >= 0 {
        (&num * ten.pow(shift as u32), den.clone())
    } else {
        (num.clone(), &den * ten.pow((-shift) as u32))
    };
    let mut mantissa = (&n + &d / 2u32) / &d;
    let cap = ten.pow(sig as u32);
    if mantissa >= cap {
        mantissa /= &ten;
        exp += 1;
    }
    let digits = mantissa.to_string();
    debug_assert_eq!(digits.len(), sig);
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if (-4..sig as i64).contains(&exp) {
        if exp >= 0 {
            let point = (exp + 1) as usize;
            out.push_str(&digits[..point]);
            let frac = digits[point..].trim_end_matches('0');
            if !frac.is_empty() {
                out.push('.');
                out.push_str(frac);
            }
        } else {
            out.push_str("0.");
            for _ in 0..(-exp - 1) {
                out.push('0');
            }
            out.push_str(digits.trim_end_matches('0'));
        }
    } else {
        out.push_str(&digits[..1]);
        let frac = digits[1..].trim_end_matches('0');
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
        out.push('e');
        out.push_str(&exp.to_string());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality() {
        assert!(is_prime(2));
        assert!(is_prime(3));
        assert!(is_prime(101));
        assert!(is_prime(211));
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(0));
        assert!(!is_prime(1));
        assert!(!is_prime(4));
        assert!(!is_prime(561)); // Carmichael
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to 2,3,5,7
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_pow(5, 3), int(125));
        assert_eq!(prime_pow(5, -2), ratio(1, 25));
        assert_eq!(prime_pow(2, 0), int(1));
    }

    #[test]
    fn parsing() {
        assert_eq!(parse_rational("4/3").unwrap(), ratio(4, 3));
        assert_eq!(parse_rational("-2/6").unwrap(), ratio(-1, 3));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert_eq!(parse_rational("1.5").unwrap(), ratio(3, 2));
        assert_eq!(parse_rational("-0.001").unwrap(), ratio(-1, 1000));
        assert_eq!(parse_rational("1e-12").unwrap(), ten_pow_neg(12));
        assert_eq!(parse_rational("2.5e3").unwrap(), int(2500));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert!(parse_rational("").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn decimals() {
        assert_eq!(decimal_string(&ratio(25, 31), 15), "0.806451612903226");
        assert_eq!(decimal_string(&int(1), 15), "1");
        assert_eq!(decimal_string(&ratio(-1, 4), 15), "-0.25");
        assert_eq!(decimal_string(&ratio(200, 101), 7), "1.980198");
        assert_eq!(decimal_string(&ratio(1, 10_000), 4), "0.0001");
        assert_eq!(decimal_string(&ratio(1, 1_000_000), 4), "1e-6");
        assert_eq!(decimal_string(&prime_pow(10, 20), 3), "1e20");
        assert_eq!(decimal_string(&ratio(999, 1000), 2), "1");
        assert_eq!(decimal_string(&int(0), 15), "0");
    }
}
