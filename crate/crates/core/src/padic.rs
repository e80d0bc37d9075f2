//! p-adic valuation and norm on `Q`, digit expansions, and finite-precision
//! p-adic arithmetic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::rational::{check_prime, prime_pow, BigRational};
use crate::{Error, Result};

/// The p-adic valuation of a rational: the exponent of `p` in `q = p^v m/n`
/// with `m`, `n` coprime to `p`. Zero has infinite valuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

fn int_valuation(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        v += 1;
        m = q;
    }
}

/// The unique `v` with `q = p^v m/n`, `m` and `n` coprime to `p`.
pub fn valuation(q: &BigRational, p: u64) -> Result<Valuation> {
    check_prime(p)?;
    if q.is_zero() {
        return Ok(Valuation::Infinite);
    }
    Ok(Valuation::Finite(
        int_valuation(q.numer(), p) - int_valuation(q.denom(), p),
    ))
}

/// `|q|_p = p^{-v}` for nonzero `q`, and `0` for `q = 0`.
pub fn padic_norm(q: &BigRational, p: u64) -> Result<BigRational> {
    match valuation(q, p)? {
        Valuation::Infinite => Ok(BigRational::zero()),
        Valuation::Finite(v) => Ok(prime_pow(p, -v)),
    }
}

/// Whether `q` lies in `Z_p`, i.e. `|q|_p <= 1`.
pub fn is_p_integer(q: &BigRational, p: u64) -> Result<bool> {
    Ok(match valuation(q, p)? {
        Valuation::Infinite => true,
        Valuation::Finite(v) => v >= 0,
    })
}

/// A p-adic number to finite precision: the residue class of
/// `p^v (d_0 + d_1 p + ... + d_{N-1} p^{N-1})` modulo `p^{v+N}`,
/// with `0 <= d_k < p` and `d_0 > 0` for nonzero values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PAdicApprox {
    prime: u64,
    valuation: i64,
    digits: Vec<u64>,
    precision: usize,
    is_zero: bool,
}

impl PAdicApprox {
    /// The zero value, known to the given number of digits.
    pub fn zero(p: u64, precision: usize) -> Result<Self> {
        check_prime(p)?;
        Ok(PAdicApprox {
            prime: p,
            valuation: 0,
            digits: Vec::new(),
            precision,
            is_zero: true,
        })
    }

    /// Expands a rational to `precision` base-p digits.
    ///
    /// The digit string is the residue of the unit part `a/b` modulo `p^N`,
    /// computed with a single modular inverse of the denominator. This is the
    /// constructive Bezout step collapsed into one lift: digit `d_k` of
    /// `a b^{-1} mod p^N` reproduces the step-by-step construction exactly.
    pub fn expand(q: &BigRational, p: u64, precision: usize) -> Result<Self> {
        check_prime(p)?;
        if precision == 0 {
            return Err(Error::InvalidArgument("precision must be positive".into()));
        }
        if q.is_zero() {
            return Self::zero(p, precision);
        }
        let v = int_valuation(q.numer(), p) - int_valuation(q.denom(), p);
        let unit = q * prime_pow(p, -v);
        let modulus = BigInt::from(p).pow(precision as u32);
        let b_inv = mod_inverse(&unit.denom().mod_floor(&modulus), &modulus)
            .expect("denominator of the unit part is coprime to p");
        let residue = (unit.numer().mod_floor(&modulus) * b_inv).mod_floor(&modulus);
        let digits = base_p_digits(&residue, p, precision);
        debug_assert!(digits[0] != 0, "unit part has nonzero leading digit");
        Ok(PAdicApprox {
            prime: p,
            valuation: v,
            digits,
            precision,
            is_zero: false,
        })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero
    }

    /// Meaningful only for nonzero values.
    pub fn valuation(&self) -> i64 {
        self.valuation
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    /// Number of known digits; the value is known modulo
    /// `p^{valuation + precision}`.
    pub fn precision(&self) -> usize {
        self.precision
    }

    /// `|x|_p` of the represented value: exactly `p^{-valuation}`.
    pub fn norm(&self) -> BigRational {
        if self.is_zero {
            BigRational::zero()
        } else {
            prime_pow(self.prime, -self.valuation)
        }
    }

    /// The partial sum `p^v sum d_k p^k` as an exact rational.
    pub fn value(&self) -> BigRational {
        if self.is_zero {
            return BigRational::zero();
        }
        BigRational::from_integer(self.unit_value()) * prime_pow(self.prime, self.valuation)
    }

    fn unit_value(&self) -> BigInt {
        let p = BigInt::from(self.prime);
        let mut acc = BigInt::zero();
        for &d in self.digits.iter().rev() {
            acc = acc * &p + BigInt::from(d);
        }
        acc
    }

    /// Absolute precision exponent: the value is known modulo `p^e`.
    fn abs_precision(&self) -> i64 {
        self.valuation + self.precision as i64
    }

    fn check_same_prime(&self, other: &Self) -> Result<()> {
        if self.prime != other.prime {
            return Err(Error::MismatchedPrimes(self.prime, other.prime));
        }
        Ok(())
    }

    /// Digit-carry addition. The result is known modulo the weaker of the two
    /// absolute precisions; full cancellation yields the zero value.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_prime(other)?;
        if self.is_zero {
            return Ok(other.clone());
        }
        if other.is_zero {
            return Ok(self.clone());
        }
        let base = self.valuation.min(other.valuation);
        let e = self.abs_precision().min(other.abs_precision());
        let window = (e - base) as usize;
        let modulus = BigInt::from(self.prime).pow(window as u32);
        let lift = |x: &Self| {
            (x.unit_value() * BigInt::from(x.prime).pow((x.valuation - base) as u32))
                .mod_floor(&modulus)
        };
        let sum = (lift(self) + lift(other)).mod_floor(&modulus);
        Ok(Self::from_residue(self.prime, base, sum, window))
    }

    /// Digit-carry multiplication; precision is the minimum of the operand
    /// precisions and the valuations add exactly.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_prime(other)?;
        let precision = self.precision.min(other.precision).max(1);
        if self.is_zero || other.is_zero {
            return Self::zero(self.prime, precision);
        }
        let modulus = BigInt::from(self.prime).pow(precision as u32);
        let unit = (self.unit_value() * other.unit_value()).mod_floor(&modulus);
        debug_assert!(!unit.is_zero());
        Ok(PAdicApprox {
            prime: self.prime,
            valuation: self.valuation + other.valuation,
            digits: base_p_digits(&unit, self.prime, precision),
            precision,
            is_zero: false,
        })
    }

    /// Additive inverse; same valuation and precision.
    pub fn neg(&self) -> Self {
        if self.is_zero {
            return self.clone();
        }
        let modulus = BigInt::from(self.prime).pow(self.precision as u32);
        let unit = (&modulus - self.unit_value()).mod_floor(&modulus);
        PAdicApprox {
            prime: self.prime,
            valuation: self.valuation,
            digits: base_p_digits(&unit, self.prime, self.precision),
            precision: self.precision,
            is_zero: false,
        }
    }

    fn from_residue(p: u64, base: i64, residue: BigInt, window: usize) -> Self {
        if residue.is_zero() {
            // zero to the full window: the value is 0 modulo p^{base+window}
            return PAdicApprox {
                prime: p,
                valuation: base,
                digits: Vec::new(),
                precision: window,
                is_zero: true,
            };
        }
        let shift = int_valuation(&residue, p);
        let unit = residue / BigInt::from(p).pow(shift as u32);
        let precision = window - shift as usize;
        PAdicApprox {
            prime: p,
            valuation: base + shift,
            digits: base_p_digits(&unit, p, precision),
            precision,
            is_zero: false,
        }
    }
}

fn base_p_digits(n: &BigInt, p: u64, len: usize) -> Vec<u64> {
    let p = BigInt::from(p);
    let mut digits = Vec::with_capacity(len);
    let mut m = n.clone();
    for _ in 0..len {
        let (q, r) = m.div_rem(&p);
        digits.push(r.to_u64().expect("digit fits u64"));
        m = q;
    }
    digits
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let ext = a.extended_gcd(m);
    if !ext.gcd.is_one() {
        return None;
    }
    Some(ext.x.mod_floor(m))
}
