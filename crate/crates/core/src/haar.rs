//! Haar-measure integration of radial functions on `Q_p`.
//!
//! The measure is normalized so `Z_p` has measure 1. Every integral in scope
//! decomposes over the shells `|x|_p = p^k`; closed forms are exact rationals
//! and the truncated shell sum doubles as the oracle that verifies them.

use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::rational::{check_prime, prime_pow, BigRational};
use crate::{Error, Result};

/// A function of `|x|_p` alone: an evaluation rule on shell exponents, with
/// optional support bounds outside of which it vanishes.
#[derive(Clone)]
pub struct RadialFunction {
    eval: Arc<dyn Fn(i64) -> BigRational + Send + Sync>,
    support_min: Option<i64>,
    support_max: Option<i64>,
}

impl RadialFunction {
    pub fn from_fn(f: impl Fn(i64) -> BigRational + Send + Sync + 'static) -> Self {
        RadialFunction {
            eval: Arc::new(f),
            support_min: None,
            support_max: None,
        }
    }

    pub fn with_support(
        min: Option<i64>,
        max: Option<i64>,
        f: impl Fn(i64) -> BigRational + Send + Sync + 'static,
    ) -> Self {
        RadialFunction {
            eval: Arc::new(f),
            support_min: min,
            support_max: max,
        }
    }

    /// `|x|_p^s` on all of `Q_p`.
    pub fn norm_power(p: u64, s: i64) -> Self {
        Self::from_fn(move |k| prime_pow(p, k * s))
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_fn(move |_| c.clone())
    }

    pub fn zero() -> Self {
        Self::with_support(Some(0), Some(-1), |_| BigRational::zero())
    }

    /// `a*f + b*g`, pointwise.
    pub fn linear_combination(
        a: BigRational,
        f: &RadialFunction,
        b: BigRational,
        g: &RadialFunction,
    ) -> Self {
        let (f, g) = (f.clone(), g.clone());
        let min = match (f.support_min, g.support_min) {
            (Some(x), Some(y)) => Some(x.min(y)),
            _ => None,
        };
        let max = match (f.support_max, g.support_max) {
            (Some(x), Some(y)) => Some(x.max(y)),
            _ => None,
        };
        RadialFunction {
            eval: Arc::new(move |k| &a * f.value_at(k) + &b * g.value_at(k)),
            support_min: min,
            support_max: max,
        }
    }

    /// Value on the shell `|x|_p = p^k`; zero outside the declared support.
    pub fn value_at(&self, k: i64) -> BigRational {
        if self.support_min.is_some_and(|m| k < m) || self.support_max.is_some_and(|m| k > m) {
            return BigRational::zero();
        }
        (self.eval)(k)
    }

    pub(crate) fn support_max(&self) -> Option<i64> {
        self.support_max
    }

    pub(crate) fn support_min(&self) -> Option<i64> {
        self.support_min
    }
}

impl std::fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialFunction")
            .field("support_min", &self.support_min)
            .field("support_max", &self.support_max)
            .finish_non_exhaustive()
    }
}

/// An integration domain that decomposes into shells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShellRegion {
    /// The single shell `|x|_p = p^gamma`.
    Shell(i64),
    /// The ball `p^m Z_p = { |x|_p <= p^{-m} }`, i.e. shells `k <= -m`.
    Ball(i64),
    /// `Q_p \ Z_p`, i.e. shells `k >= 1`.
    Complement,
    /// All of `Q_p`.
    All,
}

/// Haar measure of the shell `|x|_p = p^gamma`: exactly `p^gamma (1 - 1/p)`.
pub fn shell_measure(p: u64, gamma: i64) -> Result<BigRational> {
    check_prime(p)?;
    Ok(prime_pow(p, gamma) - prime_pow(p, gamma - 1))
}

/// Haar measure of the ball `p^m Z_p`: exactly `p^{-m}`.
pub fn ball_measure(p: u64, m: i64) -> Result<BigRational> {
    check_prime(p)?;
    Ok(prime_pow(p, -m))
}

/// A truncated shell sum together with its declared accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralResult {
    pub value: BigRational,
    /// Bound on the omitted tail: twice the first omitted term. Valid because
    /// every convergent shell series in scope decays by at least 1/p per
    /// shell.
    pub tail_bound: BigRational,
    /// Number of shells actually summed.
    pub shells_used: u32,
}

pub(crate) struct ShellSum {
    pub value: BigRational,
    pub tail_bound: BigRational,
    pub shells: u32,
}

const DIVERGENCE_WINDOW: u32 = 5;
const MAX_SHELLS: u32 = 200_000;

/// Sums `term(k)` for `k = start, start+step, ...` until three consecutive
/// terms fall below `tol` past the structural boundary `settle` (support
/// edges, kernel switchovers). Detects divergence when five consecutive
/// nonzero terms fail to decrease in magnitude.
pub(crate) fn shell_sum(
    start: i64,
    step: i64,
    settle: i64,
    tol: &BigRational,
    term: impl Fn(i64) -> BigRational,
) -> Result<ShellSum> {
    debug_assert!(step == 1 || step == -1);
    let mut total = BigRational::zero();
    let mut k = start;
    let mut below = 0u32;
    let mut non_decreasing = 0u32;
    let mut last_mag: Option<BigRational> = None;
    let mut shells = 0u32;
    loop {
        let t = term(k);
        let mag = t.abs();
        let settled = if step > 0 { k > settle } else { k < settle };
        if mag < *tol {
            below += 1;
            if below >= 3 && settled {
                return Ok(ShellSum {
                    value: total,
                    tail_bound: &mag + &mag,
                    shells,
                });
            }
        } else {
            below = 0;
        }
        if !mag.is_zero() {
            if let Some(prev) = &last_mag {
                if mag >= *prev {
                    non_decreasing += 1;
                    if non_decreasing >= DIVERGENCE_WINDOW {
                        return Err(Error::Divergence);
                    }
                } else {
                    non_decreasing = 0;
                }
            }
            last_mag = Some(mag);
        }
        total += t;
        shells += 1;
        if shells > MAX_SHELLS {
            return Err(Error::Divergence);
        }
        k += step;
    }
}

/// Integrates a radial function over a shell region by summing
/// `F(p^k) * shell_measure(p, k)`, truncating half-infinite tails when the
/// next term falls below `tail_tol`.
pub fn integrate_radial(
    p: u64,
    f: &RadialFunction,
    region: ShellRegion,
    tail_tol: &BigRational,
) -> Result<IntegralResult> {
    check_prime(p)?;
    if !tail_tol.is_positive() {
        return Err(Error::InvalidArgument("tail_tol must be positive".into()));
    }
    let term = |k: i64| f.value_at(k) * (prime_pow(p, k) - prime_pow(p, k - 1));
    let up_settle = |from: i64| f.support_max().unwrap_or(from).max(from) + 2;
    let down_settle = |from: i64| f.support_min().unwrap_or(from).min(from) - 2;
    match region {
        ShellRegion::Shell(gamma) => Ok(IntegralResult {
            value: term(gamma),
            tail_bound: BigRational::zero(),
            shells_used: 1,
        }),
        ShellRegion::Ball(m) => {
            let start = -m;
            let s = shell_sum(start, -1, down_settle(start), tail_tol, term)?;
            Ok(IntegralResult {
                value: s.value,
                tail_bound: s.tail_bound,
                shells_used: s.shells,
            })
        }
        ShellRegion::Complement => {
            let s = shell_sum(1, 1, up_settle(1), tail_tol, term)?;
            Ok(IntegralResult {
                value: s.value,
                tail_bound: s.tail_bound,
                shells_used: s.shells,
            })
        }
        ShellRegion::All => {
            let up = shell_sum(1, 1, up_settle(1), tail_tol, &term)?;
            let down = shell_sum(0, -1, down_settle(0), tail_tol, &term)?;
            Ok(IntegralResult {
                value: up.value + down.value,
                tail_bound: up.tail_bound + down.tail_bound,
                shells_used: up.shells + down.shells,
            })
        }
    }
}

/// `int_{Z_p} |x|_p^s dx = (p-1)/(p - p^{-s})` for `s > -1`.
pub fn moment_zp(p: u64, s: i64) -> Result<BigRational> {
    check_prime(p)?;
    if s <= -1 {
        return Err(Error::MomentDomain(s));
    }
    let p_rat = prime_pow(p, 1);
    let one = prime_pow(p, 0);
    Ok((p_rat.clone() - one) / (p_rat - prime_pow(p, -s)))
}

/// `int_{Q_p \ Z_p} |x|_p^s dx = -(p-1)/(p - p^{-s})` for `s < -1`.
pub fn moment_complement(p: u64, s: i64) -> Result<BigRational> {
    check_prime(p)?;
    if s >= -1 {
        return Err(Error::MomentDomain(s));
    }
    let p_rat = prime_pow(p, 1);
    let one = prime_pow(p, 0);
    Ok(-(p_rat.clone() - one) / (p_rat - prime_pow(p, -s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio, ten_pow_neg};

    fn tol30() -> BigRational {
        ten_pow_neg(30)
    }

    #[test]
    fn shell_measures() {
        assert_eq!(shell_measure(5, 0).unwrap(), ratio(4, 5));
        assert_eq!(shell_measure(2, -1).unwrap(), ratio(1, 4));
    }

    #[test]
    fn ball_measures() {
        assert_eq!(ball_measure(5, 0).unwrap(), int(1));
        assert_eq!(ball_measure(5, 2).unwrap(), ratio(1, 25));
        assert_eq!(ball_measure(3, -1).unwrap(), int(3));
    }

    #[test]
    fn shells_exhaust_zp() {
        // partial sums of shell measures over Z_p converge to 1; the depth-d
        // partial sum misses it by exactly p^{-(d+1)}, so go deep enough that
        // even p = 2 lands within 1e-30
        for p in [2u64, 3, 7] {
            let mut total = BigRational::zero();
            for k in 0..=120 {
                total += shell_measure(p, -k).unwrap();
                assert_eq!(int(1) - &total, prime_pow(p, -(k + 1)));
            }
            assert!((int(1) - total).abs() < tol30());
        }
    }

    #[test]
    fn scaling_covariance() {
        // d(ax) = |a|_p dx with a = p^j, stated on balls
        for p in [2u64, 5] {
            for m in -3..=3 {
                for j in -3..=3 {
                    assert_eq!(
                        ball_measure(p, m + j).unwrap(),
                        prime_pow(p, -j) * ball_measure(p, m).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn integrate_norm_square_over_zp() {
        let f = RadialFunction::norm_power(5, 2);
        let r = integrate_radial(5, &f, ShellRegion::Ball(0), &tol30()).unwrap();
        assert!((r.value - ratio(25, 31)).abs() <= r.tail_bound);
    }

    #[test]
    fn integrate_constant_over_zp() {
        for p in [2u64, 5, 101] {
            let f = RadialFunction::constant(int(1));
            let r = integrate_radial(p, &f, ShellRegion::Ball(0), &tol30()).unwrap();
            assert!((r.value - int(1)).abs() <= r.tail_bound);
        }
    }

    #[test]
    fn integrate_over_complement() {
        let f = RadialFunction::norm_power(5, -3);
        let r = integrate_radial(5, &f, ShellRegion::Complement, &tol30()).unwrap();
        assert!((r.value - ratio(1, 30)).abs() <= r.tail_bound);
    }

    #[test]
    fn single_shell_region_is_exact() {
        let f = RadialFunction::norm_power(5, 2);
        let r = integrate_radial(5, &f, ShellRegion::Shell(-1), &tol30()).unwrap();
        // p^{-2} * p^{-1}(1 - 1/p)
        assert_eq!(r.value, ratio(1, 25) * ratio(4, 25));
        assert_eq!(r.tail_bound, int(0));
    }

    #[test]
    fn moments_match_examples() {
        assert_eq!(moment_zp(5, 2).unwrap(), ratio(25, 31));
        assert_eq!(moment_zp(7, 0).unwrap(), int(1));
        assert_eq!(moment_zp(2, 1).unwrap(), ratio(2, 3));
        assert_eq!(moment_zp(5, -1), Err(Error::MomentDomain(-1)));
        assert_eq!(moment_complement(5, -3).unwrap(), ratio(1, 30));
        assert_eq!(moment_complement(2, -2).unwrap(), ratio(1, 2));
        assert_eq!(moment_complement(3, -1), Err(Error::MomentDomain(-1)));
    }

    #[test]
    fn moments_agree_with_shell_sums() {
        for p in [2u64, 5] {
            for s in 0..=6 {
                let f = RadialFunction::norm_power(p, s);
                let r = integrate_radial(p, &f, ShellRegion::Ball(0), &tol30()).unwrap();
                assert!((r.value - moment_zp(p, s).unwrap()).abs() <= r.tail_bound);
            }
            for s in -8..=-2 {
                let f = RadialFunction::norm_power(p, s);
                let r = integrate_radial(p, &f, ShellRegion::Complement, &tol30()).unwrap();
                assert!((r.value - moment_complement(p, s).unwrap()).abs() <= r.tail_bound);
            }
        }
    }

    #[test]
    fn divergence_detected() {
        // |x|^{-1} over Z_p gives constant shell terms
        let f = RadialFunction::norm_power(5, -1);
        assert_eq!(
            integrate_radial(5, &f, ShellRegion::Ball(0), &tol30()),
            Err(Error::Divergence)
        );
        // |x|^2 over the complement grows
        let g = RadialFunction::norm_power(5, 2);
        assert_eq!(
            integrate_radial(5, &g, ShellRegion::Complement, &tol30()),
            Err(Error::Divergence)
        );
    }

    #[test]
    fn zero_function_integrates_to_zero() {
        let z = RadialFunction::zero();
        let r = integrate_radial(7, &z, ShellRegion::All, &tol30()).unwrap();
        assert_eq!(r.value, int(0));
    }

    #[test]
    fn rejects_bad_arguments() {
        let f = RadialFunction::constant(int(1));
        assert_eq!(
            integrate_radial(4, &f, ShellRegion::Ball(0), &tol30()),
            Err(Error::NotPrime(4))
        );
        assert!(integrate_radial(5, &f, ShellRegion::Ball(0), &int(0)).is_err());
    }
}
