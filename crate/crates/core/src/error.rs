use num_rational::BigRational;
use thiserror::Error;

/// Errors shared by all modules.
///
/// The CLI maps these onto exit codes: domain and resonance failures exit
/// with 2, divergence with 3, bracket failures with 4.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("operands use different primes: {0} and {1}")]
    MismatchedPrimes(u64, u64),

    #[error("gamma_p(0) is undefined")]
    GammaUndefined,

    #[error("resonant index: gamma_p(1) = 0 in a denominator at n = {0}")]
    Resonance(i64),

    #[error("degenerate index n = {0}: a closed-form denominator p - p^k vanishes")]
    DegenerateIndex(i64),

    #[error("moment exponent s = {0} lies outside the convergence domain")]
    MomentDomain(i64),

    #[error("shell series does not decay; integral diverges")]
    Divergence,

    #[error("zero denominator met a nonzero coefficient at index {0}")]
    ZeroDenominator(i64),

    #[error("coupling B must be nonzero")]
    ZeroCoupling,

    #[error("asymptotic eigenvalue is only known for B = 1 and B = -1")]
    UnsupportedCoupling,

    #[error("no sign change on bracket: G(lo) = {g_lo}, G(hi) = {g_hi}")]
    BracketFailure { g_lo: BigRational, g_hi: BigRational },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
