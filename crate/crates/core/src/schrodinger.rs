//! Eigenvalue solver for `D^2 psi + B |x|_p^2 psi = E psi`.
//!
//! The ansatz is a power series in `|x|_p` on `Z_p` glued to a power series
//! in `|x|_p^{-1}` outside. Matching coefficients shellwise gives two
//! three-term recurrences (inside `c`, outside `k`), two leftover constraint
//! equations, and a 2x2 determinant condition `A*D = F*C` whose root in `E`
//! is the eigenvalue. Everything is exact rational arithmetic; the root is
//! isolated by sign scanning and bisection.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::rational::{check_prime, prime_pow, BigRational};
use crate::vladimirov::gamma_p;
use crate::{Error, Result};

fn rat_u64(n: u64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn rat_i64(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Model parameters for one eigenvalue problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub prime: u64,
    /// Potential coupling `B`; must be nonzero (the outside recurrence
    /// divides by it).
    pub coupling: BigRational,
    /// Eigenvalue candidate `E`.
    pub energy: BigRational,
    /// Series truncation: the table carries `c_0..c_{2N}` and `k_1..k_{2N+5}`.
    pub truncation: usize,
}

impl ModelParams {
    pub fn new(
        prime: u64,
        coupling: BigRational,
        energy: BigRational,
        truncation: usize,
    ) -> Result<Self> {
        check_prime(prime)?;
        if coupling.is_zero() {
            return Err(Error::ZeroCoupling);
        }
        if truncation < 3 {
            return Err(Error::InvalidArgument(
                "truncation must be at least 3".into(),
            ));
        }
        Ok(ModelParams {
            prime,
            coupling,
            energy,
            truncation,
        })
    }

    pub fn with_energy(&self, energy: BigRational) -> Self {
        ModelParams {
            energy,
            ..self.clone()
        }
    }
}

/// Precomputed E-independent data for one `(p, N)`: Gamma-function ratios of
/// the recurrences and the reciprocal denominators of the four constraint
/// sums. Root isolation evaluates the determinant many times, so these are
/// built once.
struct Workspace {
    prime: u64,
    truncation: usize,
    /// `[j] = Gamma_p(2j+3)/Gamma_p(2j+5)` for the inside recurrence.
    ratio_in: Vec<BigRational>,
    /// `[j] = Gamma_p(-2j)/Gamma_p(-2j-2)` for the outside recurrence
    /// (index 0 unused).
    ratio_out: Vec<BigRational>,
    /// `[j] = 1/(p - p^{-2j})`.
    a_den: Vec<BigRational>,
    /// `[j] = 1/(p - p^{3-2j})`; `None` at `j = 1` where the denominator
    /// vanishes (the structurally-zero `tau_2` term short-circuits there).
    c_den: Vec<Option<BigRational>>,
    /// `[j] = 1/(p - p^{2j+1})` for `j >= 2`.
    f_den: Vec<BigRational>,
    /// `[j] = 1/(p - p^{2j+4})` for `j >= 2`.
    d_den: Vec<BigRational>,
    /// `Gamma_p(-2)/(p - 1)`.
    gamma_term: BigRational,
    /// Geometric tail factor `1/(p^2 - 1)`.
    tail_factor: BigRational,
    /// Integer tables for the gcd-free sign evaluation of the determinant.
    sign_tables: SignTables,
}

/// Root isolation needs only the sign of `G(E)`, thousands of times. Exact
/// rational arithmetic reduces by gcd after every operation, which dominates
/// the cost at large truncations, so the sign path clears all denominators
/// analytically and works in plain integers: the recurrences become integer
/// sequences `t_j = tau_j * P_j`, `s_j' = s_j * Q_j` with
///
/// ```text
/// P_0 = P_1 = 1,        P_{j+1} = P_j * v * beta_d * d_{j-1}
/// Q_0 = Q_1 = Q_2 = 1,  Q_{j+1} = Q_j * v * beta_n * e_{j-1}
/// ```
///
/// for `E = u/v`, `B = beta_n/beta_d` and reduced Gamma ratios `n_j/d_j`,
/// `m_j/e_j`. The constraint sums are assembled over the common denominators
/// with precomputed cofactor products, and the determinant sign is read off
/// one signed integer. The rational path remains the reference; the two are
/// checked against each other exactly in the tests.
struct SignTables {
    /// Reduced inside Gamma ratios `n_j/d_j`.
    in_num: Vec<BigInt>,
    in_den: Vec<BigInt>,
    /// Reduced outside Gamma ratios `m_j/e_j` (index 0 unused).
    out_num: Vec<BigInt>,
    out_den: Vec<BigInt>,
    /// Per-term numerators times cofactors: entry `j` is
    /// `numer(kappa_j) * prod_{i != j} denom(kappa_i)`.
    a_num: Vec<BigInt>,
    c_num: Vec<BigInt>,
    f_num: Vec<BigInt>,
    d_num: Vec<BigInt>,
    /// Full denominator products per sum.
    k_a: BigInt,
    k_c: BigInt,
    k_f: BigInt,
    k_d: BigInt,
    /// `Gamma_p(-2)/(p-1)` as a reduced integer pair.
    gamma_num: BigInt,
    gamma_den: BigInt,
}

fn cofactor_products(dens: &[BigInt]) -> (Vec<BigInt>, BigInt) {
    let n = dens.len();
    let mut prefix = vec![BigInt::one(); n + 1];
    for i in 0..n {
        prefix[i + 1] = &prefix[i] * &dens[i];
    }
    let mut suffix = vec![BigInt::one(); n + 1];
    for i in (0..n).rev() {
        suffix[i] = &suffix[i + 1] * &dens[i];
    }
    let total = prefix[n].clone();
    let cof = (0..n).map(|i| &prefix[i] * &suffix[i + 1]).collect();
    (cof, total)
}

impl SignTables {
    fn build(
        ratio_in: &[BigRational],
        ratio_out: &[BigRational],
        a_den: &[BigRational],
        c_den: &[Option<BigRational>],
        f_den: &[BigRational],
        d_den: &[BigRational],
        gamma_term: &BigRational,
    ) -> Self {
        let split = |q: &BigRational| (q.numer().clone(), q.denom().clone());
        let (in_num, in_den) = ratio_in.iter().map(split).unzip();
        let (out_num, out_den) = ratio_out.iter().map(split).unzip();
        // kappa numerator/denominator lists; inactive slots contribute a zero
        // numerator and a neutral denominator
        let fraction_lists = |kappas: &[Option<BigRational>]| -> (Vec<BigInt>, Vec<BigInt>) {
            kappas
                .iter()
                .map(|k| match k {
                    Some(q) => (q.numer().clone(), q.denom().clone()),
                    None => (BigInt::zero(), BigInt::one()),
                })
                .unzip()
        };
        let scale = |nums: &[BigInt], dens: &[BigInt]| -> (Vec<BigInt>, BigInt) {
            let (cof, total) = cofactor_products(dens);
            let scaled = nums
                .iter()
                .zip(&cof)
                .map(|(n, c)| n * c)
                .collect::<Vec<_>>();
            (scaled, total)
        };
        let some = |v: &[BigRational]| v.iter().cloned().map(Some).collect::<Vec<_>>();
        let (nums, dens) = fraction_lists(&some(a_den));
        let (a_num, k_a) = scale(&nums, &dens);
        let (nums, dens) = fraction_lists(c_den);
        let (c_num, k_c) = scale(&nums, &dens);
        // f_den/d_den carry zero dummies at indices 0 and 1
        let as_active = |v: &[BigRational]| {
            v.iter()
                .map(|q| if q.is_zero() { None } else { Some(q.clone()) })
                .collect::<Vec<_>>()
        };
        let (nums, dens) = fraction_lists(&as_active(f_den));
        let (f_num, k_f) = scale(&nums, &dens);
        let (nums, dens) = fraction_lists(&as_active(d_den));
        let (d_num, k_d) = scale(&nums, &dens);
        SignTables {
            in_num,
            in_den,
            out_num,
            out_den,
            a_num,
            c_num,
            f_num,
            d_num,
            k_a,
            k_c,
            k_f,
            k_d,
            gamma_num: gamma_term.numer().clone(),
            gamma_den: gamma_term.denom().clone(),
        }
    }
}

impl Workspace {
    fn new(p: u64, truncation: usize) -> Result<Self> {
        check_prime(p)?;
        let n = truncation;
        let mut ratio_in = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let j = j as i64;
            ratio_in.push(gamma_p(p, 2 * j + 3)? / gamma_p(p, 2 * j + 5)?);
        }
        let mut ratio_out = vec![BigRational::zero()];
        for j in 1..=n {
            let j = j as i64;
            ratio_out.push(gamma_p(p, -2 * j)? / gamma_p(p, -2 * j - 2)?);
        }
        let p_rat = rat_u64(p);
        let mut a_den = Vec::with_capacity(n + 1);
        let mut c_den = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let j = j as i64;
            a_den.push((&p_rat - prime_pow(p, -2 * j)).recip());
            c_den.push(if j == 1 {
                None
            } else {
                Some((&p_rat - prime_pow(p, 3 - 2 * j)).recip())
            });
        }
        let mut f_den = vec![BigRational::zero(); 2];
        let mut d_den = vec![BigRational::zero(); 2];
        for j in 2..=n + 2 {
            let j = j as i64;
            f_den.push((&p_rat - prime_pow(p, 2 * j + 1)).recip());
            d_den.push((&p_rat - prime_pow(p, 2 * j + 4)).recip());
        }
        let gamma_term = gamma_p(p, -2)? / (&p_rat - prime_pow(p, 0));
        let tail_factor = (prime_pow(p, 2) - prime_pow(p, 0)).recip();
        let sign_tables = SignTables::build(
            &ratio_in, &ratio_out, &a_den, &c_den, &f_den, &d_den, &gamma_term,
        );
        Ok(Workspace {
            prime: p,
            truncation,
            ratio_in,
            ratio_out,
            a_den,
            c_den,
            f_den,
            d_den,
            gamma_term,
            tail_factor,
            sign_tables,
        })
    }

    /// The determinant as one unreduced integer fraction `(num, den)`,
    /// evaluated without any gcd reduction. Exactly equal in value to
    /// `determinant`; used for sign tests during root isolation.
    fn determinant_fraction(
        &self,
        coupling: &BigRational,
        energy: &BigRational,
    ) -> (BigInt, BigInt) {
        let st = &self.sign_tables;
        let n = self.truncation;
        let u = energy.numer();
        let v = energy.denom();
        let bn = coupling.numer();
        let bd = coupling.denom();

        // inside: integer sequence t_j = tau_j * P_j with the scaling ratios
        // r_j = P_{j+1}/P_j
        let mut r = Vec::with_capacity(n.max(1));
        r.push(BigInt::one());
        for k in 1..n {
            r.push(v * bd * &st.in_den[k - 1]);
        }
        let mut t = Vec::with_capacity(n + 1);
        t.push(BigInt::one());
        t.push(BigInt::zero());
        for j in 0..n.saturating_sub(1) {
            let next = &st.in_num[j] * (bd * u * &t[j + 1] - bn * v * &r[j] * &t[j]);
            t.push(next);
        }
        t.truncate(n + 1);
        // suffix products rp_j = P_N / P_j
        let mut rp = vec![BigInt::one(); n + 1];
        for j in (0..n).rev() {
            rp[j] = &rp[j + 1] * &r[j];
        }

        // outside: s'_j = s_j * Q_j with q_j = Q_{j+1}/Q_j
        let m_cap = n + 2;
        let mut q = Vec::with_capacity(m_cap);
        q.push(BigInt::one());
        q.push(BigInt::one());
        for k in 2..=m_cap - 1 {
            q.push(v * bn * &st.out_den[k - 1]);
        }
        let mut s = vec![BigInt::zero(), BigInt::zero(), BigInt::one()];
        for j in 1..=n {
            let next = bd * (u * &st.out_den[j] * &s[j + 1] - v * &q[j] * &st.out_num[j] * &s[j]);
            s.push(next);
        }
        let mut rq = vec![BigInt::one(); m_cap + 1];
        for j in (0..m_cap).rev() {
            rq[j] = &rq[j + 1] * &q[j];
        }

        let mut sum_a = BigInt::zero();
        let mut sum_c = BigInt::zero();
        for j in 0..=n {
            if t[j].is_zero() {
                continue;
            }
            let tj = &t[j] * &rp[j];
            sum_a += &tj * &st.a_num[j];
            sum_c += &tj * &st.c_num[j];
        }
        let p_n = &rp[0];
        let a_num = sum_a;
        let a_den = p_n * &st.k_a;
        let c_scale = p_n * &st.k_c;
        let c_num = sum_c * v * &st.gamma_den - u * &st.gamma_num * &c_scale;
        let c_den = c_scale * v * &st.gamma_den;

        let mut sum_d = BigInt::zero();
        let mut sum_f = BigInt::zero();
        for (j, sj) in s.iter().enumerate().skip(2) {
            if sj.is_zero() {
                continue;
            }
            let sq = sj * &rq[j];
            sum_d += &sq * &st.d_num[j];
            sum_f += &sq * &st.f_num[j];
        }
        let q_m = &rq[0];
        let d_num = sum_d;
        let d_den = q_m * &st.k_d;
        let f_scale = q_m * &st.k_f;
        let f_num = sum_f * bd * &st.gamma_den - bn * &st.gamma_num * &f_scale;
        let f_den = f_scale * bd * &st.gamma_den;

        let g_num = &a_num * &d_num * &c_den * &f_den - &f_num * &c_num * &a_den * &d_den;
        let g_den = a_den * d_den * c_den * f_den;
        (g_num, g_den)
    }

    /// Sign of the determinant at `energy`: -1, 0, or +1.
    fn determinant_sign(&self, coupling: &BigRational, energy: &BigRational) -> i8 {
        let (num, den) = self.determinant_fraction(coupling, energy);
        let sig = |x: &BigInt| -> i8 {
            match x.sign() {
                num_bigint::Sign::Minus => -1,
                num_bigint::Sign::NoSign => 0,
                num_bigint::Sign::Plus => 1,
            }
        };
        sig(&num) * sig(&den)
    }

    /// `tau[j] = tau_{2j}` for `j = 0..=N`: normalized inside coefficients
    /// with seeds `tau_0 = 1`, `tau_2 = 0`.
    fn tau(&self, coupling: &BigRational, energy: &BigRational) -> Vec<BigRational> {
        let n = self.truncation;
        let mut tau = Vec::with_capacity(n + 1);
        tau.push(prime_pow(self.prime, 0));
        tau.push(BigRational::zero());
        for j in 0..n.saturating_sub(1) {
            let next = (energy * &tau[j + 1] - coupling * &tau[j]) * &self.ratio_in[j];
            tau.push(next);
        }
        tau.truncate(n + 1);
        tau
    }

    /// `s[j] = s_{2j+1}` for `j = 0..=N+2`: normalized outside coefficients
    /// with seeds `s_1 = s_3 = 0`, `s_5 = 1`.
    fn s(&self, coupling: &BigRational, energy: &BigRational) -> Vec<BigRational> {
        let n = self.truncation;
        let mut s = Vec::with_capacity(n + 3);
        s.push(BigRational::zero());
        s.push(BigRational::zero());
        s.push(prime_pow(self.prime, 0));
        for j in 1..=n {
            let next = (energy * &s[j + 1] - &s[j] * &self.ratio_out[j]) / coupling;
            s.push(next);
        }
        s
    }

    fn sums(&self, coupling: &BigRational, energy: &BigRational) -> Result<ConstraintValues> {
        let tau = self.tau(coupling, energy);
        let s = self.s(coupling, energy);
        let mut a = BigRational::zero();
        let mut c = BigRational::zero();
        let mut last = BigRational::zero();
        for (j, t) in tau.iter().enumerate() {
            if t.is_zero() {
                continue;
            }
            let term = t * &self.a_den[j];
            last = term.abs();
            a += term;
            match &self.c_den[j] {
                Some(den) => c += t * den,
                None => return Err(Error::ZeroDenominator(2 * j as i64)),
            }
        }
        let mut tail = &last * &self.tail_factor;
        c -= energy * &self.gamma_term;
        let mut d = BigRational::zero();
        let mut f = BigRational::zero();
        for (j, sj) in s.iter().enumerate().skip(2) {
            if sj.is_zero() {
                continue;
            }
            f += sj * &self.f_den[j];
            let term = sj * &self.d_den[j];
            last = term.abs();
            d += term;
        }
        f -= coupling * &self.gamma_term;
        tail = tail.max(&last * &self.tail_factor);
        Ok(ConstraintValues {
            a,
            c,
            d,
            f,
            truncation: self.truncation,
            tail,
        })
    }

    fn determinant(&self, coupling: &BigRational, energy: &BigRational) -> Result<BigRational> {
        let v = self.sums(coupling, energy)?;
        Ok(&v.a * &v.d - &v.f * &v.c)
    }
}

/// The coefficient sequences of one ansatz instance: raw `c_n`, `k_n` and the
/// normalized `tau`, `s` with `c_{2n} = c_0 tau_{2n}`, `k_{2n+1} = k_5 s_{2n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    /// `c[n] = c_n` for `n = 0..=2N`; odd entries are zero.
    pub c: Vec<BigRational>,
    /// `k[n] = k_n` for `n = 0..=2N+5`; even entries are zero (`k[0]` unused).
    pub k: Vec<BigRational>,
    /// `tau[j] = tau_{2j}` for `j = 0..=N`.
    pub tau: Vec<BigRational>,
    /// `s[j] = s_{2j+1}` for `j = 0..=N+2`.
    pub s: Vec<BigRational>,
}

impl CoefficientTable {
    /// Builds the table at the params' energy with the given seeds.
    pub fn build(params: &ModelParams, c0: &BigRational, k5: &BigRational) -> Result<Self> {
        let ws = Workspace::new(params.prime, params.truncation)?;
        Ok(Self::build_in(&ws, params, c0, k5))
    }

    fn build_in(
        ws: &Workspace,
        params: &ModelParams,
        c0: &BigRational,
        k5: &BigRational,
    ) -> Self {
        let tau = ws.tau(&params.coupling, &params.energy);
        let s = ws.s(&params.coupling, &params.energy);
        let mut c = vec![BigRational::zero(); 2 * params.truncation + 1];
        for (j, t) in tau.iter().enumerate() {
            c[2 * j] = c0 * t;
        }
        let mut k = vec![BigRational::zero(); 2 * params.truncation + 6];
        for (j, sj) in s.iter().enumerate() {
            k[2 * j + 1] = k5 * sj;
        }
        CoefficientTable { c, k, tau, s }
    }

    /// Every coefficient multiplied by `scale`; the normalized sequences are
    /// scale-invariant and unchanged.
    pub fn scaled(&self, scale: &BigRational) -> Self {
        CoefficientTable {
            c: self.c.iter().map(|x| x * scale).collect(),
            k: self.k.iter().map(|x| x * scale).collect(),
            tau: self.tau.clone(),
            s: self.s.clone(),
        }
    }
}

/// Inside coefficients `c_0..c_{2N}` from the forward recurrence
/// `c_{2n+4} = (E c_{2n+2} - B c_{2n}) Gamma_p(2n+3)/Gamma_p(2n+5)`
/// with seeds `c_0`, `c_2 = 0`; odd entries vanish.
pub fn coeffs_inside(params: &ModelParams, c0: &BigRational) -> Result<Vec<BigRational>> {
    let table = CoefficientTable::build(params, c0, &BigRational::zero())?;
    Ok(table.c)
}

/// Outside coefficients `k_0..k_{2N+5}` from
/// `k_{2n+5} = (E k_{2n+3} - k_{2n+1} Gamma_p(-2n)/Gamma_p(-2n-2)) / B`
/// with seeds `k_1 = k_3 = 0`, `k_5`; even entries vanish.
pub fn coeffs_outside(params: &ModelParams, k5: &BigRational) -> Result<Vec<BigRational>> {
    let table = CoefficientTable::build(params, &BigRational::zero(), k5)?;
    Ok(table.k)
}

/// The four constraint series evaluated at the params' energy:
///
/// ```text
/// A = sum tau_{2n}/(p - p^{-2n})
/// C = sum tau_{2n}/(p - p^{-2n+3}) - E Gamma_p(-2)/(p-1)
/// F = sum s_{2n+1}/(p - p^{2n+1}) - B Gamma_p(-2)/(p-1)
/// D = sum s_{2n+1}/(p - p^{2n+4})
/// ```
///
/// Terms with an exactly-zero coefficient are skipped before their
/// denominator is formed; a nonzero coefficient meeting a vanishing
/// denominator is a structural error.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintValues {
    pub a: BigRational,
    pub c: BigRational,
    pub d: BigRational,
    pub f: BigRational,
    pub truncation: usize,
    /// Geometric tail estimate: last included term times `1/(p^2 - 1)`.
    pub tail: BigRational,
}

pub fn constraint_values(params: &ModelParams) -> Result<ConstraintValues> {
    let ws = Workspace::new(params.prime, params.truncation)?;
    ws.sums(&params.coupling, &params.energy)
}

/// `G(E) = A*D - F*C`; the eigenvalue is its root.
pub fn determinant(params: &ModelParams) -> Result<BigRational> {
    let ws = Workspace::new(params.prime, params.truncation)?;
    ws.determinant(&params.coupling, &params.energy)
}

/// Residuals of the two raw coefficient-matching equations (the `|x|^0` and
/// `|x|^{-3}` shells), computed straight from the `c`, `k` lists. This is the
/// ground-truth path; `constraint_values` is the compressed form, and the two
/// are cross-checked in the tests.
pub fn raw_constraint_residuals(
    params: &ModelParams,
    table: &CoefficientTable,
) -> Result<(BigRational, BigRational)> {
    let p = params.prime;
    let p_rat = rat_u64(p);
    let ig = gamma_p(p, -2)?.recip();
    let p_minus_one = &p_rat - prime_pow(p, 0);
    let mut lhs0 = BigRational::zero();
    let mut lhs3 = BigRational::zero();
    for (n, cn) in table.c.iter().enumerate() {
        if cn.is_zero() {
            continue;
        }
        let n = n as i64;
        let den0 = &p_rat - prime_pow(p, 3 - n);
        if den0.is_zero() {
            return Err(Error::ZeroDenominator(n));
        }
        lhs0 += cn * &ig * &p_minus_one / den0;
        lhs3 += cn * &ig * &p_minus_one / (&p_rat - prime_pow(p, -n));
    }
    for (m, km) in table.k.iter().enumerate() {
        if km.is_zero() {
            continue;
        }
        let m = m as i64;
        lhs0 -= km * &ig * &p_minus_one / (&p_rat - prime_pow(p, m + 3));
        let den3 = &p_rat - prime_pow(p, m);
        if den3.is_zero() {
            return Err(Error::ZeroDenominator(m));
        }
        lhs3 -= km * &ig * &p_minus_one / den3;
    }
    let r0 = lhs0 - &params.energy * &table.c[0];
    let r3 = lhs3 + &params.coupling * &table.k[5];
    Ok((r0, r3))
}

/// Closed-form asymptotic eigenvalue in the large-p limit:
/// `2 - 2/p` for `B = 1` and `-2/(3p^2) + 7/(3p^3)` for `B = -1`.
pub fn asymptotic_e(p: u64, coupling: &BigRational) -> Result<BigRational> {
    check_prime(p)?;
    let one = prime_pow(p, 0);
    if *coupling == one {
        Ok(rat_i64(2) - rat_i64(2) * prime_pow(p, -1))
    } else if *coupling == -one {
        Ok(rat(-2, 3) * prime_pow(p, -2) + rat(7, 3) * prime_pow(p, -3))
    } else {
        Err(Error::UnsupportedCoupling)
    }
}

/// Default root-isolation bracket: centered on the asymptotic prediction
/// with half-width `max(1/p, 10 |asymptotic|)`.
pub fn default_bracket(p: u64, coupling: &BigRational) -> Result<(BigRational, BigRational)> {
    let asym = asymptotic_e(p, coupling)?;
    let half = prime_pow(p, -1).max(rat_i64(10) * asym.abs());
    Ok((&asym - &half, asym + half))
}

/// A solved eigenvalue with its bisection bracket and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub energy: BigRational,
    /// Final bisection bracket; `G` changes sign across it.
    pub bracket: (BigRational, BigRational),
    /// `G(energy)` at the reported truncation.
    pub determinant_residual: BigRational,
    pub truncation: usize,
    /// Asymptotic prediction, when `B` is 1 or -1.
    pub asymptotic: Option<BigRational>,
    /// `|energy - asymptotic|`.
    pub comparison: Option<BigRational>,
    /// Other determinant roots found in the bracket, nearest-first excluded.
    pub other_roots: Vec<BigRational>,
}

const SCAN_CELLS: u32 = 64;
const SCAN_TRUNCATION: usize = 24;

/// Isolates eigenvalues as sign changes of `G(E) = A*D - F*C` on the bracket
/// and bisects each to width `tol`, exactly. Reports the root nearest the
/// asymptotic prediction; any additional sign changes are listed in
/// `other_roots`.
///
/// The initial scan runs at a reduced truncation for speed; every candidate
/// cell is re-verified and bisected at the full truncation.
pub fn solve_e(
    p: u64,
    coupling: &BigRational,
    bracket: (BigRational, BigRational),
    tol: &BigRational,
    truncation: usize,
) -> Result<EigenResult> {
    check_prime(p)?;
    if coupling.is_zero() {
        return Err(Error::ZeroCoupling);
    }
    if !tol.is_positive() {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    let (lo, hi) = bracket;
    let ws = Workspace::new(p, truncation)?;
    if lo >= hi {
        let g = ws.determinant(coupling, &lo)?;
        return Err(Error::BracketFailure {
            g_lo: g.clone(),
            g_hi: g,
        });
    }
    let scan_ws = if truncation > SCAN_TRUNCATION {
        Some(Workspace::new(p, SCAN_TRUNCATION)?)
    } else {
        None
    };
    let cells = scan_sign_changes(scan_ws.as_ref().unwrap_or(&ws), coupling, &lo, &hi);
    let mut verified = Vec::new();
    for (a, b) in &cells {
        let ga = ws.determinant_sign(coupling, a);
        let gb = ws.determinant_sign(coupling, b);
        if ga == 0 || gb == 0 || ga != gb {
            verified.push((a.clone(), b.clone(), ga, gb));
        }
    }
    if verified.is_empty() {
        // the reduced-truncation scan may have missed or misplaced a root
        for (a, b) in scan_sign_changes(&ws, coupling, &lo, &hi) {
            let ga = ws.determinant_sign(coupling, &a);
            let gb = ws.determinant_sign(coupling, &b);
            if ga == 0 || gb == 0 || ga != gb {
                verified.push((a, b, ga, gb));
            }
        }
    }
    if verified.is_empty() {
        return Err(Error::BracketFailure {
            g_lo: ws.determinant(coupling, &lo)?,
            g_hi: ws.determinant(coupling, &hi)?,
        });
    }
    let asym = asymptotic_e(p, coupling).ok();
    let mut roots = Vec::new();
    for (a, b, ga, gb) in verified {
        roots.push(bisect(&ws, coupling, a, b, ga, gb, tol));
    }
    let nearest = match &asym {
        Some(target) => roots
            .iter()
            .enumerate()
            .min_by_key(|(_, r)| (&r.0 - target).abs())
            .map(|(i, _)| i)
            .unwrap_or(0),
        None => 0,
    };
    let (energy, cell_lo, cell_hi) = roots.swap_remove(nearest);
    let residual = ws.determinant(coupling, &energy)?;
    Ok(EigenResult {
        comparison: asym.as_ref().map(|a| (&energy - a).abs()),
        asymptotic: asym,
        bracket: (cell_lo, cell_hi),
        determinant_residual: residual,
        truncation,
        other_roots: roots.into_iter().map(|(r, _, _)| r).collect(),
        energy,
    })
}

fn scan_sign_changes(
    ws: &Workspace,
    coupling: &BigRational,
    lo: &BigRational,
    hi: &BigRational,
) -> Vec<(BigRational, BigRational)> {
    let width = hi - lo;
    let mut prev_x = lo.clone();
    let mut prev_g = ws.determinant_sign(coupling, lo);
    let mut cells = Vec::new();
    for i in 1..=SCAN_CELLS {
        let x = if i == SCAN_CELLS {
            hi.clone()
        } else {
            lo + &width * rat(i as i64, SCAN_CELLS as i64)
        };
        let g = ws.determinant_sign(coupling, &x);
        if prev_g == 0 || g == 0 || prev_g != g {
            cells.push((prev_x.clone(), x.clone()));
        }
        prev_x = x;
        prev_g = g;
    }
    cells
}

type Root = (BigRational, BigRational, BigRational);

fn bisect(
    ws: &Workspace,
    coupling: &BigRational,
    mut lo: BigRational,
    mut hi: BigRational,
    g_lo: i8,
    g_hi: i8,
    tol: &BigRational,
) -> Root {
    if g_lo == 0 {
        return (lo.clone(), lo.clone(), hi);
    }
    if g_hi == 0 {
        return (hi.clone(), lo, hi);
    }
    let half = rat(1, 2);
    while (&hi - &lo) > *tol {
        let mid = (&lo + &hi) * &half;
        let g = ws.determinant_sign(coupling, &mid);
        if g == 0 {
            return (mid.clone(), mid.clone(), mid);
        }
        if g == g_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    ((&lo + &hi) * half, lo, hi)
}

/// Leading-order predictions for the normalized coefficient sequences in the
/// large-p limit, at fixed `B` and solved `E`:
/// `tau_{4n}`, `tau_{4n+2}`, `s_{4n+1}`, `s_{4n+3}`. For `B = 1` the signs
/// alternate with `n`; for `B = -1` they are all positive.
#[derive(Debug, Clone, PartialEq)]
pub struct TauSPrediction {
    pub tau_4n: BigRational,
    pub tau_4n_plus_2: BigRational,
    pub s_4n_plus_1: BigRational,
    pub s_4n_plus_3: BigRational,
}

pub fn tau_s_asymptotics(
    p: u64,
    coupling: &BigRational,
    energy: &BigRational,
    n: u32,
) -> Result<TauSPrediction> {
    check_prime(p)?;
    if n < 1 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let one = prime_pow(p, 0);
    let sign = if *coupling == one {
        if n % 2 == 0 {
            rat_i64(1)
        } else {
            rat_i64(-1)
        }
    } else if *coupling == -one {
        rat_i64(1)
    } else {
        return Err(Error::UnsupportedCoupling);
    };
    let n_i = n as i64;
    let n_rat = rat_i64(n_i);
    Ok(TauSPrediction {
        tau_4n: &sign * prime_pow(p, -2 * n_i),
        tau_4n_plus_2: &sign * &n_rat * energy * prime_pow(p, -2 * n_i - 2),
        s_4n_plus_1: -&sign * prime_pow(p, 2 * n_i - 2),
        s_4n_plus_3: -&sign * n_rat * energy * prime_pow(p, 2 * n_i - 2),
    })
}

/// A truncated series value with a geometric tail estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesValue {
    pub value: BigRational,
    pub tail_estimate: BigRational,
}

/// Evaluates the ansatz at the shell `|x|_p = p^t`: the `c`-series for
/// `t <= 0`, the `k`-series for `t >= 1`. Term growth over five consecutive
/// nonzero terms is reported as divergence.
pub fn evaluate_psi(
    params: &ModelParams,
    table: &CoefficientTable,
    t: i64,
) -> Result<SeriesValue> {
    let p = params.prime;
    let mut value = BigRational::zero();
    let mut last = BigRational::zero();
    let mut growth = 0u32;
    let mut add_term = |term: BigRational| -> Result<()> {
        let mag = term.abs();
        if !mag.is_zero() {
            if !last.is_zero() && mag >= last {
                growth += 1;
                if growth >= 5 {
                    return Err(Error::Divergence);
                }
            } else {
                growth = 0;
            }
            last = mag;
        }
        value += term;
        Ok(())
    };
    if t <= 0 {
        for (n, cn) in table.c.iter().enumerate() {
            if cn.is_zero() {
                continue;
            }
            add_term(cn * prime_pow(p, t * n as i64))?;
        }
    } else {
        for (m, km) in table.k.iter().enumerate() {
            if km.is_zero() {
                continue;
            }
            add_term(km * prime_pow(p, -t * m as i64))?;
        }
    }
    let tail_factor = (prime_pow(p, 2) - prime_pow(p, 0)).recip();
    Ok(SeriesValue {
        value,
        tail_estimate: last * tail_factor,
    })
}

/// `|D^2 psi + B |x|^2 psi - E psi|` at the shell `|x|_p = p^t`, by exact
/// partial sums of the termwise closed forms of `D^2 f_n` and `D^2 g_{-n}`.
/// Zero coefficients are skipped before any denominator or Gamma ratio is
/// formed.
pub fn residual(params: &ModelParams, table: &CoefficientTable, t: i64) -> Result<BigRational> {
    let p = params.prime;
    let p_rat = rat_u64(p);
    let ig = gamma_p(p, -2)?.recip();
    let p_minus_one = &p_rat - prime_pow(p, 0);
    let psi = series_at(table, p, t);
    let mut d2 = BigRational::zero();
    if t <= 0 {
        for (n, cn) in table.c.iter().enumerate() {
            if cn.is_zero() {
                continue;
            }
            let n = n as i64;
            // monomial part Gamma_p(n+1)/Gamma_p(n-1) |x|^{n-2}
            if n == 2 {
                return Err(Error::Resonance(2));
            }
            let mono = if n == 0 {
                BigRational::zero()
            } else {
                gamma_p(p, n + 1)? * gamma_p(p, 2 - n)?
            };
            if !mono.is_zero() {
                d2 += cn * mono * prime_pow(p, t * (n - 2));
            }
            let den = &p_rat - prime_pow(p, 3 - n);
            if den.is_zero() {
                return Err(Error::ZeroDenominator(n));
            }
            d2 += cn * &ig * &p_minus_one / den;
        }
        for (m, km) in table.k.iter().enumerate() {
            if km.is_zero() {
                continue;
            }
            let m = m as i64;
            d2 -= km * &ig * &p_minus_one / (&p_rat - prime_pow(p, m + 3));
        }
    } else {
        let kernel = prime_pow(p, -3 * t);
        for (m, km) in table.k.iter().enumerate() {
            if km.is_zero() {
                continue;
            }
            let m = m as i64;
            if m == 1 {
                return Err(Error::GammaUndefined);
            }
            // monomial part Gamma_p(-m+1)/Gamma_p(-m-1) |x|^{-m-2}
            let mono = gamma_p(p, -m + 1)? * gamma_p(p, 2 + m)?;
            if !mono.is_zero() {
                d2 += km * mono * prime_pow(p, t * (-m - 2));
            }
            d2 -= km * &ig * &p_minus_one * &kernel / (&p_rat - prime_pow(p, m));
        }
        for (n, cn) in table.c.iter().enumerate() {
            if cn.is_zero() {
                continue;
            }
            let n = n as i64;
            d2 += cn * &ig * &p_minus_one * &kernel / (&p_rat - prime_pow(p, -n));
        }
    }
    let lhs = d2 + &params.coupling * prime_pow(p, 2 * t) * &psi - &params.energy * psi;
    Ok(lhs.abs())
}

fn series_at(table: &CoefficientTable, p: u64, t: i64) -> BigRational {
    if t <= 0 {
        table
            .c
            .iter()
            .enumerate()
            .filter(|(_, cn)| !cn.is_zero())
            .map(|(n, cn)| cn * prime_pow(p, t * n as i64))
            .sum()
    } else {
        table
            .k
            .iter()
            .enumerate()
            .filter(|(_, km)| !km.is_zero())
            .map(|(m, km)| km * prime_pow(p, -t * m as i64))
            .sum()
    }
}

/// The naive single-series attempt `psi = sum b_{2n} |x|^{2n}` with `b_0 = 1`:
/// only every fourth coefficient survives and the ratio test bounds its
/// convergence to `|x|_p^4 < p^2/|B|`, so it is not a solution on all of
/// `Q_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveSeries {
    /// `b[j] = b_{2j}`; entries at odd `j` vanish.
    pub b: Vec<BigRational>,
    /// The series converges exactly where `|x|_p^4` stays below this bound:
    /// `p^2/|B|`.
    pub convergence_bound: BigRational,
    pub converges_everywhere: bool,
}

pub fn naive_series(p: u64, coupling: &BigRational, terms: usize) -> Result<NaiveSeries> {
    check_prime(p)?;
    if coupling.is_zero() {
        return Err(Error::ZeroCoupling);
    }
    let mut b = vec![prime_pow(p, 0), BigRational::zero()];
    for j in 0..terms.saturating_sub(1) {
        let j_i = j as i64;
        let ratio = gamma_p(p, 2 * j_i + 3)? / gamma_p(p, 2 * j_i + 5)?;
        b.push(-coupling * &b[j] * ratio);
    }
    b.truncate(terms + 1);
    Ok(NaiveSeries {
        b,
        convergence_bound: prime_pow(p, 2) / coupling.abs(),
        converges_everywhere: false,
    })
}
