//! Analytic results for streak length one.
//!
//! With `Z ~ Binomial(n, p)` the two reciprocal moments are
//!
//! ```text
//! E[1 / (1 + Z)] = (1 - (1-p)^(n+1)) / ((n+1) p)
//! E[1 / (2 + Z)] = ((1-p)^(n+2) + (n+2) p - 1) / ((n+1) (n+2) p^2)
//! ```
//!
//! and for i.i.d. Bernoulli(p) sequences of length `n` the conditional mean of
//! the `k = 1` statistic is
//!
//! ```text
//! E[P1 | D1 != 0] = p / (1 - (1-p)^(n-1)) + (p - 1) / (n - 1)
//! ```
//!
//! All functions are generic over [`Scalar`]. The implementations are written in
//! terms of `1 - (1-p)^m` and `(1-p)^m - 1 + m p`, which are algebraically
//! identical to the textbook forms but let the `f64` back end avoid cancellation.

use crate::error::{Error, Result};
use crate::scalar::{BernoulliParam, Scalar};

/// Which formula produced an [`ExpectationValue`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Derivation {
    RecipOnePlusBinomial,
    RecipTwoPlusBinomial,
    HotHandK1,
    LastTermK1,
    InteriorTermK1,
    /// Conditional mean computed from a joint `(N, D)` distribution.
    JointDistribution,
    /// Single numerator term, by enumeration.
    PerTermEnumeration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationValue<T> {
    pub value: T,
    pub derivation: Derivation,
    /// Set when the inputs lie outside the range the formula is usually stated
    /// for but the value is still correct (currently only `n = 2` for the k = 1 mean).
    pub extended_domain: bool,
}

impl<T> ExpectationValue<T> {
    pub(crate) fn new(value: T, derivation: Derivation) -> Self {
        ExpectationValue {
            value,
            derivation,
            extended_domain: false,
        }
    }
}

fn require_min_len(n: u64, min: u64) -> Result<()> {
    if n < min {
        return Err(Error::invalid(format!("sequence length n = {n} must be at least {min}")));
    }
    Ok(())
}

/// `E[1 / (1 + Z)]` for `Z ~ Binomial(n, p)`, `p` in `(0, 1]`.
pub fn recip_one_plus_binomial<T: Scalar>(
    n: u64,
    p: &BernoulliParam<T>,
) -> Result<ExpectationValue<T>> {
    let p = p.require_positive()?;
    let mass = T::complement_pow_mass(p, n + 1);
    let value = mass / (T::from_u64(n + 1) * p.clone());
    Ok(ExpectationValue::new(value, Derivation::RecipOnePlusBinomial))
}

/// `E[1 / (2 + Z)]` for `Z ~ Binomial(n, p)`, `p` in `(0, 1]`.
pub fn recip_two_plus_binomial<T: Scalar>(
    n: u64,
    p: &BernoulliParam<T>,
) -> Result<ExpectationValue<T>> {
    let p = p.require_positive()?;
    let deficit = T::complement_pow_deficit(p, n + 2);
    let value = deficit / (T::from_u64((n + 1) * (n + 2)) * p.clone() * p.clone());
    Ok(ExpectationValue::new(value, Derivation::RecipTwoPlusBinomial))
}

/// `E[P1 | D1 != 0]` for i.i.d. Bernoulli(p) sequences of length `n >= 2`.
///
/// `n = 2` is accepted (the value is exactly `p`) and flagged through
/// [`ExpectationValue::extended_domain`]. `p = 1` gives 1.
///
/// ```
/// use hothand::{closed_form::expected_hot_hand_k1, BernoulliParam, Rational};
///
/// let half = BernoulliParam::ratio(1, 2).unwrap();
/// let e = expected_hot_hand_k1::<Rational>(3, &half).unwrap();
/// assert_eq!(e.value, Rational::new(5.into(), 12.into()));
/// ```
pub fn expected_hot_hand_k1<T: Scalar>(
    n: u64,
    p: &BernoulliParam<T>,
) -> Result<ExpectationValue<T>> {
    require_min_len(n, 2)?;
    let p = p.require_positive()?;
    let m = n - 1;
    // p/q + (p-1)/m = (f + p q) / (m q), with q = 1-(1-p)^m and f = (1-p)^m - 1 + m p
    let q = T::complement_pow_mass(p, m);
    let f = T::complement_pow_deficit(p, m);
    let value = (f + p.clone() * q.clone()) / (T::from_u64(m) * q);
    Ok(ExpectationValue {
        value,
        derivation: Derivation::HotHandK1,
        extended_domain: n == 2,
    })
}

/// `E[X_{n-1} X_n / (X_1 + ... + X_{n-1}) | D1 != 0] = p / (n - 1)`.
pub fn last_term_expectation_k1<T: Scalar>(
    n: u64,
    p: &BernoulliParam<T>,
) -> Result<ExpectationValue<T>> {
    require_min_len(n, 3)?;
    let p = p.require_positive()?;
    Ok(ExpectationValue::new(
        p.clone() / T::from_u64(n - 1),
        Derivation::LastTermK1,
    ))
}

/// Common value of `E[X_{j-1} X_j / (X_1 + ... + X_{n-1}) | D1 != 0]` for `2 <= j <= n-1`:
/// `(p / (1 - (1-p)^(n-1)) - 1/(n-1)) / (n - 2)`.
pub fn interior_term_expectation_k1<T: Scalar>(
    n: u64,
    p: &BernoulliParam<T>,
) -> Result<ExpectationValue<T>> {
    require_min_len(n, 3)?;
    let p = p.require_positive()?;
    let m = n - 1;
    // p/q - 1/m = (p m - q) / (m q) = f / (m q)
    let q = T::complement_pow_mass(p, m);
    let f = T::complement_pow_deficit(p, m);
    let value = f / (T::from_u64(m) * q * T::from_u64(n - 2));
    Ok(ExpectationValue::new(value, Derivation::InteriorTermK1))
}

/// `p - E[P1 | D1 != 0]`, positive for every `n >= 3` and `p` in `(0, 1)`.
pub fn bias_gap_k1<T: Scalar>(n: u64, p: &BernoulliParam<T>) -> Result<T> {
    require_min_len(n, 3)?;
    let p = p.require_open()?;
    let m = n - 1;
    // p - (f + p q)/(m q) = (p q (m - 1) - f) / (m q)
    let q = T::complement_pow_mass(p, m);
    let f = T::complement_pow_deficit(p, m);
    let num = p.clone() * q.clone() * T::from_u64(m - 1) - f;
    Ok(num / (T::from_u64(m) * q))
}

/// `1 + (n-2)(1-p)^(n-1) - (n-1)(1-p)^(n-2)`, the slack in the weighted AM-GM
/// bound that is equivalent to a positive bias gap.
pub fn amgm_margin<T: Scalar>(n: u64, p: &BernoulliParam<T>) -> Result<T> {
    require_min_len(n, 3)?;
    let p = p.require_open()?;
    let s = T::one() - p.clone();
    let lhs = T::from_u64(n - 1) * s.powu(n - 2);
    let rhs = T::one() + T::from_u64(n - 2) * s.powu(n - 1);
    Ok(rhs - lhs)
}

/// Checks `(n-1)(1-p)^(n-2) < 1 + (n-2)(1-p)^(n-1)`.
pub fn verify_amgm_inequality<T: Scalar>(n: u64, p: &BernoulliParam<T>) -> Result<bool> {
    Ok(amgm_margin(n, p)? > T::zero())
}
