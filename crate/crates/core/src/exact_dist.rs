//! Exact law of the count pair `(N, D)` under i.i.d. Bernoulli(p) draws.
//!
//! Two independent routes produce the same [`JointCountDistribution`]:
//!
//! * [`enumerate_joint`] visits all `2^n` sequences (capped at
//!   [`ENUMERATION_LIMIT`]) and is the reference;
//! * [`dp_joint`] runs a forward recursion over positions whose state is the
//!   trailing run of ones (saturated at `k + 1`) together with the counts so far.
//!   It needs `O(n^2 k)` states, which covers `n` in the hundreds.
//!
//! From either one, [`conditional_expectation`] gives `E[N/D | D != 0]`, for any
//! streak length.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::closed_form::{Derivation, ExpectationValue};
use crate::error::{Error, Result};
use crate::scalar::{BernoulliParam, Scalar};
use crate::seq_stats::{check_streak_length, scan_counts};

/// Largest `n` accepted by the enumeration routines (about a million sequences).
pub const ENUMERATION_LIMIT: u32 = 20;

/// Probability mass over reachable `(N, D)` pairs, stored sparsely and ordered by `(N, D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointCountDistribution<T> {
    n: u32,
    k: u32,
    p: T,
    pmf: BTreeMap<(u32, u32), T>,
}

impl<T: Scalar> JointCountDistribution<T> {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn p(&self) -> &T {
        &self.p
    }

    /// Mass at `(numerator, denominator)`; zero for unreachable pairs.
    pub fn prob(&self, numerator: u32, denominator: u32) -> T {
        self.pmf.get(&(numerator, denominator)).cloned().unwrap_or_else(T::zero)
    }

    /// `((N, D), mass)` in increasing `(N, D)` order.
    pub fn iter(&self) -> impl Iterator<Item = (&(u32, u32), &T)> {
        self.pmf.iter()
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    pub fn total_mass(&self) -> T {
        self.pmf.values().fold(T::zero(), |acc, v| acc + v.clone())
    }

    /// The export object `{n, k, p, entries: [{N, D, prob_num, prob_den | prob_float}], mode}`.
    pub fn to_json(&self) -> serde_json::Value {
        let entries = self
            .pmf
            .iter()
            .map(|(&(num, den), prob)| {
                let mut obj = serde_json::Map::new();
                obj.insert("N".into(), num.into());
                obj.insert("D".into(), den.into());
                prob.json_prob_fields(&mut obj);
                serde_json::Value::Object(obj)
            })
            .collect::<Vec<_>>();
        serde_json::json!({
            "n": self.n,
            "k": self.k,
            "p": self.p.json_value(),
            "entries": entries,
            "mode": T::MODE,
        })
    }
}

fn check_args(n: u32, k: u32) -> Result<()> {
    check_streak_length(n as usize, k as usize)
}

/// Brute force over all `2^n` sequences. Rejects `n > 20`.
pub fn enumerate_joint<T: Scalar>(
    n: u32,
    k: u32,
    p: &BernoulliParam<T>,
) -> Result<JointCountDistribution<T>> {
    check_args(n, k)?;
    if n > ENUMERATION_LIMIT {
        return Err(Error::ResourceLimit {
            n,
            max: ENUMERATION_LIMIT,
        });
    }
    // Sequences are grouped by (N, D, number of ones) so each distinct weight
    // is multiplied once.
    let mut counts: BTreeMap<(u32, u32), Vec<u64>> = BTreeMap::new();
    for mask in 0u32..(1u32 << n) {
        let (num, den) = scan_counts((0..n).map(|i| mask >> i & 1 == 1), n as usize, k as usize);
        let by_ones = counts
            .entry((num as u32, den as u32))
            .or_insert_with(|| vec![0; n as usize + 1]);
        by_ones[mask.count_ones() as usize] += 1;
    }
    let pv = p.value();
    let qv = T::one() - pv.clone();
    let seq_prob: Vec<T> = (0..=n as u64)
        .map(|ones| pv.powu(ones) * qv.powu(n as u64 - ones))
        .collect();
    let pmf = counts
        .into_iter()
        .filter_map(|(key, by_ones)| {
            let mass = by_ones
                .iter()
                .zip(&seq_prob)
                .filter(|(&c, _)| c > 0)
                .fold(T::zero(), |acc, (&c, w)| acc + T::from_u64(c) * w.clone());
            (!mass.is_zero()).then_some((key, mass))
        })
        .collect();
    Ok(JointCountDistribution {
        n,
        k,
        p: pv.clone(),
        pmf,
    })
}

/// Dense table of weights indexed by `(run, D, N)` with `N <= D <= n - k`.
struct RunTable<W> {
    runs: usize,
    cells_per_run: usize,
    data: Vec<W>,
}

impl<W: Clone + Zero> RunTable<W> {
    fn new(runs: usize, max_den: usize) -> Self {
        let cells_per_run = (max_den + 1) * (max_den + 2) / 2;
        RunTable {
            runs,
            cells_per_run,
            data: vec![W::zero(); runs * cells_per_run],
        }
    }

    #[inline]
    fn index(&self, run: usize, den: usize, num: usize) -> usize {
        run * self.cells_per_run + den * (den + 1) / 2 + num
    }

    fn clear(&mut self) {
        self.data.iter_mut().for_each(|w| w.set_zero());
    }
}

/// Forward recursion over positions; identical output to [`enumerate_joint`].
///
/// Processing bit `t` (1-based) from trailing run `r`:
/// a one moves to `r' = min(r + 1, k + 1)`, adds to `D` when `r' >= k` and
/// `t <= n - 1`, and adds to `N` when `r' = k + 1`; a zero resets `r' = 0`.
///
/// ```
/// use hothand::{exact_dist::{dp_joint, prob_denominator_zero}, BernoulliParam, Rational};
///
/// let half = BernoulliParam::ratio(1, 2).unwrap();
/// let dist = dp_joint::<Rational>(4, 2, &half).unwrap();
/// assert_eq!(prob_denominator_zero(&dist), Rational::new(5.into(), 8.into()));
/// ```
pub fn dp_joint<T: Scalar>(n: u32, k: u32, p: &BernoulliParam<T>) -> Result<JointCountDistribution<T>> {
    check_args(n, k)?;
    let (nu, ku) = (n as usize, k as usize);
    let max_den = nu - ku;
    let cap = ku + 1;
    let (w_one, w_zero) = T::step_weights(p.value());

    let mut cur = RunTable::<T::Weight>::new(cap + 1, max_den);
    let mut next = RunTable::<T::Weight>::new(cap + 1, max_den);
    let start = cur.index(0, 0, 0);
    cur.data[start] = T::Weight::one();

    for t in 1..=nu {
        next.clear();
        // before step t at most t - 1 denominator hits can have happened
        let den_hi = (t - 1).min(max_den);
        let counts_den = t < nu;
        for run in 0..cur.runs {
            // runs are bounded by the number of processed bits
            if run > t - 1 {
                break;
            }
            let run_one = (run + 1).min(cap);
            let add_den = usize::from(counts_den && run_one >= ku);
            let add_num = usize::from(run_one == cap);
            for den in 0..=den_hi {
                for num in 0..=den {
                    let w = &cur.data[cur.index(run, den, num)];
                    if w.is_zero() {
                        continue;
                    }
                    let i0 = next.index(0, den, num);
                    T::weight_mul_add(&mut next.data[i0], w, &w_zero);
                    let i1 = next.index(run_one, den + add_den, num + add_num);
                    T::weight_mul_add(&mut next.data[i1], w, &w_one);
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }

    let mut pmf = BTreeMap::new();
    for den in 0..=max_den {
        for num in 0..=den {
            let mut total = T::Weight::zero();
            for run in 0..cur.runs {
                T::weight_add(&mut total, &cur.data[cur.index(run, den, num)]);
            }
            if !total.is_zero() {
                pmf.insert((num as u32, den as u32), T::weight_to_prob(&total, p.value(), n));
            }
        }
    }
    Ok(JointCountDistribution {
        n,
        k,
        p: p.value().clone(),
        pmf,
    })
}

/// `E[N/D | D != 0]` for the given joint law.
pub fn conditional_expectation<T: Scalar>(dist: &JointCountDistribution<T>) -> Result<ExpectationValue<T>> {
    let (mut weighted, mut mass) = (T::zero(), T::zero());
    for (&(num, den), prob) in dist.iter().filter(|((_, den), _)| *den > 0) {
        weighted = weighted + T::from_ratio(num as u64, den as u64) * prob.clone();
        mass = mass + prob.clone();
    }
    if mass.is_zero() {
        return Err(Error::UndefinedConditioning);
    }
    Ok(ExpectationValue::new(weighted / mass, Derivation::JointDistribution))
}

/// `P(D = 0)`. For `k = 1` this is `(1 - p)^(n - 1)`.
pub fn prob_denominator_zero<T: Scalar>(dist: &JointCountDistribution<T>) -> T {
    dist.prob(0, 0)
}

/// `E[X_{j-1} X_j / (X_1 + ... + X_{n-1}) | D1 != 0]`, one numerator term of the
/// `k = 1` statistic, by enumeration (`3 <= n <= 20`, `2 <= j <= n`).
pub fn per_term_expectation_k1<T: Scalar>(
    n: u32,
    j: u32,
    p: &BernoulliParam<T>,
) -> Result<ExpectationValue<T>> {
    if n < 3 {
        return Err(Error::invalid(format!("sequence length n = {n} must be at least 3")));
    }
    if n > ENUMERATION_LIMIT {
        return Err(Error::ResourceLimit {
            n,
            max: ENUMERATION_LIMIT,
        });
    }
    if !(2..=n).contains(&j) {
        return Err(Error::invalid(format!("term index j = {j} must lie in 2..={n}")));
    }
    let pv = p.require_positive()?;
    // term hits grouped by (ones in x, D1), and conditioning mass grouped by ones
    let prefix_mask = (1u32 << (n - 1)) - 1;
    let pair_mask = 0b11u32 << (j - 2);
    let mut hits: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    let mut cond = vec![0u64; n as usize + 1];
    for mask in 0u32..(1u32 << n) {
        let den = (mask & prefix_mask).count_ones();
        if den == 0 {
            continue;
        }
        let ones = mask.count_ones();
        cond[ones as usize] += 1;
        if mask & pair_mask == pair_mask {
            *hits.entry((ones, den)).or_insert(0) += 1;
        }
    }
    let qv = T::one() - pv.clone();
    let seq_prob = |ones: u32| pv.powu(ones as u64) * qv.powu((n - ones) as u64);
    let weighted = hits.iter().fold(T::zero(), |acc, (&(ones, den), &c)| {
        acc + T::from_u64(c) * seq_prob(ones) / T::from_u64(den as u64)
    });
    let mass = cond
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .fold(T::zero(), |acc, (ones, &c)| acc + T::from_u64(c) * seq_prob(ones as u32));
    if mass.is_zero() {
        return Err(Error::UndefinedConditioning);
    }
    Ok(ExpectationValue::new(weighted / mass, Derivation::PerTermEnumeration))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{
        expected_hot_hand_k1, interior_term_expectation_k1, last_term_expectation_k1,
    };
    use crate::scalar::Rational;

    fn q(a: i64, b: i64) -> Rational {
        Rational::new(a.into(), b.into())
    }

    fn pr(a: u64, b: u64) -> BernoulliParam<Rational> {
        BernoulliParam::ratio(a, b).unwrap()
    }

    #[test]
    fn enumerate_n3_k1() {
        let d = enumerate_joint(3, 1, &pr(1, 2)).unwrap();
        let expected: BTreeMap<(u32, u32), Rational> = [
            ((0, 0), q(2, 8)),
            ((0, 1), q(3, 8)),
            ((1, 1), q(1, 8)),
            ((1, 2), q(1, 8)),
            ((2, 2), q(1, 8)),
        ]
        .into_iter()
        .collect();
        assert_eq!(d.pmf, expected);
        assert_eq!(dp_joint(3, 1, &pr(1, 2)).unwrap(), d);
        assert_eq!(conditional_expectation(&d).unwrap().value, q(5, 12));
        assert_eq!(prob_denominator_zero(&d), q(1, 4));
    }

    #[test]
    fn degenerate_p() {
        let d = enumerate_joint(2, 1, &pr(1, 1)).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.prob(1, 1), q(1, 1));
        for n in 2..9 {
            for k in 1..n {
                let d = dp_joint(n, k, &pr(1, 1)).unwrap();
                assert_eq!(conditional_expectation(&d).unwrap().value, q(1, 1));
                assert_eq!(prob_denominator_zero(&d), q(0, 1));
                let d0 = dp_joint(n, k, &pr(0, 1)).unwrap();
                assert_eq!(conditional_expectation(&d0), Err(Error::UndefinedConditioning));
            }
        }
    }

    #[test]
    fn n4_k2() {
        let d = enumerate_joint(4, 2, &pr(1, 2)).unwrap();
        assert_eq!(q(1, 1) - prob_denominator_zero(&d), q(6, 16));
        assert_eq!(prob_denominator_zero(&d), q(10, 16));
        assert_eq!(conditional_expectation(&d).unwrap().value, q(5, 12));
    }

    #[test]
    fn dp_matches_enumeration_small() {
        for n in 2..=10 {
            for k in 1..n {
                for p in [pr(1, 2), pr(2, 7)] {
                    assert_eq!(dp_joint(n, k, &p).unwrap(), enumerate_joint(n, k, &p).unwrap(), "n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn double_path_normalized() {
        for n in [5u32, 30, 120] {
            for k in [1u32, 2, 4] {
                let d = dp_joint(n, k, &BernoulliParam::new(0.37).unwrap()).unwrap();
                assert!((d.total_mass() - 1.0).abs() < 1e-12);
                for (&(num, den), _) in d.iter() {
                    assert!(num <= den && den <= n - k);
                }
            }
        }
    }

    #[test]
    fn k1_zero_denominator_mass() {
        for n in [2u32, 3, 10, 40] {
            let d = dp_joint(n, 1, &pr(1, 3)).unwrap();
            assert_eq!(prob_denominator_zero(&d), q(2, 3).powu(n as u64 - 1));
        }
        let d = dp_joint(100, 1, &pr(1, 2)).unwrap();
        assert_eq!(prob_denominator_zero(&d), q(1, 2).powu(99));
    }

    #[test]
    fn guards() {
        assert_eq!(
            enumerate_joint(21, 1, &pr(1, 2)).unwrap_err(),
            Error::ResourceLimit { n: 21, max: 20 }
        );
        assert!(dp_joint(2, 2, &pr(1, 2)).is_err());
        assert!(dp_joint(5, 0, &pr(1, 2)).is_err());
        assert!(per_term_expectation_k1(3, 1, &pr(1, 2)).is_err());
        assert!(per_term_expectation_k1(3, 4, &pr(1, 2)).is_err());
        assert!(per_term_expectation_k1(3, 2, &pr(0, 2)).is_err());
    }

    #[test]
    fn per_term_examples() {
        assert_eq!(per_term_expectation_k1(3, 3, &pr(1, 2)).unwrap().value, q(1, 4));
        assert_eq!(per_term_expectation_k1(3, 2, &pr(1, 2)).unwrap().value, q(1, 6));
        assert_eq!(
            per_term_expectation_k1(5, 2, &pr(1, 3)).unwrap().value,
            per_term_expectation_k1(5, 3, &pr(1, 3)).unwrap().value
        );
        for n in 3..=9u32 {
            let p = pr(2, 5);
            let mut sum = q(0, 1);
            for j in 2..=n {
                let term = per_term_expectation_k1(n, j, &p).unwrap().value;
                let formula = if j == n {
                    last_term_expectation_k1(n as u64, &p).unwrap().value
                } else {
                    interior_term_expectation_k1(n as u64, &p).unwrap().value
                };
                assert_eq!(term, formula, "n={n} j={j}");
                sum += term;
            }
            assert_eq!(sum, expected_hot_hand_k1(n as u64, &p).unwrap().value);
        }
    }

    #[test]
    fn json_export() {
        let d = dp_joint(3, 1, &pr(1, 2)).unwrap();
        let v = d.to_json();
        assert_eq!(v["n"], 3);
        assert_eq!(v["p"], "1/2");
        assert_eq!(v["mode"], "rational");
        assert_eq!(v["entries"][0]["N"], 0);
        assert_eq!(v["entries"][0]["D"], 0);
        assert_eq!(v["entries"][0]["prob_num"], "1");
        assert_eq!(v["entries"][0]["prob_den"], "4");
        let f = dp_joint(3, 1, &BernoulliParam::new(0.5).unwrap()).unwrap().to_json();
        assert_eq!(f["mode"], "double");
        assert_eq!(f["entries"][1]["prob_float"], 0.375);
    }
}
