//! Built-in invariant battery, run by `hothand verify`.
//!
//! Every check compares two routes that share no code path beyond the counting
//! primitives: closed forms against enumeration, the dynamic program against
//! enumeration, reciprocal moment formulas against the literal binomial sums.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::closed_form::{
    bias_gap_k1, expected_hot_hand_k1, interior_term_expectation_k1, last_term_expectation_k1,
    recip_one_plus_binomial, recip_two_plus_binomial, verify_amgm_inequality,
};
use crate::exact_dist::{
    conditional_expectation, dp_joint, enumerate_joint, per_term_expectation_k1,
};
use crate::monte_carlo::{simulate, SimulationConfig};
use crate::scalar::{BernoulliParam, Rational, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// `E[1 / (c + Z)]`, `Z ~ Binomial(n, a/b)`, summed term by term over a common
/// denominator `lcm(c..=n+c) * b^n`.
pub fn direct_recip_binomial_exact(c: u64, n: u64, p: &Rational) -> Rational {
    let (a, b) = (p.numer().clone(), p.denom().clone());
    let fail = &b - &a;
    let lcm = (c..=n + c).fold(BigInt::one(), |acc, v| num_integer::lcm(acc, BigInt::from(v)));
    let mut binom = BigInt::one();
    let mut sum = BigInt::zero();
    for i in 0..=n {
        let term = &binom * a.pow(i as u32) * fail.pow((n - i) as u32) * (&lcm / BigInt::from(i + c));
        sum += term;
        binom = binom * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Rational::new(sum, lcm * b.pow(n as u32))
}

/// Same sum in `f64`. The binomial weights are built outward from the mode with
/// ratio recurrences and normalized by their own total, so nothing underflows.
pub fn direct_recip_binomial_f64(c: u64, n: u64, p: f64) -> f64 {
    if p >= 1.0 {
        return 1.0 / (n + c) as f64;
    }
    let mode = (((n + 1) as f64 * p).floor() as u64).min(n);
    let odds = p / (1.0 - p);
    let mut weights = vec![0.0; n as usize + 1];
    weights[mode as usize] = 1.0;
    for i in mode..n {
        // w(i+1) / w(i) = (n - i)/(i + 1) * p/(1-p)
        weights[i as usize + 1] = weights[i as usize] * (n - i) as f64 / (i + 1) as f64 * odds;
    }
    for i in (1..=mode).rev() {
        weights[i as usize - 1] = weights[i as usize] * i as f64 / (n - i + 1) as f64 / odds;
    }
    let total: f64 = weights.iter().sum();
    let weighted: f64 = weights.iter().enumerate().map(|(i, w)| w / (i as u64 + c) as f64).sum();
    weighted / total
}

fn outcome(name: &'static str, failures: Vec<String>, checked: usize) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{checked} cases")
        } else {
            format!("{} of {checked} cases failed, first: {}", failures.len(), failures[0])
        },
    }
}

fn rational_grid() -> Vec<BernoulliParam<Rational>> {
    (1..=9).map(|i| BernoulliParam::ratio(i, 10).unwrap()).collect()
}

fn check_k1_formula() -> CheckOutcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for n in 2..=10u32 {
        for p in rational_grid() {
            let formula = expected_hot_hand_k1(n as u64, &p).unwrap().value;
            let enumerated = conditional_expectation(&enumerate_joint(n, 1, &p).unwrap()).unwrap().value;
            checked += 1;
            if formula != enumerated {
                failures.push(format!("n={n} p={p}: {formula} != {enumerated}"));
            }
        }
    }
    outcome("k=1 closed form equals enumeration", failures, checked)
}

fn check_reciprocal_moments() -> CheckOutcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for n in 0..=60u64 {
        for p in rational_grid().into_iter().chain([BernoulliParam::ratio(1, 1).unwrap()]) {
            checked += 2;
            let one = recip_one_plus_binomial(n, &p).unwrap().value;
            if one != direct_recip_binomial_exact(1, n, p.value()) {
                failures.push(format!("1/(1+Z) n={n} p={p}"));
            }
            let two = recip_two_plus_binomial(n, &p).unwrap().value;
            if two != direct_recip_binomial_exact(2, n, p.value()) {
                failures.push(format!("1/(2+Z) n={n} p={p}"));
            }
        }
    }
    let grid = [0.001, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0];
    for n in (0..=1000u64).step_by(7) {
        for &pf in &grid {
            let p = BernoulliParam::new(pf).unwrap();
            for (c, value) in [
                (1, recip_one_plus_binomial(n, &p).unwrap().value),
                (2, recip_two_plus_binomial(n, &p).unwrap().value),
            ] {
                checked += 1;
                let direct = direct_recip_binomial_f64(c, n, pf);
                let rel = ((value - direct) / direct).abs();
                if rel > 1e-12 {
                    failures.push(format!("1/({c}+Z) n={n} p={pf}: relative error {rel:e}"));
                }
            }
        }
    }
    outcome("reciprocal binomial moments equal direct sums", failures, checked)
}

fn check_dp_oracle() -> CheckOutcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    let ps = [(1, 2), (1, 3), (9, 10)].map(|(a, b)| BernoulliParam::ratio(a, b).unwrap());
    for n in 2..=10 {
        for k in 1..n {
            for p in &ps {
                checked += 1;
                if dp_joint(n, k, p).unwrap() != enumerate_joint(n, k, p).unwrap() {
                    failures.push(format!("n={n} k={k} p={p}"));
                }
            }
        }
    }
    outcome("dynamic program equals enumeration", failures, checked)
}

fn check_bias() -> CheckOutcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for n in 3..=50u64 {
        for i in 1..=99u64 {
            let p = BernoulliParam::new(i as f64 / 100.0).unwrap();
            checked += 1;
            if !(bias_gap_k1(n, &p).unwrap() > 0.0 && verify_amgm_inequality(n, &p).unwrap()) {
                failures.push(format!("k=1 n={n} p={p}"));
            }
        }
    }
    for k in 2..=3u32 {
        for n in k + 2..=20 {
            for i in 1..=9u64 {
                let pf = i as f64 / 10.0;
                let p = BernoulliParam::new(pf).unwrap();
                checked += 1;
                let e = conditional_expectation(&dp_joint(n, k, &p).unwrap()).unwrap().value;
                if e >= pf - 1e-12 {
                    failures.push(format!("k={k} n={n} p={pf}: E={e}"));
                }
            }
        }
    }
    outcome("conditional mean lies strictly below p", failures, checked)
}

fn check_decomposition() -> CheckOutcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for n in 3..=10u32 {
        for p in [(1, 4), (1, 2), (3, 4)].map(|(a, b)| BernoulliParam::ratio(a, b).unwrap()) {
            checked += 1;
            let nn = n as u64;
            let last = last_term_expectation_k1(nn, &p).unwrap().value;
            let inner = interior_term_expectation_k1(nn, &p).unwrap().value;
            let total = expected_hot_hand_k1(nn, &p).unwrap().value;
            let mut ok = last.clone() + Rational::from_u64(nn - 2) * inner.clone() == total;
            for j in 2..=n {
                let term = per_term_expectation_k1(n, j, &p).unwrap().value;
                ok &= term == if j == n { last.clone() } else { inner.clone() };
            }
            if !ok {
                failures.push(format!("n={n} p={p}"));
            }
        }
    }
    outcome("per-term decomposition of the k=1 mean", failures, checked)
}

fn check_monte_carlo() -> CheckOutcome {
    let config = SimulationConfig::new(3, 1, 0.5, 100_000, 2024).unwrap();
    let result = simulate(&config).unwrap();
    let gap = (result.estimate - 5.0 / 12.0).abs();
    CheckOutcome {
        name: "Monte Carlo agrees with the exact mean",
        passed: gap <= 4.0 * result.stderr,
        detail: format!(
            "n=3 k=1 p=0.5: estimate {} (stderr {:.2e}), exact 5/12",
            result.estimate, result.stderr
        ),
    }
}

/// Runs every check in a fixed order.
pub fn run_battery() -> Vec<CheckOutcome> {
    vec![
        check_k1_formula(),
        check_reciprocal_moments(),
        check_dp_oracle(),
        check_bias(),
        check_decomposition(),
        check_monte_carlo(),
    ]
}
