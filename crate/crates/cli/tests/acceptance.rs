//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Oracles (brute-force enumeration, literal binomial sums) are implemented here
//! from scratch and share no code with the library routines they check.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use hothand::closed_form::{
    bias_gap_k1, expected_hot_hand_k1, interior_term_expectation_k1, last_term_expectation_k1,
    recip_one_plus_binomial, recip_two_plus_binomial, verify_amgm_inequality,
};
use hothand::exact_dist::{
    conditional_expectation, dp_joint, enumerate_joint, per_term_expectation_k1, prob_denominator_zero,
};
use hothand::monte_carlo::{simulate, SimulationConfig};
use hothand::{rational_to_f64, BernoulliParam, Rational};
use num_bigint::BigInt;
use num_traits::{One, Zero};

fn q(a: u64, b: u64) -> Rational {
    Rational::new(BigInt::from(a), BigInt::from(b))
}

fn param(a: u64, b: u64) -> BernoulliParam<Rational> {
    BernoulliParam::ratio(a, b).unwrap()
}

/// E[P1 | D1 != 0] by listing every sequence and evaluating the ratio of window products.
fn brute_force_k1(n: usize, p: &Rational) -> Rational {
    let one = Rational::one();
    let fail = &one - p;
    let mut weighted = Rational::zero();
    let mut mass = Rational::zero();
    for mask in 0u32..1 << n {
        let x: Vec<u64> = (0..n).map(|i| u64::from(mask >> i & 1)).collect();
        let den: u64 = x[..n - 1].iter().sum();
        if den == 0 {
            continue;
        }
        let num: u64 = x.windows(2).map(|w| w[0] * w[1]).sum();
        let ones = x.iter().sum::<u64>() as i32;
        let w = p.pow(ones) * fail.pow(n as i32 - ones);
        weighted += &w * q(num, den);
        mass += w;
    }
    weighted / mass
}

/// Sum_i C(n,i) a^i (b-a)^(n-i) / (c+i) / b^n, accumulated over the common denominator.
fn binomial_sum_exact(c: u64, n: u64, p: &Rational) -> Rational {
    let a = p.numer().clone();
    let b = p.denom().clone();
    let fail = &b - &a;
    let mut common = BigInt::one();
    for v in c..=n + c {
        common = num_integer::lcm(common, BigInt::from(v));
    }
    let mut choose = BigInt::one();
    let mut total = BigInt::zero();
    for i in 0..=n {
        total += &choose * a.pow(i as u32) * fail.pow((n - i) as u32) * (&common / BigInt::from(c + i));
        choose = choose * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Rational::new(total, common * b.pow(n as u32))
}

/// Same sum in doubles: binomial weights relative to the mode, normalized by their sum.
fn binomial_sum_f64(c: u64, n: u64, p: f64) -> f64 {
    if p == 1.0 {
        return 1.0 / (c + n) as f64;
    }
    let mode = ((n as f64 + 1.0) * p).floor().min(n as f64) as usize;
    let n = n as usize;
    let mut w = vec![0.0f64; n + 1];
    w[mode] = 1.0;
    for i in mode + 1..=n {
        w[i] = w[i - 1] * ((n + 1 - i) as f64 / i as f64) * (p / (1.0 - p));
    }
    for i in (0..mode).rev() {
        w[i] = w[i + 1] * ((i + 1) as f64 / (n - i) as f64) * ((1.0 - p) / p);
    }
    let norm: f64 = w.iter().sum();
    w.iter().enumerate().map(|(i, wi)| wi / (c as f64 + i as f64)).sum::<f64>() / norm
}

fn criterion_1() -> Result<String, String> {
    for n in 2..=12usize {
        for i in 1..=9 {
            let p = param(i, 10);
            let formula = expected_hot_hand_k1(n as u64, &p).unwrap().value;
            let brute = brute_force_k1(n, p.value());
            if formula != brute {
                return Err(format!("n={n} p={i}/10: formula {formula} != enumeration {brute}"));
            }
            let via_dist = conditional_expectation(&enumerate_joint(n as u32, 1, &p).unwrap()).unwrap().value;
            if via_dist != brute {
                return Err(format!("n={n} p={i}/10: enumerate_joint gives {via_dist}"));
            }
        }
    }
    let smoke = expected_hot_hand_k1(3, &param(1, 2)).unwrap().value;
    if smoke != q(5, 12) {
        return Err(format!("smoke value n=3 p=1/2 is {smoke}, expected 5/12"));
    }
    Ok("99 (n, p) pairs exact, smoke n=3 p=1/2 -> 5/12".into())
}

const P_GRID: [(u64, u64); 9] = [(1, 1000), (1, 100), (1, 10), (1, 4), (1, 2), (3, 4), (9, 10), (99, 100), (1, 1)];

fn criterion_2() -> Result<String, String> {
    for &(a, b) in &P_GRID {
        let p = param(a, b);
        for n in 0..=200u64 {
            let one = recip_one_plus_binomial(n, &p).unwrap().value;
            if one != binomial_sum_exact(1, n, p.value()) {
                return Err(format!("E[1/(1+Z)] n={n} p={a}/{b} differs from the direct sum"));
            }
            let two = recip_two_plus_binomial(n, &p).unwrap().value;
            if two != binomial_sum_exact(2, n, p.value()) {
                return Err(format!("E[1/(2+Z)] n={n} p={a}/{b} differs from the direct sum"));
            }
        }
    }
    let mut worst = 0.0f64;
    for &(a, b) in &P_GRID {
        let pf = a as f64 / b as f64;
        let p = BernoulliParam::new(pf).unwrap();
        for n in 0..=1000u64 {
            for c in [1u64, 2] {
                let value = if c == 1 {
                    recip_one_plus_binomial(n, &p).unwrap().value
                } else {
                    recip_two_plus_binomial(n, &p).unwrap().value
                };
                let direct = binomial_sum_f64(c, n, pf);
                let rel = ((value - direct) / direct).abs();
                worst = worst.max(rel);
                if rel > 1e-12 {
                    return Err(format!("E[1/({c}+Z)] n={n} p={pf}: relative error {rel:e}"));
                }
            }
        }
    }
    Ok(format!("exact for n<=200, worst double relative error {worst:.2e} for n<=1000"))
}

fn criterion_3() -> Result<String, String> {
    let mut cases = 0;
    for n in 2..=14u32 {
        for k in 1..n {
            for (a, b) in [(1, 2), (1, 3), (9, 10)] {
                let p = param(a, b);
                let dp = dp_joint(n, k, &p).unwrap();
                let en = enumerate_joint(n, k, &p).unwrap();
                if dp != en {
                    return Err(format!("n={n} k={k} p={a}/{b}"));
                }
                if dp.total_mass() != Rational::one() {
                    return Err(format!("mass != 1 at n={n} k={k} p={a}/{b}"));
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} (n, k, p) cases identical"))
}

fn criterion_4() -> Result<String, String> {
    let mut min_gap = f64::INFINITY;
    for n in 3..=50u64 {
        for i in 1..=99u64 {
            let p = BernoulliParam::new(i as f64 / 100.0).unwrap();
            let gap = bias_gap_k1(n, &p).unwrap();
            if gap.is_nan() || gap <= 0.0 {
                return Err(format!("k=1 n={n} p={}: gap {gap}", p.value()));
            }
            if !verify_amgm_inequality(n, &p).unwrap() {
                return Err(format!("AM-GM inequality fails at n={n} p={}", p.value()));
            }
            min_gap = min_gap.min(gap);
        }
    }
    let mut min_dp_gap = f64::INFINITY;
    for k in 2..=3u32 {
        for n in k + 2..=20 {
            for i in 1..=9u64 {
                let pf = i as f64 / 10.0;
                let e = conditional_expectation(&dp_joint(n, k, &BernoulliParam::new(pf).unwrap()).unwrap())
                    .unwrap()
                    .value;
                // strictly below p by more than the double tolerance
                if e.is_nan() || e >= pf - 1e-12 {
                    return Err(format!("k={k} n={n} p={pf}: E={e} not below p"));
                }
                min_dp_gap = min_dp_gap.min(pf - e);
            }
        }
    }
    Ok(format!("min k=1 gap {min_gap:.3e}, min k in {{2,3}} gap {min_dp_gap:.3e}"))
}

fn criterion_5() -> Result<String, String> {
    for n in 3..=10u32 {
        for (a, b) in [(1, 4), (1, 2), (3, 4)] {
            let p = param(a, b);
            let nn = n as u64;
            let last = last_term_expectation_k1(nn, &p).unwrap().value;
            let inner = interior_term_expectation_k1(nn, &p).unwrap().value;
            let total = expected_hot_hand_k1(nn, &p).unwrap().value;
            if &last + Rational::from_integer(BigInt::from(nn - 2)) * &inner != total {
                return Err(format!("last + (n-2) interior != mean at n={n} p={a}/{b}"));
            }
            for j in 2..=n {
                let term = per_term_expectation_k1(n, j, &p).unwrap().value;
                let expected = if j == n { &last } else { &inner };
                if &term != expected {
                    return Err(format!("term j={j} n={n} p={a}/{b}: {term} vs {expected}"));
                }
            }
        }
    }
    Ok("24 (n, p) cases exact".into())
}

fn criterion_6() -> Result<String, String> {
    let half = param(1, 2);
    let mut notes = Vec::new();
    for (n, k, seed) in [(3u32, 1u32, 20_240_601u64), (100, 1, 20_240_602), (100, 3, 20_240_603)] {
        let dist = dp_joint(n, k, &half).unwrap();
        let exact = rational_to_f64(&conditional_expectation(&dist).unwrap().value);
        let p_zero = rational_to_f64(&prob_denominator_zero(&dist));
        if k == 1 {
            let closed = rational_to_f64(&expected_hot_hand_k1(n as u64, &half).unwrap().value);
            if closed != exact {
                return Err(format!("closed form and DP disagree at n={n}"));
            }
            if prob_denominator_zero(&dist) != q(1, 2).pow(n as i32 - 1) {
                return Err(format!("P(D=0) != (1-p)^(n-1) at n={n}"));
            }
        }
        let config = SimulationConfig::new(n as usize, k as usize, 0.5, 1_000_000, seed).unwrap();
        let result = simulate(&config).unwrap();
        let dev = (result.estimate - exact).abs();
        if dev > 4.0 * result.stderr {
            return Err(format!(
                "n={n} k={k}: |{} - {exact}| = {dev:e} > 4 * {:e}",
                result.estimate, result.stderr
            ));
        }
        let draws = result.draws() as f64;
        let se = (p_zero * (1.0 - p_zero) / draws).sqrt();
        let rej_dev = (result.empirical_p_d_zero - p_zero).abs();
        if rej_dev > 3.0 * se {
            return Err(format!(
                "n={n} k={k}: rejection rate {} vs P(D=0) {p_zero} exceeds 3 standard errors",
                result.empirical_p_d_zero
            ));
        }
        notes.push(format!("({n},{k}) {:.2}sd", dev / result.stderr));
    }
    Ok(notes.join(", "))
}

fn run_cli(args: &[&str], dir: &std::path::Path) -> (Vec<u8>, Option<i32>) {
    let output = Command::new(env!("CARGO_BIN_EXE_hothand"))
        .args(args)
        .current_dir(dir)
        .env_remove("HOTHAND_MODE")
        .output()
        .expect("hothand binary runs");
    (output.stdout, output.status.code())
}

fn criterion_7() -> Result<String, String> {
    let dir = std::env::temp_dir().join(format!("hothand-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    std::fs::write(dir.join("seq.txt"), "1101 1100\n0111 0\n").map_err(|e| e.to_string())?;
    let commands: Vec<Vec<&str>> = vec![
        vec!["stat", "seq.txt", "-k", "1", "--json"],
        vec!["closed-form", "-n", "7", "-p", "2/5", "--json"],
        vec!["closed-form", "-n", "7", "-p", "0.4", "--json"],
        vec!["exact", "-n", "12", "-k", "2", "-p", "1/3", "--dump"],
        vec!["exact", "-n", "40", "-k", "3", "-p", "0.45", "--dump"],
        vec!["mc", "-n", "30", "-k", "2", "-p", "0.5", "-s", "20000", "--seed", "42"],
        vec!["mc", "-n", "30", "-k", "2", "-p", "0.5", "-s", "20000", "--seed", "42", "--shards", "3"],
        vec!["bias-table", "--n", "3..8", "--k", "1..3", "--p", "0.3,1/2", "--method", "dp"],
        vec!["bias-table", "--n", "3..8", "--k", "1", "--p", "0.3,1/2", "--method", "closed_form", "--format", "json"],
        vec!["bias-table", "--n", "10,20", "--k", "2", "--p", "0.5", "--method", "monte_carlo", "--samples", "5000"],
    ];
    for args in &commands {
        let first = run_cli(args, &dir);
        let second = run_cli(args, &dir);
        if first.1 != Some(0) {
            return Err(format!("{args:?} exited with {:?}", first.1));
        }
        if first.0.is_empty() || first != second {
            return Err(format!("{args:?} output differs between runs"));
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} commands byte-identical across reruns", commands.len()))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Result<String, String>,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "k=1 mean equals enumeration", budget: Some(Duration::from_secs(10)), run: criterion_1 },
        Criterion { id: 2, name: "reciprocal binomial moments", budget: Some(Duration::from_secs(5)), run: criterion_2 },
        Criterion { id: 3, name: "dynamic program equals enumeration", budget: Some(Duration::from_secs(60)), run: criterion_3 },
        Criterion { id: 4, name: "conditional mean below p", budget: None, run: criterion_4 },
        Criterion { id: 5, name: "per-term decomposition", budget: None, run: criterion_5 },
        Criterion { id: 6, name: "Monte Carlo agreement", budget: Some(Duration::from_secs(120)), run: criterion_6 },
        Criterion { id: 7, name: "CLI determinism", budget: None, run: criterion_7 },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.budget) {
            (Ok(_), Some(budget)) if elapsed > budget => {
                Err(format!("took {elapsed:.2?}, budget {budget:?}"))
            }
            (other, _) => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {} ({}): PASS [{elapsed:.2?}] {detail}", c.id, c.name),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({}): FAIL [{elapsed:.2?}] {detail}", c.id, c.name);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
