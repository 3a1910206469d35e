use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use hothand::closed_form::{bias_gap_k1, expected_hot_hand_k1};
use hothand::exact_dist::{
    conditional_expectation, dp_joint, enumerate_joint, prob_denominator_zero, JointCountDistribution,
};
use hothand::monte_carlo::{simulate, SimulationConfig, SimulationReport};
use hothand::seq_stats::{count_streak_terms, hot_hand_statistic, parse_sequence, HotHandValue};
use hothand::{ArithmeticMode, BernoulliParam, Error, ProbLiteral, Rational, Scalar};
use serde_json::json;

/// A probability resolved to one arithmetic back end.
pub enum Param {
    Exact(BernoulliParam<Rational>),
    Double(BernoulliParam<f64>),
}

/// Picks the arithmetic for `p`: an explicit mode wins, otherwise the literal decides.
pub fn resolve_param(p: &ProbLiteral, mode: Option<ArithmeticMode>) -> Result<Param> {
    let mode = mode.unwrap_or_else(|| p.natural_mode());
    Ok(match mode {
        ArithmeticMode::Rational => Param::Exact(BernoulliParam::new(p.to_rational()?)?),
        ArithmeticMode::Double => Param::Double(BernoulliParam::new(p.to_f64())?),
    })
}

pub fn stat(out: &mut impl Write, file: &Path, k: usize, json: bool) -> Result<ExitCode> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let x = parse_sequence(&text).with_context(|| format!("parsing {}", file.display()))?;
    let counts = count_streak_terms(&x, k)?;
    let value = hot_hand_statistic(&x, k)?;
    if json {
        let (ratio, float) = match value {
            HotHandValue::Defined(r) => (json!(r.to_string()), json!(value.to_f64())),
            HotHandValue::Undefined => (json!(null), json!(null)),
        };
        let obj = json!({
            "n": counts.n,
            "k": counts.k,
            "N": counts.numerator,
            "D": counts.denominator,
            "P": ratio,
            "P_float": float,
        });
        writeln!(out, "{obj}")?;
    } else {
        match value {
            HotHandValue::Defined(r) => {
                writeln!(out, "N={} D={} P={r}", counts.numerator, counts.denominator)?
            }
            HotHandValue::Undefined => {
                writeln!(out, "N={} D={} undefined (D=0)", counts.numerator, counts.denominator)?
            }
        }
    }
    Ok(if value.is_defined() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

/// `(E[P1 | D1 != 0], p - E)`. The gap uses the cancellation-free form where it applies.
pub fn closed_form_values<T: Scalar>(n: u64, p: &BernoulliParam<T>) -> hothand::Result<(T, T, bool)> {
    let e = expected_hot_hand_k1(n, p)?;
    let gap = if n >= 3 && !p.is_one() {
        bias_gap_k1(n, p)?
    } else {
        p.value().clone() - e.value.clone()
    };
    Ok((e.value, gap, e.extended_domain))
}

fn write_closed_form<T: Scalar>(out: &mut impl Write, n: u64, p: &BernoulliParam<T>, json: bool) -> Result<()> {
    let (e, gap, extended) = closed_form_values(n, p)?;
    if extended {
        eprintln!("note: n = 2 is outside the usual n >= 3 range; the formula reduces to p and is exact there");
    }
    if json {
        let obj = json!({
            "n": n,
            "p": p.value().json_value(),
            "mode": T::MODE,
            "expectation": e.json_value(),
            "bias_gap": gap.json_value(),
            "n_two_extension": extended,
        });
        writeln!(out, "{obj}")?;
    } else {
        writeln!(out, "E={e} bias={gap}")?;
    }
    Ok(())
}

pub fn closed_form(
    out: &mut impl Write,
    n: u64,
    p: &ProbLiteral,
    mode: Option<ArithmeticMode>,
    json: bool,
) -> Result<ExitCode> {
    match resolve_param(p, mode)? {
        Param::Exact(p) => write_closed_form(out, n, &p, json)?,
        Param::Double(p) => write_closed_form(out, n, &p, json)?,
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Clone, Copy)]
pub struct ExactOutput {
    pub dump: bool,
    pub oracle: bool,
    pub json: bool,
}

/// Exact equality for rationals, entrywise `1e-12` for doubles (summation order differs).
fn distributions_agree<T: Scalar>(a: &JointCountDistribution<T>, b: &JointCountDistribution<T>) -> bool {
    match T::MODE {
        ArithmeticMode::Rational => a == b,
        ArithmeticMode::Double => {
            a.len() == b.len()
                && a.iter()
                    .zip(b.iter())
                    .all(|((ka, va), (kb, vb))| ka == kb && (va.to_f64() - vb.to_f64()).abs() <= 1e-12)
        }
    }
}

fn write_exact<T: Scalar>(
    out: &mut impl Write,
    n: u32,
    k: u32,
    p: &BernoulliParam<T>,
    opts: ExactOutput,
) -> Result<()> {
    let dist = dp_joint(n, k, p)?;
    if opts.oracle {
        let reference = enumerate_joint(n, k, p)?;
        if !distributions_agree(&dist, &reference) {
            bail!("dynamic program and enumeration disagree for n={n} k={k} p={}", p.value());
        }
        eprintln!("oracle: enumeration of all 2^{n} sequences agrees with the dynamic program");
    }
    let e = conditional_expectation(&dist)?.value;
    let zero = prob_denominator_zero(&dist);
    if opts.dump {
        eprintln!("E={e} P(D=0)={zero}");
        writeln!(out, "{}", dist.to_json())?;
    } else if opts.json {
        let obj = json!({
            "n": n,
            "k": k,
            "p": p.value().json_value(),
            "mode": T::MODE,
            "expectation": e.json_value(),
            "p_d_zero": zero.json_value(),
            "bias_gap": (p.value().clone() - e.clone()).json_value(),
        });
        writeln!(out, "{obj}")?;
    } else {
        writeln!(out, "E={e} P(D=0)={zero}")?;
    }
    Ok(())
}

pub fn exact(
    out: &mut impl Write,
    n: u32,
    k: u32,
    p: &ProbLiteral,
    mode: Option<ArithmeticMode>,
    opts: ExactOutput,
) -> Result<ExitCode> {
    match resolve_param(p, mode)? {
        Param::Exact(p) => write_exact(out, n, k, &p, opts)?,
        Param::Double(p) => write_exact(out, n, k, &p, opts)?,
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
pub fn monte_carlo(
    out: &mut impl Write,
    n: usize,
    k: usize,
    p: f64,
    samples: u64,
    seed: u64,
    max_attempt_factor: u64,
    shards: u32,
) -> Result<ExitCode> {
    let config = SimulationConfig::new(n, k, p, samples, seed)?
        .with_max_attempt_factor(max_attempt_factor)
        .with_shards(shards);
    config.validate()?;
    match simulate(&config) {
        Ok(result) => {
            writeln!(out, "{}", serde_json::to_string(&SimulationReport::new(&config, &result))?)?;
            Ok(ExitCode::SUCCESS)
        }
        Err(err @ Error::AttemptCapReached { .. }) => {
            if let Error::AttemptCapReached {
                target,
                cap,
                accepted,
                rejected,
                partial_estimate,
            } = &err
            {
                let obj = json!({
                    "config": config,
                    "error": "attempt_cap_reached",
                    "target": target,
                    "cap": cap,
                    "accepted": accepted,
                    "rejected": rejected,
                    "partial_estimate": partial_estimate,
                    "generator_name": hothand::monte_carlo::GENERATOR_NAME,
                });
                writeln!(out, "{obj}")?;
            }
            Err(err.into())
        }
        Err(err) => Err(err.into()),
    }
}

pub fn verify(out: &mut impl Write) -> Result<ExitCode> {
    let mut all = true;
    for check in hothand::checks::run_battery() {
        let tag = if check.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{tag} {}: {}", check.name, check.detail)?;
        all &= check.passed;
    }
    Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
