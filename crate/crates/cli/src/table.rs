//! `bias-table`: conditional means and bias gaps over an `(n, k, p)` grid.

use std::fmt;
use std::io::Write;
use std::process::ExitCode;

use anyhow::{bail, Result};
use hothand::exact_dist::{conditional_expectation, dp_joint, enumerate_joint};
use hothand::monte_carlo::{simulate, SimulationConfig};
use hothand::{format_rational, ArithmeticMode, BernoulliParam, ProbLiteral, Rational, Scalar};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::commands::{closed_form_values, resolve_param, Param};
use crate::grid::{IntSet, ProbList};
use crate::{Format, Method};

pub const CSV_HEADER: [&str; 6] = ["n", "k", "p", "expectation", "bias_gap", "method"];

/// A table value: exact rationals print as `a/b`, doubles in shortest round-trip form.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Exact(Rational),
    Float(f64),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Exact(r) => f.write_str(&format_rational(r)),
            Cell::Float(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Exact(r) => serializer.serialize_str(&format_rational(r)),
            Cell::Float(x) => serializer.serialize_f64(*x),
        }
    }
}

trait IntoCell {
    fn into_cell(self) -> Cell;
}

impl IntoCell for Rational {
    fn into_cell(self) -> Cell {
        Cell::Exact(self)
    }
}

impl IntoCell for f64 {
    fn into_cell(self) -> Cell {
        Cell::Float(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasTableRow {
    pub n: u64,
    pub k: u64,
    pub p: Cell,
    pub expectation: Cell,
    pub bias_gap: Cell,
    pub method: &'static str,
}

pub struct TableSpec {
    pub n: IntSet,
    pub k: IntSet,
    pub p: ProbList,
    pub method: Method,
    pub mode: Option<ArithmeticMode>,
    pub samples: u64,
    pub seed: u64,
}

fn exact_row<T: Scalar + IntoCell>(
    n: u64,
    k: u64,
    p: &BernoulliParam<T>,
    method: Method,
) -> Result<BiasTableRow> {
    let (expectation, gap) = match method {
        Method::ClosedForm => {
            let (e, gap, _) = closed_form_values(n, p)?;
            (e, gap)
        }
        Method::Dp | Method::Enumeration => {
            let (n32, k32) = (u32::try_from(n)?, u32::try_from(k)?);
            let dist = if method == Method::Dp {
                dp_joint(n32, k32, p)?
            } else {
                enumerate_joint(n32, k32, p)?
            };
            let e = conditional_expectation(&dist)?.value;
            let gap = p.value().clone() - e.clone();
            (e, gap)
        }
        Method::MonteCarlo => unreachable!("simulated rows are built by simulated_row"),
    };
    Ok(BiasTableRow {
        n,
        k,
        p: p.value().clone().into_cell(),
        expectation: expectation.into_cell(),
        bias_gap: gap.into_cell(),
        method: method.tag(),
    })
}

fn simulated_row(n: u64, k: u64, p: &ProbLiteral, samples: u64, seed: u64) -> Result<BiasTableRow> {
    let pf = p.to_f64();
    let config = SimulationConfig::new(usize::try_from(n)?, usize::try_from(k)?, pf, samples, seed)?;
    let result = simulate(&config)?;
    Ok(BiasTableRow {
        n,
        k,
        p: Cell::Float(pf),
        expectation: Cell::Float(result.estimate),
        bias_gap: Cell::Float(pf - result.estimate),
        method: Method::MonteCarlo.tag(),
    })
}

/// Rows in `n`, then `k`, then `p` order. Pairs with `k > n - 1` are skipped.
pub fn build_rows(spec: &TableSpec) -> Result<Vec<BiasTableRow>> {
    if spec.method == Method::ClosedForm {
        if let Some(k) = spec.k.0.iter().find(|&&k| k != 1) {
            bail!("the closed form covers k = 1 only (got k = {k}); use --method dp");
        }
    }
    if spec.method == Method::MonteCarlo && spec.mode == Some(ArithmeticMode::Rational) {
        bail!("monte_carlo rows are always computed in double precision");
    }
    let mut points = Vec::new();
    for &n in &spec.n.0 {
        for &k in &spec.k.0 {
            if k < 1 || n < 2 || k > n - 1 {
                continue;
            }
            for p in &spec.p.0 {
                points.push((n, k, p));
            }
        }
    }
    points
        .par_iter()
        .map(|&(n, k, p)| match spec.method {
            Method::MonteCarlo => simulated_row(n, k, p, spec.samples, spec.seed),
            method => match resolve_param(p, spec.mode)? {
                Param::Exact(p) => exact_row(n, k, &p, method),
                Param::Double(p) => exact_row(n, k, &p, method),
            },
        })
        .collect()
}

pub fn write_csv(out: &mut impl Write, rows: &[BiasTableRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        writer.write_record([
            row.n.to_string(),
            row.k.to_string(),
            row.p.to_string(),
            row.expectation.to_string(),
            row.bias_gap.to_string(),
            row.method.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn run(out: &mut impl Write, spec: &TableSpec, format: Format) -> Result<ExitCode> {
    let rows = build_rows(spec)?;
    match format {
        Format::Csv => write_csv(out, &rows)?,
        Format::Json => {
            let obj = serde_json::json!({ "columns": CSV_HEADER, "rows": rows });
            writeln!(out, "{obj}")?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{parse_int_set, parse_prob_list};

    fn spec(n: &str, k: &str, p: &str, method: Method) -> TableSpec {
        TableSpec {
            n: parse_int_set(n).unwrap(),
            k: parse_int_set(k).unwrap(),
            p: parse_prob_list(p).unwrap(),
            method,
            mode: None,
            samples: 1000,
            seed: 1,
        }
    }

    #[test]
    fn closed_form_rows() {
        let rows = build_rows(&spec("3..5", "1", "1/2", Method::ClosedForm)).unwrap();
        let e: Vec<String> = rows.iter().map(|r| r.expectation.to_string()).collect();
        // n = 4: 1/2 / (7/8) - 1/6 = 4/7 - 1/6 = 17/42; n = 5: 8/15 - 1/8 = 49/120
        assert_eq!(e, ["5/12", "17/42", "49/120"]);
        assert_eq!(rows[0].bias_gap.to_string(), "1/12");
    }

    #[test]
    fn closed_form_needs_k1() {
        assert!(build_rows(&spec("3..5", "1,2", "1/2", Method::ClosedForm)).is_err());
    }

    #[test]
    fn dp_rows_positive_gap() {
        let rows = build_rows(&spec("10", "2..3", "0.5", Method::Dp)).unwrap();
        assert_eq!(rows.len(), 2);
        for row in rows {
            match row.bias_gap {
                Cell::Float(g) => assert!(g > 0.0),
                Cell::Exact(_) => panic!("decimal p must stay in double mode"),
            }
        }
    }

    #[test]
    fn dp_and_closed_form_agree_for_k1() {
        let a = build_rows(&spec("2..30", "1", "1/3,3/7", Method::Dp)).unwrap();
        let b = build_rows(&spec("2..30", "1", "1/3,3/7", Method::ClosedForm)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.expectation, y.expectation);
        }
        let a = build_rows(&spec("2..60", "1", "0.1,0.5,0.93", Method::Dp)).unwrap();
        let b = build_rows(&spec("2..60", "1", "0.1,0.5,0.93", Method::ClosedForm)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let (Cell::Float(u), Cell::Float(v)) = (&x.expectation, &y.expectation) else {
                panic!("expected doubles")
            };
            assert!((u - v).abs() <= 1e-12, "n={} p={}: {u} vs {v}", x.n, x.p);
        }
    }

    #[test]
    fn empty_grid_has_header_only() {
        let rows = build_rows(&spec("5..3", "1", "0.5", Method::Dp)).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,k,p,expectation,bias_gap,method\n");
    }

    #[test]
    fn invalid_pairs_skipped() {
        let rows = build_rows(&spec("2..4", "1..3", "1/2", Method::Dp)).unwrap();
        let pairs: Vec<_> = rows.iter().map(|r| (r.n, r.k)).collect();
        assert_eq!(pairs, [(2, 1), (3, 1), (3, 2), (4, 1), (4, 2), (4, 3)]);
    }
}
