//! File formats: problem JSON, π-weights JSON, liability matrix CSV and the
//! solver / cost CSV reports.
//!
//! Numbers are written with 17 significant digits, which round-trips every
//! `f64`. Agent indices in files are 1-based.

use std::fmt::Write as _;

use crate::costs::CostReport;
use crate::error::{Error, Result};
use crate::liability::{LiabilityMatrix, PiWeights};
use crate::model::{InvestmentProfile, Problem};
use crate::solvers::SolveResult;

/// Shortest `%.17g`-style rendering: 17 significant digits, trailing zeros
/// dropped, exponent form outside `[1e-5, 1e17)`.
pub fn g17(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..17).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (16 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn problem_from_json(text: &str) -> Result<Problem> {
    let pr: Problem = serde_json::from_str(text)?;
    let violations = pr.validate();
    if violations.is_empty() {
        Ok(pr)
    } else {
        Err(Error::Validation(violations))
    }
}

pub fn problem_to_json(pr: &Problem) -> String {
    serde_json::to_string_pretty(pr).expect("problem serializes")
}

pub fn pi_from_json(text: &str) -> Result<PiWeights> {
    let raw: Vec<f64> = serde_json::from_str(text)?;
    PiWeights::new(raw)
}

pub fn pi_to_json(pi: &PiWeights) -> String {
    let items: Vec<String> = pi.as_slice().iter().map(|&w| g17(w)).collect();
    format!("[{}]\n", items.join(","))
}

/// Header `agent_1,...,agent_n`, then one row per disruptor.
pub fn matrix_to_csv(phi: &LiabilityMatrix) -> String {
    let mut out = String::new();
    let header: Vec<String> = (1..=phi.n()).map(|j| format!("agent_{j}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in phi.rows() {
        let cells: Vec<String> = row.iter().map(|&v| g17(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Reads a square matrix; the header row is optional.
pub fn matrix_from_csv(text: &str) -> Result<LiabilityMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if line == 0 => continue,
            Err(e) => return Err(Error::Parse(format!("line {}: {e}", line + 1))),
        }
    }
    LiabilityMatrix::from_rows(rows)
}

/// Columns `agent,investment,residual`.
pub fn solve_result_csv(result: &SolveResult) -> String {
    let mut out = String::from("agent,investment,residual\n");
    for (i, (x, r)) in result.profile.iter().zip(&result.residuals).enumerate() {
        let _ = writeln!(out, "{},{},{}", i + 1, g17(*x), g17(*r));
    }
    out
}

/// Columns `agent,expected_cost,investment,p_disrupt`; the trailing `none`
/// row holds the probability that nobody fails.
pub fn cost_report_csv(report: &CostReport, x: &InvestmentProfile) -> String {
    let mut out = String::from("agent,expected_cost,investment,p_disrupt\n");
    for (i, c) in report.per_agent.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            i + 1,
            g17(*c),
            g17(x[i]),
            g17(report.disruptor_probs[i])
        );
    }
    let none = report.disruptor_probs.last().copied().unwrap_or(1.0);
    let _ = writeln!(out, "none,,,{}", g17(none));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liability::pi_solution;
    use proptest::prelude::*;

    #[test]
    fn g17_shapes() {
        assert_eq!(g17(0.0), "0");
        assert_eq!(g17(1.0), "1");
        assert_eq!(g17(0.5), "0.5");
        assert_eq!(g17(33.5), "33.5");
        assert_eq!(g17(0.1), "0.10000000000000001");
        assert_eq!(g17(1e-7), "9.9999999999999995e-08");
        assert_eq!(g17(1e20), "1e+20");
        assert_eq!(g17(-2.25), "-2.25");
        assert_eq!(g17(123456789.125), "123456789.125");
    }

    proptest! {
        #[test]
        fn g17_round_trips(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            let s = g17(v);
            prop_assert_eq!(s.parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn matrix_csv_round_trip() {
        let l = [10.0, 20.0, 30.0];
        let phi = pi_solution(&l, &PiWeights::new(vec![0.0, 0.5, 0.9]).unwrap()).unwrap();
        let text = matrix_to_csv(&phi);
        assert!(text.starts_with("agent_1,agent_2,agent_3\n"));
        assert_eq!(matrix_from_csv(&text).unwrap(), phi);
        let bare = "1,2\n0,3\n";
        assert_eq!(matrix_from_csv(bare).unwrap().get(1, 1), 3.0);
        assert!(matrix_from_csv("1,2\n0,x\n").is_err());
        assert!(matrix_from_csv("1,2,3\n0,3,1\n").is_err());
    }

    #[test]
    fn problem_json() {
        let text = r#"{"losses":[1,2],"technologies":[{"family":"sqrt","scale":1},
            {"family":"powerexp","ceiling":0.9,"rate":1,"exponent":0.5}]}"#;
        let pr = problem_from_json(text).unwrap();
        assert_eq!(pr.n(), 2);
        assert_eq!(problem_from_json(&problem_to_json(&pr)).unwrap(), pr);
        let bad = r#"{"losses":[1,0],"technologies":[{"family":"sqrt"},{"family":"sqrt"}]}"#;
        match problem_from_json(bad) {
            Err(Error::Validation(v)) => assert_eq!(v[0].to_string(), "ℓ_2 not positive"),
            other => panic!("{other:?}"),
        }
        assert!(problem_from_json(r#"{"losses":[1],"technologies":[]}"#).is_err());
        assert!(problem_from_json(r#"{"losses":[1],"technologies":[{"family":"sqrt"}],"x":1}"#).is_err());
    }

    #[test]
    fn pi_json() {
        let pi = pi_from_json("[0, 0.5, 0.9]").unwrap();
        assert_eq!(pi.as_slice(), &[0.0, 0.5, 0.9]);
        assert_eq!(pi_from_json(&pi_to_json(&pi)).unwrap(), pi);
        assert!(pi_from_json("[0, 1.5]").is_err());
    }
}
