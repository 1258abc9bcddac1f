//! Problems, investment profiles and the elementary chain probabilities.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::technology::Technology;

/// One chain of agents: a positive loss and a technology per agent.
///
/// Agent indices are 0-based in the API. Externally visible formats use
/// 1-based indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub losses: Vec<f64>,
    pub technologies: Vec<Technology>,
}

/// Something wrong with a [`Problem`]. Indices are 1-based in the message.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Empty,
    LengthMismatch { losses: usize, technologies: usize },
    NonPositiveLoss { agent: usize },
    Parameters { agent: usize, reason: String },
    NotIncreasing { agent: usize, at: f64 },
    NotConcave { agent: usize, at: f64 },
    NotBelowOne { agent: usize, at: f64 },
    NonzeroAtOrigin { agent: usize },
    SlopeBounded { agent: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "problem has no agents"),
            Violation::LengthMismatch { losses, technologies } => {
                write!(f, "{losses} losses but {technologies} technologies")
            }
            Violation::NonPositiveLoss { agent } => write!(f, "ℓ_{agent} not positive"),
            Violation::Parameters { agent, reason } => write!(f, "agent {agent}: {reason}"),
            Violation::NotIncreasing { agent, at } => {
                write!(f, "agent {agent}: p not strictly increasing near x={at:e}")
            }
            Violation::NotConcave { agent, at } => {
                write!(f, "agent {agent}: p not strictly concave near x={at:e}")
            }
            Violation::NotBelowOne { agent, at } => {
                write!(f, "agent {agent}: p reaches 1 at x={at:e}")
            }
            Violation::NonzeroAtOrigin { agent } => write!(f, "agent {agent}: p(0) != 0"),
            Violation::SlopeBounded { agent } => {
                write!(f, "agent {agent}: p' does not diverge at 0")
            }
        }
    }
}

impl Problem {
    /// Builds a problem and rejects it unless [`Problem::validate`] is clean.
    pub fn new(losses: Vec<f64>, technologies: Vec<Technology>) -> Result<Self> {
        let pr = Problem { losses, technologies };
        let violations = pr.validate();
        if violations.is_empty() {
            Ok(pr)
        } else {
            Err(Error::Validation(violations))
        }
    }

    /// Same technology for every agent.
    pub fn uniform(losses: Vec<f64>, technology: Technology) -> Result<Self> {
        let n = losses.len();
        Problem::new(losses, vec![technology; n])
    }

    pub fn n(&self) -> usize {
        self.losses.len()
    }

    pub fn total_loss(&self) -> f64 {
        self.losses.iter().sum()
    }

    /// Structural checks plus a numeric spot check of every technology on a
    /// log-spaced grid over `[1e-9, 1e3]`. An empty list means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.losses.is_empty() && self.technologies.is_empty() {
            out.push(Violation::Empty);
            return out;
        }
        if self.losses.len() != self.technologies.len() {
            out.push(Violation::LengthMismatch {
                losses: self.losses.len(),
                technologies: self.technologies.len(),
            });
        }
        for (i, &l) in self.losses.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) {
                out.push(Violation::NonPositiveLoss { agent: i + 1 });
            }
        }
        for (i, t) in self.technologies.iter().enumerate() {
            let agent = i + 1;
            if let Err(e) = t.validate() {
                let reason = match e {
                    Error::InvalidParameter(r) => r,
                    other => other.to_string(),
                };
                out.push(Violation::Parameters { agent, reason });
                continue;
            }
            spot_check(agent, t, &mut out);
        }
        out
    }

    /// `p_i(x_i)` for every agent.
    pub fn success_probabilities(&self, x: &InvestmentProfile) -> Vec<f64> {
        self.technologies
            .iter()
            .zip(x.iter())
            .map(|(t, &xi)| t.value(xi))
            .collect()
    }

    pub(crate) fn check_profile(&self, x: &InvestmentProfile) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                actual: x.len(),
            });
        }
        Ok(())
    }
}

fn spot_check(agent: usize, t: &Technology, out: &mut Vec<Violation>) {
    const POINTS: usize = 241;
    if t.value(0.0) != 0.0 {
        out.push(Violation::NonzeroAtOrigin { agent });
    }
    let grid = (0..POINTS).map(|k| 10f64.powf(-9.0 + 12.0 * k as f64 / (POINTS - 1) as f64));
    let mut prev: Option<(f64, f64)> = None;
    for x in grid {
        let (p, d) = (t.value(x), t.slope(x));
        if p >= 1.0 {
            out.push(Violation::NotBelowOne { agent, at: x });
            return;
        }
        if let Some((pp, pd)) = prev {
            if !(p >= pp) || d < 0.0 || d.is_nan() {
                out.push(Violation::NotIncreasing { agent, at: x });
                return;
            }
            // Once the slope underflows the curve is saturated in floating
            // point and concavity can no longer be observed.
            if pd > 0.0 && !(d < pd) {
                out.push(Violation::NotConcave { agent, at: x });
                return;
            }
        }
        prev = Some((p, d));
    }
    let mut last = 0.0;
    for k in 3..=12 {
        let d = t.slope(10f64.powi(-k));
        if !(d > last) {
            out.push(Violation::SlopeBounded { agent });
            return;
        }
        last = d;
    }
}

/// Investment profile `x`, one nonnegative amount per agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InvestmentProfile(Vec<f64>);

impl InvestmentProfile {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::Domain(format!(
                "investment of agent {} must be nonnegative, got {v}",
                i + 1
            )));
        }
        Ok(InvestmentProfile(x))
    }

    pub fn zeros(n: usize) -> Self {
        InvestmentProfile(vec![0.0; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl Deref for InvestmentProfile {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Prefix products `(p_1 ... p_j)_{j=1..n}`: the probability that agents
/// `1..=j` all succeed.
pub fn chain_success_prefix(pr: &Problem, x: &InvestmentProfile) -> Vec<f64> {
    let mut acc = 1.0;
    pr.success_probabilities(x)
        .into_iter()
        .map(|p| {
            acc *= p;
            acc
        })
        .collect()
}

/// Probability that each agent is the disruptor; the extra last entry is the
/// probability that nobody fails.
pub fn disruptor_distribution(pr: &Problem, x: &InvestmentProfile) -> Vec<f64> {
    let mut out = Vec::with_capacity(pr.n() + 1);
    let mut before = 1.0;
    for p in pr.success_probabilities(x) {
        out.push(before * (1.0 - p));
        before *= p;
    }
    out.push(before);
    out
}

/// Converts strictly decreasing systemic losses `L` into marginal losses
/// `ℓ_i = L_i - L_{i+1}` with `L_{n+1} = 0`.
pub fn marginal_losses_from_systemic(systemic: &[f64]) -> Result<Vec<f64>> {
    if systemic.is_empty() {
        return Err(Error::Domain("no systemic losses given".into()));
    }
    for w in systemic.windows(2) {
        if !(w[0] > w[1]) {
            return Err(Error::Domain(format!(
                "systemic losses must be strictly decreasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    let last = systemic[systemic.len() - 1];
    if !(last > 0.0 && last.is_finite()) {
        return Err(Error::Domain(format!("systemic losses must be positive, got {last}")));
    }
    let mut out: Vec<f64> = systemic.windows(2).map(|w| w[0] - w[1]).collect();
    out.push(last);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sqrt_problem(losses: &[f64]) -> Problem {
        Problem::uniform(losses.to_vec(), Technology::sqrt(1.0).unwrap()).unwrap()
    }

    /// Profile whose success probabilities under `p(x) = sqrt(x)/(1+sqrt(x))`
    /// are exactly `probs`.
    fn profile_for(probs: &[f64]) -> InvestmentProfile {
        InvestmentProfile::new(probs.iter().map(|p| (p / (1.0 - p)).powi(2)).collect()).unwrap()
    }

    #[test]
    fn validation_reports() {
        let sq = Technology::sqrt(1.0).unwrap();
        let ok = Problem {
            losses: vec![1.0, 2.0],
            technologies: vec![sq; 2],
        };
        assert!(ok.validate().is_empty());

        let zero = Problem {
            losses: vec![1.0, 0.0],
            technologies: vec![sq; 2],
        };
        let v = zero.validate();
        assert_eq!(v, vec![Violation::NonPositiveLoss { agent: 2 }]);
        assert_eq!(v[0].to_string(), "ℓ_2 not positive");

        let bad = Problem {
            losses: vec![1.0],
            technologies: vec![Technology::PowerExponential {
                ceiling: 1.5,
                rate: 1.0,
                exponent: 0.5,
            }],
        };
        let v = bad.validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().contains("ceiling A outside (0,1)"));

        let mismatch = Problem {
            losses: vec![1.0, 2.0],
            technologies: vec![sq],
        };
        assert!(matches!(mismatch.validate()[0], Violation::LengthMismatch { .. }));
        assert!(Problem::new(vec![1.0, -1.0], vec![sq; 2]).is_err());
    }

    #[test]
    fn saturating_technologies_pass_the_grid_check() {
        let pr = Problem {
            losses: vec![1.0, 1.0, 1.0],
            technologies: vec![
                Technology::power_exponential(0.95, 0.1, 0.9).unwrap(),
                Technology::kinked(0.99, 0.999, 1.005, 5e-4).unwrap(),
                Technology::sqrt(1e-3).unwrap(),
            ],
        };
        assert_eq!(pr.validate(), vec![]);
    }

    #[test]
    fn prefix_products() {
        let pr = sqrt_problem(&[1.0, 1.0]);
        let q = chain_success_prefix(&pr, &profile_for(&[0.5, 0.5]));
        assert!((q[0] - 0.5).abs() < 1e-15 && (q[1] - 0.25).abs() < 1e-15);

        let pr = sqrt_problem(&[1.0, 1.0, 1.0]);
        let q = chain_success_prefix(&pr, &profile_for(&[0.9, 0.8, 0.7]));
        for (a, b) in q.iter().zip([0.9, 0.72, 0.504]) {
            assert!((a - b).abs() < 1e-12);
        }
        let x = InvestmentProfile::new(vec![0.0, 3.0, 4.0]).unwrap();
        assert_eq!(chain_success_prefix(&pr, &x), vec![0.0; 3]);
    }

    #[test]
    fn disruptor_probabilities() {
        let pr = sqrt_problem(&[1.0, 1.0]);
        let d = disruptor_distribution(&pr, &profile_for(&[0.5, 0.5]));
        for (a, b) in d.iter().zip([0.5, 0.25, 0.25]) {
            assert!((a - b).abs() < 1e-15);
        }
        let d = disruptor_distribution(&pr, &profile_for(&[0.9, 0.8]));
        for (a, b) in d.iter().zip([0.1, 0.18, 0.72]) {
            assert!((a - b).abs() < 1e-12);
        }
        let pr = sqrt_problem(&[1.0, 1.0, 1.0]);
        assert_eq!(
            disruptor_distribution(&pr, &InvestmentProfile::zeros(3)),
            vec![1.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn systemic_conversion() {
        assert_eq!(
            marginal_losses_from_systemic(&[6.0, 3.0, 1.0]).unwrap(),
            vec![3.0, 2.0, 1.0]
        );
        assert_eq!(marginal_losses_from_systemic(&[5.0]).unwrap(), vec![5.0]);
        assert!(marginal_losses_from_systemic(&[3.0, 3.0]).is_err());
        assert!(marginal_losses_from_systemic(&[3.0, 0.0]).is_err());
        assert!(marginal_losses_from_systemic(&[]).is_err());
    }

    #[test]
    fn negative_investment_rejected() {
        assert!(InvestmentProfile::new(vec![1.0, -0.1]).is_err());
        assert!(InvestmentProfile::new(vec![f64::NAN]).is_err());
    }
}
