//! Unbounded efficiency loss of disruptor-pays.
//!
//! With losses `(ε, …, ε, 1)` and a technology that is nearly linear up to
//! `x = 1-ε` with slope just above one over the survival probability of the
//! chain, each agent under disruptor-pays insures the final loss on its own
//! and invests more than `1-ε`, while the efficient profile invests almost
//! nothing. The cost ratio therefore grows roughly like `n`.

use serde::Serialize;
use serde_json::json;

use crate::costs::total_cost;
use crate::error::{Error, Result};
use crate::format::g17;
use crate::liability::{disruptor_pays, pi_solution, PiWeights};
use crate::model::{InvestmentProfile, Problem};
use crate::solvers::{relative_gap, solve_efficient, solve_equilibrium, SolveOptions};
use crate::technology::Technology;

#[derive(Clone, Debug, PartialEq)]
pub struct PoaConfig {
    pub n: usize,
    pub epsilon: f64,
    /// Ratio the run is expected to exceed; reported, not enforced.
    pub bound: f64,
    pub solver: SolveOptions,
}

impl PoaConfig {
    pub fn new(n: usize, epsilon: f64) -> Self {
        PoaConfig {
            n,
            epsilon,
            bound: 5.0,
            solver: SolveOptions::default(),
        }
    }
}

fn check_inputs(n: usize, epsilon: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one agent".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0,1), got {epsilon}"
        )));
    }
    Ok(())
}

/// `δ` with `(1-δ)^(n+1) = 1-ε`.
pub fn poa_delta(n: usize, epsilon: f64) -> Result<f64> {
    check_inputs(n, epsilon)?;
    Ok(-((-epsilon).ln_1p() / (n as f64 + 1.0)).exp_m1())
}

/// Slope band at `x0 = 1-ε`: `(1-δ)²/(1-ε) < p'(x0) < (1-δ)/(1-ε)`.
pub fn slope_band(n: usize, epsilon: f64) -> Result<(f64, f64)> {
    let delta = poa_delta(n, epsilon)?;
    let x0 = 1.0 - epsilon;
    Ok(((1.0 - delta).powi(2) / x0, (1.0 - delta) / x0))
}

/// A kinked technology with `p(1-ε) = 1-δ` and `p'(1-ε)` at the geometric
/// midpoint of the slope band.
pub fn calibrate_poa_technology(n: usize, epsilon: f64) -> Result<Technology> {
    let delta = poa_delta(n, epsilon)?;
    let x0 = 1.0 - epsilon;
    let level = 1.0 - delta;
    let (lo, hi) = slope_band(n, epsilon)?;
    let slope = level.powf(1.5) / x0;
    if !(delta > 0.0 && delta < epsilon && lo < slope && slope < hi && level < 1.0) {
        return Err(Error::Calibration(format!(
            "slope band collapsed for n={n}, epsilon={epsilon} (delta={delta}); use a larger epsilon"
        )));
    }
    let tech = Technology::kinked(x0, level, slope, delta / 2.0)
        .map_err(|e| Error::Calibration(format!("calibrated curve is invalid: {e}")))?;
    let (p, d) = (tech.value(x0), tech.slope(x0));
    if (p - level).abs() > 1e-10 || !(lo < d && d < hi) || !(p > x0 * d) {
        return Err(Error::Calibration(format!(
            "calibrated curve misses its targets at x0={x0}: p={p}, p'={d}, band=({lo}, {hi})"
        )));
    }
    Ok(tech)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoaOutcome {
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub ratio: f64,
    pub certified: bool,
    pub c_hat: f64,
    pub c_star: f64,
    pub x_hat: InvestmentProfile,
    pub x_star: InvestmentProfile,
    /// Relative gap between `x*` and the equilibrium under `φ*`.
    pub first_best_gap: f64,
    pub exceeds_bound: bool,
    pub technology: Technology,
}

impl PoaOutcome {
    /// `{n, epsilon, delta, ratio, certified, c_hat, c_star}`.
    pub fn summary_json(&self) -> serde_json::Value {
        json!({
            "n": self.n,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "ratio": self.ratio,
            "certified": self.certified,
            "c_hat": self.c_hat,
            "c_star": self.c_star,
        })
    }

    /// The same object rendered with 17 significant digits.
    pub fn summary_text(&self) -> String {
        format!(
            "{{\"n\":{},\"epsilon\":{},\"delta\":{},\"ratio\":{},\"certified\":{},\"c_hat\":{},\"c_star\":{}}}\n",
            self.n,
            g17(self.epsilon),
            g17(self.delta),
            g17(self.ratio),
            self.certified,
            g17(self.c_hat),
            g17(self.c_star)
        )
    }
}

/// Solves the construction: `x̂` under disruptor-pays and `x*` as the
/// efficient profile, which is also the equilibrium under `φ*`.
pub fn run_poa(cfg: &PoaConfig) -> Result<PoaOutcome> {
    let (n, eps) = (cfg.n, cfg.epsilon);
    let delta = poa_delta(n, eps)?;
    let tech = calibrate_poa_technology(n, eps)?;
    let mut losses = vec![eps; n];
    losses[n - 1] = 1.0;
    let pr = Problem::uniform(losses, tech)?;

    let x_hat = solve_equilibrium(&pr, &disruptor_pays(&pr.losses), &cfg.solver)?.profile;
    let x_star = solve_efficient(&pr, &cfg.solver)?.profile;
    // Deep in the chain the efficient investments underflow to zero, so φ*
    // is built from the success probabilities directly.
    let pi = PiWeights::new(pr.success_probabilities(&x_star))?;
    let implemented = solve_equilibrium(&pr, &pi_solution(&pr.losses, &pi)?, &cfg.solver)?.profile;

    let c_hat = total_cost(&pr, &x_hat);
    let c_star = total_cost(&pr, &x_star);
    let ratio = c_hat / c_star;
    let certified = x_hat.iter().all(|&x| x > 1.0 - eps) && c_star < 1.0 + (n as f64 - 1.0) * eps;
    Ok(PoaOutcome {
        n,
        epsilon: eps,
        delta,
        ratio,
        certified,
        c_hat,
        c_star,
        first_best_gap: relative_gap(&implemented, &x_star),
        exceeds_bound: ratio > cfg.bound,
        x_hat,
        x_star,
        technology: tech,
    })
}
