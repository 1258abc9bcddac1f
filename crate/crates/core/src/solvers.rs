//! Efficient investments and the equilibrium of the game a solution induces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::costs::{efficiency_multipliers, total_cost};
use crate::error::{Error, Result};
use crate::liability::LiabilityMatrix;
use crate::model::{InvestmentProfile, Problem};
use crate::par::{map_indexed, Execution};
use crate::root::{foc_residual, solve_marginal};

/// Relative agreement required between multistart optima.
pub const MULTISTART_RTOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    /// Bound on every first-order residual.
    pub tolerance: f64,
    /// Coordinate sweeps allowed per start in the efficient solver.
    pub max_outer_iterations: usize,
    /// Factor for growing or shrinking the 1-D bracket.
    pub bracket_growth: f64,
    /// Random starts used to certify the efficient profile.
    pub multistart: usize,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tolerance: 1e-10,
            max_outer_iterations: 500,
            bracket_growth: 2.0,
            multistart: 5,
            seed: 0,
            execution: Execution::default(),
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_outer_iterations == 0 {
            return Err(Error::InvalidParameter(
                "max_outer_iterations must be at least 1".into(),
            ));
        }
        if !(self.bracket_growth > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "bracket_growth must exceed 1, got {}",
                self.bracket_growth
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultistartCertificate {
    /// Starts that ran, including the heuristic one.
    pub starts: usize,
    pub converged: usize,
    /// Whether every converged start reached the returned profile.
    pub agree: bool,
    /// Largest componentwise relative gap to the returned profile.
    pub max_gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub profile: InvestmentProfile,
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub certificate: Option<MultistartCertificate>,
}

impl SolveResult {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0f64, |a, r| a.max(r.abs()))
    }
}

/// Largest componentwise relative difference, `|a-b| / max(|a|,|b|)`.
pub fn relative_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let scale = x.abs().max(y.abs());
            if scale == 0.0 {
                0.0
            } else {
                (x - y).abs() / scale
            }
        })
        .fold(0.0, f64::max)
}

fn check_dims(pr: &Problem, phi: &LiabilityMatrix) -> Result<()> {
    if phi.n() != pr.n() {
        return Err(Error::Dimension {
            expected: pr.n(),
            actual: phi.n(),
        });
    }
    Ok(())
}

/// Agent `k`'s cost-minimizing investment given the investments of earlier
/// agents. Later investments do not enter `C_k`.
pub fn best_response(pr: &Problem, phi: &LiabilityMatrix, x: &[f64], k: usize, opts: &SolveOptions) -> Result<f64> {
    check_dims(pr, phi)?;
    if k >= pr.n() {
        return Err(Error::IndexOutOfRange { index: k, n: pr.n() });
    }
    let before: f64 = (0..k).map(|j| pr.technologies[j].value(x[j])).product();
    Ok(solve_marginal(&pr.technologies[k], before * phi.get(k, k), opts.bracket_growth)?.x)
}

/// The unique Nash equilibrium, built front to back: agent 1's choice is
/// dominant, and each later agent best-responds to the agents before it.
pub fn solve_equilibrium(pr: &Problem, phi: &LiabilityMatrix, opts: &SolveOptions) -> Result<SolveResult> {
    opts.validate()?;
    check_dims(pr, phi)?;
    let n = pr.n();
    let mut x = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    let mut before = 1.0;
    for k in 0..n {
        let tech = &pr.technologies[k];
        let m = before * phi.get(k, k);
        let xk = match solve_marginal(tech, m, opts.bracket_growth) {
            Ok(r) => r.x,
            Err(Error::Convergence {
                context,
                iterations,
                residual,
                ..
            }) => {
                return Err(Error::Convergence {
                    context: format!("equilibrium investment of agent {}: {context}", k + 1),
                    iterations,
                    residual,
                    partial: x,
                })
            }
            Err(e) => return Err(e),
        };
        residuals.push(foc_residual(tech, xk, m));
        x.push(xk);
        before *= tech.value(xk);
    }
    let converged = residuals.iter().all(|r| r.abs() <= opts.tolerance);
    Ok(SolveResult {
        profile: InvestmentProfile::new(x)?,
        residuals,
        converged,
        iterations: n,
        certificate: None,
    })
}

struct Sweep {
    x: Vec<f64>,
    residuals: Vec<f64>,
    sweeps: usize,
}

fn efficiency_residuals(pr: &Problem, x: &[f64], p: &[f64]) -> Vec<f64> {
    efficiency_multipliers(&pr.losses, p)
        .into_iter()
        .enumerate()
        .map(|(i, m)| foc_residual(&pr.technologies[i], x[i], m))
        .collect()
}

/// Cyclic coordinate sweeps over the first-order conditions of `ℂ`.
fn sweep_from(pr: &Problem, mut x: Vec<f64>, opts: &SolveOptions) -> Result<Sweep> {
    let n = pr.n();
    let mut p: Vec<f64> = pr.success_probabilities(&InvestmentProfile::new(x.clone())?);
    let mut residuals = vec![f64::INFINITY; n];
    for sweep in 1..=opts.max_outer_iterations {
        for i in 0..n {
            let before: f64 = p[..i].iter().product();
            let mut after = 0.0;
            for k in (i + 1..n).rev() {
                after = p[k] * (pr.losses[k] + after);
            }
            let m = before * (pr.losses[i] + after);
            x[i] = solve_marginal(&pr.technologies[i], m, opts.bracket_growth)?.x;
            p[i] = pr.technologies[i].value(x[i]);
        }
        residuals = efficiency_residuals(pr, &x, &p);
        if residuals.iter().all(|r| r.abs() <= opts.tolerance) {
            return Ok(Sweep {
                x,
                residuals,
                sweeps: sweep,
            });
        }
    }
    let residual = residuals.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    Err(Error::Convergence {
        context: "efficient profile sweeps".into(),
        iterations: opts.max_outer_iterations,
        residual,
        partial: x,
    })
}

/// Starting point: each agent's optimum if it alone faced every loss from its
/// position onwards.
fn heuristic_start(pr: &Problem, opts: &SolveOptions) -> Result<Vec<f64>> {
    let mut suffix = 0.0;
    let mut x = vec![0.0; pr.n()];
    for i in (0..pr.n()).rev() {
        suffix += pr.losses[i];
        x[i] = solve_marginal(&pr.technologies[i], suffix, opts.bracket_growth)?.x;
    }
    Ok(x)
}

/// Efficient profile `x*`, the minimizer of the total cost.
///
/// The heuristic start is swept to a stationary point. With `multistart > 0`
/// the all-zero profile and `multistart` seeded random profiles (components
/// in `[0, Σℓ]`) are swept as well; the cheapest converged stationary point
/// is returned and the certificate records whether all starts agreed.
pub fn solve_efficient(pr: &Problem, opts: &SolveOptions) -> Result<SolveResult> {
    opts.validate()?;
    let n = pr.n();
    let mut starts = vec![heuristic_start(pr, opts)?];
    if opts.multistart > 0 {
        starts.push(vec![0.0; n]);
        let bound = pr.total_loss();
        for s in 0..opts.multistart {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(s as u64 + 1);
            starts.push((0..n).map(|_| rng.gen_range(0.0..=bound)).collect());
        }
    }
    let runs = map_indexed(starts.len(), opts.execution, |s| {
        sweep_from(pr, starts[s].clone(), opts)
    });

    let mut best: Option<(usize, f64)> = None;
    for (s, run) in runs.iter().enumerate() {
        if let Ok(sw) = run {
            let c = total_cost(pr, &InvestmentProfile::new(sw.x.clone())?);
            if best.is_none_or(|(_, bc)| c < bc) {
                best = Some((s, c));
            }
        }
    }
    let Some((chosen, _)) = best else {
        return Err(runs.into_iter().find_map(|r| r.err()).expect("no runs"));
    };
    let winner = runs[chosen].as_ref().expect("chosen run converged");
    let mut converged_count = 0;
    let mut max_gap = 0.0f64;
    for sw in runs.iter().flatten() {
        converged_count += 1;
        max_gap = max_gap.max(relative_gap(&sw.x, &winner.x));
    }
    let certificate = (opts.multistart > 0).then_some(MultistartCertificate {
        starts: runs.len(),
        converged: converged_count,
        agree: converged_count == runs.len() && max_gap <= MULTISTART_RTOL,
        max_gap,
    });
    Ok(SolveResult {
        profile: InvestmentProfile::new(winner.x.clone())?,
        residuals: winner.residuals.clone(),
        converged: true,
        iterations: winner.sweeps,
        certificate,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub matches: bool,
    pub max_gap: f64,
    pub equilibrium: SolveResult,
    pub efficient: SolveResult,
}

/// Whether `phi` implements the efficient profile, judged by the largest
/// relative gap between the two solved profiles.
pub fn equilibrium_equals_efficient(pr: &Problem, phi: &LiabilityMatrix, opts: &SolveOptions) -> Result<Comparison> {
    let efficient = solve_efficient(pr, opts)?;
    let equilibrium = solve_equilibrium(pr, phi, opts)?;
    let max_gap = relative_gap(&equilibrium.profile, &efficient.profile);
    Ok(Comparison {
        matches: max_gap <= MULTISTART_RTOL,
        max_gap,
        equilibrium,
        efficient,
    })
}
