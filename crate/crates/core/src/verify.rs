//! Numerical checks of the model's structural results on seeded random
//! problems with mixed technologies.
//!
//! Checks come in two kinds. Bound checks pass when the measured quantity
//! is at most the tolerance. Detection checks (names ending in `_detected`
//! or `.converse`) pass when the measured quantity exceeds it, i.e. when a
//! constructed counterexample is actually told apart.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::costs::{cross_partial, expected_cost, expected_costs, partial_cost, total_cost, total_gradient};
use crate::error::{Error, Result};
use crate::format::g17;
use crate::liability::{check_axioms, phi_star, pi_solution, recover_pi_strict, LiabilityMatrix, PiWeights};
use crate::model::{InvestmentProfile, Problem};
use crate::par::{map_indexed, Execution};
use crate::solvers::{relative_gap, solve_efficient, solve_equilibrium, SolveOptions, MULTISTART_RTOL};
use crate::technology::Technology;

/// Relative size of the diagonal perturbation in the converse tests.
pub const PERTURBATION: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub worst_violation: f64,
    pub tolerance: f64,
    /// Seed and dimensions of the problem the check ran on.
    pub fingerprint: String,
}

impl Check {
    fn bound(name: &str, worst: f64, tolerance: f64, fingerprint: &str) -> Self {
        Check {
            name: name.into(),
            pass: worst <= tolerance,
            worst_violation: worst,
            tolerance,
            fingerprint: fingerprint.into(),
        }
    }

    fn detect(name: &str, measured: f64, threshold: f64, fingerprint: &str) -> Self {
        Check {
            name: name.into(),
            pass: measured > threshold,
            worst_violation: measured,
            tolerance: threshold,
            fingerprint: fingerprint.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    /// Componentwise relative gap between investment profiles.
    pub profile: f64,
    /// `‖∇ℂ(x*)‖∞`, relative to `Σℓ`.
    pub gradient: f64,
    /// Cost derivatives under `φ*`, relative to `Σℓ`.
    pub derivative: f64,
    /// Equilibrium cost identity, relative to `Σℓ`.
    pub identity: f64,
    /// Profile gap a perturbed diagonal must produce.
    pub separation: f64,
    /// Largest admissible cross partial.
    pub sign: f64,
    /// Relative agreement of cross partials with finite differences.
    pub finite_difference: f64,
    /// Absolute error of recovered π weights.
    pub recovery: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            profile: 1e-6,
            gradient: 1e-8,
            derivative: 1e-6,
            identity: 1e-8,
            separation: 1e-4,
            sign: 1e-12,
            finite_difference: 1e-4,
            recovery: 1e-12,
        }
    }
}

fn solver() -> SolveOptions {
    SolveOptions {
        execution: Execution::Sequential,
        ..SolveOptions::default()
    }
}

fn fingerprint(pr: &Problem) -> String {
    format!("n={} losses={}", pr.n(), g17(pr.total_loss()))
}

/// `φ` with the diagonal of `phi` and each row's indirect total moved to
/// column `target(i)`.
fn concentrate_indirect(phi: &LiabilityMatrix, target: impl Fn(usize) -> Option<usize>) -> LiabilityMatrix {
    let n = phi.n();
    let mut out = phi.clone();
    for i in 0..n {
        let Some(t) = target(i) else { continue };
        let total: f64 = (i + 1..n).map(|k| phi.get(i, k)).sum();
        for k in i + 1..n {
            out.set(i, k, if k == t { total } else { 0.0 });
        }
    }
    out
}

/// `phi` with `φ(i,i)` raised by [`PERTURBATION`] and the row's indirect
/// entries scaled down to keep the row sum. `None` if they cannot absorb it.
pub fn perturb_diagonal(phi: &LiabilityMatrix, i: usize) -> Option<LiabilityMatrix> {
    let n = phi.n();
    let bump = PERTURBATION * phi.get(i, i);
    let indirect: f64 = (i + 1..n).map(|k| phi.get(i, k)).sum();
    if i + 1 >= n || !(indirect >= bump) || bump == 0.0 {
        return None;
    }
    let scale = (indirect - bump) / indirect;
    let mut out = phi.clone();
    out.set(i, i, phi.get(i, i) + bump);
    for k in i + 1..n {
        out.set(i, k, phi.get(i, k) * scale);
    }
    Some(out)
}

/// First-best theorem, both directions. Fails with [`Error::Domain`] when no
/// row admits the +5% diagonal perturbation.
pub fn verify_first_best(pr: &Problem, tol: &Tolerances) -> Result<Vec<Check>> {
    let fp = fingerprint(pr);
    let opts = solver();
    let eff = solve_efficient(pr, &opts)?;
    let x = &eff.profile;
    let phi = phi_star(pr, x)?;
    let mut checks = Vec::new();

    let grad = total_gradient(pr, x)?.iter().fold(0.0f64, |a, g| a.max(g.abs()));
    checks.push(Check::bound(
        "efficient.gradient",
        grad,
        tol.gradient * pr.total_loss(),
        &fp,
    ));
    let cert = eff
        .certificate
        .as_ref()
        .map_or(0.0, |c| if c.agree { c.max_gap } else { f64::INFINITY });
    checks.push(Check::bound("efficient.multistart", cert, MULTISTART_RTOL, &fp));

    let forward = solve_equilibrium(pr, &phi, &opts)?;
    checks.push(Check::bound(
        "first_best.forward",
        relative_gap(&forward.profile, x),
        tol.profile,
        &fp,
    ));

    let n = pr.n();
    let last = concentrate_indirect(&phi, |i| (i + 1 < n).then_some(n - 1));
    let moved = solve_equilibrium(pr, &last, &opts)?;
    checks.push(Check::bound(
        "first_best.rebalanced",
        relative_gap(&moved.profile, x),
        tol.profile,
        &fp,
    ));

    let Some((row, perturbed)) = (0..n).find_map(|i| perturb_diagonal(&phi, i).map(|m| (i, m))) else {
        return Err(Error::Domain("no row can absorb the diagonal perturbation".into()));
    };
    let shifted = solve_equilibrium(pr, &perturbed, &opts)?;
    let fp_row = format!("{fp} row={}", row + 1);
    checks.push(Check::detect(
        "first_best.converse",
        relative_gap(&shifted.profile, x),
        tol.separation,
        &fp_row,
    ));
    if row == 0 {
        checks.push(Check::detect(
            "first_best.converse_direction",
            shifted.profile[0] - x[0],
            0.0,
            &fp_row,
        ));
    }
    Ok(checks)
}

/// Largest `|∂C_k/∂x_i|` over `i ≤ k` at `x`.
pub fn max_cost_partial(pr: &Problem, phi: &LiabilityMatrix, x: &InvestmentProfile) -> Result<(f64, usize, usize)> {
    let mut worst = (0.0, 0, 0);
    for k in 0..pr.n() {
        for i in 0..=k {
            let d = partial_cost(pr, phi, x, k, i)?.abs();
            if d > worst.0 {
                worst = (d, i, k);
            }
        }
    }
    Ok(worst)
}

/// The strongest indirect rebalance of `phi*`: one row's whole indirect
/// total moved onto a single column, searched over rows with at least two
/// indirect entries and over target columns. Returns the matrix and its
/// largest cost derivative at `x`.
pub fn strongest_rebalance(
    pr: &Problem,
    phi: &LiabilityMatrix,
    x: &InvestmentProfile,
) -> Result<Option<(LiabilityMatrix, f64)>> {
    let n = pr.n();
    let mut best: Option<(LiabilityMatrix, f64)> = None;
    for i in 0..n.saturating_sub(2) {
        for t in i + 1..n {
            let alt = concentrate_indirect(phi, |r| (r == i).then_some(t));
            let (v, _, _) = max_cost_partial(pr, &alt, x)?;
            if best.as_ref().is_none_or(|(_, b)| v > *b) {
                best = Some((alt, v));
            }
        }
    }
    Ok(best)
}

/// Cross-effects theorem: all own and upstream cost derivatives vanish at
/// `x*` under `φ*`, and an indirect rebalance breaks that.
pub fn verify_cross_effects(pr: &Problem, tol: &Tolerances) -> Result<Vec<Check>> {
    let fp = fingerprint(pr);
    let x = solve_efficient(pr, &solver())?.profile;
    let phi = phi_star(pr, &x)?;
    let scale = tol.derivative * pr.total_loss();
    let (worst, i, k) = max_cost_partial(pr, &phi, &x)?;
    let mut checks = vec![Check::bound(
        "cross_effects.phi_star",
        worst,
        scale,
        &format!("{fp} pair=({},{})", i + 1, k + 1),
    )];
    if let Some((alt, v)) = strongest_rebalance(pr, &phi, &x)? {
        let report = check_axioms(&alt, &pr.losses);
        let balanced = report.balance && report.well_formed;
        checks.push(Check::detect(
            "cross_effects.rebalance_detected",
            if balanced { v } else { 0.0 },
            10.0 * scale,
            &fp,
        ));
    }
    Ok(checks)
}

/// Random balanced solution: each row splits its downstream loss total
/// with weights drawn from `[0.2, 1]`.
pub fn random_balanced_solution(rng: &mut impl Rng, losses: &[f64]) -> LiabilityMatrix {
    let n = losses.len();
    let mut phi = LiabilityMatrix::zeros(n);
    let mut suffix = 0.0;
    for i in (0..n).rev() {
        suffix += losses[i];
        let w: Vec<f64> = (i..n).map(|_| rng.gen_range(0.2..=1.0)).collect();
        let total: f64 = w.iter().sum();
        for (k, wk) in (i..n).zip(&w) {
            phi.set(i, k, suffix * wk / total);
        }
    }
    phi
}

/// Central mixed difference of `C_k` in `x_i` and `x_k`, with relative
/// steps of `1e-3`.
pub fn mixed_difference(pr: &Problem, phi: &LiabilityMatrix, x: &InvestmentProfile, k: usize, i: usize) -> Result<f64> {
    let (hi, hk) = (1e-3 * x[i], 1e-3 * x[k]);
    let at = |di: f64, dk: f64| -> Result<f64> {
        let mut y = x.to_vec();
        y[i] += di;
        y[k] += dk;
        expected_cost(pr, phi, &InvestmentProfile::new(y)?, k)
    };
    Ok((at(hi, hk)? - at(hi, -hk)? - at(-hi, hk)? + at(-hi, -hk)?) / (4.0 * hi * hk))
}

/// Supermodularity: every cross partial is non-positive and matches a
/// finite difference, over `samples` random balanced solutions and interior
/// profiles (components log-uniform on `[0.05, 5]`).
pub fn verify_supermodularity(pr: &Problem, samples: usize, seed: u64, tol: &Tolerances) -> Result<Vec<Check>> {
    let fp = fingerprint(pr);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_sign, mut worst_fd) = (f64::NEG_INFINITY, 0.0f64);
    for _ in 0..samples {
        let phi = random_balanced_solution(&mut rng, &pr.losses);
        let x = InvestmentProfile::new(
            (0..pr.n())
                .map(|_| (rng.gen_range((0.05f64).ln()..=(5.0f64).ln())).exp())
                .collect(),
        )?;
        for k in 1..pr.n() {
            for i in 0..k {
                let a = cross_partial(pr, &phi, &x, k, i)?;
                let fd = mixed_difference(pr, &phi, &x, k, i)?;
                worst_sign = worst_sign.max(a);
                worst_fd = worst_fd.max((a - fd).abs() / a.abs().max(f64::MIN_POSITIVE));
            }
        }
    }
    if pr.n() < 2 {
        worst_sign = 0.0;
    }
    Ok(vec![
        Check::bound("supermodularity.sign", worst_sign, tol.sign, &fp),
        Check::bound(
            "supermodularity.finite_difference",
            worst_fd,
            tol.finite_difference,
            &fp,
        ),
    ])
}

/// Equilibrium cost identity: `C_j(x*; φ*) = φ*(i,j) + x*_j` for every
/// upstream `i`, and `C_1 = (1-p_1)φ*(1,1) + x*_1`.
pub fn verify_equilibrium_identity(pr: &Problem, tol: &Tolerances) -> Result<Vec<Check>> {
    let fp = fingerprint(pr);
    let x = solve_efficient(pr, &solver())?.profile;
    let phi = phi_star(pr, &x)?;
    let c = expected_costs(pr, &phi, &x)?;
    let p1 = pr.technologies[0].value(x[0]);
    let mut worst = (c[0] - ((1.0 - p1) * phi.get(0, 0) + x[0])).abs();
    for j in 1..pr.n() {
        for i in 0..j {
            worst = worst.max((c[j] - phi.get(i, j) - x[j]).abs());
        }
    }
    Ok(vec![Check::bound(
        "equilibrium_identity",
        worst,
        tol.identity * pr.total_loss(),
        &fp,
    )])
}

/// Efficiency certificate: `ℂ(x*)` is no larger than at `samples` random
/// nearby profiles (componentwise noise of 1e-3 relative, clipped at 0).
pub fn verify_local_optimality(pr: &Problem, samples: usize, seed: u64) -> Result<Vec<Check>> {
    let fp = fingerprint(pr);
    let x = solve_efficient(pr, &solver())?.profile;
    let c = total_cost(pr, &x);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let y: Vec<f64> = x
            .iter()
            .map(|&v| (v + 1e-3 * (1.0 + v) * rng.gen_range(-1.0..=1.0)).max(0.0))
            .collect();
        worst = worst.max(c - total_cost(pr, &InvestmentProfile::new(y)?));
    }
    Ok(vec![Check::bound(
        "efficient.local_optimality",
        worst,
        1e-12 * pr.total_loss(),
        &fp,
    )])
}

pub fn random_losses(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(1.0..=100.0)).collect()
}

/// π-family matrices pass the axioms and give their weights back.
pub fn verify_axiom_round_trips(samples: usize, seed: u64, tol: &Tolerances) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut failures, mut worst) = (0usize, 0.0f64);
    for _ in 0..samples {
        let n = rng.gen_range(1..=8);
        let losses = random_losses(&mut rng, n);
        let pi = PiWeights::new((0..n).map(|_| rng.gen_range(0.0..=1.0)).collect())?;
        let phi = pi_solution(&losses, &pi)?;
        if !check_axioms(&phi, &losses).all_pass() {
            failures += 1;
            continue;
        }
        let back = recover_pi_strict(&phi, &losses)?;
        for j in 1..n {
            worst = worst.max((back.as_slice()[j] - pi.as_slice()[j]).abs());
        }
    }
    let fp = format!("seed={seed} samples={samples}");
    Ok(vec![
        Check::bound("liability.axioms_hold", failures as f64, 0.0, &fp),
        Check::bound("liability.pi_recovery", worst, tol.recovery, &fp),
    ])
}

/// The three kinds of axiom violation, built from a valid matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Defect {
    Balance,
    HigherDirect,
    Independence,
}

/// Breaks one axiom of `phi` (needs `n ≥ 3`). Returns the matrix and the
/// affected row.
pub fn break_axiom(
    rng: &mut impl Rng,
    phi: &LiabilityMatrix,
    losses: &[f64],
    defect: Defect,
) -> (LiabilityMatrix, usize) {
    let n = phi.n();
    let total: f64 = losses.iter().sum();
    let mut out = phi.clone();
    match defect {
        Defect::Balance => {
            let i = rng.gen_range(0..n);
            let k = rng.gen_range(i..n);
            out.set(i, k, phi.get(i, k) + 0.01 * total + 1.0);
            (out, i)
        }
        Defect::HigherDirect => {
            let k = rng.gen_range(1..n);
            let j = rng.gen_range(0..k);
            let target = 1.1 * phi.get(k, k) + 1.0;
            let m = target - phi.get(j, k);
            out.set(j, k, target);
            out.set(j, j, phi.get(j, j) - m);
            (out, j)
        }
        Defect::Independence => {
            let k = rng.gen_range(2..n);
            let i = rng.gen_range(0..k);
            let d = 0.1 * phi.get(i, i);
            out.set(i, k, phi.get(i, k) + d);
            out.set(i, i, phi.get(i, i) - d);
            (out, i)
        }
    }
}

/// Constructed violations are each caught by the matching axiom check, and
/// balance failures point at the broken row.
pub fn verify_axiom_violations(samples: usize, seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut missed = [0usize; 3];
    let mut mislocated = 0usize;
    for s in 0..samples {
        let n = rng.gen_range(3..=8);
        let losses = random_losses(&mut rng, n);
        let pi = PiWeights::new((0..n).map(|_| rng.gen_range(0.0..=1.0)).collect())?;
        let phi = pi_solution(&losses, &pi)?;
        let defect = [Defect::Balance, Defect::HigherDirect, Defect::Independence][s % 3];
        let (broken, row) = break_axiom(&mut rng, &phi, &losses, defect);
        let r = check_axioms(&broken, &losses);
        let caught = match defect {
            Defect::Balance => !r.balance,
            Defect::HigherDirect => !r.higher_direct,
            Defect::Independence => !r.independent_indirect,
        };
        if !caught {
            missed[s % 3] += 1;
        }
        if defect == Defect::Balance && r.worst_balance_row != Some(row) {
            mislocated += 1;
        }
    }
    let fp = format!("seed={seed} samples={samples}");
    Ok(vec![
        Check::bound("liability.balance_violation_detected", missed[0] as f64, 0.0, &fp),
        Check::bound("liability.higher_direct_violation_detected", missed[1] as f64, 0.0, &fp),
        Check::bound("liability.independence_violation_detected", missed[2] as f64, 0.0, &fp),
        Check::bound("liability.balance_row_located", mislocated as f64, 0.0, &fp),
    ])
}

/// Heterogeneous technology: square-root or power-exponential with random
/// parameters.
pub fn random_technology(rng: &mut impl Rng) -> Technology {
    if rng.gen_bool(0.5) {
        Technology::SqrtSaturating {
            scale: rng.gen_range(0.5..=2.0),
        }
    } else {
        Technology::PowerExponential {
            ceiling: rng.gen_range(0.85..=0.99),
            rate: rng.gen_range(0.5..=5.0),
            exponent: rng.gen_range(0.3..=0.8),
        }
    }
}

pub fn random_problem(rng: &mut impl Rng, n: usize) -> Problem {
    let losses = random_losses(rng, n);
    let technologies = (0..n).map(|_| random_technology(rng)).collect();
    Problem::new(losses, technologies).expect("random problems are valid")
}

/// Generator for the problem of size `n`, instance `index` under `seed`.
pub fn problem_rng(seed: u64, n: usize, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | index as u64);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} {:<44} worst={} tol={} [{}]",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                g17(c.worst_violation),
                g17(c.tolerance),
                c.fingerprint
            );
        }
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        let _ = writeln!(out, "{} checks, {failed} failed", self.checks.len());
        out
    }

    pub fn to_json(&self) -> String {
        let items: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                format!(
                    "{{\"name\":{},\"pass\":{},\"worst_violation\":{},\"tolerance\":{},\"fingerprint\":{}}}",
                    serde_json::to_string(&c.name).expect("string"),
                    c.pass,
                    json_number(c.worst_violation),
                    json_number(c.tolerance),
                    serde_json::to_string(&c.fingerprint).expect("string"),
                )
            })
            .collect();
        format!("[\n{}\n]\n", items.join(",\n"))
    }
}

/// JSON has no infinities; they are written as `null`.
fn json_number(v: f64) -> String {
    if v.is_finite() {
        g17(v)
    } else {
        "null".into()
    }
}

/// Problems drawn per size in [`verify_all`].
pub const PROBLEMS_PER_SIZE: usize = 3;
const MAX_REDRAWS: usize = 20;

fn instance_checks(seed: u64, n: usize, index: usize, tol: &Tolerances) -> Vec<Check> {
    let mut rng = problem_rng(seed, n, index);
    let mut last_err = None;
    for draw in 0..MAX_REDRAWS {
        let pr = random_problem(&mut rng, n);
        let prefix = format!("seed={seed} n={n} instance={index} draw={draw}");
        let result = (|| -> Result<Vec<Check>> {
            let mut checks = verify_first_best(&pr, tol)?;
            checks.extend(verify_cross_effects(&pr, tol)?);
            checks.extend(verify_equilibrium_identity(&pr, tol)?);
            checks.extend(verify_local_optimality(&pr, 1000, seed ^ index as u64)?);
            checks.extend(verify_supermodularity(&pr, 10, seed ^ index as u64, tol)?);
            Ok(checks)
        })();
        match result {
            Ok(mut checks) => {
                for c in &mut checks {
                    c.fingerprint = format!("{prefix} {}", c.fingerprint);
                }
                return checks;
            }
            Err(Error::Domain(msg)) => last_err = Some(msg),
            Err(e) => {
                return vec![Check {
                    name: format!("solver_failure: {e}"),
                    pass: false,
                    worst_violation: f64::INFINITY,
                    tolerance: 0.0,
                    fingerprint: prefix,
                }]
            }
        }
    }
    vec![Check {
        name: format!("redraw_limit: {}", last_err.unwrap_or_default()),
        pass: false,
        worst_violation: f64::INFINITY,
        tolerance: 0.0,
        fingerprint: format!("seed={seed} n={n} instance={index}"),
    }]
}

pub fn verify_all(seed: u64, sizes: &[usize]) -> VerificationReport {
    verify_all_with(seed, sizes, &Tolerances::default(), Execution::default())
}

/// Every check on [`PROBLEMS_PER_SIZE`] random problems per size, plus the
/// axiom round trips. Problems run in parallel; the report order is fixed.
pub fn verify_all_with(seed: u64, sizes: &[usize], tol: &Tolerances, exec: Execution) -> VerificationReport {
    let tasks: Vec<(usize, usize)> = sizes
        .iter()
        .flat_map(|&n| (0..PROBLEMS_PER_SIZE).map(move |i| (n, i)))
        .collect();
    let per_problem = map_indexed(tasks.len(), exec, |t| {
        let (n, i) = tasks[t];
        if n == 0 {
            return vec![Check {
                name: "problem_size".into(),
                pass: false,
                worst_violation: f64::INFINITY,
                tolerance: 0.0,
                fingerprint: format!("seed={seed} n=0"),
            }];
        }
        instance_checks(seed, n, i, tol)
    });
    let mut checks: Vec<Check> = per_problem.into_iter().flatten().collect();
    let fail = |e: Error| {
        vec![Check {
            name: format!("liability_failure: {e}"),
            pass: false,
            worst_violation: f64::INFINITY,
            tolerance: 0.0,
            fingerprint: format!("seed={seed}"),
        }]
    };
    checks.extend(verify_axiom_round_trips(200, seed, tol).unwrap_or_else(fail));
    checks.extend(verify_axiom_violations(30, seed).unwrap_or_else(fail));
    VerificationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liability::{disruptor_pays, own_loss};

    fn sqrt_problem(losses: &[f64]) -> Problem {
        Problem::uniform(losses.to_vec(), Technology::sqrt(1.0).unwrap()).unwrap()
    }

    fn all_pass(checks: &[Check]) {
        for c in checks {
            assert!(c.pass, "{c:?}");
        }
    }

    #[test]
    fn first_best_small() {
        let checks = verify_first_best(&sqrt_problem(&[1.0, 2.0, 3.0]), &Tolerances::default()).unwrap();
        all_pass(&checks);
        assert!(checks.iter().any(|c| c.name == "first_best.converse_direction"));
    }

    #[test]
    fn cross_effects_small() {
        let pr = sqrt_problem(&[1.0, 1.0, 1.0]);
        let checks = verify_cross_effects(&pr, &Tolerances::default()).unwrap();
        assert_eq!(checks.len(), 2);
        all_pass(&checks);
        let two = verify_cross_effects(&sqrt_problem(&[1.0, 2.0]), &Tolerances::default()).unwrap();
        assert_eq!(two.len(), 1);
    }

    #[test]
    fn identity_small() {
        let tol = Tolerances::default();
        all_pass(&verify_equilibrium_identity(&sqrt_problem(&[1.0, 2.0]), &tol).unwrap());
    }

    #[test]
    fn supermodularity_on_fixed_solutions() {
        let pr = sqrt_problem(&[3.0, 1.0, 2.0]);
        let x = InvestmentProfile::new(vec![0.4, 1.2, 2.0]).unwrap();
        for phi in [disruptor_pays(&pr.losses), own_loss(&pr.losses)] {
            for k in 1..3 {
                for i in 0..k {
                    let a = cross_partial(&pr, &phi, &x, k, i).unwrap();
                    assert!(a < 0.0);
                    let fd = mixed_difference(&pr, &phi, &x, k, i).unwrap();
                    assert!((a - fd).abs() <= 1e-4 * a.abs());
                }
            }
        }
        all_pass(&verify_supermodularity(&pr, 20, 3, &Tolerances::default()).unwrap());
    }

    #[test]
    fn broken_balance_is_located() {
        let losses = [4.0, 5.0, 6.0];
        let mut phi = pi_solution(&losses, &PiWeights::new(vec![0.0, 0.3, 0.6]).unwrap()).unwrap();
        phi.set(1, 2, phi.get(1, 2) + 1.0);
        let r = check_axioms(&phi, &losses);
        assert!(!r.balance);
        assert_eq!(r.worst_balance_row, Some(1));
    }

    #[test]
    fn perturbation_keeps_balance() {
        let pr = sqrt_problem(&[1.0, 2.0, 3.0]);
        let x = solve_efficient(&pr, &solver()).unwrap().profile;
        let phi = phi_star(&pr, &x).unwrap();
        let p = perturb_diagonal(&phi, 0).unwrap();
        let r = check_axioms(&p, &pr.losses);
        assert!(r.balance && r.well_formed);
        assert!((p.get(0, 0) / phi.get(0, 0) - 1.05).abs() < 1e-12);
        assert!(perturb_diagonal(&phi, 2).is_none());
    }

    #[test]
    fn report_is_deterministic_and_passes() {
        let a = verify_all(7, &[2, 3]);
        let b = verify_all_with(7, &[2, 3], &Tolerances::default(), Execution::Sequential);
        assert_eq!(a.to_json(), b.to_json());
        assert!(a.all_pass(), "{}", a.to_text());
    }

    #[test]
    fn json_shape() {
        let r = VerificationReport {
            checks: vec![Check::bound("x", f64::INFINITY, 1.0, "seed=1")],
        };
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        let obj = v[0].as_object().unwrap();
        assert_eq!(obj.len(), 5);
        assert!(obj["worst_violation"].is_null());
        assert_eq!(obj["pass"], false);
    }
}
