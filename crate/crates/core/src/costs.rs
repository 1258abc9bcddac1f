//! Expected individual costs, the total system cost and their analytic
//! partial derivatives.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::liability::{direct_recursion, LiabilityMatrix};
use crate::model::{disruptor_distribution, InvestmentProfile, Problem};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostReport {
    pub per_agent: Vec<f64>,
    pub total: f64,
    /// Probability that each agent disrupts, then the no-disruption event.
    pub disruptor_probs: Vec<f64>,
}

fn check_agent(pr: &Problem, k: usize) -> Result<()> {
    if k >= pr.n() {
        return Err(Error::IndexOutOfRange { index: k, n: pr.n() });
    }
    Ok(())
}

fn check_solution(pr: &Problem, phi: &LiabilityMatrix) -> Result<()> {
    if phi.n() != pr.n() {
        return Err(Error::Dimension {
            expected: pr.n(),
            actual: phi.n(),
        });
    }
    Ok(())
}

fn check_interior(x: &InvestmentProfile, i: usize) -> Result<()> {
    if !(x[i] > 0.0) {
        return Err(Error::Domain(format!(
            "derivative with respect to agent {} needs a positive investment",
            i + 1
        )));
    }
    Ok(())
}

/// `before[j] = Π_{h<j} p_h`, length `n + 1`.
fn prefix_before(p: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(p.len() + 1);
    let mut acc = 1.0;
    out.push(acc);
    for &pj in p {
        acc *= pj;
        out.push(acc);
    }
    out
}

fn cost_with(p: &[f64], before: &[f64], phi: &LiabilityMatrix, x: &[f64], k: usize) -> f64 {
    let indirect: f64 = (0..k).map(|j| before[j] * (1.0 - p[j]) * phi.get(j, k)).sum();
    indirect + before[k] * (1.0 - p[k]) * phi.get(k, k) + x[k]
}

/// `C_k(x; φ)`: expected indirect liability, expected direct liability and the
/// investment itself.
pub fn expected_cost(pr: &Problem, phi: &LiabilityMatrix, x: &InvestmentProfile, k: usize) -> Result<f64> {
    check_agent(pr, k)?;
    check_solution(pr, phi)?;
    pr.check_profile(x)?;
    let p = pr.success_probabilities(x);
    Ok(cost_with(&p, &prefix_before(&p), phi, x, k))
}

pub fn expected_costs(pr: &Problem, phi: &LiabilityMatrix, x: &InvestmentProfile) -> Result<Vec<f64>> {
    check_solution(pr, phi)?;
    pr.check_profile(x)?;
    let p = pr.success_probabilities(x);
    let before = prefix_before(&p);
    Ok((0..pr.n()).map(|k| cost_with(&p, &before, phi, x, k)).collect())
}

pub fn cost_report(pr: &Problem, phi: &LiabilityMatrix, x: &InvestmentProfile) -> Result<CostReport> {
    Ok(CostReport {
        per_agent: expected_costs(pr, phi, x)?,
        total: total_cost(pr, x),
        disruptor_probs: disruptor_distribution(pr, x),
    })
}

/// `ℂ(x) = Σ_j (1 - Π_{i≤j} p_i) ℓ_j + Σ_j x_j`; independent of the solution.
pub fn total_cost(pr: &Problem, x: &InvestmentProfile) -> f64 {
    let mut chain = 1.0;
    let mut expected_loss = 0.0;
    for ((t, &xi), &l) in pr.technologies.iter().zip(x.iter()).zip(&pr.losses) {
        chain *= t.value(xi);
        expected_loss += (1.0 - chain) * l;
    }
    expected_loss + x.total()
}

/// For each agent `i`, the factor `M_i` in `∂ℂ/∂x_i = 1 - p_i'(x_i) M_i`,
/// namely `Π_{h<i} p_h * (ℓ_i + Σ_{k>i} Π_{i<j≤k} p_j ℓ_k)`. `M_i` does not
/// depend on `x_i`.
pub(crate) fn efficiency_multipliers(losses: &[f64], p: &[f64]) -> Vec<f64> {
    let before = prefix_before(p);
    direct_recursion(losses, |j| p[j])
        .into_iter()
        .zip(before)
        .map(|(d, b)| b * d)
        .collect()
}

/// `∂ℂ/∂x_i`. The efficient profile zeroes every component.
pub fn partial_total(pr: &Problem, x: &InvestmentProfile, i: usize) -> Result<f64> {
    check_agent(pr, i)?;
    pr.check_profile(x)?;
    check_interior(x, i)?;
    let p = pr.success_probabilities(x);
    let m = efficiency_multipliers(&pr.losses, &p);
    Ok(1.0 - pr.technologies[i].slope(x[i]) * m[i])
}

/// Gradient of the total cost; every investment must be positive.
pub fn total_gradient(pr: &Problem, x: &InvestmentProfile) -> Result<Vec<f64>> {
    pr.check_profile(x)?;
    for i in 0..pr.n() {
        check_interior(x, i)?;
    }
    let p = pr.success_probabilities(x);
    let m = efficiency_multipliers(&pr.losses, &p);
    Ok((0..pr.n())
        .map(|i| 1.0 - pr.technologies[i].slope(x[i]) * m[i])
        .collect())
}

/// `∂C_k/∂x_i`. Zero for `i > k`; for `i < k` it collects the own indirect
/// term, the intermediate disruptors and the direct-liability term.
pub fn partial_cost(pr: &Problem, phi: &LiabilityMatrix, x: &InvestmentProfile, k: usize, i: usize) -> Result<f64> {
    check_agent(pr, k)?;
    check_agent(pr, i)?;
    check_solution(pr, phi)?;
    pr.check_profile(x)?;
    if i > k {
        return Ok(0.0);
    }
    check_interior(x, i)?;
    let p = pr.success_probabilities(x);
    let before = prefix_before(&p);
    if i == k {
        return Ok(1.0 - pr.technologies[k].slope(x[k]) * before[k] * phi.get(k, k));
    }
    let ratio = pr.technologies[i].slope_ratio(x[i]);
    let own = -before[i + 1] * phi.get(i, k);
    let middle: f64 = (i + 1..k).map(|j| before[j] * (1.0 - p[j]) * phi.get(j, k)).sum();
    let direct = before[k] * (1.0 - p[k]) * phi.get(k, k);
    Ok(ratio * (own + middle + direct))
}

/// Mixed partial `∂²C_k/∂x_i∂x_k` for `i < k`; never positive.
pub fn cross_partial(pr: &Problem, phi: &LiabilityMatrix, x: &InvestmentProfile, k: usize, i: usize) -> Result<f64> {
    check_agent(pr, k)?;
    check_agent(pr, i)?;
    check_solution(pr, phi)?;
    pr.check_profile(x)?;
    if i == k {
        return Err(Error::Domain("cross partial needs two distinct agents".into()));
    }
    if i > k {
        return Ok(0.0);
    }
    check_interior(x, i)?;
    check_interior(x, k)?;
    let p = pr.success_probabilities(x);
    let before = prefix_before(&p);
    let direct = phi.get(k, k);
    if direct == 0.0 {
        return Ok(0.0);
    }
    Ok(-pr.technologies[i].slope_ratio(x[i]) * pr.technologies[k].slope(x[k]) * before[k] * direct)
}
