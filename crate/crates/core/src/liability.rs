//! Liability solutions.
//!
//! A solution is an `n x n` matrix: entry `(i, j)` is what agent `j` pays
//! when agent `i` is the first to fail. Successful agents (`j < i`) pay
//! nothing and each row covers exactly the losses the disruption triggers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{InvestmentProfile, Problem};

/// Relative tolerance for the axiom checks; scaled by the total loss.
pub const AXIOM_RTOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct LiabilityMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl LiabilityMatrix {
    pub fn zeros(n: usize) -> Self {
        LiabilityMatrix {
            n,
            entries: vec![0.0; n * n],
        }
    }

    /// Wraps raw rows. Only the shape and finiteness are checked here; use
    /// [`check_axioms`] for the economic constraints.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Domain("liability matrix has no rows".into()));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::Domain(format!(
                    "row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::Domain(format!("row {} holds non-finite entry {v}", i + 1)));
            }
            entries.extend(row);
        }
        Ok(LiabilityMatrix { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Liability of `agent` when `disruptor` fails first.
    #[inline]
    pub fn get(&self, disruptor: usize, agent: usize) -> f64 {
        self.entries[disruptor * self.n + agent]
    }

    #[inline]
    pub fn set(&mut self, disruptor: usize, agent: usize, value: f64) {
        self.entries[disruptor * self.n + agent] = value;
    }

    pub fn row(&self, disruptor: usize) -> &[f64] {
        &self.entries[disruptor * self.n..(disruptor + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.n)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Matrix with the given direct liabilities whose indirect entries are
    /// `(1 - w_j) * direct_j` for every earlier disruptor.
    fn from_direct_and_weights(direct: &[f64], weights: &[f64]) -> Self {
        let n = direct.len();
        let mut m = LiabilityMatrix::zeros(n);
        for j in 0..n {
            m.set(j, j, direct[j]);
            let indirect = (1.0 - weights[j]) * direct[j];
            for i in 0..j {
                m.set(i, j, indirect);
            }
        }
        m
    }
}

/// Weights `π ∈ [0,1]^n` of the solution family with higher direct liability
/// and independent indirect liabilities. `π_1` carries no information.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PiWeights(Vec<f64>);

impl PiWeights {
    pub fn new(pi: Vec<f64>) -> Result<Self> {
        if let Some((j, w)) = pi.iter().enumerate().find(|(_, w)| !(**w >= 0.0 && **w <= 1.0)) {
            return Err(Error::Domain(format!("weight π_{} = {w} outside [0,1]", j + 1)));
        }
        Ok(PiWeights(pi))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Backward recursion `d_n = ℓ_n`, `d_i = ℓ_i + w_{i+1} * d_{i+1}`.
pub(crate) fn direct_recursion(losses: &[f64], weights: impl Fn(usize) -> f64) -> Vec<f64> {
    let n = losses.len();
    let mut d = vec![0.0; n];
    if n == 0 {
        return d;
    }
    d[n - 1] = losses[n - 1];
    for i in (0..n - 1).rev() {
        d[i] = losses[i] + weights(i + 1) * d[i + 1];
    }
    d
}

/// The solution parameterized by `π`: direct liabilities from the backward
/// recursion and indirect liabilities `φ(i,j) = (1 - π_j) φ(j,j)`.
pub fn pi_solution(losses: &[f64], pi: &PiWeights) -> Result<LiabilityMatrix> {
    if pi.len() != losses.len() {
        return Err(Error::Dimension {
            expected: losses.len(),
            actual: pi.len(),
        });
    }
    let w = pi.as_slice();
    let direct = direct_recursion(losses, |j| w[j]);
    Ok(LiabilityMatrix::from_direct_and_weights(&direct, w))
}

/// Full liability to the disruptor: suffix sums on the diagonal.
pub fn disruptor_pays(losses: &[f64]) -> LiabilityMatrix {
    let direct = direct_recursion(losses, |_| 1.0);
    LiabilityMatrix::from_direct_and_weights(&direct, &vec![1.0; losses.len()])
}

/// Every feasible entry of column `j` equals `ℓ_j`.
pub fn own_loss(losses: &[f64]) -> LiabilityMatrix {
    let n = losses.len();
    let mut m = LiabilityMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            m.set(i, j, losses[j]);
        }
    }
    m
}

fn require_interior(x_star: &InvestmentProfile) -> Result<()> {
    match x_star.iter().position(|&v| !(v > 0.0)) {
        Some(i) => Err(Error::Domain(format!(
            "first-best liabilities need positive investments, agent {} has {}",
            i + 1,
            x_star[i]
        ))),
        None => Ok(()),
    }
}

/// First-best direct liabilities: the net harm of each agent's failure given
/// the others invest `x*`, i.e. `ℓ_i + Σ_{k>i} Π_{i<j≤k} p_j(x*_j) ℓ_k`.
pub fn first_best_direct_liabilities(pr: &Problem, x_star: &InvestmentProfile) -> Result<Vec<f64>> {
    pr.check_profile(x_star)?;
    require_interior(x_star)?;
    let p = pr.success_probabilities(x_star);
    Ok(direct_recursion(&pr.losses, |j| p[j]))
}

/// The first-best solution with independent indirect liabilities.
pub fn phi_star(pr: &Problem, x_star: &InvestmentProfile) -> Result<LiabilityMatrix> {
    let direct = first_best_direct_liabilities(pr, x_star)?;
    let p = pr.success_probabilities(x_star);
    Ok(LiabilityMatrix::from_direct_and_weights(&direct, &p))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomReport {
    /// Nonnegative entries and zeros below the diagonal.
    pub well_formed: bool,
    pub balance: bool,
    pub higher_direct: bool,
    pub independent_indirect: bool,
    pub worst_well_formed: f64,
    pub worst_balance: f64,
    /// 0-based row holding the worst balance violation.
    pub worst_balance_row: Option<usize>,
    pub worst_higher_direct: f64,
    pub worst_independent: f64,
    pub tolerance: f64,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.well_formed && self.balance && self.higher_direct && self.independent_indirect
    }
}

/// Checks balance, higher direct liability and independent indirect
/// liabilities with absolute tolerance `AXIOM_RTOL * Σℓ`.
pub fn check_axioms(phi: &LiabilityMatrix, losses: &[f64]) -> AxiomReport {
    let n = phi.n();
    let tolerance = AXIOM_RTOL * losses.iter().map(|l| l.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    if losses.len() != n {
        return AxiomReport {
            well_formed: false,
            balance: false,
            higher_direct: false,
            independent_indirect: false,
            worst_well_formed: f64::INFINITY,
            worst_balance: f64::INFINITY,
            worst_balance_row: None,
            worst_higher_direct: f64::INFINITY,
            worst_independent: f64::INFINITY,
            tolerance,
        };
    }

    let mut worst_well_formed = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let v = phi.get(i, j);
            let bad = if j < i { v.abs() } else { (-v).max(0.0) };
            worst_well_formed = worst_well_formed.max(bad);
        }
    }

    let mut worst_balance = 0.0f64;
    let mut worst_balance_row = None;
    let mut suffix = 0.0;
    for i in (0..n).rev() {
        suffix += losses[i];
        let row_sum: f64 = (i..n).map(|j| phi.get(i, j)).sum();
        let gap = (row_sum - suffix).abs();
        if gap > worst_balance {
            worst_balance = gap;
            worst_balance_row = Some(i);
        }
    }

    let mut worst_higher_direct = 0.0f64;
    let mut worst_independent = 0.0f64;
    for k in 1..n {
        let direct = phi.get(k, k);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for j in 0..k {
            let v = phi.get(j, k);
            worst_higher_direct = worst_higher_direct.max(v - direct);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        worst_independent = worst_independent.max(hi - lo);
    }

    AxiomReport {
        well_formed: worst_well_formed <= tolerance,
        balance: worst_balance <= tolerance,
        higher_direct: worst_higher_direct <= tolerance,
        independent_indirect: worst_independent <= tolerance,
        worst_well_formed,
        worst_balance,
        worst_balance_row: worst_balance_row.filter(|_| worst_balance > tolerance),
        worst_higher_direct,
        worst_independent,
        tolerance,
    }
}

fn require_axioms(phi: &LiabilityMatrix, losses: &[f64]) -> Result<()> {
    let report = check_axioms(phi, losses);
    if report.all_pass() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "solution violates the axioms (balance {}, higher direct {}, independent indirect {})",
            report.balance, report.higher_direct, report.independent_indirect
        )))
    }
}

/// Reads `π_j = 1 - φ(1,j)/φ(j,j)` off the first row. `π_1` is returned as 1.
pub fn recover_pi(phi: &LiabilityMatrix, losses: &[f64]) -> Result<PiWeights> {
    require_axioms(phi, losses)?;
    let mut pi = vec![1.0; phi.n()];
    for (j, w) in pi.iter_mut().enumerate().skip(1) {
        *w = (1.0 - phi.get(0, j) / phi.get(j, j)).clamp(0.0, 1.0);
    }
    PiWeights::new(pi)
}

/// Like [`recover_pi`] but derives every weight from every earlier row and
/// fails unless all rows agree within `AXIOM_RTOL`.
pub fn recover_pi_strict(phi: &LiabilityMatrix, losses: &[f64]) -> Result<PiWeights> {
    let pi = recover_pi(phi, losses)?;
    for j in 1..phi.n() {
        for i in 1..j {
            let w = 1.0 - phi.get(i, j) / phi.get(j, j);
            if (w - pi.as_slice()[j]).abs() > AXIOM_RTOL {
                return Err(Error::Domain(format!(
                    "rows 1 and {} disagree on π_{}: {} vs {w}",
                    i + 1,
                    j + 1,
                    pi.as_slice()[j]
                )));
            }
        }
    }
    Ok(pi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::technology::Technology;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn remark_three_agent_weights() {
        let l = [3.0, 5.0, 7.0];
        let phi = pi_solution(&l, &PiWeights::new(vec![0.0, 0.3, 0.9]).unwrap()).unwrap();
        assert!(close(phi.get(1, 2), l[2] / 10.0));
        assert!(close(phi.get(1, 1), l[1] + 0.9 * l[2]));
        assert!(close(phi.get(0, 2), phi.get(1, 2)));
    }

    #[test]
    fn pi_family_example() {
        let phi = pi_solution(&[10.0, 20.0, 30.0], &PiWeights::new(vec![0.0, 0.5, 0.9]).unwrap()).unwrap();
        // Expected values substituted by hand into the three-agent table.
        let expect = [[33.5, 23.5, 3.0], [0.0, 47.0, 3.0], [0.0, 0.0, 30.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!(close(phi.get(i, j), expect[i][j]), "({i},{j}) = {}", phi.get(i, j));
            }
        }
        // Row-balance oracle.
        assert!(close(expect[0].iter().sum(), 60.0));
        assert!(close(expect[1].iter().sum(), 50.0));
        assert!(check_axioms(&phi, &[10.0, 20.0, 30.0]).all_pass());
    }

    #[test]
    fn unit_weights_reproduce_disruptor_pays() {
        let l = [1.0, 2.0, 3.0];
        let dp = disruptor_pays(&l);
        assert_eq!(dp.diagonal(), vec![6.0, 5.0, 3.0]);
        assert_eq!(dp.get(0, 1), 0.0);
        assert_eq!(dp.get(0, 2), 0.0);
        let pi = pi_solution(&l, &PiWeights::new(vec![0.3, 1.0, 1.0]).unwrap()).unwrap();
        assert_eq!(pi, dp);
        assert_eq!(disruptor_pays(&[5.0]).diagonal(), vec![5.0]);
    }

    #[test]
    fn own_loss_structure() {
        let l = [1.0, 2.0, 3.0];
        let ol = own_loss(&l);
        assert_eq!(ol.row(0), &[1.0, 2.0, 3.0]);
        assert_eq!(ol.row(1), &[0.0, 2.0, 3.0]);
        assert_eq!(ol.row(2), &[0.0, 0.0, 3.0]);
        let zero = pi_solution(&l, &PiWeights::new(vec![0.0; 3]).unwrap()).unwrap();
        assert_eq!(zero, ol);
        assert!(check_axioms(&ol, &l).all_pass());
    }

    #[test]
    fn weights_outside_unit_interval() {
        assert!(PiWeights::new(vec![0.0, 1.2]).is_err());
        assert!(PiWeights::new(vec![-0.1]).is_err());
        let w = PiWeights::new(vec![0.5, 0.5]).unwrap();
        assert!(pi_solution(&[1.0, 2.0, 3.0], &w).is_err());
    }

    /// Profile `x` with `p(x_2) = 0.5` under the unit square-root technology.
    fn two_agent_star() -> (Problem, InvestmentProfile) {
        let pr = Problem::uniform(vec![1.0, 2.0], Technology::sqrt(1.0).unwrap()).unwrap();
        (pr, InvestmentProfile::new(vec![0.7, 1.0]).unwrap())
    }

    #[test]
    fn first_best_two_agents() {
        let (pr, x) = two_agent_star();
        assert_eq!(first_best_direct_liabilities(&pr, &x).unwrap(), vec![2.0, 2.0]);
        let phi = phi_star(&pr, &x).unwrap();
        assert_eq!(phi.get(0, 0), 2.0);
        assert_eq!(phi.get(0, 1), 1.0);
        assert_eq!(phi.get(1, 1), 2.0);
        assert_eq!(phi.get(0, 0) + phi.get(0, 1), 3.0);
    }

    #[test]
    fn first_best_rejects_corners() {
        let (pr, _) = two_agent_star();
        let x = InvestmentProfile::new(vec![0.0, 1.0]).unwrap();
        assert!(matches!(first_best_direct_liabilities(&pr, &x), Err(Error::Domain(_))));
        assert!(phi_star(&pr, &x).is_err());
    }

    #[test]
    fn first_best_recursion_matches_nested_sum() {
        let pr = Problem::uniform(vec![1.0, 1.0, 1.0], Technology::sqrt(1.0).unwrap()).unwrap();
        let x = InvestmentProfile::new(vec![0.41, 0.27, 0.18]).unwrap();
        let p = pr.success_probabilities(&x);
        let d = first_best_direct_liabilities(&pr, &x).unwrap();
        for i in 0..3 {
            let mut nested = pr.losses[i];
            for k in i + 1..3 {
                let prod: f64 = (i + 1..=k).map(|j| p[j]).product();
                nested += prod * pr.losses[k];
            }
            assert!((d[i] - nested).abs() < 1e-12);
        }
        assert_eq!(d[2], pr.losses[2]);
        let via_pi = pi_solution(&pr.losses, &PiWeights::new(p).unwrap()).unwrap();
        let star = phi_star(&pr, &x).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((star.get(i, j) - via_pi.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn axiom_detection() {
        let l = [1.0, 1.0, 1.0];
        assert!(check_axioms(&disruptor_pays(&l), &l).all_pass());

        // Balanced rows, unequal entries in column 3.
        let m =
            LiabilityMatrix::from_rows(vec![vec![1.8, 1.0, 0.2], vec![0.0, 1.7, 0.3], vec![0.0, 0.0, 1.0]]).unwrap();
        let r = check_axioms(&m, &l);
        assert!(r.balance && r.higher_direct && r.well_formed);
        assert!(!r.independent_indirect);
        assert!((r.worst_independent - 0.1).abs() < 1e-12);

        let unbalanced =
            LiabilityMatrix::from_rows(vec![vec![2.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let r = check_axioms(&unbalanced, &l);
        assert!(!r.balance);
        assert_eq!(r.worst_balance_row, Some(0));

        let above_direct =
            LiabilityMatrix::from_rows(vec![vec![0.5, 2.5, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert!(!check_axioms(&above_direct, &l).higher_direct);

        let lower =
            LiabilityMatrix::from_rows(vec![vec![3.0, 0.0, 0.0], vec![0.5, 1.5, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert!(!check_axioms(&lower, &l).well_formed);
    }

    #[test]
    fn recovery() {
        let l = [1.0, 2.0, 3.0];
        assert_eq!(recover_pi(&disruptor_pays(&l), &l).unwrap().as_slice()[1..], [1.0, 1.0]);
        assert_eq!(recover_pi(&own_loss(&l), &l).unwrap().as_slice()[1..], [0.0, 0.0]);
        let l = [10.0, 20.0, 30.0];
        let phi = pi_solution(&l, &PiWeights::new(vec![0.0, 0.5, 0.9]).unwrap()).unwrap();
        let pi = recover_pi_strict(&phi, &l).unwrap();
        assert!((pi.as_slice()[1] - 0.5).abs() < 1e-12);
        assert!((pi.as_slice()[2] - 0.9).abs() < 1e-12);
        let rebuilt = pi_solution(&l, &pi).unwrap();
        for (a, b) in rebuilt.rows().flatten().zip(phi.rows().flatten()) {
            assert!((a - b).abs() <= 1e-9 * 60.0);
        }
    }

    #[test]
    fn recovery_rejects_axiom_failures() {
        let l = [1.0, 1.0, 1.0];
        let m =
            LiabilityMatrix::from_rows(vec![vec![1.8, 1.0, 0.2], vec![0.0, 1.7, 0.3], vec![0.0, 0.0, 1.0]]).unwrap();
        assert!(matches!(recover_pi(&m, &l), Err(Error::Domain(_))));
    }

    #[test]
    fn shape_errors() {
        assert!(LiabilityMatrix::from_rows(vec![]).is_err());
        assert!(LiabilityMatrix::from_rows(vec![vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(LiabilityMatrix::from_rows(vec![vec![f64::NAN]]).is_err());
        let r = check_axioms(&disruptor_pays(&[1.0, 2.0]), &[1.0]);
        assert!(!r.all_pass());
    }
}
