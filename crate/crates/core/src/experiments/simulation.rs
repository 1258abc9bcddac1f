use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::costs::expected_costs;
use crate::error::{Error, Result};
use crate::format::g17;
use crate::liability::phi_star;
use crate::model::Problem;
use crate::par::{map_indexed, pairwise_sum, Execution};
use crate::solvers::{solve_efficient, SolveOptions};
use crate::technology::Technology;

pub const CSV_HEADER: &str = "agent,direct_liability,indirect_liability,investment,p_direct,p_indirect,expected_cost";

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub reps: usize,
    pub loss_low: f64,
    pub loss_high: f64,
    pub technology: Technology,
    pub seed: u64,
    /// Keep every instance's records next to the means.
    pub keep_instances: bool,
    pub execution: Execution,
    pub solver: SolveOptions,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 8,
            reps: 10_000,
            loss_low: 1.0,
            loss_high: 100.0,
            technology: Technology::SqrtSaturating { scale: 1.0 },
            seed: 0,
            keep_instances: false,
            execution: Execution::default(),
            solver: SolveOptions {
                execution: Execution::Sequential,
                ..SolveOptions::default()
            },
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("need at least one agent".into()));
        }
        if self.reps == 0 {
            return Err(Error::InvalidParameter("need at least one instance".into()));
        }
        if !(self.loss_low > 0.0 && self.loss_low <= self.loss_high && self.loss_high.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "loss bounds must satisfy 0 < low <= high, got [{}, {}]",
                self.loss_low, self.loss_high
            )));
        }
        self.technology.validate()?;
        self.solver.validate()
    }

    /// Losses of instance `r`, drawn from its own stream of the seeded
    /// ChaCha8 generator.
    pub fn instance_losses(&self, r: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(r);
        (0..self.n)
            .map(|_| {
                if self.loss_low == self.loss_high {
                    self.loss_low
                } else {
                    rng.gen_range(self.loss_low..=self.loss_high)
                }
            })
            .collect()
    }
}

/// Per-agent quantities at the efficient profile under the first-best solution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimRecord {
    /// 1-based.
    pub agent: usize,
    pub direct_liability: f64,
    /// `φ*(1,i)`, zero for the first agent.
    pub indirect_liability: f64,
    pub investment: f64,
    /// Probability of being the disruptor.
    pub p_direct: f64,
    /// Probability that someone upstream fails first.
    pub p_indirect: f64,
    pub expected_cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimOutput {
    pub means: Vec<SimRecord>,
    pub instances: Option<Vec<Vec<SimRecord>>>,
}

pub fn simulate_instance(cfg: &SimConfig, r: u64) -> Result<Vec<SimRecord>> {
    let pr = Problem::uniform(cfg.instance_losses(r), cfg.technology)?;
    let x = solve_efficient(&pr, &cfg.solver)?.profile;
    let phi = phi_star(&pr, &x)?;
    let costs = expected_costs(&pr, &phi, &x)?;
    let p = pr.success_probabilities(&x);
    let mut before = 1.0;
    let mut out = Vec::with_capacity(pr.n());
    for i in 0..pr.n() {
        out.push(SimRecord {
            agent: i + 1,
            direct_liability: phi.get(i, i),
            indirect_liability: if i == 0 { 0.0 } else { phi.get(0, i) },
            investment: x[i],
            p_direct: before * (1.0 - p[i]),
            p_indirect: 1.0 - before,
            expected_cost: costs[i],
        });
        before *= p[i];
    }
    Ok(out)
}

/// Solves every instance and averages per agent. Instances run in parallel
/// under [`Execution::Parallel`]; the output does not depend on it.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimOutput> {
    cfg.validate()?;
    let runs = map_indexed(cfg.reps, cfg.execution, |r| {
        simulate_instance(cfg, r as u64).map_err(|e| Error::Instance {
            index: r as u64,
            source: Box::new(e),
        })
    });
    let instances = runs.into_iter().collect::<Result<Vec<_>>>()?;

    let mean = |i: usize, field: fn(&SimRecord) -> f64| {
        let column: Vec<f64> = instances.iter().map(|inst| field(&inst[i])).collect();
        pairwise_sum(&column) / cfg.reps as f64
    };
    let means = (0..cfg.n)
        .map(|i| SimRecord {
            agent: i + 1,
            direct_liability: mean(i, |s| s.direct_liability),
            indirect_liability: mean(i, |s| s.indirect_liability),
            investment: mean(i, |s| s.investment),
            p_direct: mean(i, |s| s.p_direct),
            p_indirect: mean(i, |s| s.p_indirect),
            expected_cost: mean(i, |s| s.expected_cost),
        })
        .collect();
    Ok(SimOutput {
        means,
        instances: cfg.keep_instances.then_some(instances),
    })
}

fn write_row(out: &mut String, prefix: &str, s: &SimRecord) {
    let _ = writeln!(
        out,
        "{prefix}{},{},{},{},{},{},{}",
        s.agent,
        g17(s.direct_liability),
        g17(s.indirect_liability),
        g17(s.investment),
        g17(s.p_direct),
        g17(s.p_indirect),
        g17(s.expected_cost)
    );
}

pub fn means_csv(records: &[SimRecord]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for s in records {
        write_row(&mut out, "", s);
    }
    out
}

/// Per-instance records with a leading `instance` column.
pub fn instances_csv(instances: &[Vec<SimRecord>]) -> String {
    let mut out = format!("instance,{CSV_HEADER}\n");
    for (r, inst) in instances.iter().enumerate() {
        for s in inst {
            write_row(&mut out, &format!("{r},"), s);
        }
    }
    out
}
