use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use cascade::format::{matrix_from_csv, pi_from_json};
use cascade::liability::{check_axioms, disruptor_pays, own_loss, phi_star, pi_solution};
use cascade::solvers::solve_efficient;
use cascade::{Error, LiabilityMatrix, Problem, SolveOptions};

#[derive(Clone, Debug, PartialEq)]
pub enum SolutionSpec {
    PhiStar,
    DisruptorPays,
    OwnLoss,
    Pi(PathBuf),
    Matrix(PathBuf),
}

impl std::str::FromStr for SolutionSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "phi-star" => SolutionSpec::PhiStar,
            "disruptor-pays" => SolutionSpec::DisruptorPays,
            "own-loss" => SolutionSpec::OwnLoss,
            _ => match s.split_once(':') {
                Some(("pi", f)) if !f.is_empty() => SolutionSpec::Pi(f.into()),
                Some(("matrix", f)) if !f.is_empty() => SolutionSpec::Matrix(f.into()),
                _ => bail!(
                    "unknown solution {s:?}; expected phi-star, disruptor-pays, own-loss, pi:<file> or matrix:<file>"
                ),
            },
        })
    }
}

/// Builds the matrix. Hand-written matrices must be nonnegative, upper
/// triangular and balanced.
pub fn resolve(spec: &SolutionSpec, pr: &Problem, opts: &SolveOptions) -> Result<LiabilityMatrix> {
    let phi = match spec {
        SolutionSpec::PhiStar => {
            let x = solve_efficient(pr, opts)?.profile;
            phi_star(pr, &x)?
        }
        SolutionSpec::DisruptorPays => disruptor_pays(&pr.losses),
        SolutionSpec::OwnLoss => own_loss(&pr.losses),
        SolutionSpec::Pi(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let pi = pi_from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
            pi_solution(&pr.losses, &pi)?
        }
        SolutionSpec::Matrix(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let phi = matrix_from_csv(&text).with_context(|| format!("parsing {}", path.display()))?;
            if phi.n() != pr.n() {
                return Err(Error::Dimension {
                    expected: pr.n(),
                    actual: phi.n(),
                }
                .into());
            }
            let report = check_axioms(&phi, &pr.losses);
            if !report.well_formed {
                bail!(
                    "matrix has negative entries or a nonzero lower triangle (worst {})",
                    report.worst_well_formed
                );
            }
            if !report.balance {
                let row = report.worst_balance_row.map_or(0, |r| r + 1);
                bail!(
                    "matrix is not balanced: row {row} misses its downstream loss total by {}",
                    report.worst_balance
                );
            }
            phi
        }
    };
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_specs() {
        assert_eq!("phi-star".parse::<SolutionSpec>().unwrap(), SolutionSpec::PhiStar);
        assert_eq!(
            "matrix:a.csv".parse::<SolutionSpec>().unwrap(),
            SolutionSpec::Matrix("a.csv".into())
        );
        assert_eq!(
            "pi:w.json".parse::<SolutionSpec>().unwrap(),
            SolutionSpec::Pi("w.json".into())
        );
        assert!("pi:".parse::<SolutionSpec>().is_err());
        assert!("equal-split".parse::<SolutionSpec>().is_err());
    }
}
