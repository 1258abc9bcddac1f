use std::fmt::Write as _;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use cascade::costs::cost_report;
use cascade::experiments::simulation::{instances_csv, means_csv};
use cascade::experiments::{run_poa, run_simulation, svg, PoaConfig, SimConfig};
use cascade::format::{cost_report_csv, g17, matrix_to_csv, problem_from_json, solve_result_csv};
use cascade::liability::{check_axioms, phi_star};
use cascade::solvers::{solve_efficient, solve_equilibrium};
use cascade::verify::{verify_all_with, Tolerances};
use cascade::{Execution, Problem, SolveOptions, Technology};

use crate::output::{emit, write_atomic};
use crate::solution::{resolve, SolutionSpec};
use crate::{Cli, Command, Mode};

pub fn run(cli: &Cli) -> Result<ExitCode> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Solve {
            problem,
            mode,
            solution,
        } => solve(cli, problem, *mode, solution.as_deref()),
        Command::Liability { problem, solution } => liability(cli, problem, solution),
        Command::Simulate {
            agents,
            reps,
            loss_min,
            loss_max,
            tech,
            svg: svg_path,
            per_instance,
            sequential,
        } => {
            let cfg = SimConfig {
                n: *agents,
                reps: *reps,
                loss_low: *loss_min,
                loss_high: *loss_max,
                technology: parse_tech(tech)?,
                seed: cli.seed,
                keep_instances: per_instance.is_some(),
                execution: if *sequential {
                    Execution::Sequential
                } else {
                    Execution::Parallel
                },
                solver: SolveOptions {
                    execution: Execution::Sequential,
                    ..solver_options(cli)?
                },
            };
            let result = run_simulation(&cfg)?;
            emit(out, &means_csv(&result.means))?;
            if let Some(path) = svg_path {
                write_atomic(path, &svg::render(&result.means))?;
            }
            if let (Some(path), Some(instances)) = (per_instance, &result.instances) {
                write_atomic(path, &instances_csv(instances))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Poa { agents, epsilon, bound } => {
            let cfg = PoaConfig {
                n: *agents,
                epsilon: *epsilon,
                bound: *bound,
                solver: solver_options(cli)?,
            };
            let outcome = run_poa(&cfg)?;
            emit(out, &outcome.summary_text())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { sizes, text } => {
            let mut tol = Tolerances::default();
            if let Some(t) = cli.tol {
                check_tol(t)?;
                tol.profile = t;
            }
            let report = verify_all_with(cli.seed, sizes, &tol, Execution::Parallel);
            let body = if *text { report.to_text() } else { report.to_json() };
            emit(out, &body)?;
            Ok(if report.all_pass() {
                ExitCode::SUCCESS
            } else {
                eprintln!("verification failed");
                ExitCode::from(1)
            })
        }
    }
}

fn check_tol(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        bail!("--tol must be a positive number, got {t}");
    }
    Ok(())
}

fn solver_options(cli: &Cli) -> Result<SolveOptions> {
    let mut opts = SolveOptions {
        seed: cli.seed,
        execution: Execution::Sequential,
        ..SolveOptions::default()
    };
    if let Some(t) = cli.tol {
        check_tol(t)?;
        opts.tolerance = t;
    }
    Ok(opts)
}

fn load_problem(path: &Path) -> Result<Problem> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    problem_from_json(&text).with_context(|| format!("loading {}", path.display()))
}

/// `sqrt`, `sqrt:<scale>` or `powerexp:<ceiling>,<rate>,<exponent>`.
fn parse_tech(s: &str) -> Result<Technology> {
    let (family, args) = s.split_once(':').unwrap_or((s, ""));
    let nums = || -> Result<Vec<f64>> {
        args.split(',')
            .map(|a| {
                a.trim()
                    .parse::<f64>()
                    .with_context(|| format!("bad number {a:?} in --tech"))
            })
            .collect()
    };
    Ok(match (family, args.is_empty()) {
        ("sqrt", true) => Technology::sqrt(1.0)?,
        ("sqrt", false) => match nums()?[..] {
            [c] => Technology::sqrt(c)?,
            _ => bail!("sqrt takes one parameter"),
        },
        ("powerexp", false) => match nums()?[..] {
            [a, l, b] => Technology::power_exponential(a, l, b)?,
            _ => bail!("powerexp takes ceiling,rate,exponent"),
        },
        _ => bail!("unknown technology {s:?}; expected sqrt, sqrt:<scale> or powerexp:<ceiling>,<rate>,<exponent>"),
    })
}

fn solve(cli: &Cli, problem: &Path, mode: Mode, solution: Option<&str>) -> Result<ExitCode> {
    let pr = load_problem(problem)?;
    let opts = solver_options(cli)?;
    let spec: Option<SolutionSpec> = solution.map(str::parse).transpose()?;
    let (result, phi) = match mode {
        Mode::Efficient => {
            let result = solve_efficient(&pr, &opts)?;
            let phi = match &spec {
                Some(s) => resolve(s, &pr, &opts)?,
                None => phi_star(&pr, &result.profile)?,
            };
            (result, phi)
        }
        Mode::Equilibrium => {
            let Some(spec) = &spec else {
                bail!("equilibrium mode needs --solution");
            };
            let phi = resolve(spec, &pr, &opts)?;
            (solve_equilibrium(&pr, &phi, &opts)?, phi)
        }
    };
    let costs = cost_report(&pr, &phi, &result.profile)?;
    let solve_csv = solve_result_csv(&result);
    let costs_csv = cost_report_csv(&costs, &result.profile);
    match cli.out.as_deref() {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            write_atomic(&dir.join("solve.csv"), &solve_csv)?;
            write_atomic(&dir.join("costs.csv"), &costs_csv)?;
        }
        None => emit(None, &format!("{solve_csv}\n{costs_csv}"))?,
    }
    if result.converged {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "solver did not reach the tolerance: max residual {}",
            g17(result.max_residual())
        );
        Ok(ExitCode::from(2))
    }
}

fn liability(cli: &Cli, problem: &Path, solution: &str) -> Result<ExitCode> {
    let pr = load_problem(problem)?;
    let spec: SolutionSpec = solution.parse()?;
    let phi = resolve(&spec, &pr, &solver_options(cli)?)?;
    emit(cli.out.as_deref(), &matrix_to_csv(&phi))?;
    let r = check_axioms(&phi, &pr.losses);
    let mut report = String::new();
    let line = |out: &mut String, name: &str, pass: bool, worst: f64| {
        let _ = writeln!(
            out,
            "{name}: {} (worst {})",
            if pass { "pass" } else { "fail" },
            g17(worst)
        );
    };
    line(&mut report, "well-formed", r.well_formed, r.worst_well_formed);
    line(&mut report, "balance", r.balance, r.worst_balance);
    line(
        &mut report,
        "higher direct liability",
        r.higher_direct,
        r.worst_higher_direct,
    );
    line(
        &mut report,
        "independent indirect liabilities",
        r.independent_indirect,
        r.worst_independent,
    );
    if let Some(row) = r.worst_balance_row {
        let _ = writeln!(report, "worst balance row: {}", row + 1);
    }
    eprint!("{report}");
    Ok(ExitCode::SUCCESS)
}
