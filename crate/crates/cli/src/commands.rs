//! The four subcommands.

use std::path::Path;

use anyhow::anyhow;
use dispersolve::estimates::{self, ExistenceBudget};
use dispersolve::fixedpoint::{self, PicardOptions};
use dispersolve::grid::{self, GridFunction};
use dispersolve::suite::{self, OrderStudy, SuiteOutcome};
use dispersolve::{ContractionLog, DispersionOperator, Error, Grid, InitialCondition, Trajectory};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Manufactured, Mode, RunConfig};
use crate::report::{self, NamedVerdict, NormSample, RunReport, Smoothing};

/// A failed command and the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_NONCONVERGENCE: u8 = 2;
pub const EXIT_VERIFICATION: u8 = 3;
pub const EXIT_ORDER: u8 = 4;
pub const EXIT_IO: u8 = 5;

impl Failure {
    pub fn config(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: EXIT_CONFIG, error: error.into() }
    }

    fn io(error: anyhow::Error) -> Self {
        Failure { code: EXIT_IO, error }
    }

    /// Solver errors: breakdown of the iteration is code 2, bad input code 1.
    fn solver(error: Error) -> Self {
        let code = match error {
            Error::NonConvergence { .. } | Error::Numerical { .. } => EXIT_NONCONVERGENCE,
            _ => EXIT_CONFIG,
        };
        Failure { code, error: error.into() }
    }
}

pub type Outcome = Result<(), Failure>;

/// Fewest time steps a guaranteed-time run is split into.
const MIN_STEPS: usize = 4;

fn verdict(name: impl Into<String>, lhs: f64, rhs: f64) -> NamedVerdict {
    NamedVerdict { name: name.into(), verdict: dispersolve::InequalityVerdict::new(lhs, rhs) }
}

fn budget_for(cfg: &RunConfig, u0: &GridFunction) -> Result<ExistenceBudget, Failure> {
    let r = estimates::radius(u0, cfg.k, cfg.l).map_err(Failure::solver)?;
    estimates::existence_time(r, cfg.k, cfg.l, cfg.length, cfg.horizon).map_err(Failure::solver)
}

fn verdicts(
    cfg: &RunConfig,
    budget: &ExistenceBudget,
    logs: &[ContractionLog],
    tr: &Trajectory,
) -> Result<Vec<NamedVerdict>, Error> {
    let mut out: Vec<NamedVerdict> = budget
        .verify()
        .into_iter()
        .map(|(name, v)| NamedVerdict { name: format!("budget: {name}"), verdict: v })
        .collect();
    let ball = 8.0 * budget.radius * budget.radius;
    let largest = logs.iter().flat_map(|l| l.vnorm_history.iter().copied()).fold(0.0, f64::max);
    out.push(verdict("ball: max ||u^(n)||_V^2 <= 8 R^2", largest, ball));
    let ratio = logs.iter().filter_map(ContractionLog::max_ratio).fold(0.0, f64::max);
    out.push(verdict("contraction: max squared step ratio <= 1", ratio, 1.0));
    for (label, u) in [("t = 0", &tr.states()[0]), ("t = T", tr.last())] {
        let v = estimates::gn_check(u, cfg.l)?;
        out.push(NamedVerdict { name: format!("gagliardo-nirenberg at {label}"), verdict: v });
    }
    Ok(out)
}

fn norm_series(tr: &Trajectory, orders: usize) -> Result<Vec<NormSample>, Error> {
    tr.times().iter().zip(tr.states()).map(|(&t, u)| Ok(NormSample { t, norms: grid::norms(u, orders)? })).collect()
}

pub fn simulate(cfg: &RunConfig) -> Outcome {
    let g = cfg.grid().map_err(Failure::config)?;
    let op = DispersionOperator::assemble(cfg.l, g).map_err(Failure::solver)?;
    let u0 = cfg.u0_spec.sample(&g).map_err(Failure::solver)?;
    let budget = budget_for(cfg, &u0)?;
    let t_end = match cfg.mode {
        Mode::Guaranteed => budget.t_star.min(cfg.horizon),
        Mode::Marching => cfg.horizon,
    };
    let dt = cfg.dt.min(t_end / MIN_STEPS as f64);
    let mut opts = PicardOptions::for_data(&u0, budget.radius);
    opts.max_iter = cfg.max_iter;
    if let Some(t) = cfg.tol_fp {
        opts.tol = t;
    }
    let solved = match cfg.mode {
        Mode::Guaranteed => fixedpoint::solve(&op, &u0, cfg.k, dt, t_end, &opts).map(|(t, l)| (t, vec![l])),
        Mode::Marching => fixedpoint::solve_windowed(&op, &u0, cfg.k, dt, t_end, cfg.window, &opts),
    };
    let (steps, dt) = dispersolve::linear::step_plan(dt, t_end).map_err(Failure::solver)?;
    let mut report = RunReport {
        config: cfg.clone(),
        converged: false,
        t_end,
        dt,
        steps,
        budget,
        contraction: vec![],
        norm_series: vec![],
        residual_series: None,
        smoothing: None,
        verdicts: vec![],
    };
    let (tr, logs) = match solved {
        Ok(r) => r,
        Err(Error::NonConvergence { log }) => {
            report.contraction.push(*log);
            report::write_json(&cfg.output_dir, "report.json", &report).map_err(Failure::io)?;
            return Err(Failure {
                code: EXIT_NONCONVERGENCE,
                error: anyhow!(
                    "Picard iteration did not converge in {} iterations; partial report in {}",
                    cfg.max_iter,
                    cfg.output_dir.display()
                ),
            });
        }
        Err(e) => return Err(Failure::solver(e)),
    };
    let l = cfg.l;
    let mut fill = || -> Result<(), Error> {
        report.norm_series = norm_series(&tr, 3 * l + 1)?;
        report.residual_series = if tr.len() >= 3 { Some(estimates::energy_residual(&tr, cfg.k, l)?) } else { None };
        report.smoothing = Some(Smoothing {
            order_2l_plus_1: estimates::seminorm_integral(&tr, 2 * l + 1)?,
            order_3l_plus_1: estimates::seminorm_integral(&tr, 3 * l + 1)?,
        });
        report.verdicts = verdicts(cfg, &report.budget, &logs, &tr)?;
        Ok(())
    };
    fill().map_err(Failure::solver)?;
    report.converged = true;
    report.contraction = logs;
    report::write_json(&cfg.output_dir, "report.json", &report).map_err(Failure::io)?;
    report::write_series_csv(&cfg.output_dir, &report).map_err(Failure::io)?;

    let b = &report.budget;
    println!("R = {:.6e}, T* = {:.6e}, T_end = {:.6e}, {} steps of {:.3e}", b.radius, b.t_star, t_end, steps, dt);
    let iterations: usize = report.contraction.iter().map(|l| l.iterates).sum();
    println!("{} Picard window(s), {iterations} iterations in total", report.contraction.len());
    if let Some(r) = &report.residual_series {
        println!("max |energy residual| = {:.3e}", r.max_abs());
    }
    println!("report written to {}", cfg.output_dir.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct VerifyRow {
    suite: SuiteOutcome,
    detail: String,
}

fn refinement(n: usize) -> [usize; 3] {
    [n, 2 * n + 1, 4 * n + 3]
}

pub fn verify(cfg: &RunConfig) -> Outcome {
    type Job<'a> = Box<dyn Fn() -> dispersolve::Result<VerifyRow> + Send + Sync + 'a>;
    let row = |suite: SuiteOutcome| VerifyRow { detail: String::new(), suite };
    let mut jobs: Vec<Job> = vec![
        Box::new(|| Ok(row(suite::gn_suite(&[1, 2, 3], 1000, cfg.n, cfg.length, cfg.seed, cfg.gn_constant)?))),
        Box::new(|| Ok(row(suite::tvm_suite(1_000_000, 8, cfg.seed)))),
    ];
    for (m, i) in [(2, 1), (3, 1), (3, 2)] {
        jobs.push(Box::new(move || {
            let (c, s) = suite::interpolation_suite(500, cfg.n, cfg.length, cfg.seed, m, i, 1.0)?;
            Ok(VerifyRow { detail: format!("A1 = {:.4}, A2 = {}", c.a1, c.a2), suite: s })
        }));
    }
    jobs.push(Box::new(|| {
        let s = suite::dissipation_study(cfg.l, cfg.length, &refinement(cfg.n))?;
        let passed = s.errors.windows(2).all(|w| w[1] < w[0]) && s.meets(0.8);
        let orders: Vec<String> = s.orders.iter().map(|p| format!("{p:.2}")).collect();
        Ok(VerifyRow {
            detail: format!("orders [{}] (need >= 0.8)", orders.join(", ")),
            suite: SuiteOutcome {
                name: s.label,
                cases: s.errors.len(),
                failures: usize::from(!passed),
                worst_slack: f64::NAN,
                passed,
            },
        })
    }));
    let rows = jobs.par_iter().map(|job| job()).collect::<dispersolve::Result<Vec<_>>>().map_err(Failure::solver)?;

    println!("{:<40} {:>8} {:>8} {:>12}  result", "suite", "cases", "failed", "worst slack");
    for r in &rows {
        let s = &r.suite;
        let slack = if s.worst_slack.is_nan() { "-".to_string() } else { format!("{:.3e}", s.worst_slack) };
        println!(
            "{:<40} {:>8} {:>8} {:>12}  {} {}",
            s.name,
            s.cases,
            s.failures,
            slack,
            if s.passed { "PASS" } else { "FAIL" },
            r.detail
        );
    }
    report::write_json(&cfg.output_dir, "verify.json", &rows).map_err(Failure::io)?;
    let failed: Vec<&str> = rows.iter().filter(|r| !r.suite.passed).map(|r| r.suite.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure { code: EXIT_VERIFICATION, error: anyhow!("failed suites: {}", failed.join("; ")) })
    }
}

pub struct EstimateArgs {
    pub k: usize,
    pub l: usize,
    pub length: f64,
    pub radius: Option<f64>,
    pub u0: Option<InitialCondition>,
    pub n: usize,
    pub horizon: f64,
    pub json: bool,
}

pub fn estimate(args: &EstimateArgs) -> Outcome {
    let r = match (&args.radius, &args.u0) {
        (Some(r), None) => *r,
        (None, Some(u0)) => {
            let g = Grid::new(args.length, args.n).map_err(Failure::solver)?;
            let u = u0.sample(&g).map_err(Failure::solver)?;
            estimates::radius(&u, args.k, args.l).map_err(Failure::solver)?
        }
        _ => return Err(Failure::config(anyhow!("give exactly one of --R and --u0"))),
    };
    let b = estimates::existence_time(r, args.k, args.l, args.length, args.horizon).map_err(Failure::solver)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&b).map_err(|e| Failure::io(e.into()))?);
        return Ok(());
    }
    println!("k = {}, l = {}, L = {}, R = {:.6e}, horizon = {}", b.k, b.l, b.length, b.radius, b.horizon);
    println!("alpha_k = {:.6e}", b.alpha_k);
    println!("beta_k  = {:.6e}", b.beta_k);
    println!("gamma_k = {:.6e}", b.gamma_k);
    for (name, t) in b.times() {
        println!("{name:<7} = {t:.6e}");
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ConvergenceRow {
    study: OrderStudy,
    threshold: f64,
    passed: bool,
}

pub fn convergence(cfg: &RunConfig) -> Outcome {
    let sizes = refinement(cfg.n);
    let (amplitude, u0) = match cfg.manufactured {
        Manufactured::Profile => (1.0, cfg.u0_spec.clone()),
        Manufactured::Zero => (0.0, InitialCondition::Zero),
    };
    let row = |study: OrderStudy, threshold: f64| ConvergenceRow { passed: study.meets(threshold), study, threshold };
    type Job<'a> = Box<dyn Fn() -> dispersolve::Result<ConvergenceRow> + Send + Sync + 'a>;
    let jobs: Vec<Job> = vec![
        Box::new(|| Ok(row(suite::stationary_study(cfg.l, cfg.length, 1.0, amplitude, &sizes)?.0, 1.7))),
        Box::new(|| Ok(row(suite::evolution_study(cfg.l, cfg.length, amplitude, &sizes, cfg.dt, cfg.horizon)?, 1.7))),
        Box::new(|| {
            let s = suite::energy_study(cfg.k, cfg.l, &u0, cfg.length, &sizes, cfg.dt, cfg.horizon, cfg.window)?;
            Ok(row(s, 1.0))
        }),
    ];
    let rows = jobs.par_iter().map(|job| job()).collect::<dispersolve::Result<Vec<_>>>().map_err(Failure::solver)?;

    println!("{:<36} {:>24} {:>10}  result", "study", "sizes", "min order");
    for r in &rows {
        let s = &r.study;
        let order = s.min_order().map_or("exact".to_string(), |p| format!("{p:.3}"));
        println!(
            "{:<36} {:>24} {:>10}  {} (need >= {})",
            s.label,
            format!("{:?}", s.sizes),
            order,
            if r.passed { "PASS" } else { "FAIL" },
            r.threshold
        );
    }
    report::write_json(&cfg.output_dir, "convergence.json", &rows).map_err(Failure::io)?;
    if rows.iter().all(|r| r.passed) {
        Ok(())
    } else {
        Err(Failure { code: EXIT_ORDER, error: anyhow!("observed order below threshold") })
    }
}

pub fn load(path: &Path) -> Result<RunConfig, Failure> {
    RunConfig::load(path).map_err(Failure::config)
}
