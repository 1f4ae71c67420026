//! The Picard map `v -> u`, where `u` solves the linear problem with forcing
//! `-v^k D v`, together with the norm in which it contracts.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{self, Differentiator, GridFunction};
use crate::linear::{step_plan, CrankNicolson, Forcing, Trajectory};
use crate::operator::DispersionOperator;

/// Squared V-norm of a trajectory, split into its two parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VNorm {
    /// `max_m ||v||^2 + ||v_t||^2`
    pub sup_part: f64,
    /// Trapezoid in time of `sum_{j=1}^l ||D^j v||^2 + ||D^j v_t||^2`.
    pub integral_part: f64,
    pub total: f64,
}

/// Record of a Picard iteration.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ContractionLog {
    pub iterates: usize,
    /// `||u^(n)||_V^2` for every iterate produced, starting with `u^(1)`.
    pub vnorm_history: Vec<f64>,
    /// `||u^(n+1) - u^(n)||_V` for every step.
    pub step_history: Vec<f64>,
    /// Ratios of consecutive squared step norms.
    pub ratio_history: Vec<f64>,
    /// Whether `||u^(n)||_V^2 <= 8 R^2`.
    pub in_ball: Vec<bool>,
    pub radius: f64,
    /// Stopped at the rounding floor before reaching the tolerance: the
    /// steps no longer shrink and are below `FLOOR_RELATIVE * ||u||_V`.
    pub floor_limited: bool,
}

impl ContractionLog {
    pub fn max_ratio(&self) -> Option<f64> {
        self.ratio_history.iter().copied().reduce(f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    /// Stop once `||u^(n+1) - u^(n)||_V <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Ball radius `R` recorded in the log.
    pub radius: f64,
}

impl PicardOptions {
    /// `tol = 1e-8 (1 + ||u0||)` and at most 50 iterations.
    pub fn for_data(u0: &GridFunction, radius: f64) -> Self {
        PicardOptions { tol: 1e-8 * (1.0 + grid::l2_norm(u0)), max_iter: 50, radius }
    }
}

/// Steps below this fraction of the iterate's V-norm that have stopped
/// shrinking are treated as rounding noise. The noise grows like `h^-4`
/// because the V-norm differentiates `u_t = f - A_h u`.
pub const FLOOR_RELATIVE: f64 = 1e-4;

/// Stalled: the last three steps failed to halve the best earlier step.
fn stalled(steps: &[f64]) -> bool {
    let n = steps.len();
    if n < 5 {
        return false;
    }
    let best = |s: &[f64]| s.iter().copied().fold(f64::INFINITY, f64::min);
    best(&steps[n - 3..]) > 0.5 * best(&steps[..n - 3])
}

fn power(v: f64, k: usize) -> f64 {
    v.powi(k as i32)
}

/// V-norm evaluation with cached derivative stencils.
pub struct VNormEvaluator {
    diffs: Vec<Differentiator>,
}

impl VNormEvaluator {
    pub fn new(grid: grid::Grid, l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::parameter("l must be at least 1"));
        }
        let diffs = (1..=l).map(|j| grid.differentiator(j)).collect::<Result<_>>()?;
        Ok(VNormEvaluator { diffs })
    }

    pub fn eval(&self, v: &Trajectory) -> Result<VNorm> {
        let mut sup_part = 0.0f64;
        let mut dens = Vec::with_capacity(v.len());
        for (u, du) in v.states().iter().zip(v.dstates()) {
            let (a, b) = (grid::l2_norm(u), grid::l2_norm(du));
            sup_part = sup_part.max(a * a + b * b);
            let mut s = 0.0;
            for d in &self.diffs {
                let (x, y) = (grid::l2_norm(&d.apply(u)?), grid::l2_norm(&d.apply(du)?));
                s += x * x + y * y;
            }
            dens.push(s);
        }
        let t = v.times();
        let integral_part = (1..t.len()).map(|m| 0.5 * (t[m] - t[m - 1]) * (dens[m] + dens[m - 1])).sum::<f64>();
        Ok(VNorm { sup_part, integral_part, total: sup_part + integral_part })
    }
}

/// Squared V-norm of `v` with seminorms up to order `l`.
pub fn vnorm(v: &Trajectory, l: usize) -> Result<VNorm> {
    VNormEvaluator::new(*v.grid(), l)?.eval(v)
}

fn forcing_with(d: &Differentiator, v: &Trajectory, k: usize) -> Result<Trajectory> {
    if k == 0 {
        return Err(Error::parameter("nonlinearity exponent k must be at least 1"));
    }
    let mut states = Vec::with_capacity(v.len());
    let mut dstates = Vec::with_capacity(v.len());
    for (u, du) in v.states().iter().zip(v.dstates()) {
        let (dx, dxt) = (d.apply(u)?, d.apply(du)?);
        let (u, ut) = (u.values(), du.values());
        let (dx, dxt) = (dx.values(), dxt.values());
        let f = (0..u.len()).map(|i| -power(u[i], k) * dx[i]).collect();
        let ft =
            (0..u.len()).map(|i| -(k as f64) * power(u[i], k - 1) * ut[i] * dx[i] - power(u[i], k) * dxt[i]).collect();
        states.push(GridFunction::new(*v.grid(), f)?);
        dstates.push(GridFunction::new(*v.grid(), ft)?);
    }
    Trajectory::new(v.times().to_vec(), states, dstates, v.dt())
}

/// `f = -v^k D v` and its time derivative by the product rule.
pub fn nonlinear_forcing(v: &Trajectory, k: usize) -> Result<Trajectory> {
    forcing_with(&v.grid().differentiator(1)?, v, k)
}

/// Picard map and V-norm for one operator, step size and exponent.
pub struct Picard<'a> {
    cn: CrankNicolson<'a>,
    d1: Differentiator,
    norm: VNormEvaluator,
    k: usize,
}

impl<'a> Picard<'a> {
    pub fn new(op: &'a DispersionOperator, k: usize, dt: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::parameter("nonlinearity exponent k must be at least 1"));
        }
        Ok(Picard {
            cn: CrankNicolson::new(op, dt)?,
            d1: op.grid().differentiator(1)?,
            norm: VNormEvaluator::new(*op.grid(), op.l())?,
            k,
        })
    }

    pub fn vnorm(&self, v: &Trajectory) -> Result<VNorm> {
        self.norm.eval(v)
    }

    /// `P(v)`: the linear solution with forcing `-v^k D v` and data `u0`.
    pub fn apply(&self, u0: &GridFunction, v: &Trajectory) -> Result<Trajectory> {
        let f = forcing_with(&self.d1, v, self.k)?;
        self.cn.evolve(u0, Forcing::Samples(&f), v.len() - 1)
    }

    /// Iterates `P` from the constant-in-time extension of `u0`.
    pub fn iterate(
        &self,
        u0: &GridFunction,
        steps: usize,
        opts: &PicardOptions,
    ) -> Result<(Trajectory, ContractionLog)> {
        if opts.tol.is_nan() || opts.tol <= 0.0 {
            return Err(Error::parameter("Picard tolerance must be positive"));
        }
        let ball = 8.0 * opts.radius * opts.radius;
        let mut log = ContractionLog { radius: opts.radius, ..Default::default() };
        let u0 = u0.clone().with_zero_boundary();
        let mut u = Trajectory::constant(&u0, self.cn.dt(), steps);
        let mut last_sq: Option<f64> = None;
        while log.iterates < opts.max_iter {
            let next = self.apply(&u0, &u)?;
            let step_sq = self.vnorm(&next.sub(&u)?)?.total;
            let size = self.vnorm(&next)?.total;
            if !step_sq.is_finite() || !size.is_finite() {
                return Err(Error::Numerical {
                    message: format!("Picard iterate {} is not finite", log.iterates + 1),
                    pivot: None,
                    step: None,
                });
            }
            log.iterates += 1;
            log.vnorm_history.push(size);
            log.in_ball.push(size <= ball);
            log.step_history.push(step_sq.sqrt());
            if let Some(prev) = last_sq {
                log.ratio_history.push(if prev > 0.0 { step_sq / prev } else { 0.0 });
            }
            last_sq = Some(step_sq);
            u = next;
            if step_sq.sqrt() <= opts.tol {
                return Ok((u, log));
            }
            if step_sq.sqrt() <= FLOOR_RELATIVE * size.sqrt() && stalled(&log.step_history) {
                log.floor_limited = true;
                return Ok((u, log));
            }
        }
        Err(Error::NonConvergence { log: Box::new(log) })
    }
}

/// `P(v)` for the problem with data `u0` on `[0, t_end]`.
pub fn picard_map(
    op: &DispersionOperator,
    u0: &GridFunction,
    v: &Trajectory,
    k: usize,
    dt: f64,
    t_end: f64,
) -> Result<Trajectory> {
    let (steps, dt) = step_plan(dt, t_end)?;
    if v.len() != steps + 1 {
        return Err(Error::shape(format!("candidate has {} samples, the time grid has {}", v.len(), steps + 1)));
    }
    Picard::new(op, k, dt)?.apply(u0, v)
}

/// Fixed point of the Picard map over the whole interval `[0, t_end]`.
pub fn solve(
    op: &DispersionOperator,
    u0: &GridFunction,
    k: usize,
    dt: f64,
    t_end: f64,
    opts: &PicardOptions,
) -> Result<(Trajectory, ContractionLog)> {
    op.grid().check_same(u0.grid())?;
    let (steps, dt) = step_plan(dt, t_end)?;
    Picard::new(op, k, dt)?.iterate(u0, steps, opts)
}

/// Fixed points on consecutive windows of `window` steps, each started
/// from the end state of the previous one.
pub fn solve_windowed(
    op: &DispersionOperator,
    u0: &GridFunction,
    k: usize,
    dt: f64,
    t_end: f64,
    window: usize,
    opts: &PicardOptions,
) -> Result<(Trajectory, Vec<ContractionLog>)> {
    if window == 0 {
        return Err(Error::parameter("window must contain at least one step"));
    }
    op.grid().check_same(u0.grid())?;
    let (steps, dt) = step_plan(dt, t_end)?;
    let picard = Picard::new(op, k, dt)?;
    let mut logs = Vec::new();
    let mut done = 0;
    let mut whole: Option<Trajectory> = None;
    while done < steps {
        let n = window.min(steps - done);
        let start = whole.as_ref().map_or(u0, |w| w.last());
        let (piece, log) = match picard.iterate(start, n, opts) {
            Ok(r) => r,
            Err(Error::NonConvergence { log }) => {
                return Err(Error::NonConvergence { log });
            }
            Err(e) => return Err(e),
        };
        logs.push(log);
        match whole.as_mut() {
            None => whole = Some(piece),
            Some(w) => w.extend(piece)?,
        }
        done += n;
    }
    Ok((whole.expect("at least one window"), logs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    fn kdv(n: usize) -> DispersionOperator {
        DispersionOperator::assemble(1, Grid::new(1.0, n).unwrap()).unwrap()
    }

    #[test]
    fn forcing_of_zero_is_zero() {
        let g = Grid::new(1.0, 32).unwrap();
        let v = Trajectory::constant(&GridFunction::zeros(g), 0.1, 3);
        let f = nonlinear_forcing(&v, 3).unwrap();
        assert!(f.states().iter().chain(f.dstates()).all(|u| u.sup() == 0.0));
    }

    #[test]
    fn forcing_of_sine() {
        let g = Grid::new(1.0, 400).unwrap();
        let v = Trajectory::constant(&g.sample(|x| (PI * x).sin()), 0.1, 2);
        let f = nonlinear_forcing(&v, 1).unwrap();
        let exact = g.sample(|x| -0.5 * PI * (2.0 * PI * x).sin()).with_zero_boundary();
        for (s, d) in f.states().iter().zip(f.dstates()) {
            assert!(s.sub(&exact).unwrap().sup() < 1e-4);
            assert_eq!(d.sup(), 0.0);
        }
    }

    #[test]
    fn forcing_of_constant_vanishes() {
        let g = Grid::new(1.0, 32).unwrap();
        let c = GridFunction::with_boundary(g, vec![0.7; 32], [0.7, 0.7]).unwrap();
        let f = nonlinear_forcing(&Trajectory::constant(&c, 0.1, 1), 2).unwrap();
        assert!(f.states()[0].sup() < 1e-12);
        assert!(nonlinear_forcing(&Trajectory::constant(&c, 0.1, 1), 0).is_err());
    }

    #[test]
    fn vnorm_of_static_sine() {
        let g = Grid::new(1.0, 400).unwrap();
        let v = Trajectory::constant(&g.sample(|x| (PI * x).sin()), 0.01, 100);
        let n = vnorm(&v, 1).unwrap();
        assert!((n.sup_part - 0.5).abs() < 1e-3);
        assert!((n.integral_part - PI * PI / 2.0).abs() < 1e-3 * PI * PI);
        assert_eq!(n.total, n.sup_part + n.integral_part);
    }

    #[test]
    fn zero_data_converges_immediately() {
        let op = kdv(40);
        let u0 = GridFunction::zeros(*op.grid());
        let opts = PicardOptions::for_data(&u0, 0.0);
        let (u, log) = solve(&op, &u0, 1, 1e-3, 0.01, &opts).unwrap();
        assert_eq!(log.iterates, 1);
        assert!(u.states().iter().all(|s| s.sup() == 0.0));
        assert_eq!(log.in_ball, vec![true]);
    }

    #[test]
    fn converged_solution_is_a_fixed_point() {
        let op = kdv(64);
        let u0 = op.grid().sample(|x| (PI * x).sin().powi(2));
        let opts = PicardOptions { tol: 1e-9, max_iter: 40, radius: 1.0 };
        let (u, log) = solve(&op, &u0, 2, 1e-3, 0.02, &opts).unwrap();
        assert!(log.iterates > 1);
        let again = picard_map(&op, &u0, &u, 2, 1e-3, 0.02).unwrap();
        assert!(vnorm(&again.sub(&u).unwrap(), 1).unwrap().total.sqrt() <= opts.tol);
    }

    #[test]
    fn stall_detection() {
        assert!(!stalled(&[1.0, 0.1, 0.01, 0.001]));
        assert!(!stalled(&[1.0, 0.1, 0.01, 0.001, 1e-4]));
        assert!(stalled(&[1.0, 1e-3, 2e-5, 1.7e-5, 1.6e-5, 1.6e-5]));
        assert!(!stalled(&[1.0, 1e-3, 2e-5, 1.7e-5, 1.6e-5, 0.9e-5]));
    }

    #[test]
    fn iteration_cap_reports_log() {
        let op = kdv(64);
        let u0 = op.grid().sample(|x| 5.0 * (PI * x).sin().powi(2));
        let opts = PicardOptions { tol: 1e-14, max_iter: 2, radius: 1.0 };
        match solve(&op, &u0, 1, 1e-3, 0.05, &opts) {
            Err(Error::NonConvergence { log }) => {
                assert_eq!(log.iterates, 2);
                assert_eq!(log.ratio_history.len(), 1);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn windows_match_global_solve_for_one_window() {
        let op = kdv(48);
        let u0 = op.grid().sample(|x| (PI * x).sin().powi(2));
        let opts = PicardOptions { tol: 1e-12, max_iter: 60, radius: 1.0 };
        let (a, _) = solve(&op, &u0, 1, 1e-3, 0.01, &opts).unwrap();
        let (b, logs) = solve_windowed(&op, &u0, 1, 1e-3, 0.01, 100, &opts).unwrap();
        assert_eq!(logs.len(), 1);
        assert_eq!(a.len(), b.len());
        let (c, logs) = solve_windowed(&op, &u0, 1, 1e-3, 0.01, 3, &opts).unwrap();
        assert_eq!(logs.len(), 4);
        assert_eq!(c.len(), 11);
        assert!((c.times()[10] - 0.01).abs() < 1e-15);
        let gap = c.last().sub(a.last()).unwrap();
        assert!(grid::l2_norm(&gap) < 1e-6, "{}", grid::l2_norm(&gap));
    }
}
