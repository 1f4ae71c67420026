//! Linear problems: the stationary equation `a u + A u = g` and the
//! evolution `u_t + A u = f` with homogeneous boundary conditions.

use crate::banded::BandedLu;
use crate::error::{Error, Result};
use crate::grid::{self, Grid, GridFunction};
use crate::operator::DispersionOperator;

/// Time samples of a grid function together with its time derivative.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<GridFunction>,
    dstates: Vec<GridFunction>,
    dt: f64,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<GridFunction>, dstates: Vec<GridFunction>, dt: f64) -> Result<Self> {
        if times.is_empty() || times.len() != states.len() || states.len() != dstates.len() {
            return Err(Error::shape(format!(
                "trajectory lengths differ: {} times, {} states, {} derivatives",
                times.len(),
                states.len(),
                dstates.len()
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::parameter("trajectory times must increase"));
        }
        let grid = *states[0].grid();
        for u in states.iter().chain(&dstates) {
            grid.check_same(u.grid())?;
        }
        Ok(Trajectory { times, states, dstates, dt })
    }

    /// `u(t) = u0` on `steps + 1` uniform samples, with `u_t = 0`.
    pub fn constant(u0: &GridFunction, dt: f64, steps: usize) -> Self {
        let times = (0..=steps).map(|m| m as f64 * dt).collect();
        let zero = GridFunction::zeros(*u0.grid());
        Trajectory { times, states: vec![u0.clone(); steps + 1], dstates: vec![zero; steps + 1], dt }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[GridFunction] {
        &self.states
    }

    pub fn dstates(&self) -> &[GridFunction] {
        &self.dstates
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Grid {
        self.states[0].grid()
    }

    pub fn last(&self) -> &GridFunction {
        self.states.last().expect("non-empty trajectory")
    }

    /// Sample-wise difference `self - other` of states and derivatives.
    pub fn sub(&self, other: &Trajectory) -> Result<Trajectory> {
        if self.len() != other.len() {
            return Err(Error::shape(format!("trajectory sample counts differ: {} vs {}", self.len(), other.len())));
        }
        let diff = |a: &[GridFunction], b: &[GridFunction]| -> Result<Vec<GridFunction>> {
            a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
        };
        Ok(Trajectory {
            times: self.times.clone(),
            states: diff(&self.states, &other.states)?,
            dstates: diff(&self.dstates, &other.dstates)?,
            dt: self.dt,
        })
    }

    /// Appends `next`, whose first sample must coincide with this one's last.
    pub fn extend(&mut self, next: Trajectory) -> Result<()> {
        self.grid().check_same(next.grid())?;
        let offset = *self.times.last().unwrap();
        let mut it = next.times.into_iter().zip(next.states.into_iter().zip(next.dstates));
        if let Some((_, (_, d0))) = it.next() {
            // Keep the derivative from the newer window: it reflects the
            // forcing actually used from this time on.
            *self.dstates.last_mut().unwrap() = d0;
        }
        for (t, (u, du)) in it {
            self.times.push(offset + t);
            self.states.push(u);
            self.dstates.push(du);
        }
        Ok(())
    }

    /// Largest `||dstates_m - (states_{m+1} - states_{m-1}) / (2 dt_m)||`
    /// over interior samples.
    pub fn consistency_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for m in 1..self.len().saturating_sub(1) {
            let span = self.times[m + 1] - self.times[m - 1];
            let d = self.states[m + 1]
                .sub(&self.states[m - 1])
                .map(|d| d.scaled(1.0 / span))
                .and_then(|c| self.dstates[m].sub(&c))
                .map(|e| grid::l2_norm(&e))
                .unwrap_or(f64::INFINITY);
            worst = worst.max(d);
        }
        worst
    }
}

#[derive(Debug, Clone)]
pub struct StationaryResult {
    pub u: GridFunction,
    /// `||(a I + A_h) u - g||`
    pub residual: f64,
    /// `||u||_{H^{2l+1}} / ||g||`, zero when `g = 0`.
    pub bound_ratio: f64,
    pub condition_estimate: f64,
}

/// Solves `(a I + A_h) u = g` by banded LU with one step of iterative refinement.
pub fn stationary_solve(op: &DispersionOperator, a: f64, g: &GridFunction) -> Result<StationaryResult> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::parameter(format!("shift a must be positive, got {a}")));
    }
    op.grid().check_same(g.grid())?;
    let m = op.matrix().shifted(1.0, a);
    let lu = m.factor()?;

    let rhs = g.values();
    let mut u = lu.solve(rhs);
    let r: Vec<f64> = m.matvec(&u).iter().zip(rhs).map(|(x, y)| x - y).collect();
    let du = lu.solve(&r);
    u.iter_mut().zip(du).for_each(|(x, d)| *x -= d);

    let u = GridFunction::new(*op.grid(), u)?;
    let r = GridFunction::new(*op.grid(), m.matvec(u.values()).iter().zip(rhs).map(|(x, y)| x - y).collect())?;
    let gnorm = grid::l2_norm(&g.clone().with_zero_boundary());
    let order = 2 * op.l() + 1;
    let bound_ratio = if gnorm == 0.0 { 0.0 } else { grid::norms(&u, order)?.sobolev_sq(order).sqrt() / gnorm };
    Ok(StationaryResult { u, residual: grid::l2_norm(&r), bound_ratio, condition_estimate: lu.condition_estimate() })
}

/// Right-hand side `f` of the evolution problem.
#[derive(Clone, Copy)]
pub enum Forcing<'a> {
    None,
    /// Samples on the same time levels as the solution; half-step values
    /// are averages of neighbouring samples.
    Samples(&'a Trajectory),
    /// `f(t, x)`, evaluated at half steps and interior nodes.
    Pointwise(&'a dyn Fn(f64, f64) -> f64),
}

impl Forcing<'_> {
    fn at(&self, grid: &Grid, m: usize, t: f64) -> Vec<f64> {
        match self {
            Forcing::None => vec![0.0; grid.interior()],
            Forcing::Samples(f) => f.states[m].values().to_vec(),
            Forcing::Pointwise(f) => grid.interior_nodes().map(|x| f(t, x)).collect(),
        }
    }

    fn half_step(&self, grid: &Grid, m: usize, t0: f64, t1: f64) -> Vec<f64> {
        match self {
            Forcing::Samples(f) => {
                f.states[m].values().iter().zip(f.states[m + 1].values()).map(|(a, b)| 0.5 * (a + b)).collect()
            }
            _ => self.at(grid, m, 0.5 * (t0 + t1)),
        }
    }
}

/// Uniform step count and step size covering `[0, t_end]` with steps no longer than `dt`.
pub fn step_plan(dt: f64, t_end: f64) -> Result<(usize, f64)> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::parameter(format!("time step must be positive, got {dt}")));
    }
    if !(t_end.is_finite() && t_end >= dt * (1.0 - 1e-12)) {
        return Err(Error::parameter(format!("final time {t_end} must be at least dt = {dt}")));
    }
    let steps = ((t_end / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    Ok((steps, t_end / steps as f64))
}

/// Factorizations shared by every Crank–Nicolson step of one step size.
pub struct CrankNicolson<'a> {
    op: &'a DispersionOperator,
    dt: f64,
    implicit: BandedLu,
    explicit: crate::banded::BandedMatrix,
}

impl<'a> CrankNicolson<'a> {
    pub fn new(op: &'a DispersionOperator, dt: f64) -> Result<Self> {
        let implicit = op.matrix().shifted(0.5 * dt, 1.0).factor()?;
        let explicit = op.matrix().shifted(-0.5 * dt, 1.0);
        Ok(CrankNicolson { op, dt, implicit, explicit })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Evolves `u0` over `steps` steps of size `dt`.
    pub fn evolve(&self, u0: &GridFunction, forcing: Forcing<'_>, steps: usize) -> Result<Trajectory> {
        let grid = *self.op.grid();
        grid.check_same(u0.grid())?;
        if let Forcing::Samples(f) = forcing {
            grid.check_same(f.grid())?;
            if f.len() != steps + 1 {
                return Err(Error::shape(format!("forcing has {} samples, evolution needs {}", f.len(), steps + 1)));
            }
        }
        let dt = self.dt;
        let mut times = Vec::with_capacity(steps + 1);
        let mut states = Vec::with_capacity(steps + 1);
        let mut dstates = Vec::with_capacity(steps + 1);

        let mut u = u0.clone().with_zero_boundary();
        for m in 0..=steps {
            let t = m as f64 * dt;
            let au = self.op.matrix().matvec(u.values());
            let du: Vec<f64> = forcing.at(&grid, m, t).iter().zip(&au).map(|(f, a)| f - a).collect();
            times.push(t);
            dstates.push(GridFunction::new(grid, du).map_err(|_| nan_at(m))?);
            if m == steps {
                states.push(u);
                break;
            }
            let mut b = self.explicit.matvec(u.values());
            for (bi, fi) in b.iter_mut().zip(forcing.half_step(&grid, m, t, t + dt)) {
                *bi += dt * fi;
            }
            self.implicit.solve_in_place(&mut b);
            let next = GridFunction::new(grid, b).map_err(|_| nan_at(m + 1))?;
            states.push(std::mem::replace(&mut u, next));
        }
        Trajectory::new(times, states, dstates, dt)
    }
}

fn nan_at(step: usize) -> Error {
    Error::Numerical { message: format!("non-finite value at time step {step}"), pivot: None, step: Some(step) }
}

/// Crank–Nicolson solution of `u_t + A_h u = f`, `u(0) = u0` on `[0, t_end]`.
///
/// The step is shrunk if necessary so that a whole number of steps ends
/// exactly at `t_end`.
pub fn linear_evolve(
    op: &DispersionOperator,
    u0: &GridFunction,
    forcing: Forcing<'_>,
    dt: f64,
    t_end: f64,
) -> Result<Trajectory> {
    let (steps, dt) = step_plan(dt, t_end)?;
    CrankNicolson::new(op, dt)?.evolve(u0, forcing, steps)
}
