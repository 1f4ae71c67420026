//! Randomized inequality suites and refinement studies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::estimates::{self, InequalityVerdict};
use crate::fixedpoint::{self, PicardOptions};
use crate::grid::{self, Grid};
use crate::linear::{linear_evolve, stationary_solve, Forcing};
use crate::manufactured::Profile;
use crate::operator::DispersionOperator;
use crate::samples;

/// Pass/fail summary of a batch of inequality checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Smallest `rhs - lhs` seen.
    pub worst_slack: f64,
    pub passed: bool,
}

impl SuiteOutcome {
    fn new(name: impl Into<String>) -> Self {
        SuiteOutcome { name: name.into(), cases: 0, failures: 0, worst_slack: f64::INFINITY, passed: true }
    }

    fn record(&mut self, v: &InequalityVerdict) {
        self.cases += 1;
        self.worst_slack = self.worst_slack.min(v.slack);
        if !v.satisfied {
            self.failures += 1;
            self.passed = false;
        }
    }
}

/// `||u||_inf <= constant ||D^l u||^{1/2l} ||u||^{1-1/2l}` on `count` random
/// domain functions for each `l`.
pub fn gn_suite(ls: &[usize], count: usize, n: usize, length: f64, seed: u64, constant: f64) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new(format!("gagliardo-nirenberg, C = {constant:.4}"));
    let g = Grid::new(length, n)?;
    for &l in ls {
        for u in samples::corpus(&g, l, count, seed.wrapping_add(l as u64)) {
            out.record(&estimates::gn_check_with(&u, l, constant)?);
        }
    }
    Ok(out)
}

/// `|v1^k - v2^k|` bound on `samples` uniform draws from `[-10, 10]^2`,
/// cycling `k` through `1..=k_max`.
pub fn tvm_suite(samples: usize, k_max: usize, seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new(format!("power difference, k <= {k_max}"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..samples {
        let (a, b) = (rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        out.record(&estimates::tvm_check(a, b, 1 + s % k_max.max(1)));
    }
    out
}

/// Calibrates `a1` (with `a1 = 1.05 max best_a1`) on one corpus and checks
/// it on an independent one.
pub fn interpolation_suite(
    count: usize,
    n: usize,
    length: f64,
    seed: u64,
    m: usize,
    i: usize,
    a2: f64,
) -> Result<(estimates::InterpolationConstants, SuiteOutcome)> {
    let g = Grid::new(length, n)?;
    let l = m.div_ceil(2).max(1);
    let calibration = samples::corpus(&g, l, count, seed);
    let consts = estimates::calibrate_interpolation(&calibration, m, i, a2, 1.05)?;
    let mut out = SuiteOutcome::new(format!("interpolation m = {m}, i = {i}"));
    for u in samples::corpus(&g, l, count, seed.wrapping_add(1 << 32)) {
        out.record(&estimates::interpolation_check(&u, m, i, consts)?.1);
    }
    Ok((consts, out))
}

/// Errors of one quantity on a sequence of refined discretizations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderStudy {
    pub label: String,
    pub sizes: Vec<usize>,
    pub spacings: Vec<f64>,
    pub errors: Vec<f64>,
    /// Observed order between consecutive levels; empty when all errors vanish.
    pub orders: Vec<f64>,
}

impl OrderStudy {
    pub fn new(label: impl Into<String>, grids: &[Grid], errors: Vec<f64>) -> Self {
        let spacings: Vec<f64> = grids.iter().map(|g| g.spacing()).collect();
        let orders = if errors.iter().all(|&e| e == 0.0) {
            vec![]
        } else {
            (1..errors.len()).map(|j| (errors[j - 1] / errors[j]).ln() / (spacings[j - 1] / spacings[j]).ln()).collect()
        };
        OrderStudy {
            label: label.into(),
            sizes: grids.iter().map(|g| g.interior()).collect(),
            spacings,
            errors,
            orders,
        }
    }

    /// True when every error is exactly zero.
    pub fn exact(&self) -> bool {
        self.orders.is_empty()
    }

    /// Smallest observed order, `None` for exact results.
    pub fn min_order(&self) -> Option<f64> {
        self.orders.iter().copied().reduce(f64::min)
    }

    /// Order over the whole refinement range.
    pub fn overall_order(&self) -> Option<f64> {
        let n = self.errors.len();
        if self.exact() || n < 2 {
            return None;
        }
        Some((self.errors[0] / self.errors[n - 1]).ln() / (self.spacings[0] / self.spacings[n - 1]).ln())
    }

    /// Exact, or every consecutive order at least `threshold`.
    pub fn meets(&self, threshold: f64) -> bool {
        self.min_order().is_none_or(|p| p >= threshold)
    }
}

fn grids(length: f64, sizes: &[usize]) -> Result<Vec<Grid>> {
    sizes.iter().map(|&n| Grid::new(length, n)).collect()
}

/// `|(A_h u, u) - (D^l u(0))^2 / 2|` for the smooth profile in the domain.
pub fn dissipation_study(l: usize, length: f64, sizes: &[usize]) -> Result<OrderStudy> {
    let gs = grids(length, sizes)?;
    let p = Profile::new(l, length);
    let errors = gs
        .iter()
        .map(|g| DispersionOperator::assemble(l, *g)?.dissipation_residual(&p.sample(g)).map(f64::abs))
        .collect::<Result<_>>()?;
    Ok(OrderStudy::new(format!("dissipation identity, l = {l}"), &gs, errors))
}

/// Manufactured stationary solve `a u + A u = g` with `u = amplitude * phi`.
/// Also returns the largest `residual / (||g|| + 1)`.
pub fn stationary_study(l: usize, length: f64, a: f64, amplitude: f64, sizes: &[usize]) -> Result<(OrderStudy, f64)> {
    let gs = grids(length, sizes)?;
    let p = Profile::new(l, length);
    let mut errors = vec![];
    let mut worst = 0.0f64;
    for g in &gs {
        let op = DispersionOperator::assemble(l, *g)?;
        let rhs = g.sample(|x| amplitude * (a * p.value(x) + p.operator(x))).with_zero_boundary();
        let r = stationary_solve(&op, a, &rhs)?;
        let exact = p.sample(g).scaled(amplitude);
        errors.push(grid::l2_norm(&r.u.sub(&exact)?));
        worst = worst.max(r.residual / (grid::l2_norm(&rhs) + 1.0));
    }
    Ok((OrderStudy::new(format!("stationary solve, l = {l}"), &gs, errors), worst))
}

/// Manufactured evolution `u = amplitude * e^{-t} phi(x)` on `[0, t_end]`,
/// halving `dt` with `h`; error is the largest `||u^m - u(t_m)||`.
pub fn evolution_study(
    l: usize,
    length: f64,
    amplitude: f64,
    sizes: &[usize],
    dt0: f64,
    t_end: f64,
) -> Result<OrderStudy> {
    let gs = grids(length, sizes)?;
    let p = Profile::new(l, length);
    let mut errors = vec![];
    for (level, g) in gs.iter().enumerate() {
        let op = DispersionOperator::assemble(l, *g)?;
        let f = |t: f64, x: f64| amplitude * (-t).exp() * (p.operator(x) - p.value(x));
        let dt = dt0 / (1u64 << level) as f64;
        let u0 = p.sample(g).scaled(amplitude);
        let tr = linear_evolve(&op, &u0, Forcing::Pointwise(&f), dt, t_end)?;
        let mut err = 0.0f64;
        for (t, u) in tr.times().iter().zip(tr.states()) {
            err = err.max(grid::l2_norm(&u.sub(&u0.scaled((-t).exp()))?));
        }
        errors.push(err);
    }
    Ok(OrderStudy::new(format!("linear evolution, l = {l}"), &gs, errors))
}

/// Largest energy-identity residual of converged nonlinear solutions,
/// halving `dt` with `h`. Picard restarts every `window` steps.
#[allow(clippy::too_many_arguments)]
pub fn energy_study(
    k: usize,
    l: usize,
    u0: &crate::initial::InitialCondition,
    length: f64,
    sizes: &[usize],
    dt0: f64,
    t_end: f64,
    window: usize,
) -> Result<OrderStudy> {
    let gs = grids(length, sizes)?;
    let mut errors = vec![];
    for (level, g) in gs.iter().enumerate() {
        let op = DispersionOperator::assemble(l, *g)?;
        let u = u0.sample(g)?;
        let opts = PicardOptions { max_iter: 100, ..PicardOptions::for_data(&u, 0.0) };
        let dt = dt0 / (1u64 << level) as f64;
        let (tr, _) = fixedpoint::solve_windowed(&op, &u, k, dt, t_end, window << level, &opts)?;
        errors.push(estimates::energy_residual(&tr, k, l)?.max_abs());
    }
    Ok(OrderStudy::new(format!("energy identity, k = {k}, l = {l}"), &gs, errors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_of_exact_power_law() {
        let gs = grids(1.0, &[9, 19, 39]).unwrap();
        let errors = gs.iter().map(|g| g.spacing().powi(2)).collect();
        let s = OrderStudy::new("h^2", &gs, errors);
        assert!(s.orders.iter().all(|p| (p - 2.0).abs() < 1e-12));
        assert!(s.meets(1.99) && !s.meets(2.01));
    }

    #[test]
    fn zero_errors_are_exact() {
        let gs = grids(1.0, &[9, 19]).unwrap();
        let s = OrderStudy::new("zero", &gs, vec![0.0, 0.0]);
        assert!(s.exact() && s.meets(10.0) && s.min_order().is_none());
    }

    #[test]
    fn zero_amplitude_studies_are_exact() {
        let (s, res) = stationary_study(1, 1.0, 1.0, 0.0, &[16, 33]).unwrap();
        assert!(s.exact());
        assert_eq!(res, 0.0);
        assert!(evolution_study(1, 1.0, 0.0, &[16, 33], 0.01, 0.05).unwrap().exact());
    }

    #[test]
    fn forced_failure_with_small_constant() {
        let out = gn_suite(&[1], 50, 128, 1.0, 0, 0.5).unwrap();
        assert!(!out.passed && out.failures > 0);
    }

    #[test]
    fn tvm_suite_passes() {
        let out = tvm_suite(10_000, 8, 1);
        assert!(out.passed && out.cases == 10_000);
    }
}
