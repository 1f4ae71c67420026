//! End-to-end properties of the linear and nonlinear solvers.

use std::f64::consts::PI;

use dispersolve::estimates::{existence_time, radius};
use dispersolve::fixedpoint::{self, picard_map, vnorm, PicardOptions};
use dispersolve::grid::{self, Grid, GridFunction};
use dispersolve::linear::{linear_evolve, stationary_solve, Forcing};
use dispersolve::{samples, DispersionOperator, InitialCondition, Trajectory};

#[test]
fn stationary_bound_ratio_is_stable() {
    let mut maxima = vec![];
    for n in [128, 257] {
        let g = Grid::new(1.0, n).unwrap();
        let op = DispersionOperator::assemble(1, g).unwrap();
        let worst = samples::corpus(&g, 1, 100, 2)
            .iter()
            .map(|u| {
                let gn = u.scaled(1.0 / grid::l2_norm(u));
                stationary_solve(&op, 1.0, &gn).unwrap().bound_ratio
            })
            .fold(0.0, f64::max);
        maxima.push(worst);
    }
    assert!(maxima.iter().all(|m| m.is_finite() && *m > 0.0));
    assert!((maxima[1] / maxima[0] - 1.0).abs() < 0.2, "{maxima:?}");
}

#[test]
fn kawahara_manufactured_evolution() {
    let s = dispersolve::suite::evolution_study(2, 1.0, 1.0, &[64, 129, 259], 2e-3, 0.05).unwrap();
    assert!(s.meets(1.7), "{s:?}");
}

#[test]
fn existence_time_is_monotone() {
    let mut by_k = vec![];
    for k in 1..=3 {
        let ts: Vec<f64> = [0.5, 1.0, 2.0].iter().map(|&r| existence_time(r, k, 1, 1.0, 0.5).unwrap().t_star).collect();
        assert!(ts.windows(2).all(|w| w[1] <= w[0]), "k = {k}: {ts:?}");
        by_k.push(ts);
    }
    for pair in by_k.windows(2) {
        assert!(pair[1].iter().zip(&pair[0]).all(|(hi, lo)| hi <= lo));
    }
    let (a, b) =
        (existence_time(1.0, 1, 2, 1.0, 0.5).unwrap().t_star, existence_time(1.0, 2, 2, 1.0, 0.5).unwrap().t_star);
    assert!(b < a);
}

/// `v(t) = u0 + (t / T) w`, which starts at `u0` as the V space requires.
fn ramp(u0: &GridFunction, w: &GridFunction, dt: f64, steps: usize) -> Trajectory {
    let t_end = dt * steps as f64;
    let times: Vec<f64> = (0..=steps).map(|m| m as f64 * dt).collect();
    let states = times.iter().map(|t| GridFunction::lin_comb(1.0, u0, t / t_end, w).unwrap()).collect();
    let dstates = vec![w.scaled(1.0 / t_end); steps + 1];
    Trajectory::new(times, states, dstates, dt).unwrap()
}

#[test]
fn picard_map_halves_squared_distance_at_t_star() {
    let g = Grid::new(1.0, 128).unwrap();
    let op = DispersionOperator::assemble(1, g).unwrap();
    let u0 = InitialCondition::Sin2 { amplitude: 1.0 }.sample(&g).unwrap();
    let r = radius(&u0, 1, 1).unwrap();
    let t_star = existence_time(r, 1, 1, 1.0, 0.5).unwrap().t_star;
    let steps = 8;
    let dt = t_star / steps as f64;
    let v1 = Trajectory::constant(&u0, dt, steps);
    for (seed, size) in [(0u64, 1e-12), (1, 1e-11), (2, 1e-10)] {
        let w = &samples::corpus(&g, 1, 1, seed)[0];
        let w = w.scaled(size / grid::l2_norm(w));
        let v2 = ramp(&u0, &w, dt, steps);
        let ball = 8.0 * r * r;
        assert!(vnorm(&v2, 1).unwrap().total <= ball);
        let p1 = picard_map(&op, &u0, &v1, 1, dt, t_star).unwrap();
        let p2 = picard_map(&op, &u0, &v2, 1, dt, t_star).unwrap();
        let before = vnorm(&v2.sub(&v1).unwrap(), 1).unwrap().total;
        let after = vnorm(&p2.sub(&p1).unwrap(), 1).unwrap().total;
        assert!(after <= 0.5 * before, "seed {seed}: {after} vs {before}");
        assert!(vnorm(&p2, 1).unwrap().total <= ball);
    }
}

#[test]
fn free_evolution_does_not_grow() {
    let g = Grid::new(1.0, 200).unwrap();
    for l in 1..=2 {
        let op = DispersionOperator::assemble(l, g).unwrap();
        let u0 = g.sample(|x| (-((x - 0.5) / 0.1).powi(2)).exp()).with_zero_boundary();
        let tr = linear_evolve(&op, &u0, Forcing::None, 1e-4, 0.02).unwrap();
        let n0 = grid::l2_norm(&u0);
        assert!(tr.states().iter().all(|u| grid::l2_norm(u) <= n0 * (1.0 + 1e-6)), "l = {l}");
    }
}

#[test]
fn nonlinear_solution_matches_fine_time_steps() {
    // Halving dt changes the solution by O(dt^2).
    let g = Grid::new(1.0, 100).unwrap();
    let op = DispersionOperator::assemble(1, g).unwrap();
    let u0 = g.sample(|x| (PI * x).sin().powi(2));
    let opts = PicardOptions::for_data(&u0, 0.0);
    let end = |dt: f64| fixedpoint::solve(&op, &u0, 2, dt, 0.004, &opts).unwrap().0.last().clone();
    let (a, b, c) = (end(1e-3), end(5e-4), end(2.5e-4));
    let (e1, e2) = (grid::l2_norm(&a.sub(&b).unwrap()), grid::l2_norm(&b.sub(&c).unwrap()));
    assert!(e1 / e2 > 3.0, "{e1} {e2}");
}
