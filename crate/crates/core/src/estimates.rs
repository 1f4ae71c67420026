//! Checkers for the inequalities the existence argument relies on, the
//! weighted energy identity, and the explicit existence-time budget.

use serde::Serialize;
use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::grid::{self, GridFunction};
use crate::linear::Trajectory;
use crate::operator::left_trace;

/// Outcome of evaluating `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityVerdict {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    /// `rhs - lhs`
    pub slack: f64,
}

impl InequalityVerdict {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        InequalityVerdict { lhs, rhs, slack, satisfied: slack >= -1e-12 * (rhs.abs() + 1.0) }
    }
}

/// `||u||_inf <= c ||D^l u||^{1/(2l)} ||u||^{1-1/(2l)}` with `c = sqrt 2`.
pub fn gn_check(u: &GridFunction, l: usize) -> Result<InequalityVerdict> {
    gn_check_with(u, l, std::f64::consts::SQRT_2)
}

/// [`gn_check`] with an arbitrary constant in place of `sqrt 2`.
pub fn gn_check_with(u: &GridFunction, l: usize, constant: f64) -> Result<InequalityVerdict> {
    if l == 0 {
        return Err(Error::parameter("l must be at least 1"));
    }
    let dl = grid::l2_norm(&grid::diff(u, l)?);
    let theta = 1.0 / (2 * l) as f64;
    let rhs = constant * dl.powf(theta) * grid::l2_norm(u).powf(1.0 - theta);
    Ok(InequalityVerdict::new(u.sup(), rhs))
}

/// Constants of `||D^i u|| <= a1 ||D^m u||^{i/m} ||u||^{1-i/m} + a2 ||u||`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterpolationConstants {
    pub a1: f64,
    pub a2: f64,
}

/// Smallest `a1` that makes the interpolation inequality hold for `u` with
/// the given `a2`, and the verdict for `consts`.
pub fn interpolation_check(
    u: &GridFunction,
    m: usize,
    i: usize,
    consts: InterpolationConstants,
) -> Result<(f64, InequalityVerdict)> {
    if !(0 < i && i < m) {
        return Err(Error::parameter(format!("need 0 < i < m, got i = {i}, m = {m}")));
    }
    let u0 = grid::l2_norm(u);
    let di = grid::l2_norm(&grid::diff(u, i)?);
    let dm = grid::l2_norm(&grid::diff(u, m)?);
    let theta = i as f64 / m as f64;
    let product = dm.powf(theta) * u0.powf(1.0 - theta);
    let excess = (di - consts.a2 * u0).max(0.0);
    let best = if excess == 0.0 {
        0.0
    } else if product > 0.0 {
        excess / product
    } else {
        f64::INFINITY
    };
    let verdict = InequalityVerdict::new(di, consts.a1 * product + consts.a2 * u0);
    Ok((best, verdict))
}

/// Constants `a1 = margin * max best_a1` over `corpus`, for a fixed `a2`.
pub fn calibrate_interpolation(
    corpus: &[GridFunction],
    m: usize,
    i: usize,
    a2: f64,
    margin: f64,
) -> Result<InterpolationConstants> {
    let probe = InterpolationConstants { a1: 0.0, a2 };
    let mut worst = 0.0f64;
    for u in corpus {
        worst = worst.max(interpolation_check(u, m, i, probe)?.0);
    }
    Ok(InterpolationConstants { a1: margin * worst, a2 })
}

/// `|v1^k - v2^k| <= k 2^{k-1} (|v1|^{k-1} + |v2|^{k-1}) |v1 - v2|`.
pub fn tvm_check(v1: f64, v2: f64, k: usize) -> InequalityVerdict {
    let k = k.max(1) as i32;
    let lhs = (v1.powi(k) - v2.powi(k)).abs();
    let rhs = k as f64 * 2f64.powi(k - 1) * (v1.abs().powi(k - 1) + v2.abs().powi(k - 1)) * (v1 - v2).abs();
    InequalityVerdict::new(lhs, rhs)
}

/// Residual of the weighted energy identity at the interior time samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyResidual {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl EnergyResidual {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Terms of the weighted energy identity that do not involve time
/// derivatives: `sum_j (2j+1) ||D^j u||^2 + (D^l u(0))^2 + 2 (u^k D u, (1+x) u)`.
pub fn energy_flux(u: &GridFunction, k: usize, l: usize) -> Result<f64> {
    let mut s = 0.0;
    for j in 1..=l {
        let d = grid::l2_norm(&grid::diff(u, j)?);
        s += (2 * j + 1) as f64 * d * d;
    }
    let trace = left_trace(u, l)?;
    let du = grid::diff(u, 1)?;
    let nonlin = u.zip_map(&du, |a, b| a.powi(k as i32) * b)?;
    Ok(s + trace * trace + 2.0 * grid::weighted_inner(&nonlin, u)?)
}

/// `d/dt (1+x, u^2) + energy_flux(u)` with the time derivative taken by
/// centered differences; defined at every sample except the two ends.
pub fn energy_residual(u: &Trajectory, k: usize, l: usize) -> Result<EnergyResidual> {
    if u.len() < 3 {
        return Err(Error::sizing(format!("energy residual needs at least 3 time samples, got {}", u.len())));
    }
    if k == 0 || l == 0 {
        return Err(Error::parameter("k and l must be at least 1"));
    }
    let weighted: Vec<f64> = u.states().iter().map(|s| grid::weighted_inner(s, s)).collect::<Result<_>>()?;
    let t = u.times();
    let mut out = EnergyResidual { times: vec![], values: vec![] };
    for m in 1..u.len() - 1 {
        let rate = (weighted[m + 1] - weighted[m - 1]) / (t[m + 1] - t[m - 1]);
        out.times.push(t[m]);
        out.values.push(rate + energy_flux(&u.states()[m], k, l)?);
    }
    Ok(out)
}

/// Trapezoid-in-time integral of `||D^order u||^2`.
pub fn seminorm_integral(u: &Trajectory, order: usize) -> Result<f64> {
    let d = u.grid().differentiator(order)?;
    let dens = u.states().iter().map(|s| d.apply(s).map(|v| grid::l2_norm(&v).powi(2))).collect::<Result<Vec<_>>>()?;
    let t = u.times();
    Ok((1..t.len()).map(|m| 0.5 * (t[m] - t[m - 1]) * (dens[m] + dens[m - 1])).sum())
}

/// `R = sqrt((1+L)(1+l)(2^k ||u0||_{H^l}^{2(k+1)} + ||u0||_{H^{2l+1}}^2))`.
pub fn radius(u0: &GridFunction, k: usize, l: usize) -> Result<f64> {
    if k == 0 || l == 0 {
        return Err(Error::parameter("k and l must be at least 1"));
    }
    let n = grid::norms(u0, 2 * l + 1)?;
    let low = n.sobolev_sq(l);
    let high = n.sobolev_sq(2 * l + 1);
    let len = u0.grid().length();
    let r2 = (1.0 + len) * (1.0 + l as f64) * (2f64.powi(k as i32) * low.powi(k as i32 + 1) + high);
    Ok(r2.sqrt())
}

/// Beyond this exponent the constants are evaluated through logarithms.
pub const DIRECT_K_MAX: usize = 30;

fn alpha_direct(k: f64) -> f64 {
    9.0 * k * 2f64.powf(k) * 17f64.powf(k - 1.0) + 34f64.powf(k)
}

fn beta_direct(k: f64) -> f64 {
    9.0 * k * k * 2f64.powf(3.0 * k) * 17f64.powf(k - 1.0) + 34f64.powf(k)
}

fn gamma_direct(k: f64) -> f64 {
    let inner = 25.0 + 18.0 * (k - 1.0).powi(2) * 4f64.powf(k) / 17.0 + 17.0 / k + k * 2f64.powf(2.0 * k + 2.0);
    k * 2f64.powf(k) * 17f64.powf(k - 1.0) * inner
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `(ln alpha_k, ln beta_k, ln gamma_k)`.
fn log_constants(k: usize) -> (f64, f64, f64) {
    let kf = k as f64;
    if k <= DIRECT_K_MAX {
        return (alpha_direct(kf).ln(), beta_direct(kf).ln(), gamma_direct(kf).ln());
    }
    let (l2, l17, l34) = (2f64.ln(), 17f64.ln(), 34f64.ln());
    let la = log_add(9f64.ln() + kf.ln() + kf * l2 + (kf - 1.0) * l17, kf * l34);
    let lb = log_add(9f64.ln() + 2.0 * kf.ln() + 3.0 * kf * l2 + (kf - 1.0) * l17, kf * l34);
    let tail = 18.0 * (kf - 1.0).powi(2) / 17.0 + 4.0 * kf + (25.0 + 17.0 / kf) * (-2.0 * kf * l2).exp();
    let lg = kf.ln() + kf * l2 + (kf - 1.0) * l17 + 2.0 * kf * l2 + tail.ln();
    (la, lb, lg)
}

/// The constants and time conditions of the local existence argument.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExistenceBudget {
    pub k: usize,
    pub l: usize,
    pub length: f64,
    pub radius: f64,
    pub horizon: f64,
    pub alpha_k: f64,
    pub beta_k: f64,
    pub gamma_k: f64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub t5: f64,
    pub t6: f64,
    pub t7: f64,
    pub t8: f64,
    pub t0: f64,
    pub t_star: f64,
}

/// Coefficients multiplying `T` in the printed conditions.
struct Coefficients {
    c1: f64,
    ca: f64,
    cb: f64,
    cg: f64,
    /// `9k 34^{k-1} / alpha_k`
    q: f64,
}

impl Coefficients {
    fn new(k: usize, length: f64, radius: f64) -> Self {
        let (la, lb, lg) = log_constants(k);
        let kf = k as f64;
        let base = (1.0 + length).ln() + 2.0 * kf * radius.ln();
        let scale = |lc: f64| if radius == 0.0 { 0.0 } else { (base + lc).exp() };
        Coefficients {
            c1: scale(9f64.ln() + kf * 34f64.ln()),
            ca: scale(la),
            cb: scale(lb),
            cg: scale(lg),
            q: (9f64.ln() + kf.ln() + (kf - 1.0) * 34f64.ln() - la).exp(),
        }
    }
}

/// `c * t` with `0 * inf` read as zero.
fn times(c: f64, t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        c * t
    }
}

/// Largest float not above `t` for which `ok` holds, starting from the
/// analytic supremum `t`.
fn fit(t: f64, ok: impl Fn(f64) -> bool) -> f64 {
    let mut t = t;
    for _ in 0..64 {
        if t <= 0.0 || ok(t) {
            return t.max(0.0);
        }
        t = f64::from_bits(t.to_bits() - 1);
    }
    t
}

impl ExistenceBudget {
    fn coefficients(&self) -> Coefficients {
        Coefficients::new(self.k, self.length, self.radius)
    }

    /// Every printed condition and chain constraint, re-evaluated at the
    /// stored times.
    pub fn verify(&self) -> Vec<(&'static str, InequalityVerdict)> {
        let c = self.coefficients();
        let v = InequalityVerdict::new;
        vec![
            ("exp(T1) <= 2", v(self.t1.exp(), 2.0)),
            ("(1+L) 9 34^k R^2k T1 <= 1/2", v(times(c.c1, self.t1), 0.5)),
            ("((1+L) 9 34^k R^2k + 2) T2 <= 2", v(times(c.c1 + 2.0, self.t2), 2.0)),
            ("exp(32 (1+L) alpha R^2k T3) <= 2", v(times(32.0 * c.ca, self.t3).exp(), 2.0)),
            ("9k 34^(k-1) T3 / alpha <= 1/2", v(times(c.q, self.t3), 0.5)),
            ("(128 (1+L) alpha R^2k + 9k 34^(k-1) / alpha) T4 <= 2", v(times(128.0 * c.ca + c.q, self.t4), 2.0)),
            ("exp(32 (1+L) beta R^2k T5) <= 2", v(times(32.0 * c.cb, self.t5).exp(), 2.0)),
            ("4 (1+L) beta R^2k T6 <= 5/16", v(times(4.0 * c.cb, self.t6), 5.0 / 16.0)),
            ("exp(80 (1+L) gamma R^2k T7) <= 2", v(times(80.0 * c.cg, self.t7).exp(), 2.0)),
            ("10 (1+L) gamma R^2k T8 <= 5/16", v(times(10.0 * c.cg, self.t8), 5.0 / 16.0)),
            ("T1 <= horizon", v(self.t1, self.horizon)),
            ("T2 <= T1", v(self.t2, self.t1)),
            ("T3 <= horizon", v(self.t3, self.horizon)),
            ("T4 <= T3", v(self.t4, self.t3)),
            ("T0 <= T2", v(self.t0, self.t2)),
            ("T0 <= T4", v(self.t0, self.t4)),
            ("T5 <= T0", v(self.t5, self.t0)),
            ("T6 <= T5", v(self.t6, self.t5)),
            ("T7 <= T0", v(self.t7, self.t0)),
            ("T8 <= T7", v(self.t8, self.t7)),
            ("T* <= T6", v(self.t_star, self.t6)),
            ("T* <= T8", v(self.t_star, self.t8)),
        ]
    }

    /// Named times in chain order, for tables.
    pub fn times(&self) -> [(&'static str, f64); 10] {
        [
            ("T1", self.t1),
            ("T2", self.t2),
            ("T3", self.t3),
            ("T4", self.t4),
            ("T0", self.t0),
            ("T5", self.t5),
            ("T6", self.t6),
            ("T7", self.t7),
            ("T8", self.t8),
            ("T*", self.t_star),
        ]
    }
}

/// Supremum of each admissible time in the chain, given `R`.
///
/// `R = 0` makes every coefficient vanish; the remaining caps are the
/// horizon and `ln 2` from `exp(T1) <= 2`.
pub fn existence_time(radius: f64, k: usize, l: usize, length: f64, horizon: f64) -> Result<ExistenceBudget> {
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(Error::parameter(format!("radius must be non-negative, got {radius}")));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::parameter(format!("horizon must be positive, got {horizon}")));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::parameter(format!("length must be positive, got {length}")));
    }
    if k == 0 || l == 0 {
        return Err(Error::parameter("k and l must be at least 1"));
    }
    let c = Coefficients::new(k, length, radius);
    let (la, lb, lg) = log_constants(k);
    let kf = k as f64;
    let (alpha_k, beta_k, gamma_k) = if k <= DIRECT_K_MAX {
        (alpha_direct(kf), beta_direct(kf), gamma_direct(kf))
    } else {
        (la.exp(), lb.exp(), lg.exp())
    };

    let t1 = fit(horizon.min(LN_2).min(0.5 / c.c1), |t| t.exp() <= 2.0 && times(c.c1, t) <= 0.5);
    let t2 = fit(t1.min(2.0 / (c.c1 + 2.0)), |t| times(c.c1 + 2.0, t) <= 2.0);
    let t3 = fit(horizon.min(LN_2 / (32.0 * c.ca)).min(0.5 / c.q), |t| {
        times(32.0 * c.ca, t).exp() <= 2.0 && times(c.q, t) <= 0.5
    });
    let t4 = fit(t3.min(2.0 / (128.0 * c.ca + c.q)), |t| times(128.0 * c.ca + c.q, t) <= 2.0);
    let t0 = t2.min(t4);
    let t5 = fit(t0.min(LN_2 / (32.0 * c.cb)), |t| times(32.0 * c.cb, t).exp() <= 2.0);
    let t6 = fit(t5.min(5.0 / 16.0 / (4.0 * c.cb)), |t| times(4.0 * c.cb, t) <= 5.0 / 16.0);
    let t7 = fit(t0.min(LN_2 / (80.0 * c.cg)), |t| times(80.0 * c.cg, t).exp() <= 2.0);
    let t8 = fit(t7.min(5.0 / 16.0 / (10.0 * c.cg)), |t| times(10.0 * c.cg, t) <= 5.0 / 16.0);

    Ok(ExistenceBudget {
        k,
        l,
        length,
        radius,
        horizon,
        alpha_k,
        beta_k,
        gamma_k,
        t1,
        t2,
        t3,
        t4,
        t5,
        t6,
        t7,
        t8,
        t0,
        t_star: t6.min(t8),
    })
}
