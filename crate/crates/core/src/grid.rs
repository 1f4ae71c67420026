//! Uniform grid on `(0, L)`, nodal grid functions, finite differences and
//! trapezoid-rule norms.
//!
//! Nodes are `x_i = i h` for `i = 0..=N+1` with `h = L / (N + 1)`. A
//! [`GridFunction`] stores the `N` interior values together with the two
//! boundary values, which default to zero.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stencil;

/// Smallest interior node count accepted by [`Grid::new`] (enough for `l = 1`).
pub const MIN_INTERIOR: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    length: f64,
    interior: usize,
    spacing: f64,
}

impl Grid {
    pub fn new(length: f64, interior: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::parameter(format!("interval length must be positive, got {length}")));
        }
        if interior < MIN_INTERIOR {
            return Err(Error::sizing(format!("grid needs at least {MIN_INTERIOR} interior nodes, got {interior}")));
        }
        Ok(Grid { length, interior, spacing: length / (interior + 1) as f64 })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of interior nodes `N`.
    pub fn interior(&self) -> usize {
        self.interior
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Coordinate of node `i`, `0 <= i <= N + 1`.
    pub fn node(&self, i: usize) -> f64 {
        if i == self.interior + 1 {
            self.length
        } else {
            i as f64 * self.spacing
        }
    }

    /// Coordinates of the interior nodes.
    pub fn interior_nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.interior).map(move |i| self.node(i))
    }

    /// Checks that stencils of width `2l + 3` fit, i.e. `N >= 4l + 3`.
    pub fn require_order(&self, l: usize) -> Result<()> {
        if self.interior < 4 * l + 3 {
            return Err(Error::sizing(format!("l = {l} needs N >= {}, grid has N = {}", 4 * l + 3, self.interior)));
        }
        Ok(())
    }

    /// Grid with half the spacing on the same interval.
    pub fn refined(&self) -> Grid {
        Grid::new(self.length, 2 * self.interior + 1).expect("refinement of a valid grid")
    }

    /// Samples `f` at every node, boundary included.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        let values = self.interior_nodes().map(&f).collect();
        GridFunction { grid: *self, values, boundary: [f(0.0), f(self.length)] }
    }

    /// Trapezoid weight of node `i`.
    fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.interior + 1 {
            0.5 * self.spacing
        } else {
            self.spacing
        }
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::shape(format!(
                "grid mismatch: (L = {}, N = {}) vs (L = {}, N = {})",
                self.length, self.interior, other.length, other.interior
            )));
        }
        Ok(())
    }

    /// Precomputed stencils for `D^order` on this grid.
    pub fn differentiator(&self, order: usize) -> Result<Differentiator> {
        Differentiator::new(*self, order)
    }
}

/// Nodal samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
    boundary: [f64; 2],
}

impl GridFunction {
    /// Interior values with zero boundary values.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        Self::with_boundary(grid, values, [0.0, 0.0])
    }

    pub fn with_boundary(grid: Grid, values: Vec<f64>, boundary: [f64; 2]) -> Result<Self> {
        if values.len() != grid.interior {
            return Err(Error::shape(format!("expected {} interior values, got {}", grid.interior, values.len())));
        }
        let u = GridFunction { grid, values, boundary };
        if !u.is_finite() {
            return Err(Error::Numerical {
                message: "grid function contains non-finite values".into(),
                pivot: None,
                step: None,
            });
        }
        Ok(u)
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction { grid, values: vec![0.0; grid.interior], boundary: [0.0, 0.0] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn boundary(&self) -> [f64; 2] {
        self.boundary
    }

    /// All `N + 2` nodal values, boundary included.
    pub fn nodal(&self) -> Vec<f64> {
        let mut z = Vec::with_capacity(self.values.len() + 2);
        z.push(self.boundary[0]);
        z.extend_from_slice(&self.values);
        z.push(self.boundary[1]);
        z
    }

    /// Same interior values with the boundary values set to zero.
    pub fn with_zero_boundary(mut self) -> Self {
        self.boundary = [0.0, 0.0];
        self
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().chain(&self.boundary).all(|v| v.is_finite())
    }

    /// `a u + b v`.
    pub fn lin_comb(a: f64, u: &GridFunction, b: f64, v: &GridFunction) -> Result<GridFunction> {
        u.grid.check_same(&v.grid)?;
        Ok(GridFunction {
            grid: u.grid,
            values: u.values.iter().zip(&v.values).map(|(x, y)| a * x + b * y).collect(),
            boundary: [a * u.boundary[0] + b * v.boundary[0], a * u.boundary[1] + b * v.boundary[1]],
        })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        Self::lin_comb(1.0, self, -1.0, other)
    }

    pub fn scaled(&self, a: f64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|v| a * v).collect(),
            boundary: [a * self.boundary[0], a * self.boundary[1]],
        }
    }

    /// Pointwise map over every nodal value, boundary included.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            boundary: [f(self.boundary[0]), f(self.boundary[1])],
        }
    }

    /// Pointwise combination of two grid functions, boundary included.
    pub fn zip_map(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        self.grid.check_same(&other.grid)?;
        Ok(GridFunction {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            boundary: [f(self.boundary[0], other.boundary[0]), f(self.boundary[1], other.boundary[1])],
        })
    }

    /// Largest absolute nodal value.
    pub fn sup(&self) -> f64 {
        self.values.iter().chain(&self.boundary).fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Norms of a grid function, all by composite trapezoid quadrature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    /// `||u||`
    pub l2: f64,
    /// `(1 + x, u^2)`
    pub weighted_l2: f64,
    /// `||D^j u||` for `j = 1..=m`.
    pub seminorms: Vec<f64>,
    /// Largest absolute nodal value.
    pub sup: f64,
}

impl NormReport {
    /// `||u||_{H^m}^2 = sum_{j <= m} ||D^j u||^2` for `m <= seminorms.len()`.
    pub fn sobolev_sq(&self, m: usize) -> f64 {
        self.l2 * self.l2 + self.seminorms[..m].iter().map(|s| s * s).sum::<f64>()
    }
}

/// Trapezoid rule over all nodal values of `u`, with pointwise weight `w(x)`.
fn quadrature(u: &GridFunction, v: &GridFunction, w: impl Fn(f64) -> f64) -> f64 {
    let g = &u.grid;
    let n = g.interior;
    let mut acc =
        0.5 * g.spacing * (w(0.0) * u.boundary[0] * v.boundary[0] + w(g.length) * u.boundary[1] * v.boundary[1]);
    for i in 0..n {
        acc += g.weight(i + 1) * w(g.node(i + 1)) * u.values[i] * v.values[i];
    }
    acc
}

/// `(u, v)` by the trapezoid rule.
pub fn inner(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    u.grid.check_same(&v.grid)?;
    Ok(quadrature(u, v, |_| 1.0))
}

/// `int_0^L (1 + x) u v dx` by the trapezoid rule.
pub fn weighted_inner(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    u.grid.check_same(&v.grid)?;
    Ok(quadrature(u, v, |x| 1.0 + x))
}

pub fn l2_norm(u: &GridFunction) -> f64 {
    quadrature(u, u, |_| 1.0).max(0.0).sqrt()
}

/// Second-order approximation of `D^order u` at every node.
pub fn diff(u: &GridFunction, order: usize) -> Result<GridFunction> {
    u.grid.differentiator(order)?.apply(u)
}

/// Plain, weighted and Sobolev seminorms up to order `m`, plus the sup norm.
pub fn norms(u: &GridFunction, m: usize) -> Result<NormReport> {
    let seminorms = (1..=m).map(|j| diff(u, j).map(|d| l2_norm(&d))).collect::<Result<Vec<_>>>()?;
    Ok(NormReport { l2: l2_norm(u), weighted_l2: quadrature(u, u, |x| 1.0 + x), seminorms, sup: u.sup() })
}

/// Nodal finite-difference stencils for one derivative order on one grid.
///
/// Interior nodes use the narrowest centered stencil of formal order two
/// (`order + 1` points for even orders, `order + 2` for odd ones). Nodes
/// whose centered stencil would leave `[0, L]` use a one-sided window of
/// `order + 2` points.
#[derive(Debug, Clone)]
pub struct Differentiator {
    grid: Grid,
    order: usize,
    half: usize,
    centered: Vec<f64>,
    // (first node of the window, weights) for nodes 0..half and N+2-half..=N+1
    left: Vec<(usize, Vec<f64>)>,
    right: Vec<(usize, Vec<f64>)>,
}

impl Differentiator {
    pub fn new(grid: Grid, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::parameter("derivative order must be at least 1"));
        }
        let total = grid.interior + 2;
        let one_sided = order + 2;
        if one_sided > total {
            return Err(Error::sizing(format!("D^{order} needs {one_sided} nodes, grid has {total}")));
        }
        let width = if order.is_multiple_of(2) { order + 1 } else { order + 2 };
        let half = (width - 1) / 2;
        let h = grid.spacing;

        let offsets: Vec<f64> = (0..width).map(|k| k as f64 - half as f64).collect();
        let centered =
            stencil::weights(0.0, &offsets, None, order)?.into_iter().map(|w| w / h.powi(order as i32)).collect();

        let window = |start: usize, node: usize| -> Result<(usize, Vec<f64>)> {
            let pts: Vec<f64> = (0..one_sided).map(|k| (start + k) as f64 - node as f64).collect();
            let w = stencil::weights(0.0, &pts, None, order)?;
            Ok((start, w.into_iter().map(|w| w / h.powi(order as i32)).collect()))
        };
        let n_edge = half.min(total);
        let left = (0..n_edge).map(|i| window(0, i)).collect::<Result<Vec<_>>>()?;
        let right = (total - n_edge..total).map(|i| window(total - one_sided, i)).collect::<Result<Vec<_>>>()?;

        Ok(Differentiator { grid, order, half, centered, left, right })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Derivative at every node; the result carries the boundary derivatives.
    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        self.grid.check_same(&u.grid)?;
        let z = u.nodal();
        let total = z.len();
        let mut out = vec![0.0; total];
        let h = self.half;
        for (i, (start, w)) in self.left.iter().enumerate() {
            out[i] = dot(&z[*start..*start + w.len()], w);
        }
        for i in h..total - h {
            out[i] = dot(&z[i - h..=i + h], &self.centered);
        }
        for (k, (start, w)) in self.right.iter().enumerate() {
            let i = total - self.right.len() + k;
            out[i] = dot(&z[*start..*start + w.len()], w);
        }
        let right = out[total - 1];
        let left = out[0];
        out.pop();
        out.remove(0);
        Ok(GridFunction { grid: self.grid, values: out, boundary: [left, right] })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn max_interior_err(u: &GridFunction, exact: impl Fn(f64) -> f64) -> f64 {
        u.grid().interior_nodes().zip(u.values()).map(|(x, v)| (v - exact(x)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn spacing_matches_length() {
        for n in [7, 10, 255, 4097] {
            let g = Grid::new(3.7, n).unwrap();
            assert!((g.spacing() * (n + 1) as f64 - 3.7).abs() <= 1e-12 * 3.7);
            assert_eq!(g.node(n + 1), 3.7);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(Grid::new(1.0, 3), Err(Error::Sizing(_))));
        assert!(matches!(Grid::new(-1.0, 30), Err(Error::Parameter(_))));
        let g = Grid::new(1.0, 11).unwrap();
        assert!(g.require_order(2).is_ok());
        assert!(g.require_order(3).is_err());
    }

    #[test]
    fn derivative_of_zero_is_zero() {
        let g = Grid::new(1.0, 40).unwrap();
        let d = diff(&GridFunction::zeros(g), 3).unwrap();
        assert!(d.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn third_derivative_of_cubic() {
        let g = Grid::new(1.0, 50).unwrap();
        let d = diff(&g.sample(|x| x * x * x), 3).unwrap();
        assert!(max_interior_err(&d, |_| 6.0) < 1e-6);
        assert!((d.boundary()[0] - 6.0).abs() < 1e-6);
        assert!((d.boundary()[1] - 6.0).abs() < 1e-6);
    }

    #[test]
    fn first_derivative_of_sine_is_second_order() {
        let l = 2.0;
        let mut errs = vec![];
        let mut g = Grid::new(l, 31).unwrap();
        for _ in 0..3 {
            let d = diff(&g.sample(|x| (PI * x / l).sin()), 1).unwrap();
            errs.push(max_interior_err(&d, |x| PI / l * (PI * x / l).cos()));
            g = g.refined();
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.7, "{errs:?}");
        }
    }

    #[test]
    fn refinement_order_for_higher_derivatives() {
        for j in 1..=7 {
            let mut errs = vec![];
            // High orders amplify rounding by h^-j, so they start coarser.
            let mut g = Grid::new(1.0, if j > 4 { 15 } else { 63 }).unwrap();
            for _ in 0..3 {
                let d = diff(&g.sample(|x| (2.0 * x).sin() + x.exp()), j).unwrap();
                let exact = |x: f64| {
                    let s = match j % 4 {
                        0 => (2.0 * x).sin(),
                        1 => (2.0 * x).cos(),
                        2 => -(2.0 * x).sin(),
                        _ => -(2.0 * x).cos(),
                    };
                    2f64.powi(j as i32) * s + x.exp()
                };
                let full = d.nodal();
                let e = (0..full.len()).map(|i| (full[i] - exact(g.node(i))).abs()).fold(0.0, f64::max);
                errs.push(e);
                g = g.refined();
            }
            let order = (errs[1] / errs[2]).log2();
            assert!(order > 1.7, "D^{j}: {errs:?}");
        }
    }

    #[test]
    fn sine_norms() {
        let g = Grid::new(1.0, 200).unwrap();
        let r = norms(&g.sample(|x| (PI * x).sin()), 1).unwrap();
        assert!((r.l2 * r.l2 - 0.5).abs() < 0.005);
        assert!((r.seminorms[0].powi(2) - PI * PI / 2.0).abs() < 0.01 * PI * PI / 2.0);
        assert!((r.weighted_l2 - 0.75).abs() < 0.0075);
        assert!((r.sup - 1.0).abs() < 1e-3);
    }

    #[test]
    fn zero_norms() {
        let g = Grid::new(1.0, 20).unwrap();
        let r = norms(&GridFunction::zeros(g), 4).unwrap();
        assert_eq!(r.l2, 0.0);
        assert_eq!(r.weighted_l2, 0.0);
        assert_eq!(r.sup, 0.0);
        assert!(r.seminorms.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn weighted_inner_products() {
        let g = Grid::new(1.0, 400).unwrap();
        let one = g.sample(|_| 1.0);
        let x = g.sample(|x| x);
        assert_eq!(weighted_inner(&GridFunction::zeros(g), &GridFunction::zeros(g)).unwrap(), 0.0);
        // Trapezoid is exact for the linear integrand (1 + x).
        assert!((weighted_inner(&one, &one).unwrap() - 1.5).abs() < 1e-12);
        assert!((weighted_inner(&one, &x).unwrap() - 5.0 / 6.0).abs() < 1e-5);
    }

    #[test]
    fn grid_mismatch_is_a_shape_error() {
        let a = GridFunction::zeros(Grid::new(1.0, 20).unwrap());
        let b = GridFunction::zeros(Grid::new(1.0, 21).unwrap());
        assert!(matches!(weighted_inner(&a, &b), Err(Error::Shape(_))));
        assert!(matches!(a.sub(&b), Err(Error::Shape(_))));
    }

    #[test]
    fn derivative_order_must_fit() {
        let g = Grid::new(1.0, 7).unwrap();
        assert!(diff(&GridFunction::zeros(g), 7).is_ok());
        assert!(matches!(diff(&GridFunction::zeros(g), 8), Err(Error::Sizing(_))));
    }
}
