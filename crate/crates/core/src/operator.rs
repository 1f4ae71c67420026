//! Discrete dispersion operator `A = sum_{j=1}^{l} (-1)^{j+1} D^{2j+1}` with the
//! boundary conditions
//!
//! ```text
//! D^i u(0) = D^i u(L) = 0  (i = 0..l-1),   D^l u(L) = 0
//! ```
//!
//! eliminated into an `N x N` banded matrix acting on interior values.
//!
//! Rows whose centered stencil fits inside `[0, L]` use the standard
//! second-order centered differences. The `l` rows nearest each end use
//! closures built from a local polynomial that matches the nodal values and
//! satisfies the homogeneous boundary conditions at that end. The closure
//! footprints (`2l + 2` nodes on the left, `l + 2 + max(l - 2, 0)` on the
//! right) were chosen so that the spectrum of `A_h` stays in the right half
//! plane for every supported `l`.

use serde::Serialize;

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::grid::{self, Grid, GridFunction};
use crate::stencil::{self, Vanishing};

/// Largest half-order for which the boundary closures have been validated.
pub const MAX_L: usize = 4;

/// Record of the boundary conditions folded into the operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundarySpec {
    /// `D^i u(0) = 0` for `i < left_conditions`.
    pub left_conditions: usize,
    /// `D^i u(L) = 0` for `i < right_conditions`.
    pub right_conditions: usize,
    pub left_closure_rows: usize,
    pub right_closure_rows: usize,
    pub left_closure_nodes: usize,
    pub right_closure_nodes: usize,
}

impl BoundarySpec {
    pub fn total_conditions(&self) -> usize {
        self.left_conditions + self.right_conditions
    }
}

#[derive(Debug, Clone)]
pub struct DispersionOperator {
    l: usize,
    grid: Grid,
    matrix: BandedMatrix,
    bc: BoundarySpec,
}

impl DispersionOperator {
    pub fn assemble(l: usize, grid: Grid) -> Result<Self> {
        if l == 0 || l > MAX_L {
            return Err(Error::parameter(format!("l must be in 1..={MAX_L}, got {l}")));
        }
        grid.require_order(l)?;

        let n = grid.interior();
        let h = grid.spacing();
        let bc = BoundarySpec {
            left_conditions: l,
            right_conditions: l + 1,
            left_closure_rows: l,
            right_closure_rows: l,
            left_closure_nodes: 2 * l + 2,
            right_closure_nodes: l + 2 + l.saturating_sub(2),
        };
        let lower = (l + 1).max(bc.right_closure_nodes - 1);
        let upper = (l + 1).max(bc.left_closure_nodes - 1);
        let mut matrix = BandedMatrix::zeros(n, lower, upper);

        // Centered stencils, in units of h, for each odd derivative.
        let centered: Vec<Vec<f64>> = (1..=l)
            .map(|j| {
                let offsets: Vec<f64> = (0..2 * j + 3).map(|k| k as f64 - (j + 1) as f64).collect();
                stencil::weights(0.0, &offsets, None, 2 * j + 1)
                    .map(|w| w.into_iter().map(|c| c / h.powi(2 * j as i32 + 1)).collect())
            })
            .collect::<Result<_>>()?;

        // Node indices are 1-based (node 0 and N+1 are the boundary points);
        // matrix indices are 0-based interior indices.
        for i in l + 1..=n - l {
            for (j, w) in (1..=l).zip(&centered) {
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                for (k, c) in w.iter().enumerate() {
                    let node = i + k - (j + 1);
                    if (1..=n).contains(&node) {
                        matrix.add(i - 1, node - 1, sign * c);
                    }
                }
            }
        }

        let left_nodes: Vec<usize> = (1..=bc.left_closure_nodes).collect();
        let right_nodes: Vec<usize> = (n + 1 - bc.right_closure_nodes..=n).collect();
        let closures = [
            (1..=l, &left_nodes, Vanishing { at: 0.0, count: bc.left_conditions }),
            (n - l + 1..=n, &right_nodes, Vanishing { at: grid.length(), count: bc.right_conditions }),
        ];
        for (rows, nodes, vanishing) in closures {
            let xs: Vec<f64> = nodes.iter().map(|&k| grid.node(k)).collect();
            for i in rows {
                for j in 1..=l {
                    let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                    let w = stencil::weights(grid.node(i), &xs, Some(vanishing), 2 * j + 1)?;
                    for (&node, c) in nodes.iter().zip(w) {
                        matrix.add(i - 1, node - 1, sign * c);
                    }
                }
            }
        }

        Ok(DispersionOperator { l, grid, matrix, bc })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn matrix(&self) -> &BandedMatrix {
        &self.matrix
    }

    pub fn boundary_spec(&self) -> &BoundarySpec {
        &self.bc
    }

    /// `A_h u`; the boundary values of `u` are taken as zero.
    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        self.grid.check_same(u.grid())?;
        GridFunction::new(self.grid, self.matrix.matvec(u.values()))
    }

    /// `(A_h u, u)_h - (D^l_h u(0))^2 / 2`.
    pub fn dissipation_residual(&self, u: &GridFunction) -> Result<f64> {
        let u = u.clone().with_zero_boundary();
        let au = self.apply(&u)?;
        let trace = left_trace(&u, self.l)?;
        Ok(grid::inner(&au, &u)? - 0.5 * trace * trace)
    }
}

/// `D^l u(0)` from the first three interior values, using
/// `D^i u(0) = 0` for `i < l`.
pub fn left_trace(u: &GridFunction, l: usize) -> Result<f64> {
    let g = u.grid();
    if g.interior() < 3 {
        return Err(Error::sizing("boundary trace needs three interior nodes"));
    }
    let xs = [g.node(1), g.node(2), g.node(3)];
    let w = stencil::weights(0.0, &xs, Some(Vanishing { at: 0.0, count: l }), l)?;
    Ok(w.iter().zip(u.values()).map(|(w, v)| w * v).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interior_max_err(op: &DispersionOperator, f: impl Fn(f64) -> f64, exact: impl Fn(f64) -> f64) -> f64 {
        let g = *op.grid();
        let au = op.apply(&g.sample(f).with_zero_boundary()).unwrap();
        g.interior_nodes().zip(au.values()).map(|(x, v)| (v - exact(x)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn kdv_operator_bandwidth_and_conditions() {
        let g = Grid::new(1.0, 40).unwrap();
        let op = DispersionOperator::assemble(1, g).unwrap();
        assert_eq!(op.boundary_spec().total_conditions(), 3);
        // Away from the single closure row at each end the band is l + 1 = 2 wide.
        for i in 1..39usize {
            for j in 0..40 {
                if i.abs_diff(j) > 2 {
                    assert_eq!(op.matrix().get(i, j), 0.0, "({i},{j})");
                }
            }
        }
        // Centered D^3 row: [-1/2, 1, 0, -1, 1/2] / h^3
        let h3 = g.spacing().powi(3);
        let row = [-0.5, 1.0, 0.0, -1.0, 0.5];
        for (k, c) in row.iter().enumerate() {
            assert!((op.matrix().get(10, 8 + k) * h3 - c).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let g = Grid::new(1.0, 30).unwrap();
        for l in 1..=3 {
            let op = DispersionOperator::assemble(l, g).unwrap();
            assert!(op.apply(&GridFunction::zeros(g)).unwrap().values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn kdv_quartic_is_reproduced() {
        // u = x^2 (1 - x)^2: D^3 u = 24 x - 12, exact for the degree-4 stencils.
        let op = DispersionOperator::assemble(1, Grid::new(1.0, 64).unwrap()).unwrap();
        let err = interior_max_err(&op, |x| x * x * (1.0 - x).powi(2), |x| 24.0 * x - 12.0);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn kawahara_operator_second_order() {
        // u = x^3 (1 - x)^3, A u = D^3 u - D^5 u.
        // D^3 u = -120 x^3 + 180 x^2 - 72 x + 6, D^5 u = -720 x + 360.
        let exact = |x: f64| (-120.0 * x.powi(3) + 180.0 * x * x - 72.0 * x + 6.0) - (-720.0 * x + 360.0);
        let mut errs = vec![];
        let mut g = Grid::new(1.0, 63).unwrap();
        for _ in 0..3 {
            let op = DispersionOperator::assemble(2, g).unwrap();
            errs.push(interior_max_err(&op, |x| (x * (1.0 - x)).powi(3), exact));
            g = g.refined();
        }
        // The centered D^5 stencil is exact on sextics; D^3 leaves an h^2 D^5 u term.
        let order = (errs[1] / errs[2]).log2();
        assert!(order > 1.7, "{errs:?}");
    }

    #[test]
    fn too_small_grid_is_sizing_error() {
        let g = Grid::new(1.0, 10).unwrap();
        assert!(matches!(DispersionOperator::assemble(3, g), Err(Error::Sizing(_))));
        assert!(matches!(DispersionOperator::assemble(0, g), Err(Error::Parameter(_))));
    }

    #[test]
    fn dissipation_of_zero() {
        let g = Grid::new(1.0, 50).unwrap();
        let op = DispersionOperator::assemble(2, g).unwrap();
        assert_eq!(op.dissipation_residual(&GridFunction::zeros(g)).unwrap(), 0.0);
    }

    #[test]
    fn left_trace_of_known_functions() {
        let g = Grid::new(1.0, 100).unwrap();
        // u = x (1-x)^2 : Du(0) = 1
        let t = left_trace(&g.sample(|x| x * (1.0 - x).powi(2)), 1).unwrap();
        assert!((t - 1.0).abs() < 1e-10);
        // u = x^2 (1-x)^3 : D^2 u(0) = 2
        let t = left_trace(&g.sample(|x| x * x * (1.0 - x).powi(3)), 2).unwrap();
        assert!((t - 2.0).abs() < 1e-4);
    }
}
