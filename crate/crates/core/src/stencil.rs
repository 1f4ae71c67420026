//! Finite-difference weights from local polynomial interpolation.
//!
//! A stencil is described by a set of nodal positions plus, optionally, a
//! boundary point at which the first few derivatives of the interpolated
//! function are known to vanish. The weights returned act on the nodal
//! values only; the vanishing derivatives contribute nothing to the sum.

use crate::error::{Error, Result};

/// Homogeneous derivative conditions `D^q u(at) = 0` for `q < count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Vanishing {
    pub at: f64,
    pub count: usize,
}

/// Weights `w` with `sum_r w[r] u(nodes[r]) ~ D^order u(center)`.
///
/// The approximation is exact for polynomials of degree below
/// `nodes.len() + vanishing.count` that satisfy the vanishing conditions.
pub(crate) fn weights(center: f64, nodes: &[f64], vanishing: Option<Vanishing>, order: usize) -> Result<Vec<f64>> {
    let extra = vanishing.map_or(0, |v| v.count);
    let n = nodes.len() + extra;
    if order >= n {
        return Err(Error::sizing(format!("{n} interpolation conditions cannot resolve derivative order {order}")));
    }

    // Scale the monomial basis to [-1, 1] over the stencil footprint.
    let mut lo = center;
    let mut hi = center;
    for &x in nodes.iter().chain(vanishing.iter().map(|v| &v.at)) {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    let mid = 0.5 * (lo + hi);
    let rho = (0.5 * (hi - lo)).max(f64::MIN_POSITIVE);
    let scaled = |x: f64| (x - mid) / rho;

    // Transposed interpolation matrix: column r holds functional r applied to
    // each basis monomial s^k.
    let mut mt = vec![vec![0.0; n]; n];
    for (r, &x) in nodes.iter().enumerate() {
        let s = scaled(x);
        let mut p = 1.0;
        for row in mt.iter_mut() {
            row[r] = p;
            p *= s;
        }
    }
    if let Some(v) = vanishing {
        let s = scaled(v.at);
        for q in 0..v.count {
            let r = nodes.len() + q;
            for (k, row) in mt.iter_mut().enumerate().skip(q) {
                row[r] = falling(k, q) * s.powi((k - q) as i32);
            }
        }
    }

    let sc = scaled(center);
    let rhs: Vec<f64> =
        (0..n).map(|k| if k < order { 0.0 } else { falling(k, order) * sc.powi((k - order) as i32) }).collect();

    let w = solve_dense(mt, rhs).ok_or_else(|| Error::Numerical {
        message: "singular interpolation system while building a stencil".into(),
        pivot: None,
        step: None,
    })?;
    let scale = rho.powi(-(order as i32));
    Ok(w[..nodes.len()].iter().map(|v| v * scale).collect())
}

/// k (k-1) ... (k-q+1)
fn falling(k: usize, q: usize) -> f64 {
    (0..q).map(|i| (k - i) as f64).product()
}

/// Gaussian elimination with partial pivoting on a small dense system.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot = &top[col];
        for (i, r) in rest.iter_mut().enumerate() {
            let row = col + 1 + i;
            let m = r[col] / pivot[col];
            if m != 0.0 {
                for (x, p) in r[col..n].iter_mut().zip(&pivot[col..n]) {
                    *x -= m * p;
                }
                b[row] -= m * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_second_difference() {
        let w = weights(0.0, &[-1.0, 0.0, 1.0], None, 2).unwrap();
        for (a, b) in w.iter().zip([1.0, -2.0, 1.0]) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn centered_third_difference() {
        let w = weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], None, 3).unwrap();
        for (a, b) in w.iter().zip([-0.5, 1.0, 0.0, -1.0, 0.5]) {
            assert!((a - b).abs() < 1e-13, "{w:?}");
        }
    }

    #[test]
    fn vanishing_conditions_reproduce_constrained_polynomials() {
        // p(x) = x^2 (x - 5) has p(0) = p'(0) = 0; third derivative is 6.
        let nodes = [1.0, 2.0, 3.0];
        let w = weights(1.0, &nodes, Some(Vanishing { at: 0.0, count: 2 }), 3).unwrap();
        let p = |x: f64| x * x * (x - 5.0);
        let approx: f64 = nodes.iter().zip(&w).map(|(x, w)| w * p(*x)).sum();
        assert!((approx - 6.0).abs() < 1e-11);
    }

    #[test]
    fn rejects_underdetermined_stencils() {
        assert!(weights(0.0, &[0.0, 1.0], None, 2).is_err());
    }
}
