//! Smooth functions in the operator domain with exact derivatives, for
//! manufactured-solution studies.

use crate::grid::{Grid, GridFunction};

/// `phi(x) = p(s) e^s` with `s = x / L` and `p(s) = s^l (1 - s)^{l+1}`.
///
/// `phi` is not a polynomial, so no finite-difference stencil reproduces it
/// exactly, and it satisfies every boundary condition of the operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    l: usize,
    length: f64,
    /// Coefficients of `p` in powers of `s`.
    poly: Vec<f64>,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl Profile {
    pub fn new(l: usize, length: f64) -> Self {
        // s^l (1 - s)^{l+1} = sum_i C(l+1, i) (-1)^i s^{l+i}
        let mut poly = vec![0.0; 2 * l + 2];
        for i in 0..=l + 1 {
            poly[l + i] = binomial(l + 1, i) * if i % 2 == 0 { 1.0 } else { -1.0 };
        }
        Profile { l, length, poly }
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// `d^n p / ds^n` at `s`.
    fn poly_derivative(&self, n: usize, s: f64) -> f64 {
        self.poly.iter().enumerate().skip(n).rev().fold(0.0, |acc, (i, c)| {
            let falling = (i - n + 1..=i).fold(1.0, |f, m| f * m as f64);
            acc * s + c * falling
        })
    }

    /// `D^n phi(x)` by the Leibniz rule.
    pub fn derivative(&self, n: usize, x: f64) -> f64 {
        let s = x / self.length;
        let sum: f64 = (0..=n).map(|i| binomial(n, i) * self.poly_derivative(i, s)).sum();
        sum * s.exp() / self.length.powi(n as i32)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }

    /// `sum_{j=1}^l (-1)^{j+1} D^{2j+1} phi(x)`.
    pub fn operator(&self, x: f64) -> f64 {
        (1..=self.l).map(|j| if j % 2 == 1 { 1.0 } else { -1.0 } * self.derivative(2 * j + 1, x)).sum()
    }

    pub fn sample(&self, grid: &Grid) -> GridFunction {
        grid.sample(|x| self.value(x)).with_zero_boundary()
    }
}
