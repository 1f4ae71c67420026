//! Banded matrices and LU factorization with partial pivoting.

use crate::error::{Error, Result};

/// Condition estimates above this make a factorization a numerical failure.
pub const CONDITION_LIMIT: f64 = 1e14;

/// Square matrix with `lower` sub- and `upper` super-diagonals, stored by row.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    // row i holds columns i-lower ..= i+upper
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        BandedMatrix { n, lower, upper, data: vec![0.0; n * (lower + upper + 1)] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, 0, 0);
        m.data.fill(1.0);
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower(&self) -> usize {
        self.lower
    }

    pub fn upper(&self) -> usize {
        self.upper
    }

    fn width(&self) -> usize {
        self.lower + self.upper + 1
    }

    fn in_band(&self, row: usize, col: usize) -> bool {
        col + self.lower >= row && col <= row + self.upper
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        if row < self.n && col < self.n && self.in_band(row, col) {
            self.data[row * self.width() + col + self.lower - row]
        } else {
            0.0
        }
    }

    /// Panics if `(row, col)` lies outside the band.
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        assert!(row < self.n && col < self.n && self.in_band(row, col), "({row}, {col}) outside band");
        let w = self.width();
        self.data[row * w + col + self.lower - row] = value;
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        let v = self.get(row, col);
        self.set(row, col, v + value);
    }

    /// Columns `(first, last)` that row `row` can hold.
    fn row_span(&self, row: usize) -> (usize, usize) {
        (row.saturating_sub(self.lower), (row + self.upper).min(self.n - 1))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let (c0, c1) = self.row_span(i);
                (c0..=c1).map(|c| self.get(i, c) * x[c]).sum()
            })
            .collect()
    }

    /// `a * self + b * I`.
    pub fn shifted(&self, a: f64, b: f64) -> BandedMatrix {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|v| *v *= a);
        for i in 0..self.n {
            m.add(i, i, b);
        }
        m
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let (c0, c1) = self.row_span(i);
                (c0..=c1).map(|c| self.get(i, c).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|i - j|` over nonzero entries below / above the diagonal.
    pub fn effective_bandwidths(&self) -> (usize, usize) {
        let mut lo = 0;
        let mut up = 0;
        for i in 0..self.n {
            let (c0, c1) = self.row_span(i);
            for c in c0..=c1 {
                if self.get(i, c) != 0.0 {
                    if c < i {
                        lo = lo.max(i - c);
                    } else {
                        up = up.max(c - i);
                    }
                }
            }
        }
        (lo, up)
    }

    pub fn factor(&self) -> Result<BandedLu> {
        BandedLu::new(self)
    }
}

fn rebase(row: &mut (usize, Vec<f64>), start: usize, span: usize) {
    if row.0 == start {
        return;
    }
    let mut v = vec![0.0; span];
    for (i, &x) in row.1.iter().enumerate() {
        if x != 0.0 {
            let col = row.0 + i;
            debug_assert!(col >= start && col < start + span, "fill outside band window");
            if col >= start && col < start + span {
                v[col - start] = x;
            }
        }
    }
    *row = (start, v);
}

/// `P A = L U` in the LAPACK `gbtrf` layout: row interchanges are applied
/// step by step, so `U` gains up to `lower` extra super-diagonals.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    lower: usize,
    // width of a U row: 1 + upper + lower
    uwidth: usize,
    // row k of U holds columns k ..= k+uwidth-1
    u: Vec<f64>,
    // multipliers of elimination step k, for rows k+1 ..= k+lower
    l: Vec<f64>,
    pivots: Vec<usize>,
    min_pivot: f64,
    condition: f64,
}

impl BandedLu {
    fn new(a: &BandedMatrix) -> Result<Self> {
        let n = a.n;
        let kl = a.lower;
        let uw = 1 + a.upper + kl;

        // Working rows: each stores columns start..start+uw+kl.
        let span = uw + kl;
        let mut rows: Vec<(usize, Vec<f64>)> = (0..n)
            .map(|i| {
                let start = i.saturating_sub(kl);
                let mut v = vec![0.0; span];
                let (c0, c1) = a.row_span(i);
                for c in c0..=c1 {
                    v[c - start] = a.get(i, c);
                }
                (start, v)
            })
            .collect();

        let at = |row: &(usize, Vec<f64>), col: usize| -> f64 {
            if col >= row.0 && col < row.0 + row.1.len() {
                row.1[col - row.0]
            } else {
                0.0
            }
        };

        let mut u = vec![0.0; n * uw];
        let mut l = vec![0.0; n * kl];
        let mut pivots = vec![0; n];
        let mut min_pivot = f64::INFINITY;
        let scale = a.norm_inf().max(f64::MIN_POSITIVE);

        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let p = (k..=last).max_by(|&i, &j| at(&rows[i], k).abs().total_cmp(&at(&rows[j], k).abs())).unwrap();
            pivots[k] = p;
            if p != k {
                rows.swap(k, p);
                // Windows follow positions, not original rows, so fill from
                // later steps always lands inside storage.
                rebase(&mut rows[k], k.saturating_sub(kl), span);
                rebase(&mut rows[p], p.saturating_sub(kl), span);
            }
            let piv = at(&rows[k], k);
            min_pivot = min_pivot.min(piv.abs());
            if piv.abs() <= f64::EPSILON * scale * n as f64 * 1e-3 || !piv.is_finite() {
                return Err(Error::Numerical {
                    message: format!("singular banded matrix: pivot {piv:e} at column {k}"),
                    pivot: Some(piv.abs()),
                    step: None,
                });
            }
            let ucols = ((k + uw).min(n)) - k;
            let pivot_row: Vec<f64> = (0..ucols).map(|c| at(&rows[k], k + c)).collect();
            u[k * uw..k * uw + ucols].copy_from_slice(&pivot_row);

            for i in k + 1..=last {
                let m = at(&rows[i], k) / piv;
                l[k * kl + (i - k - 1)] = m;
                if m != 0.0 {
                    let (start, ref mut v) = rows[i];
                    for (c, pv) in pivot_row.iter().enumerate().skip(1) {
                        let col = k + c;
                        if col >= start && col < start + v.len() {
                            v[col - start] -= m * pv;
                        }
                    }
                    if k >= start {
                        v[k - start] = 0.0;
                    }
                }
            }
        }

        let mut lu = BandedLu { n, lower: kl, uwidth: uw, u, l, pivots, min_pivot, condition: 0.0 };
        lu.condition = scale * lu.inverse_norm_estimate();
        if !(lu.condition.is_finite() && lu.condition <= CONDITION_LIMIT) {
            return Err(Error::Numerical {
                message: format!(
                    "banded factorization ill-conditioned: estimate {:e} exceeds {CONDITION_LIMIT:e} \
                     (smallest pivot {:e})",
                    lu.condition, lu.min_pivot
                ),
                pivot: Some(lu.min_pivot),
                step: None,
            });
        }
        Ok(lu)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    /// Lower-bound estimate of the infinity-norm condition number.
    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let kl = self.lower;
        for k in 0..n {
            b.swap(k, self.pivots[k]);
            let bk = b[k];
            if bk != 0.0 {
                for (j, bi) in b.iter_mut().enumerate().take((k + kl).min(n - 1) + 1).skip(k + 1) {
                    *bi -= self.l[k * kl + (j - k - 1)] * bk;
                }
            }
        }
        let uw = self.uwidth;
        for k in (0..n).rev() {
            let row = &self.u[k * uw..(k + 1) * uw];
            let mut s = b[k];
            for c in 1..uw.min(n - k) {
                s -= row[c] * b[k + c];
            }
            b[k] = s / row[0];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// max over a few probe vectors of `||A^{-1} b|| / ||b||` in the max norm.
    fn inverse_norm_estimate(&self) -> f64 {
        let n = self.n;
        let probes: [Box<dyn Fn(usize) -> f64>; 3] = [
            Box::new(|_| 1.0),
            Box::new(|i| if i % 2 == 0 { 1.0 } else { -1.0 }),
            Box::new(move |i| 1.0 - 2.0 * i as f64 / n.max(1) as f64),
        ];
        probes
            .iter()
            .map(|p| {
                let b: Vec<f64> = (0..n).map(p).collect();
                let bn = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let x = self.solve(&b);
                x.iter().fold(0.0f64, |m, v| m.max(v.abs())) / bn
            })
            .fold(0.0, f64::max)
    }
}
