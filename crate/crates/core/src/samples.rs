//! Seeded random smooth functions satisfying the boundary conditions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Grid, GridFunction};

/// Number of trigonometric modes in a random sample.
pub const MODES: usize = 8;

/// `(x/L)^l (1 - x/L)^{l+1} * s(x)` with a random trigonometric series `s`
/// whose mode `n` coefficients are uniform in `[-1, 1] / n^2`.
///
/// The prefactor makes `D^i u` vanish at both ends for `i < l` and
/// `D^l u(L) = 0`, so every sample lies in the operator domain.
pub fn domain_function(grid: &Grid, l: usize, rng: &mut impl Rng) -> GridFunction {
    let len = grid.length();
    let mut coef = [[0.0; 2]; MODES];
    for (n, c) in coef.iter_mut().enumerate() {
        let scale = 1.0 / ((n + 1) * (n + 1)) as f64;
        c[0] = rng.random_range(-1.0..1.0) * scale;
        c[1] = rng.random_range(-1.0..1.0) * scale;
    }
    let amplitude = 10f64.powf(rng.random_range(-2.0..2.0));
    grid.sample(|x| {
        let s = x / len;
        let series: f64 = coef
            .iter()
            .enumerate()
            .map(|(n, c)| {
                let w = (n + 1) as f64 * std::f64::consts::PI * s;
                c[0] * w.sin() + c[1] * w.cos()
            })
            .sum();
        amplitude * s.powi(l as i32) * (1.0 - s).powi(l as i32 + 1) * series
    })
    .with_zero_boundary()
}

/// `count` samples from a generator seeded with `seed`.
pub fn corpus(grid: &Grid, l: usize, count: usize, seed: u64) -> Vec<GridFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| domain_function(grid, l, &mut rng)).collect()
}
