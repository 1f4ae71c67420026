//! Randomized invariants of the discrete calculus and the operator.

use dispersolve::grid::{self, Grid, GridFunction};
use dispersolve::{estimates, samples, DispersionOperator};
use proptest::prelude::*;

fn values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diff_is_linear(u in values(40), v in values(40), a in -3.0..3.0f64, b in -3.0..3.0f64, j in 1usize..6) {
        let g = Grid::new(2.0, 40).unwrap();
        let (u, v) = (GridFunction::new(g, u).unwrap(), GridFunction::new(g, v).unwrap());
        let lhs = grid::diff(&GridFunction::lin_comb(a, &u, b, &v).unwrap(), j).unwrap();
        let rhs = GridFunction::lin_comb(a, &grid::diff(&u, j).unwrap(), b, &grid::diff(&v, j).unwrap()).unwrap();
        let scale = 1.0 + lhs.sup();
        prop_assert!(lhs.sub(&rhs).unwrap().sup() <= 1e-12 * scale);
    }

    #[test]
    fn weighted_norm_is_bracketed(u in values(30), length in 0.1..10.0f64) {
        let g = Grid::new(length, 30).unwrap();
        let u = GridFunction::new(g, u).unwrap();
        let n = grid::norms(&u, 0).unwrap();
        let plain = n.l2 * n.l2;
        prop_assert!(plain <= n.weighted_l2 * (1.0 + 1e-14));
        prop_assert!(n.weighted_l2 <= (1.0 + length) * plain * (1.0 + 1e-14));
    }

    #[test]
    fn operator_is_linear(u in values(25), v in values(25), l in 1usize..4) {
        let g = Grid::new(1.0, 25).unwrap();
        let op = DispersionOperator::assemble(l, g).unwrap();
        let (u, v) = (GridFunction::new(g, u).unwrap(), GridFunction::new(g, v).unwrap());
        let sum = op.apply(&GridFunction::lin_comb(1.0, &u, 1.0, &v).unwrap()).unwrap();
        let parts = GridFunction::lin_comb(1.0, &op.apply(&u).unwrap(), 1.0, &op.apply(&v).unwrap()).unwrap();
        prop_assert!(sum.sub(&parts).unwrap().sup() <= 1e-9 * (1.0 + sum.sup()));
    }

    #[test]
    fn tvm_holds(v1 in -10.0..10.0f64, v2 in -10.0..10.0f64, k in 1usize..=8) {
        prop_assert!(estimates::tvm_check(v1, v2, k).satisfied);
    }
}

#[test]
fn gn_holds_on_random_domain_functions() {
    let g = Grid::new(3.0, 200).unwrap();
    for l in 1..=3 {
        for u in samples::corpus(&g, l, 200, 11) {
            let v = estimates::gn_check(&u, l).unwrap();
            assert!(v.satisfied, "l = {l}: {v:?}");
        }
    }
}

#[test]
fn near_dissipativity_improves_with_refinement() {
    // min (A_h u, u) / ||u||^2 over a fixed random family, N -> 2N -> 4N.
    for l in 1..=2 {
        let mut worst = vec![];
        for n in [100, 201, 403] {
            let g = Grid::new(1.0, n).unwrap();
            let op = DispersionOperator::assemble(l, g).unwrap();
            let q = samples::corpus(&g, l, 30, 5)
                .iter()
                .map(|u| {
                    let au = op.apply(u).unwrap();
                    grid::inner(&au, u).unwrap() / grid::inner(u, u).unwrap()
                })
                .fold(f64::INFINITY, f64::min);
            worst.push(q.min(0.0).abs());
        }
        assert!(worst.windows(2).all(|w| w[1] <= w[0]), "l = {l}: {worst:?}");
    }
}

#[test]
fn dissipation_residual_shrinks_on_random_functions() {
    for seed in 0..5 {
        let mut r = vec![];
        for n in [128, 257, 515] {
            let g = Grid::new(1.0, n).unwrap();
            let op = DispersionOperator::assemble(1, g).unwrap();
            let u = &samples::corpus(&g, 1, 1, seed)[0];
            r.push(op.dissipation_residual(u).unwrap().abs());
        }
        assert!(r[2] < r[1] && r[1] < r[0], "seed {seed}: {r:?}");
    }
}
