mod common;

use common::*;
use proptest::prelude::*;
use pvd_core::cut::{
    cut_lp_approx, cut_lp_exact, cut_norm_bruteforce, lp_round, normalized_cut_bruteforce,
    CutLpInstance,
};
use pvd_core::linalg::{DenseMatrix, DiagonalInnerProduct, InnerProductPair};
use rand::Rng;

fn int_matrix(lo: i32, hi: i32) -> impl Strategy<Value = DenseMatrix> {
    (2usize..=4, 2usize..=4).prop_flat_map(move |(m, n)| {
        proptest::collection::vec(lo..=hi, m * n)
            .prop_map(move |v| DenseMatrix::new(m, n, v.into_iter().map(f64::from).collect()).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn one_sided_enumeration_is_exact(a in int_matrix(-3, 3)) {
        let fast = cut_norm_bruteforce(&a, 12, 0.0).unwrap();
        prop_assert!((fast.value - naive_cut_norm(&a)).abs() < 1e-12);
        let direct = a.block_sum(&fast.rows, &fast.cols);
        prop_assert!((direct.abs() - fast.value).abs() < 1e-12);
    }

    #[test]
    fn normalized_enumeration_is_exact(a in int_matrix(-3, 3), seed in 0u64..1000) {
        let mut g = rng(seed);
        let ips = InnerProductPair::new(random_weights(&mut g, a.rows()), random_weights(&mut g, a.cols()));
        let got = normalized_cut_bruteforce(&a, &ips.left, &ips.right, 12, 0.0).unwrap();
        prop_assert!((got.value - naive_normalized_cut(&a, &ips)).abs() < 1e-12);
    }

    #[test]
    fn rounding_never_loses_to_the_lp(a in int_matrix(-3, 3), ratio in 0.2f64..5.0) {
        let d = vec![1.0; a.rows()];
        let e = vec![1.0; a.cols()];
        let sol = CutLpInstance { matrix: &a, left: &d, right: &e, ratio }.solve(1e-12).unwrap();
        let rounded = lp_round(&sol, &a, &d, &e);
        prop_assert!(rounded.value >= sol.objective - 1e-9);
    }

    #[test]
    fn lp_is_exact_on_nonnegative_input(a in int_matrix(0, 3), w in proptest::collection::vec(1u64..=3, 8)) {
        let left = &w[..a.rows()];
        let right = &w[4..4 + a.cols()];
        let ips = InnerProductPair::new(
            DiagonalInnerProduct::new(left.iter().map(|&x| x as f64).collect()).unwrap(),
            DiagonalInnerProduct::new(right.iter().map(|&x| x as f64).collect()).unwrap(),
        );
        let lp = cut_lp_exact(&a, left, right, 1e-12, 1e-12).unwrap();
        prop_assert!((lp.pair.value - naive_normalized_cut(&a, &ips)).abs() < 1e-6);
    }
}

#[test]
fn approximate_grid_tracks_the_exact_lp_on_nonnegative_input() {
    let mut g = rng(8);
    for _ in 0..20 {
        let n = g.gen_range(3..=5);
        let a = DenseMatrix::from_fn(n, n, |_, _| f64::from(g.gen_range(0..=3)));
        let w: Vec<u64> = (0..n).map(|_| g.gen_range(1..=3)).collect();
        let d = DiagonalInnerProduct::new(w.iter().map(|&x| x as f64).collect()).unwrap();
        let exact = cut_lp_exact(&a, &w, &w, 1e-12, 1e-12).unwrap().pair.value;
        for eps in [0.5, 0.1] {
            let approx = cut_lp_approx(&a, &d, &d, eps, 1e-12, 1e-12).unwrap().pair.value;
            assert!(approx >= exact / (1.0 + eps) - 1e-9, "eps {eps}: {approx} vs {exact}");
        }
    }
}
