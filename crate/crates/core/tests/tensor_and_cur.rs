mod common;

use common::*;
use proptest::prelude::*;
use pvd_core::cur::{all_column_row_form, cur_pvd};
use pvd_core::linalg::DenseMatrix;
use pvd_core::tensor::{s_form, tensor_bound_check, tensor_pvd, DenseTensor, TupleDomain};
use pvd_core::PvdConfig;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn s_form_is_multilinear(
        entries in proptest::collection::vec(-2.0f64..2.0, 12),
        x in proptest::collection::vec(-1.0f64..1.0, 2),
        y in proptest::collection::vec(-1.0f64..1.0, 3),
        z1 in proptest::collection::vec(-1.0f64..1.0, 2),
        z2 in proptest::collection::vec(-1.0f64..1.0, 2),
        alpha in -2.0f64..2.0,
        beta in -2.0f64..2.0,
    ) {
        let t = DenseTensor::new(vec![2, 3, 2], entries).unwrap();
        let mix: Vec<f64> = z1.iter().zip(&z2).map(|(a, b)| alpha * a + beta * b).collect();
        let lhs = s_form(&t, &[x.clone(), y.clone(), mix]).unwrap();
        let rhs = alpha * s_form(&t, &[x.clone(), y.clone(), z1]).unwrap()
            + beta * s_form(&t, &[x, y, z2]).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }
}

#[test]
fn random_tensor_chains() {
    let mut g = rng(9);
    for dims in [vec![2, 2, 2], vec![3, 3, 2]] {
        for _ in 0..5 {
            let count = dims.iter().product();
            let t = DenseTensor::new(dims.clone(), (0..count).map(|_| g.gen_range(-1.0..=1.0)).collect()).unwrap();
            let d = TupleDomain::cut_euclidean(&dims);
            let r = tensor_pvd(&t, &d, usize::MAX, &PvdConfig::default()).unwrap();
            assert!(r.exhausted());
            let v = tensor_bound_check(&r, &d, 8, &PvdConfig::default()).unwrap();
            assert!(v.passes(), "{:?}", v.certificates.iter().filter(|c| !c.pass).collect::<Vec<_>>());
        }
    }
}

#[test]
fn cur_bound_holds_for_every_column_row_pair() {
    let mut g = rng(12);
    for _ in 0..5 {
        let u = uniform_matrix(&mut g, 6, 2);
        let v = uniform_matrix(&mut g, 2, 6);
        let a = DenseMatrix::from_fn(6, 6, |i, j| {
            (0..2).map(|k| u.get(i, k) * v.get(k, j)).sum::<f64>() + 0.1 * g.gen_range(-1.0..=1.0)
        });
        let d = cur_pvd(&a, 0.4, &PvdConfig::default()).unwrap();
        let residual = a.sub(&d.approx).unwrap();
        // Independent evaluation over all 36 (column, row) pairs.
        let mut worst: f64 = 0.0;
        for j in 0..6 {
            let c = a.column(j);
            let cn = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            for i in 0..6 {
                let r = a.row(i);
                let rn = r.iter().map(|x| x * x).sum::<f64>().sqrt();
                let val: f64 = (0..6).map(|p| (0..6).map(|q| c[p] * residual.get(p, q) * r[q]).sum::<f64>()).sum();
                worst = worst.max(val.abs() / (cn * rn));
            }
        }
        assert!((worst - all_column_row_form(&a, &residual)).abs() < 1e-12);
        assert!(worst <= d.prefix_bound + 1e-9);
        assert!(worst <= 0.4 * a.euclidean_frob_norm() + 1e-9);
        assert!(d.reconstruction_error < 1e-8);
    }
}
