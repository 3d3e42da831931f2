mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use pugraph::spectral::{
    consensus_value, left_null_vector_direct, left_null_vector_path, null_range_bases, projection_outcome,
    LeftNullVector,
};
use pugraph::{incidence_set, laplacian, path_graph};
use rand::Rng;

#[test]
fn positive_graphs_have_positive_null_vectors() {
    let mut rng = common::rng(2);
    for _ in 0..1000 {
        let n = rng.gen_range(2..=10);
        let g = common::positive_graph(&mut rng, n);
        let out = projection_outcome(&g).unwrap();
        let l = laplacian(&g).matrix;
        assert!(out.null_vector.is_positive(), "{:?}", out.null_vector.p);
        assert!(out.null_vector.residual_within_contract(&l));
        assert_eq!(out.unit_multiplicity, 1);
    }
}

#[test]
fn projection_vector_lies_in_both_subspaces() {
    let mut rng = common::rng(3);
    for _ in 0..200 {
        let n = rng.gen_range(2..=9);
        let g = common::positive_graph(&mut rng, n);
        let out = projection_outcome(&g).unwrap();
        let inc = incidence_set(&g).unwrap();
        let scale = out.v.amax();
        assert!((&inc.e * &out.v).amax() <= 1e-9 * scale.max(1.0));
        let v = &out.bases.v;
        let y = (v.transpose() * v).cholesky().unwrap().solve(&(v.transpose() * &out.v));
        assert!((v * y - &out.v).norm() <= 1e-9 * scale.max(1.0));
    }
}

#[test]
fn bases_and_projectors() {
    let mut rng = common::rng(4);
    for _ in 0..200 {
        let n = rng.gen_range(2..=9);
        let g = common::positive_graph(&mut rng, n);
        let inc = incidence_set(&g).unwrap();
        let b = null_range_bases(&g, &inc);
        assert_eq!(b.u.ncols(), 2 * g.m() - n + 1);
        assert!((&inc.e * &b.u).amax() <= 1e-12);
        for p in [&b.p_u, &b.p_v] {
            assert!((p * p - p).amax() <= 1e-10);
            assert!((p - p.transpose()).amax() <= 1e-10);
        }
    }
}

#[test]
fn signed_paths_agree_between_recursion_and_dense_solve() {
    let mut rng = common::rng(5);
    let mut checked = 0;
    while checked < 300 {
        let n = rng.gen_range(2..=8);
        let f: Vec<f64> = (1..n).map(|_| common::weight(&mut rng)).collect();
        let mut r: Vec<f64> = (1..n).map(|_| common::weight(&mut rng)).collect();
        let k = rng.gen_range(0..n - 1);
        r[k] = -rng.gen_range(0.05..0.4);
        let l = laplacian(&path_graph(n, &f, &r).unwrap());
        if !pugraph::spectral::consensus_feasible(&l.matrix).feasible {
            continue;
        }
        let a = left_null_vector_path(&l).unwrap();
        let b = left_null_vector_direct(&l).unwrap();
        assert!((&a.p - &b.p).amax() <= 1e-9);
        checked += 1;
    }
}

#[test]
fn shift_moves_eigenvalues_and_keeps_eigenvectors() {
    let mut rng = common::rng(6);
    for _ in 0..100 {
        let n = rng.gen_range(2..=8);
        // path Laplacians with positive weights have real spectra
        let l = laplacian(&common::positive_path(&mut rng, n)).matrix;
        let delta = rng.gen_range(-3.0..3.0);
        let shifted = &l + DMatrix::identity(n, n) * delta;
        let mut a: Vec<f64> = l.complex_eigenvalues().iter().map(|z| z.re).collect();
        let mut b: Vec<f64> = shifted.complex_eigenvalues().iter().map(|z| z.re).collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert!((y - x - delta).abs() <= 1e-9);
        }
        for &lam in &a {
            let svd = (&l - DMatrix::identity(n, n) * lam).svd(false, true);
            let vt = svd.v_t.unwrap();
            let (i, _) = svd.singular_values.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)).unwrap();
            let v = vt.row(i).transpose();
            assert!((&shifted * &v - &v * (lam + delta)).amax() <= 1e-8);
        }
    }
}

proptest! {
    #[test]
    fn consensus_value_is_scale_invariant(
        seed in any::<u64>(),
        n in 2usize..8,
        c in prop_oneof![-1e3..-1e-3f64, 1e-3..1e3f64],
    ) {
        let mut rng = common::rng(seed);
        let l = laplacian(&common::positive_path(&mut rng, n));
        let p = left_null_vector_path(&l).unwrap();
        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let scaled = LeftNullVector { p: &p.p * c, ..p.clone() };
        let a = consensus_value(&p, &x0).unwrap();
        let b = consensus_value(&scaled, &x0).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-12 * a.value.abs().max(1.0));
        prop_assert!(a.in_hull);
    }
}
