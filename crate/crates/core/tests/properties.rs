use std::collections::HashSet;
use std::sync::Arc;

use approx::assert_relative_eq;
use hbaca::aca::AcaBlockState;
use hbaca::baca::mark_doerfler;
use hbaca::mesh::generate_icosphere;
use hbaca::oracle::FnOracle;
use hbaca::solver::cg_solve;
use hbaca::{BlockPartition, ClusterTree, EntryOracle, HMatrix, LaplaceSlp, MatvecMode, QuadratureOrders};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sum_sq(c: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| c[i] * c[i]).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn marking_is_the_shortest_sorted_prefix(
        c in prop::collection::vec(0.0f64..10.0, 1..40),
        theta in 0.05f64..0.99,
    ) {
        let m = mark_doerfler(&c, theta);
        let total: f64 = c.iter().map(|v| v * v).sum();
        let target = theta * theta * total;
        prop_assert!(sum_sq(&c, &m) >= target);
        let unique: HashSet<_> = m.iter().collect();
        prop_assert_eq!(unique.len(), m.len());
        // Every marked contribution dominates every unmarked one.
        let smallest_marked = m.iter().map(|&i| c[i]).fold(f64::INFINITY, f64::min);
        for i in (0..c.len()).filter(|i| !unique.contains(i)) {
            prop_assert!(c[i] <= smallest_marked);
        }
        if !m.is_empty() {
            prop_assert!(sum_sq(&c, &m[..m.len() - 1]) < target);
        }
    }

    #[test]
    fn partition_covers_every_pair_once(leaf in 1usize..40, beta in 0.2f64..3.0, level in 1usize..3) {
        let mesh = generate_icosphere::<f64>(level, 1.0).unwrap();
        let n = mesh.num_triangles();
        let p = BlockPartition::build(ClusterTree::build(&mesh, leaf), beta);
        let mut hits = vec![0u8; n * n];
        for b in p.blocks() {
            for &i in p.row_indices(b) {
                for &j in p.col_indices(b) {
                    hits[i * n + j] += 1;
                }
            }
        }
        prop_assert!(hits.iter().all(|&h| h == 1));
    }

    #[test]
    fn aca_recovers_exact_low_rank(rank in 1usize..5, m in 8usize..30, n in 8usize..30, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..m * rank).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..n * rank).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let size = m.max(n);
        let entry = move |i: usize, j: usize| -> f64 {
            if i >= m || j >= n {
                return 0.0;
            }
            (0..rank).map(|l| u[i * rank + l] * v[j * rank + l]).sum()
        };
        let oracle = FnOracle::new(size, entry.clone());
        let mut st = AcaBlockState::new((0..m).collect(), (0..n).collect());
        st.run_to_convergence(&oracle, 1e-10, 0.8);
        let approx = match st.dense() {
            Some(d) => d.clone(),
            None => st.low_rank_eval().unwrap(),
        };
        let mut err = 0.0f64;
        let mut norm = 0.0f64;
        for i in 0..m {
            for j in 0..n {
                let a = entry(i, j);
                err += (a - approx.get(i, j)).powi(2);
                norm += a * a;
            }
        }
        prop_assert!(err.sqrt() <= 1e-8 * norm.sqrt());
    }
}

#[test]
fn single_layer_matrix_is_symmetric_and_positive() {
    let mesh = generate_icosphere::<f64>(1, 1.0).unwrap();
    let op = LaplaceSlp::new(&mesh, QuadratureOrders::default()).unwrap();
    let n = op.size();
    for i in 0..n {
        assert!(op.entry(i, i) > 0.0);
        for j in 0..i {
            assert_eq!(op.entry(i, j), op.entry(j, i));
        }
    }
    let a = DMatrix::from_fn(n, n, |i, j| op.entry(i, j));
    assert!(a.cholesky().is_some());
}

#[test]
fn estimator_matrix_is_the_difference_of_the_pair() {
    let mesh = generate_icosphere::<f64>(2, 1.0).unwrap();
    let op = LaplaceSlp::new(&mesh, QuadratureOrders::default()).unwrap();
    let p = Arc::new(BlockPartition::build(ClusterTree::build(&mesh, 15), 2.0));
    let h = HMatrix::initial(p, &op, 2, 3, 1e-14, 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x: Vec<f64> = (0..op.size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let ak = h.matvec(&x, MatvecMode::Ak).unwrap();
    let ahat = h.matvec(&x, MatvecMode::Ahat).unwrap();
    let w = h.matvec(&x, MatvecMode::Wk).unwrap();
    for i in 0..x.len() {
        assert_relative_eq!(ak[i] - ahat[i], w[i], epsilon = 1e-14);
    }
}

#[test]
fn cg_matches_cholesky_on_random_spd() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 60;
    let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let a = &b * b.transpose() + DMatrix::identity(n, n) * (n as f64);
    let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let direct = a.clone().cholesky().unwrap().solve(&DVector::from_column_slice(&rhs));
    let out = cg_solve(
        |v: &[f64]| Ok((&a * DVector::from_column_slice(v)).as_slice().to_vec()),
        &rhs,
        &vec![0.0; n],
        1e-13,
        1000,
    )
    .unwrap();
    assert!(out.converged);
    for i in 0..n {
        assert_relative_eq!(out.x[i], direct[i], epsilon = 1e-10);
    }
}
