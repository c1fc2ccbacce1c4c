mod common;

use common::random_vector;
use proptest::prelude::*;
use shiftmg::multigrid::{prolongation, Layout};
use shiftmg::{CsrMatrix, Grid, C64};

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop_oneof![
        (1usize..5, 1usize..5).prop_map(|(a, b)| vec![4 * a, 4 * b]),
        (1usize..3, 1usize..3, 1usize..3).prop_map(|(a, b, c)| vec![4 * a, 4 * b, 4 * c]),
    ]
}

type Triplets = (usize, usize, Vec<(usize, usize, f64, f64)>);

fn triplets() -> impl Strategy<Value = Triplets> {
    (1usize..12, 1usize..12).prop_flat_map(|(r, c)| {
        (Just(r), Just(c), prop::collection::vec((0..r, 0..c, -2.0..2.0f64, -2.0..2.0f64), 0..40))
    })
}

proptest! {
    #[test]
    fn cell_and_face_indices_round_trip(dims in dims_strategy()) {
        let g = Grid::uniform(&dims, 0.1).unwrap();
        for c in 0..g.cell_count() {
            let idx = g.cell_multi_index(c);
            prop_assert_eq!(g.cell_index(&idx[..g.dim()]), c);
        }
        for f in 0..g.total_face_count() {
            let (axis, _) = g.face_coords(f);
            prop_assert_eq!(g.face_axis(f), axis);
        }
    }

    #[test]
    fn cell_prolongation_preserves_constants(dims in dims_strategy()) {
        let f = Grid::uniform(&dims, 0.1).unwrap();
        let c = f.coarsen().unwrap();
        let p = prolongation(&c, &f, Layout::Cell).unwrap();
        for r in 0..p.nrows() {
            let s: C64 = p.row(r).1.iter().sum();
            prop_assert!((s.re - 1.0).abs() < 1e-14 && s.im == 0.0);
        }
    }

    #[test]
    fn spmv_and_transpose_are_adjoint((r, c, t) in triplets(), seed in 0u64..1000) {
        let a = CsrMatrix::from_triplets(r, c, t.iter().map(|&(i, j, x, y)| (i, j, C64::new(x, y))).collect::<Vec<_>>()).unwrap();
        let x = random_vector(c, seed);
        let y = random_vector(r, seed + 1);
        let ax = a.mul_vec(&x).unwrap();
        // Plain transpose: yᵀ(Ax) = (Aᵀy)ᵀx without conjugation.
        let aty = a.transpose().mul_vec(&y).unwrap();
        let lhs: C64 = y.iter().zip(&ax).map(|(p, q)| p * q).sum();
        let rhs: C64 = aty.iter().zip(&x).map(|(p, q)| p * q).sum();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
        prop_assert_eq!(a.transpose().transpose(), a.clone());
        let dense = a.to_dense();
        for &(i, j, _, _) in t.iter().take(5) {
            prop_assert_eq!(dense[i * c + j], a.get(i, j));
        }
    }
}
