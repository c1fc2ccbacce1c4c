mod common;

use common::{dense, random_vector};
use nalgebra::{DMatrix, DVector};
use shiftmg::discretization::{assemble_acoustic, assemble_mixed, pressure_from_displacement};
use shiftmg::medium::make_constant_model;
use shiftmg::smoothers::{extract_block, jacobi_sweep, vanka_setup, BlockPrecision};
use shiftmg::sparse::norm2;
use shiftmg::{CsrMatrix, Grid, C64};

fn shifted_mixed(dims: &[usize], alpha: f64) -> (Grid, CsrMatrix) {
    let g = Grid::uniform(dims, 1.0 / dims[0] as f64).unwrap();
    let m = make_constant_model(&g, 1.0, 1.0, 2.0).unwrap();
    let a = assemble_mixed(&g, &m, 2.0 * std::f64::consts::PI).unwrap().shifted(alpha);
    (g, a)
}

#[test]
fn stored_inverses_meet_precision_tolerance() {
    let (g, a) = shifted_mixed(&[8, 6], 0.3);
    for p in [BlockPrecision::Half, BlockPrecision::Single, BlockPrecision::Double] {
        let v = vanka_setup(&a, &g, p).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..v.len() {
            let idx = v.block_indices(k);
            let s = idx.len();
            let b = DMatrix::from_row_slice(s, s, &extract_block(&a, idx));
            let inv = DMatrix::from_row_slice(s, s, &v.inverse(k));
            let exact = b.clone().try_inverse().unwrap();
            let rel = (&inv * &b - DMatrix::<C64>::identity(s, s)).norm() / 1.0;
            worst = worst.max(rel.min((&inv - &exact).norm() / exact.norm()));
        }
        assert!(worst < p.tolerance(), "{p:?}: {worst:e}");
    }
}

#[test]
fn interior_block_sizes() {
    let (g, a) = shifted_mixed(&[6, 6], 0.5);
    let v = vanka_setup(&a, &g, BlockPrecision::Single).unwrap();
    assert_eq!(v.block_indices(g.cell_index(&[2, 3])).len(), 5);
    assert_eq!(v.block_indices(g.cell_index(&[0, 0])).len(), 3);
    assert_eq!(v.block_indices(g.cell_index(&[0, 3])).len(), 4);
    let (g, a) = shifted_mixed(&[4, 4, 4], 0.5);
    let v = vanka_setup(&a, &g, BlockPrecision::Single).unwrap();
    assert_eq!(v.block_indices(g.cell_index(&[1, 2, 1])).len(), 7);
}

#[test]
fn same_color_cells_are_disjoint_on_6x6x6() {
    let g = Grid::uniform(&[6, 6, 6], 1.0).unwrap();
    let v = vanka_setup(&CsrMatrix::identity(g.mixed_count()), &g, BlockPrecision::Single).unwrap();
    for color in 0..2 {
        let mut owner = vec![usize::MAX; g.mixed_count()];
        for &k in v.color(color) {
            for &i in v.block_indices(k) {
                assert_eq!(owner[i], usize::MAX, "unknown {i} in cells {} and {k}", owner[i]);
                owner[i] = k;
            }
        }
    }
    assert_eq!(v.color(0).len() + v.color(1).len(), g.cell_count());
}

#[test]
fn residual_decreases_over_five_sweeps() {
    let (g, a) = shifted_mixed(&[16, 8], 0.5);
    let v = vanka_setup(&a, &g, BlockPrecision::Single).unwrap();
    // Face forcing with homogeneous constraint rows, as in every mixed solve.
    let mut b = random_vector(a.nrows(), 3);
    b[g.total_face_count()..].iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
    let mut x = vec![C64::new(0.0, 0.0); a.nrows()];
    let mut r = vec![C64::new(0.0, 0.0); a.nrows()];
    let mut last = norm2(&b);
    for _ in 0..5 {
        v.sweep(&a, &mut x, &b, 0.5).unwrap();
        a.residual(&b, &x, &mut r).unwrap();
        let now = norm2(&r);
        assert!(now < last, "{now} >= {last}");
        last = now;
    }
}

#[test]
fn sweep_is_linear() {
    let (g, a) = shifted_mixed(&[8, 8], 0.5);
    let v = vanka_setup(&a, &g, BlockPrecision::Double).unwrap();
    let zero = vec![C64::new(0.0, 0.0); a.nrows()];
    let (u1, u2) = (random_vector(a.nrows(), 1), random_vector(a.nrows(), 2));
    let mut s: Vec<C64> = u1.iter().zip(&u2).map(|(p, q)| p + q).collect();
    let (mut y1, mut y2) = (u1.clone(), u2.clone());
    v.sweep(&a, &mut y1, &zero, 0.5).unwrap();
    v.sweep(&a, &mut y2, &zero, 0.5).unwrap();
    v.sweep(&a, &mut s, &zero, 0.5).unwrap();
    let sum: Vec<C64> = y1.iter().zip(&y2).map(|(p, q)| p + q).collect();
    assert!(common::rel_err(&s, &sum) < 1e-13);
}

/// Displacement checkerboard with the pressure it implies, so that the error
/// satisfies the constraint rows.
#[test]
fn checkerboard_error_is_damped() {
    let g = Grid::uniform(&[32, 32], 1.0 / 32.0).unwrap();
    let m = make_constant_model(&g, 1.0, 1.0, 2.0).unwrap();
    let a = assemble_mixed(&g, &m, 2.0 * std::f64::consts::PI).unwrap().shifted(0.5);
    let v = vanka_setup(&a, &g, BlockPrecision::Single).unwrap();
    let nf = g.total_face_count();
    let mut e: Vec<C64> = (0..nf)
        .map(|f| {
            let axis = g.face_axis(f);
            let idx = Grid::multi_index(&g.face_dims(axis), f - g.face_offset(axis));
            C64::new(if (idx[0] + idx[1]).is_multiple_of(2) { 1.0 } else { -1.0 }, 0.0)
        })
        .collect();
    e.extend(pressure_from_displacement(&g, &m, &e).unwrap());
    let zero = vec![C64::new(0.0, 0.0); a.nrows()];
    let (u0, p0) = (norm2(&e[..nf]), norm2(&e[nf..]));
    v.sweep(&a, &mut e, &zero, 0.5).unwrap();
    let (fu, fp) = (norm2(&e[..nf]) / u0, norm2(&e[nf..]) / p0);
    assert!(fu <= 0.5 && fp <= 0.5, "factors {fu} {fp}");
}

#[test]
fn sweep_does_not_depend_on_thread_count() {
    let (g, a) = shifted_mixed(&[64, 32], 0.5);
    let v = vanka_setup(&a, &g, BlockPrecision::Single).unwrap();
    let b = random_vector(a.nrows(), 5);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let mut x = vec![C64::new(0.0, 0.0); a.nrows()];
            for _ in 0..3 {
                v.sweep(&a, &mut x, &b, 0.5).unwrap();
            }
            x
        })
    };
    let one = run(1);
    for t in [2, 4] {
        assert!(one == run(t), "{t} threads differ");
    }
}

#[test]
fn jacobi_matches_dense_iteration() {
    let g = Grid::uniform(&[10, 8], 0.1).unwrap();
    let n = g.cell_count();
    let v: Vec<f64> = (0..n).map(|c| 1.0 + 0.01 * c as f64).collect();
    let rho = vec![1.0; n];
    let sys = assemble_acoustic(&g, &v, &rho, &vec![0.0; n], 5.0).unwrap();
    let a = sys.shifted(0.5);
    let ad = dense(&a);
    let dinv = DMatrix::from_diagonal(&ad.diagonal().map(|d| C64::new(1.0, 0.0) / d));
    let b = random_vector(n, 8);
    let bd = DVector::from_column_slice(&b);
    let mut x = vec![C64::new(0.0, 0.0); n];
    let mut xd = DVector::<C64>::zeros(n);
    for _ in 0..6 {
        jacobi_sweep(&a, &mut x, &b, 0.8).unwrap();
        xd = &xd + (&dinv * (&bd - &ad * &xd)) * C64::new(0.8, 0.0);
    }
    let err = x.iter().zip(xd.iter()).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
    let scale = xd.iter().map(|q| q.norm()).fold(0.0, f64::max);
    assert!(err <= 1e-13 * scale, "{err:e}");
}
