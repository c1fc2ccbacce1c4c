mod common;

use common::{dense, random_vector, rel_err};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shiftmg::krylov::{fgmres, Identity, SolveConfig};
use shiftmg::sparse::norm2;
use shiftmg::{CsrMatrix, Result, C64};

fn random_matrix(n: usize, seed: u64) -> CsrMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) / (n as f64).sqrt();
            t.push((i, j, if i == j { v + C64::new(3.0, 1.0) } else { v }));
        }
    }
    CsrMatrix::from_triplets(n, n, t).unwrap()
}

fn to_dvec(v: &[C64]) -> DVector<C64> {
    DVector::from_column_slice(v)
}

#[test]
fn matches_dense_solve() {
    let a = random_matrix(50, 1);
    let b = random_vector(50, 2);
    let cfg = SolveConfig { restart: 50, tol: 1e-13, max_applications: 200, ..Default::default() };
    let (x, rep) = fgmres(&a, &b, &Identity, &cfg).unwrap();
    assert!(rep.converged);
    let oracle = dense(&a).lu().solve(&to_dvec(&b)).unwrap();
    assert!(rel_err(&x, oracle.as_slice()) < 1e-10);
}

/// GMRES residuals from a dense least-squares problem over the Krylov space
/// of `A M`.
fn gmres_oracle(a: &DMatrix<C64>, m: &DMatrix<C64>, b: &DVector<C64>, steps: usize) -> Vec<f64> {
    let am = a * m;
    let mut basis = vec![b.clone()];
    for _ in 1..steps {
        let next = &am * basis.last().unwrap();
        basis.push(next.normalize());
    }
    (1..=steps)
        .map(|k| {
            let w = &am * DMatrix::from_columns(&basis[..k]);
            let y = w.clone().svd(true, true).solve(b, 1e-15).unwrap();
            (b - w * y).norm() / b.norm()
        })
        .collect()
}

#[test]
fn agrees_with_right_preconditioned_gmres() {
    let a = random_matrix(40, 3);
    let b = random_vector(40, 4);
    let inv: Vec<C64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    let pc = |r: &[C64]| -> Result<Vec<C64>> { Ok(r.iter().zip(&inv).map(|(x, y)| x * y).collect()) };
    let steps = 8;
    let cfg = SolveConfig { restart: steps, tol: 1e-15, max_applications: steps, ..Default::default() };
    let (_, rep) = fgmres(&a, &b, &pc, &cfg).unwrap();
    let oracle = gmres_oracle(&dense(&a), &DMatrix::from_diagonal(&to_dvec(&inv)), &to_dvec(&b), steps);
    assert_eq!(rep.history.len(), steps + 1);
    for (k, (got, want)) in rep.history[1..].iter().zip(&oracle).enumerate() {
        assert!((got - want).abs() <= 1e-8 * want.max(1e-12), "step {}: {got} vs {want}", k + 1);
    }
}

#[test]
fn history_is_monotone_and_ends_with_true_residual() {
    let a = random_matrix(60, 5);
    let b = random_vector(60, 6);
    let cfg = SolveConfig { restart: 4, tol: 1e-10, max_applications: 100, ..Default::default() };
    let (x, rep) = fgmres(&a, &b, &Identity, &cfg).unwrap();
    assert!(rep.converged);
    assert_eq!(rep.history.len(), rep.iterations + 1);
    for w in rep.history.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-10), "{} then {}", w[0], w[1]);
    }
    let r = a.mul_vec(&x).unwrap().iter().zip(&b).map(|(ax, bi)| bi - ax).collect::<Vec<_>>();
    let true_rel = norm2(&r) / norm2(&b);
    assert!((true_rel - rep.final_residual()).abs() <= 1e-12);
}

#[test]
fn restart_entries_are_true_residuals() {
    let a = random_matrix(30, 7);
    let b = random_vector(30, 8);
    for cap in [3, 6, 9] {
        let cfg = SolveConfig { restart: 3, tol: 1e-14, max_applications: cap, ..Default::default() };
        let (x, rep) = fgmres(&a, &b, &Identity, &cfg).unwrap();
        let r: Vec<C64> = a.mul_vec(&x).unwrap().iter().zip(&b).map(|(ax, bi)| bi - ax).collect();
        assert!((norm2(&r) / norm2(&b) - rep.final_residual()).abs() <= 1e-13);
    }
}
