#![allow(dead_code)]

pub mod manufactured;
pub mod schur;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shiftmg::{CsrMatrix, C64};

pub fn dense(a: &CsrMatrix) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(a.nrows(), a.ncols());
    for r in 0..a.nrows() {
        let (cols, vals) = a.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            m[(r, c)] = v;
        }
    }
    m
}

pub fn random_vector(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

pub fn random_field(n: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Max-entry difference relative to the max entry of `b`.
pub fn rel_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

pub fn rel_err(x: &[C64], y: &[C64]) -> f64 {
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = y.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt();
    num / den
}
