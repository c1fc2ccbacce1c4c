//! Sparse direct solves for the coarsest multigrid level.
//!
//! The matrix is reordered by reverse Cuthill-McKee and factorized as a band
//! matrix with partial pivoting. When the band is nearly as wide as the
//! matrix, a dense LU is used instead.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, C64};

/// Reverse Cuthill-McKee permutation of the symmetrized pattern of `a`.
/// `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let at = a.transpose();
    let mut adj: Vec<Vec<usize>> = (0..n)
        .map(|r| {
            let mut nb: Vec<usize> = a.row(r).0.iter().chain(at.row(r).0).copied().filter(|&c| c != r).collect();
            nb.sort_unstable();
            nb.dedup();
            nb
        })
        .collect();
    let degree: Vec<usize> = adj.iter().map(|v| v.len()).collect();
    for nb in &mut adj {
        nb.sort_by_key(|&v| (degree[v], v));
    }

    // level structure rooted at `start` over the unvisited vertices
    let bfs_levels = |start: usize, visited: &[bool]| -> (Vec<usize>, Vec<usize>) {
        let mut level = vec![usize::MAX; n];
        let mut order = vec![start];
        level[start] = 0;
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &w in &adj[v] {
                if !visited[w] && level[w] == usize::MAX {
                    level[w] = level[v] + 1;
                    order.push(w);
                }
            }
        }
        (order, level)
    };

    let mut visited = vec![false; n];
    let mut perm = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        // pseudo-peripheral start: hop to a min-degree vertex of the last level
        let mut start = seed;
        let (mut order, mut level) = bfs_levels(start, &visited);
        for _ in 0..4 {
            let depth = level[*order.last().unwrap()];
            let cand = order
                .iter()
                .copied()
                .filter(|&v| level[v] == depth)
                .min_by_key(|&v| (degree[v], v))
                .unwrap();
            let (o2, l2) = bfs_levels(cand, &visited);
            if l2[*o2.last().unwrap()] <= depth {
                break;
            }
            start = cand;
            order = o2;
            level = l2;
        }
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            perm.push(v);
            for &w in &adj[v] {
                if !visited[w] {
                    visited[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    perm.reverse();
    perm
}

/// Lower and upper bandwidth of `a` under the permutation `perm`.
pub fn bandwidths(a: &CsrMatrix, perm: &[usize]) -> (usize, usize) {
    let mut inv = vec![0usize; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let (mut kl, mut ku) = (0, 0);
    for r in 0..a.nrows() {
        for &c in a.row(r).0 {
            let (i, j) = (inv[r], inv[c]);
            if i > j {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
    }
    (kl, ku)
}

/// Band LU with partial pivoting. Row `i` keeps columns `i-kl ..= i+kl+ku`.
#[derive(Debug, Clone)]
struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    ab: Vec<C64>,
    piv: Vec<usize>,
}

impl BandLu {
    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    fn factor(a: &CsrMatrix, perm: &[usize], kl: usize, ku: usize) -> Result<Self> {
        let n = a.nrows();
        let width = 2 * kl + ku + 1;
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut lu = BandLu { n, kl, ku, width, ab: vec![C64::new(0.0, 0.0); n * width], piv: vec![0; n] };
        for r in 0..n {
            let (cols, vals) = a.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let k = lu.at(inv[r], inv[c]);
                lu.ab[k] += v;
            }
        }
        let reach = kl + ku;
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.ab[lu.at(k, k)].norm();
            for i in k + 1..=last {
                let v = lu.ab[lu.at(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularMatrix(k));
            }
            lu.piv[k] = p;
            let jmax = (k + reach).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let (x, y) = (lu.at(k, j), lu.at(p, j));
                    lu.ab.swap(x, y);
                }
            }
            let pivot = lu.ab[lu.at(k, k)];
            let krow = lu.at(k, k);
            for i in k + 1..=last {
                let ik = lu.at(i, k);
                let l = lu.ab[ik] / pivot;
                lu.ab[ik] = l;
                if l == C64::new(0.0, 0.0) {
                    continue;
                }
                let irow = ik;
                for off in 1..=(jmax - k) {
                    let u = lu.ab[krow + off];
                    lu.ab[irow + off] -= l * u;
                }
            }
        }
        Ok(lu)
    }

    fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.n;
        let reach = self.kl + self.ku;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk == C64::new(0.0, 0.0) {
                continue;
            }
            for i in k + 1..=(k + self.kl).min(n - 1) {
                b[i] -= self.ab[self.at(i, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let base = self.at(k, k);
            let mut s = b[k];
            for off in 1..=((k + reach).min(n - 1) - k) {
                s -= self.ab[base + off] * b[k + off];
            }
            b[k] = s / self.ab[base];
        }
    }
}

/// Dense row-major LU with partial pivoting.
#[derive(Debug, Clone)]
pub struct DenseLu {
    n: usize,
    lu: Vec<C64>,
    piv: Vec<usize>,
}

impl DenseLu {
    pub fn factor(n: usize, mut a: Vec<C64>) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::LengthMismatch { expected: n * n, actual: a.len() });
        }
        let mut piv = vec![0; n];
        for k in 0..n {
            let mut p = k;
            let mut best = a[k * n + k].norm();
            for i in k + 1..n {
                let v = a[i * n + k].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularMatrix(k));
            }
            piv[k] = p;
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
            }
            let pivot = a[k * n + k];
            for i in k + 1..n {
                let l = a[i * n + k] / pivot;
                a[i * n + k] = l;
                if l == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    let u = a[k * n + j];
                    a[i * n + j] -= l * u;
                }
            }
        }
        Ok(Self { n, lu: a, piv })
    }

    pub fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.n;
        for k in 0..n {
            b.swap(k, self.piv[k]);
        }
        for i in 0..n {
            let mut s = b[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * b[j];
            }
            b[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * b[j];
            }
            b[i] = s / self.lu[i * n + i];
        }
    }

    /// Explicit inverse, row-major.
    pub fn inverse(&self) -> Vec<C64> {
        let n = self.n;
        let mut inv = vec![C64::new(0.0, 0.0); n * n];
        let mut col = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            col.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            col[j] = C64::new(1.0, 0.0);
            self.solve_in_place(&mut col);
            for i in 0..n {
                inv[i * n + j] = col[i];
            }
        }
        inv
    }
}

#[derive(Debug, Clone)]
enum Factorization {
    Band(BandLu),
    Dense(DenseLu),
}

/// Factorized square sparse matrix.
#[derive(Debug, Clone)]
pub struct DirectSolver {
    n: usize,
    perm: Vec<usize>,
    fact: Factorization,
}

impl DirectSolver {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::ShapeMismatch(format!("direct solve needs a square matrix, got {}x{}", n, a.ncols())));
        }
        if n == 0 {
            return Ok(Self { n, perm: Vec::new(), fact: Factorization::Dense(DenseLu { n: 0, lu: Vec::new(), piv: Vec::new() }) });
        }
        let perm = reverse_cuthill_mckee(a);
        let (kl, ku) = bandwidths(a, &perm);
        // band work ~ n·kl·(kl+ku) against dense work ~ n³/3
        let band_cost = (n as f64) * (kl as f64) * ((2 * kl + ku) as f64 + 1.0);
        let dense_cost = (n as f64).powi(3) / 3.0;
        let fact = if band_cost < dense_cost {
            Factorization::Band(BandLu::factor(a, &perm, kl, ku)?)
        } else {
            let mut inv = vec![0usize; n];
            for (new, &old) in perm.iter().enumerate() {
                inv[old] = new;
            }
            let mut dense = vec![C64::new(0.0, 0.0); n * n];
            for r in 0..n {
                let (cols, vals) = a.row(r);
                for (&c, &v) in cols.iter().zip(vals) {
                    dense[inv[r] * n + inv[c]] += v;
                }
            }
            Factorization::Dense(DenseLu::factor(n, dense)?)
        };
        Ok(Self { n, perm, fact })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn is_banded(&self) -> bool {
        matches!(self.fact, Factorization::Band(_))
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        if b.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, actual: b.len() });
        }
        let mut y: Vec<C64> = self.perm.iter().map(|&old| b[old]).collect();
        match &self.fact {
            Factorization::Band(f) => f.solve_in_place(&mut y),
            Factorization::Dense(f) => f.solve_in_place(&mut y),
        }
        let mut x = vec![C64::new(0.0, 0.0); self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn laplacian_2d(n: usize, shift: C64) -> CsrMatrix {
        let idx = |i: usize, j: usize| i + n * j;
        let mut t = Vec::new();
        for j in 0..n {
            for i in 0..n {
                t.push((idx(i, j), idx(i, j), C64::new(4.0, 0.0) + shift));
                if i > 0 {
                    t.push((idx(i, j), idx(i - 1, j), C64::new(-1.0, 0.0)));
                }
                if i + 1 < n {
                    t.push((idx(i, j), idx(i + 1, j), C64::new(-1.0, 0.0)));
                }
                if j > 0 {
                    t.push((idx(i, j), idx(i, j - 1), C64::new(-1.0, 0.0)));
                }
                if j + 1 < n {
                    t.push((idx(i, j), idx(i, j + 1), C64::new(-1.0, 0.0)));
                }
            }
        }
        CsrMatrix::from_triplets(n * n, n * n, t).unwrap()
    }

    #[test]
    fn rcm_is_a_permutation_and_narrows_band() {
        let a = laplacian_2d(12, C64::new(0.0, 0.0));
        let perm = reverse_cuthill_mckee(&a);
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..144).collect::<Vec<_>>());
        let (kl, ku) = bandwidths(&a, &perm);
        assert!(kl <= 13 && ku <= 13, "bandwidth {kl} {ku}");
    }

    #[test]
    fn band_solve_residual_is_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = laplacian_2d(30, C64::new(-3.5, 0.4));
        let solver = DirectSolver::new(&a).unwrap();
        assert!(solver.is_banded());
        let b: Vec<C64> = (0..a.nrows()).map(|_| C64::new(rng.gen(), rng.gen())).collect();
        let x = solver.solve(&b).unwrap();
        let mut r = vec![C64::new(0.0, 0.0); b.len()];
        a.residual(&b, &x, &mut r).unwrap();
        let rel = crate::sparse::norm2(&r) / crate::sparse::norm2(&b);
        assert!(rel < 1e-12, "residual {rel}");
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // saddle point [[0, 1], [1, 0]]
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 1, C64::new(1.0, 0.0)), (1, 0, C64::new(1.0, 0.0))]).unwrap();
        let x = DirectSolver::new(&a).unwrap().solve(&[C64::new(2.0, 0.0), C64::new(3.0, 0.0)]).unwrap();
        assert_eq!(x, vec![C64::new(3.0, 0.0), C64::new(2.0, 0.0)]);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 0, C64::new(1.0, 0.0)), (1, 0, C64::new(1.0, 0.0))]).unwrap();
        assert!(matches!(DirectSolver::new(&a), Err(Error::SingularMatrix(_))));
    }

    #[test]
    fn dense_inverse() {
        let a = vec![C64::new(2.0, 1.0), C64::new(1.0, 0.0), C64::new(0.0, -1.0), C64::new(3.0, 0.0)];
        let inv = DenseLu::factor(2, a.clone()).unwrap().inverse();
        for i in 0..2 {
            for j in 0..2 {
                let s: C64 = (0..2).map(|k| a[i * 2 + k] * inv[k * 2 + j]).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((s - C64::new(e, 0.0)).norm() < 1e-14);
            }
        }
    }
}
