//! Restarted flexible GMRES with right preconditioning.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multigrid::MultigridHierarchy;
use crate::sparse::{dot, norm2, CsrMatrix, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    pub restart: usize,
    pub tol: f64,
    /// Cap on preconditioner applications.
    pub max_applications: usize,
    pub alpha: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self { restart: 5, tol: 1e-6, max_applications: 250, alpha: 0.2 }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restart == 0 {
            return Err(Error::InvalidConfig("restart length must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_applications == 0 {
            return Err(Error::InvalidConfig("at least one preconditioner application is required".into()));
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::InvalidConfig(format!("shift must be non-negative, got {}", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Preconditioner applications.
    pub iterations: usize,
    /// Relative residual norms, starting with 1. Entries at restart boundaries
    /// are true residuals.
    pub history: Vec<f64>,
    pub converged: bool,
    pub setup_s: f64,
    pub solve_s: f64,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        self.history.last().copied().unwrap_or(f64::NAN)
    }
}

pub trait Preconditioner {
    fn apply(&self, r: &[C64]) -> Result<Vec<C64>>;
}

pub struct Identity;

impl Preconditioner for Identity {
    fn apply(&self, r: &[C64]) -> Result<Vec<C64>> {
        Ok(r.to_vec())
    }
}

impl Preconditioner for MultigridHierarchy {
    fn apply(&self, r: &[C64]) -> Result<Vec<C64>> {
        MultigridHierarchy::apply(self, r)
    }
}

impl<F: Fn(&[C64]) -> Result<Vec<C64>>> Preconditioner for F {
    fn apply(&self, r: &[C64]) -> Result<Vec<C64>> {
        self(r)
    }
}

fn check_finite(v: &[C64], what: &str) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(what.into()));
    }
    Ok(())
}

/// Solves `a x = b` from a zero initial guess.
pub fn fgmres<P: Preconditioner + ?Sized>(
    a: &CsrMatrix,
    b: &[C64],
    precond: &P,
    cfg: &SolveConfig,
) -> Result<(Vec<C64>, SolveReport)> {
    cfg.validate()?;
    let n = a.nrows();
    if b.len() != n || a.ncols() != n {
        return Err(Error::LengthMismatch { expected: n, actual: b.len() });
    }
    check_finite(b, "right-hand side")?;
    let start = Instant::now();
    let zero = C64::new(0.0, 0.0);
    let mut x = vec![zero; n];
    let mut report = SolveReport::default();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        report.history.push(0.0);
        report.converged = true;
        return Ok((x, report));
    }
    report.history.push(1.0);
    let m = cfg.restart;
    let mut r = b.to_vec();
    let mut beta = bnorm;

    while report.iterations < cfg.max_applications {
        let mut v: Vec<Vec<C64>> = vec![r.iter().map(|&ri| ri / beta).collect()];
        let mut z: Vec<Vec<C64>> = Vec::with_capacity(m);
        // Hessenberg columns, already rotated.
        let mut h: Vec<Vec<C64>> = Vec::with_capacity(m);
        let mut rot: Vec<(f64, C64)> = Vec::with_capacity(m);
        let mut g = vec![zero; m + 1];
        g[0] = C64::new(beta, 0.0);
        let mut k = 0;
        let mut w = vec![zero; n];
        for j in 0..m {
            if report.iterations >= cfg.max_applications {
                break;
            }
            let zj = precond.apply(&v[j])?;
            report.iterations += 1;
            check_finite(&zj, "preconditioner output")?;
            a.spmv(&zj, &mut w)?;
            z.push(zj);
            let mut col = vec![zero; j + 2];
            for (i, vi) in v.iter().enumerate() {
                let hij = dot(vi, &w);
                col[i] = hij;
                w.iter_mut().zip(vi).for_each(|(wk, vk)| *wk -= hij * vk);
            }
            let hnext = norm2(&w);
            if !hnext.is_finite() {
                return Err(Error::NonFinite("Arnoldi vector".into()));
            }
            col[j + 1] = C64::new(hnext, 0.0);
            let col_norm = norm2(&col);
            for (i, &(c, s)) in rot.iter().enumerate() {
                let t = c * col[i] + s * col[i + 1];
                col[i + 1] = -s.conj() * col[i] + c * col[i + 1];
                col[i] = t;
            }
            // Rotation zeroing col[j+1] against col[j].
            let (aa, bb) = (col[j], col[j + 1]);
            let den = (aa.norm_sqr() + bb.norm_sqr()).sqrt();
            let (c, s) = if den == 0.0 {
                (1.0, zero)
            } else if aa.norm() == 0.0 {
                (0.0, bb.conj() / bb.norm())
            } else {
                let c = aa.norm() / den;
                (c, (aa / aa.norm()) * bb.conj() / den)
            };
            col[j] = c * aa + s * bb;
            col[j + 1] = zero;
            g[j + 1] = -s.conj() * g[j];
            g[j] *= c;
            rot.push((c, s));
            h.push(col);
            k = j + 1;
            let rel = g[j + 1].norm() / bnorm;
            report.history.push(rel);
            if rel <= cfg.tol || hnext <= 1e-14 * col_norm {
                break;
            }
            v.push(w.iter().map(|&wk| wk / hnext).collect());
        }
        // Back substitution on the rotated triangle.
        let mut y = vec![zero; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for l in i + 1..k {
                s -= h[l][i] * y[l];
            }
            if h[i][i].norm() == 0.0 {
                return Err(Error::SingularMatrix(i));
            }
            y[i] = s / h[i][i];
        }
        for (yi, zi) in y.iter().zip(&z) {
            x.iter_mut().zip(zi).for_each(|(xk, zk)| *xk += yi * zk);
        }
        a.residual(b, &x, &mut r)?;
        beta = norm2(&r);
        if !beta.is_finite() {
            return Err(Error::NonFinite("residual".into()));
        }
        let rel = beta / bnorm;
        *report.history.last_mut().unwrap() = rel;
        if rel <= cfg.tol {
            report.converged = true;
            break;
        }
        if beta == 0.0 {
            report.converged = true;
            break;
        }
    }
    report.solve_s = start.elapsed().as_secs_f64();
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_converges_in_one_iteration() {
        let a = CsrMatrix::identity(10);
        let b: Vec<C64> = (0..10).map(|k| C64::new(k as f64, 1.0)).collect();
        let (x, rep) = fgmres(&a, &b, &Identity, &SolveConfig::default()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
        assert!(rep.final_residual() < 1e-15);
        assert!(x.iter().zip(&b).all(|(p, q)| (p - q).norm() < 1e-14 * q.norm()));
    }

    #[test]
    fn exact_preconditioner_takes_one_iteration() {
        let d: Vec<C64> = (1..30).map(|k| C64::new(k as f64, -0.5 * k as f64)).collect();
        let a = CsrMatrix::from_diagonal(&d);
        let inv = d.clone();
        let pc = move |r: &[C64]| -> Result<Vec<C64>> { Ok(r.iter().zip(&inv).map(|(x, y)| x / y).collect()) };
        let b = vec![C64::new(1.0, 2.0); d.len()];
        let (_, rep) = fgmres(&a, &b, &pc, &SolveConfig::default()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let a = CsrMatrix::identity(3);
        let (x, rep) = fgmres(&a, &[C64::new(0.0, 0.0); 3], &Identity, &SolveConfig::default()).unwrap();
        assert_eq!(rep.iterations, 0);
        assert!(rep.converged && x.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn cap_is_respected_and_nan_aborts() {
        let n = 40;
        let trips = (0..n).flat_map(|i| {
            let mut t = vec![(i, i, C64::new(2.0, 0.0))];
            if i + 1 < n {
                t.push((i, i + 1, C64::new(-1.0, 0.0)));
                t.push((i + 1, i, C64::new(-1.0, 0.0)));
            }
            t
        });
        let a = CsrMatrix::from_triplets(n, n, trips.collect::<Vec<_>>()).unwrap();
        let b = vec![C64::new(1.0, 0.0); n];
        let cfg = SolveConfig { max_applications: 7, ..Default::default() };
        let (_, rep) = fgmres(&a, &b, &Identity, &cfg).unwrap();
        assert_eq!(rep.iterations, 7);
        assert!(!rep.converged);

        let bad = |r: &[C64]| -> Result<Vec<C64>> { Ok(vec![C64::new(f64::NAN, 0.0); r.len()]) };
        assert!(matches!(fgmres(&a, &b, &bad, &cfg), Err(Error::NonFinite(_))));
    }

    #[test]
    fn config_validation() {
        assert!(SolveConfig { restart: 0, ..Default::default() }.validate().is_err());
        assert!(SolveConfig { tol: 0.0, ..Default::default() }.validate().is_err());
    }
}
