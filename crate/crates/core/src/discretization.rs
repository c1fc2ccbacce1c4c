//! Assembly of the elastic, mixed and acoustic Helmholtz operators.
//!
//! The displacement operator is
//!
//! ```text
//! H = ∇_h D_c(λ+μ) ∇_hᵀ + ∇⃗_hᵀ A_e(μ) ∇⃗_h − ω² M,   M = A_f(ρ ⊙ (1 − iγ/ω))
//! ```
//!
//! and the mixed operator replaces the grad-div term by a cell pressure
//! `p = D_c(λ+μ) ∇_hᵀ u`:
//!
//! ```text
//! [ ∇⃗_hᵀ A_e(μ) ∇⃗_h − ω² M    ∇_h            ]
//! [ ∇_hᵀ                      D_c(−1/(λ+μ))  ]
//! ```

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::medium::MediumModel;
use crate::operators::{block_gradient, cell_gradient, edge_average, face_average};
use crate::sparse::{CsrMatrix, C64};

/// Sign of the imaginary shift added to the displacement rows. The shift adds
/// damping in the same direction as the physical attenuation, which enters
/// `H` as `+iωA_f(ργ)`.
const ELASTIC_SHIFT_SIGN: f64 = 1.0;

fn check_omega(omega: f64) -> Result<()> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidConfig(format!("angular frequency must be positive, got {omega}")));
    }
    Ok(())
}

/// Diagonal of `M = A_f(ρ ⊙ (1 − iγ/ω))`.
pub fn mass_diagonal(g: &Grid, m: &MediumModel, omega: f64) -> Result<Vec<C64>> {
    check_omega(omega)?;
    let weighted: Vec<C64> = m
        .rho
        .iter()
        .zip(&m.gamma)
        .map(|(&r, &gam)| C64::new(r, -r * gam / omega))
        .collect();
    face_average(g, &weighted)
}

pub fn mass_matrix(g: &Grid, m: &MediumModel, omega: f64) -> Result<CsrMatrix> {
    Ok(CsrMatrix::from_diagonal(&mass_diagonal(g, m, omega)?))
}

/// `Bᵀ diag(w) B`.
fn weighted_gram(b: &CsrMatrix, w: &[C64]) -> Result<CsrMatrix> {
    let mut wb = b.clone();
    wb.scale_rows(w)?;
    b.transpose().matmul(&wb)
}

/// The vector Laplacian term `∇⃗_hᵀ A_e(μ) ∇⃗_h`.
pub fn shear_operator(g: &Grid, m: &MediumModel) -> Result<CsrMatrix> {
    weighted_gram(&block_gradient(g), &edge_average(g, &m.mu)?)
}

/// The grad-div term `∇_h D_c(λ+μ) ∇_hᵀ`.
pub fn grad_div_operator(g: &Grid, m: &MediumModel) -> Result<CsrMatrix> {
    let grad = cell_gradient(g);
    let lm: Vec<C64> = m.lambda_plus_mu().into_iter().map(|v| C64::new(v, 0.0)).collect();
    let mut dgt = grad.transpose();
    dgt.scale_rows(&lm)?;
    grad.matmul(&dgt)
}

fn add_to_diagonal(a: &CsrMatrix, diag: &[C64]) -> Result<CsrMatrix> {
    let mut d = diag.to_vec();
    d.resize(a.nrows(), C64::new(0.0, 0.0));
    a.add(&CsrMatrix::from_diagonal(&d))
}

/// Adds `coef · mass[r]` to the diagonal of the first `mass.len()` rows.
/// The diagonal entries must already be stored.
fn shift_rows(a: &CsrMatrix, mass: &[C64], coef: C64) -> CsrMatrix {
    let mut out = a.clone();
    let offsets = out.row_offsets().to_vec();
    let cols = out.col_indices().to_vec();
    let vals = out.values_mut();
    for (r, &mr) in mass.iter().enumerate() {
        let row = &cols[offsets[r]..offsets[r + 1]];
        let k = row.binary_search(&r).expect("diagonal entry present");
        vals[offsets[r] + k] += coef * mr;
    }
    out
}

/// Displacement-only elastic Helmholtz system.
#[derive(Debug, Clone)]
pub struct ElasticSystem {
    pub grid: Grid,
    pub omega: f64,
    pub matrix: CsrMatrix,
    /// Face-averaged density `A_f(ρ)`, the shift mass.
    pub shift_mass: Vec<C64>,
}

impl ElasticSystem {
    /// `H − iαω² A_f(ρ)` in the damping direction of the attenuation.
    pub fn shifted(&self, alpha: f64) -> CsrMatrix {
        let coef = C64::new(0.0, ELASTIC_SHIFT_SIGN * alpha * self.omega * self.omega);
        shift_rows(&self.matrix, &self.shift_mass, coef)
    }
}

pub fn assemble_elastic(g: &Grid, m: &MediumModel, omega: f64) -> Result<ElasticSystem> {
    m.validate(g)?;
    let mass = mass_diagonal(g, m, omega)?;
    let elliptic = grad_div_operator(g, m)?.add(&shear_operator(g, m)?)?;
    let scaled: Vec<C64> = mass.iter().map(|&v| -omega * omega * v).collect();
    let matrix = add_to_diagonal(&elliptic, &scaled)?;
    Ok(ElasticSystem {
        grid: g.clone(),
        omega,
        matrix,
        shift_mass: face_average(g, &m.rho)?,
    })
}

/// Elasticity operator without the mass term (`ω = 0`).
pub fn assemble_elasticity(g: &Grid, m: &MediumModel) -> Result<CsrMatrix> {
    m.validate(g)?;
    let elliptic = grad_div_operator(g, m)?.add(&shear_operator(g, m)?)?;
    add_to_diagonal(&elliptic, &vec![C64::new(0.0, 0.0); g.total_face_count()])
}

/// Mixed displacement-pressure system over `(u, p)`.
#[derive(Debug, Clone)]
pub struct MixedSystem {
    pub grid: Grid,
    pub omega: f64,
    pub matrix: CsrMatrix,
    /// Face-averaged density; the pressure rows carry no shift.
    pub shift_mass: Vec<C64>,
}

impl MixedSystem {
    /// Operator shifted by the zero-padded mass `[A_f(ρ) 0; 0 0]`.
    pub fn shifted(&self, alpha: f64) -> CsrMatrix {
        let coef = C64::new(0.0, ELASTIC_SHIFT_SIGN * alpha * self.omega * self.omega);
        shift_rows(&self.matrix, &self.shift_mass, coef)
    }

    /// Mixed right-hand side `[q; 0]`.
    pub fn rhs(&self, q: &[C64]) -> Result<Vec<C64>> {
        let nf = self.grid.total_face_count();
        if q.len() != nf {
            return Err(Error::LengthMismatch { expected: nf, actual: q.len() });
        }
        let mut b = q.to_vec();
        b.resize(self.grid.mixed_count(), C64::new(0.0, 0.0));
        Ok(b)
    }
}

pub fn assemble_mixed_with_omega(g: &Grid, m: &MediumModel, omega: f64) -> Result<MixedSystem> {
    m.validate(g)?;
    let lm = m.lambda_plus_mu();
    if let Some(c) = lm.iter().position(|&v| v == 0.0) {
        return Err(Error::InvalidModel(format!("lambda + mu vanishes at cell {c}")));
    }
    let nf = g.total_face_count();
    let nc = g.cell_count();
    let shear = shear_operator(g, m)?;
    let mass = if omega == 0.0 {
        vec![C64::new(0.0, 0.0); nf]
    } else {
        mass_diagonal(g, m, omega)?
    };
    let grad = cell_gradient(g);

    let mut trips = Vec::with_capacity(shear.nnz() + nf + 4 * grad.nnz() + nc);
    for r in 0..nf {
        let (cols, vals) = shear.row(r);
        trips.extend(cols.iter().zip(vals).map(|(&c, &v)| (r, c, v)));
        trips.push((r, r, -omega * omega * mass[r]));
        let (gc, gv) = grad.row(r);
        for (&c, &v) in gc.iter().zip(gv) {
            trips.push((r, nf + c, v));
            trips.push((nf + c, r, v));
        }
    }
    for (c, &v) in lm.iter().enumerate() {
        trips.push((nf + c, nf + c, C64::new(-1.0 / v, 0.0)));
    }
    let matrix = CsrMatrix::from_triplets(nf + nc, nf + nc, trips)?;
    Ok(MixedSystem {
        grid: g.clone(),
        omega,
        matrix,
        shift_mass: face_average(g, &m.rho)?,
    })
}

/// Mixed system at angular frequency `omega > 0`.
pub fn assemble_mixed(g: &Grid, m: &MediumModel, omega: f64) -> Result<MixedSystem> {
    check_omega(omega)?;
    assemble_mixed_with_omega(g, m, omega)
}

/// Cell-centered acoustic Helmholtz system
/// `−D_c(ρ) ∇_hᵀ A_f(ρ)⁻¹ ∇_h + ω² D_c(κ² ⊙ (1 − iγ/ω))`.
///
/// Face coefficients are reciprocals of the face-averaged density, so that
/// for `μ = 0` this is exactly `−ω² D_c(ρ)` times the Schur complement of the
/// mixed system with respect to the displacement.
#[derive(Debug, Clone)]
pub struct AcousticSystem {
    pub grid: Grid,
    pub omega: f64,
    pub matrix: CsrMatrix,
    /// `κ²` per cell, the shift mass.
    pub shift_mass: Vec<C64>,
}

impl AcousticSystem {
    /// `A − iαω² D_c(κ²)`.
    pub fn shifted(&self, alpha: f64) -> CsrMatrix {
        let coef = C64::new(0.0, -alpha * self.omega * self.omega);
        shift_rows(&self.matrix, &self.shift_mass, coef)
    }
}

/// Negative weighted Laplacian `−D_c(ρ) ∇_hᵀ A_f(ρ)⁻¹ ∇_h`.
pub fn acoustic_laplacian(g: &Grid, rho: &[f64]) -> Result<CsrMatrix> {
    let inv_face: Vec<C64> = face_average(g, rho)?.into_iter().map(|v| 1.0 / v).collect();
    let mut l = weighted_gram(&cell_gradient(g), &inv_face)?;
    let scale: Vec<C64> = rho.iter().map(|&r| C64::new(-r, 0.0)).collect();
    l.scale_rows(&scale)?;
    Ok(l)
}

pub fn assemble_acoustic(
    g: &Grid,
    velocity: &[f64],
    rho: &[f64],
    gamma: &[f64],
    omega: f64,
) -> Result<AcousticSystem> {
    check_omega(omega)?;
    let n = g.cell_count();
    for f in [velocity, rho, gamma] {
        if f.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: f.len() });
        }
    }
    if let Some(c) = velocity.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::InvalidModel(format!("non-positive velocity at cell {c}")));
    }
    if rho.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::InvalidModel("rho must be positive".into()));
    }
    let kappa2: Vec<C64> = velocity.iter().map(|&v| C64::new(1.0 / (v * v), 0.0)).collect();
    let mass: Vec<C64> = kappa2
        .iter()
        .zip(gamma)
        .map(|(&k2, &gam)| omega * omega * k2 * C64::new(1.0, -gam / omega))
        .collect();
    let matrix = add_to_diagonal(&acoustic_laplacian(g, rho)?, &mass)?;
    Ok(AcousticSystem { grid: g.clone(), omega, matrix, shift_mass: kappa2 })
}

/// Physical point at the middle of the top row (depth is the last axis).
pub fn top_center(g: &Grid) -> Vec<f64> {
    let depth = g.dim() - 1;
    (0..g.dim())
        .map(|a| if a == depth { 0.0 } else { 0.5 * g.dims()[a] as f64 * g.spacing()[a] })
        .collect()
}

fn check_point(g: &Grid, x: &[f64]) -> Result<()> {
    if x.len() != g.dim() {
        return Err(Error::InvalidConfig(format!("source position needs {} coordinates", g.dim())));
    }
    for a in 0..g.dim() {
        let len = g.dims()[a] as f64 * g.spacing()[a];
        if !(x[a] >= 0.0 && x[a] <= len) {
            return Err(Error::InvalidConfig(format!("source coordinate {} outside [0, {len}]", x[a])));
        }
    }
    Ok(())
}

/// Index of the face of displacement component `component` nearest to `x`.
pub fn nearest_face(g: &Grid, component: usize, x: &[f64]) -> Result<usize> {
    if component >= g.dim() {
        return Err(Error::InvalidConfig(format!("component {component} out of range")));
    }
    check_point(g, x)?;
    let mut idx = [0usize; 3];
    for a in 0..g.dim() {
        let n = g.dims()[a];
        let t = x[a] / g.spacing()[a];
        idx[a] = if a == component {
            (t.round() as usize).clamp(1, n - 1)
        } else {
            (t.floor() as usize).min(n - 1)
        };
    }
    let plane = idx[component];
    Ok(g.face_index(component, plane, &idx[..g.dim()]).expect("plane is interior"))
}

/// Unit point source of magnitude `1/∏h` on the displacement faces.
pub fn point_source_elastic(g: &Grid, component: usize, position: Option<&[f64]>) -> Result<Vec<C64>> {
    let tc = top_center(g);
    let f = nearest_face(g, component, position.unwrap_or(&tc))?;
    let mut q = vec![C64::new(0.0, 0.0); g.total_face_count()];
    q[f] = C64::new(1.0 / g.cell_volume(), 0.0);
    Ok(q)
}

/// Unit point source of magnitude `1/∏h` in the cell containing the position.
pub fn point_source_acoustic(g: &Grid, position: Option<&[f64]>) -> Result<Vec<C64>> {
    let tc = top_center(g);
    let x = position.unwrap_or(&tc);
    check_point(g, x)?;
    let idx: Vec<usize> = (0..g.dim())
        .map(|a| ((x[a] / g.spacing()[a]).floor() as usize).min(g.dims()[a] - 1))
        .collect();
    let mut q = vec![C64::new(0.0, 0.0); g.cell_count()];
    q[g.cell_index(&idx)] = C64::new(1.0 / g.cell_volume(), 0.0);
    Ok(q)
}

/// `p = D_c(λ+μ) ∇_hᵀ u`.
pub fn pressure_from_displacement(g: &Grid, m: &MediumModel, u: &[C64]) -> Result<Vec<C64>> {
    let div = cell_gradient(g).transpose().mul_vec(u)?;
    Ok(div.iter().zip(m.lambda_plus_mu()).map(|(&d, lm)| d * lm).collect())
}

/// `u = −ω⁻² M⁻¹ (q − ∇_h p)`, the displacement implied by the top block when
/// the shear term is absent (`μ = 0`).
pub fn displacement_from_pressure(
    g: &Grid,
    m: &MediumModel,
    omega: f64,
    q: &[C64],
    p: &[C64],
) -> Result<Vec<C64>> {
    let mass = mass_diagonal(g, m, omega)?;
    if q.len() != mass.len() {
        return Err(Error::LengthMismatch { expected: mass.len(), actual: q.len() });
    }
    let gp = cell_gradient(g).mul_vec(p)?;
    let mut u = Vec::with_capacity(q.len());
    for k in 0..q.len() {
        if mass[k].norm() == 0.0 {
            return Err(Error::SingularMatrix(k));
        }
        u.push(-(q[k] - gp[k]) / (omega * omega * mass[k]));
    }
    Ok(u)
}
