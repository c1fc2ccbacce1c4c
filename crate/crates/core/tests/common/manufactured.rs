//! Truncation error of the assembled operators against the continuous ones,
//! evaluated by nested high-order finite differences of smooth closed forms.

use std::f64::consts::PI;

use shiftmg::discretization::{assemble_acoustic, assemble_elastic};
use shiftmg::{Grid, MediumModel, C64};

const D: f64 = 1e-3;

/// Fourth-order central derivative of `f` along `axis`.
fn deriv(f: &dyn Fn([f64; 2]) -> f64, x: [f64; 2], axis: usize) -> f64 {
    let at = |s: f64| {
        let mut y = x;
        y[axis] += s * D;
        f(y)
    };
    (at(-2.0) - 8.0 * at(-1.0) + 8.0 * at(1.0) - at(2.0)) / (12.0 * D)
}

fn rho(x: [f64; 2]) -> f64 {
    1.5 + 0.3 * (x[0] + 2.0 * x[1]).sin()
}
fn mu(x: [f64; 2]) -> f64 {
    1.0 + 0.4 * x[0] * x[1]
}
fn lam(x: [f64; 2]) -> f64 {
    2.0 + (1.3 * x[0] - 0.7 * x[1]).cos()
}
fn u0(x: [f64; 2]) -> f64 {
    (PI * x[0]).sin() * (2.0 * PI * x[1]).cos()
}
fn u1(x: [f64; 2]) -> f64 {
    (1.5 * x[0] + 0.5).cos() * (PI * x[1]).sin()
}

const OMEGA: f64 = 2.0;

/// `−∇((λ+μ)∇·u) − ∇·(μ∇u) − ω²ρu`, component `i`.
fn elastic_exact(x: [f64; 2], i: usize) -> f64 {
    let comps: [fn([f64; 2]) -> f64; 2] = [u0, u1];
    let div = |y: [f64; 2]| deriv(&u0, y, 0) + deriv(&u1, y, 1);
    let flux = |y: [f64; 2]| (lam(y) + mu(y)) * div(y);
    let ui = comps[i];
    let mut shear = 0.0;
    for j in 0..2 {
        let mj = move |y: [f64; 2]| mu(y) * deriv(&ui, y, j);
        shear += deriv(&mj, x, j);
    }
    -deriv(&flux, x, i) - shear - OMEGA * OMEGA * rho(x) * ui(x)
}

fn velocity(x: [f64; 2]) -> f64 {
    1.0 + 0.5 * x[0] * x[0] + 0.2 * x[1]
}
fn pressure(x: [f64; 2]) -> f64 {
    (PI * x[0]).cos() * (1.5 * PI * x[1]).sin() + x[0] * x[1]
}

/// `ρ∇·(ρ⁻¹∇p) + ω²p/v²`.
fn acoustic_exact(x: [f64; 2]) -> f64 {
    let mut lap = 0.0;
    for j in 0..2 {
        let fj = move |y: [f64; 2]| deriv(&pressure, y, j) / rho(y);
        lap += deriv(&fj, x, j);
    }
    rho(x) * lap + OMEGA * OMEGA * pressure(x) / velocity(x).powi(2)
}

fn inside(x: &[f64]) -> bool {
    x[..2].iter().all(|&v| (0.25..=0.75).contains(&v))
}

fn sample(g: &Grid, f: fn([f64; 2]) -> f64) -> Vec<f64> {
    (0..g.cell_count())
        .map(|c| {
            let x = g.cell_coords(c);
            f([x[0], x[1]])
        })
        .collect()
}

pub fn elastic_error(n: usize) -> f64 {
    let g = Grid::uniform(&[n, n], 1.0 / n as f64).unwrap();
    let m = MediumModel::new(&g, sample(&g, rho), sample(&g, mu), sample(&g, lam)).unwrap();
    let h = assemble_elastic(&g, &m, OMEGA).unwrap().matrix;
    let u: Vec<C64> = (0..g.total_face_count())
        .map(|f| {
            let (a, x) = g.face_coords(f);
            C64::new(if a == 0 { u0([x[0], x[1]]) } else { u1([x[0], x[1]]) }, 0.0)
        })
        .collect();
    let hu = h.mul_vec(&u).unwrap();
    (0..g.total_face_count())
        .filter_map(|f| {
            let (a, x) = g.face_coords(f);
            inside(&x).then(|| (hu[f].re - elastic_exact([x[0], x[1]], a)).abs())
        })
        .fold(0.0, f64::max)
}

pub fn acoustic_error(n: usize) -> f64 {
    let g = Grid::uniform(&[n, n], 1.0 / n as f64).unwrap();
    let zero = vec![0.0; g.cell_count()];
    let a = assemble_acoustic(&g, &sample(&g, velocity), &sample(&g, rho), &zero, OMEGA).unwrap().matrix;
    let p: Vec<C64> = sample(&g, pressure).into_iter().map(|v| C64::new(v, 0.0)).collect();
    let ap = a.mul_vec(&p).unwrap();
    (0..g.cell_count())
        .filter_map(|c| {
            let x = g.cell_coords(c);
            inside(&x).then(|| (ap[c].re - acoustic_exact([x[0], x[1]])).abs())
        })
        .fold(0.0, f64::max)
}

pub fn rates(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Refinement levels used for the rate estimates.
pub const SIZES: [usize; 4] = [16, 32, 64, 128];
