use super::{dense, random_field, rel_diff};
use nalgebra::DMatrix;
use shiftmg::discretization::{assemble_acoustic, assemble_elastic, assemble_mixed};
use shiftmg::{Grid, MediumModel, C64};

fn heterogeneous(g: &Grid, seed: u64, mu_zero: bool) -> MediumModel {
    let n = g.cell_count();
    let rho = random_field(n, 1.0, 3.0, seed);
    let mu = if mu_zero { vec![0.0; n] } else { random_field(n, 0.5, 2.0, seed + 1) };
    let lambda = random_field(n, 1.0, 10.0, seed + 2);
    MediumModel::new(g, rho, mu, lambda).unwrap()
}

/// `K_uu − K_up K_pp⁻¹ K_pu` and `K_pp − K_pu K_uu⁻¹ K_up`.
fn schur_pair(k: &DMatrix<C64>, nf: usize) -> (DMatrix<C64>, DMatrix<C64>) {
    let n = k.nrows();
    let kuu = k.view((0, 0), (nf, nf)).into_owned();
    let kup = k.view((0, nf), (nf, n - nf)).into_owned();
    let kpu = k.view((nf, 0), (n - nf, nf)).into_owned();
    let kpp = k.view((nf, nf), (n - nf, n - nf)).into_owned();
    let eliminate_p = &kuu - &kup * kpp.clone().try_inverse().unwrap() * &kpu;
    let eliminate_u = &kpp - &kpu * kuu.try_inverse().unwrap() * &kup;
    (eliminate_p, eliminate_u)
}

/// Relative gap between the pressure-eliminated mixed system and the elastic operator.
pub fn elastic_gap(dims: &[usize], h: f64, seed: u64) -> f64 {
    let g = Grid::uniform(dims, h).unwrap();
    let gamma = random_field(g.cell_count(), 0.0, 0.5, seed + 9);
    let m = heterogeneous(&g, seed, false).with_gamma(gamma).unwrap();
    let omega = 2.7;
    let mixed = dense(&assemble_mixed(&g, &m, omega).unwrap().matrix);
    let elastic = dense(&assemble_elastic(&g, &m, omega).unwrap().matrix);
    let (s, _) = schur_pair(&mixed, g.total_face_count());
    rel_diff(&s, &elastic)
}

/// Same for the displacement-eliminated system against the acoustic operator,
/// after the diagonal scaling `−ω² D_c(ρ)`.
pub fn acoustic_gap(dims: &[usize], h: f64, seed: u64) -> f64 {
    let g = Grid::uniform(dims, h).unwrap();
    let m = heterogeneous(&g, seed, true);
    let omega = 3.1;
    let mixed = dense(&assemble_mixed(&g, &m, omega).unwrap().matrix);
    let (_, s) = schur_pair(&mixed, g.total_face_count());
    let velocity: Vec<f64> = m.lambda.iter().zip(&m.rho).map(|(l, r)| (l / r).sqrt()).collect();
    let zero = vec![0.0; g.cell_count()];
    let acoustic = dense(&assemble_acoustic(&g, &velocity, &m.rho, &zero, omega).unwrap().matrix);
    let scale = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        g.cell_count(),
        m.rho.iter().map(|&r| C64::new(-omega * omega * r, 0.0)),
    ));
    rel_diff(&(scale * s), &acoustic)
}
