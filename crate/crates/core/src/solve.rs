//! End-to-end preconditioned solves: assemble, build the hierarchy on the
//! shifted operator, iterate on the unshifted one.

use std::time::Instant;

use crate::discretization::{assemble_acoustic, assemble_elastic, assemble_mixed};
use crate::error::Result;
use crate::grid::{Grid, StaggeredField};
use crate::krylov::{fgmres, SolveConfig, SolveReport};
use crate::medium::MediumModel;
use crate::multigrid::{build_hierarchy, CycleConfig, Layout};
use crate::sparse::{CsrMatrix, C64};

/// Builds the hierarchy for `shifted` and runs FGMRES on `a`.
#[allow(clippy::too_many_arguments)]
pub fn preconditioned_solve(
    a: &CsrMatrix,
    shifted: &CsrMatrix,
    g: &Grid,
    layout: Layout,
    b: &[C64],
    cfg: &SolveConfig,
    cycle: &CycleConfig,
    setup_start: Instant,
) -> Result<(Vec<C64>, SolveReport)> {
    let h = build_hierarchy(shifted, g, layout, cycle)?;
    let setup_s = setup_start.elapsed().as_secs_f64();
    let (x, mut report) = fgmres(a, b, &h, cfg)?;
    report.setup_s = setup_s;
    Ok((x, report))
}

/// Elastic solve in the mixed formulation. `q` is the face forcing.
pub fn solve_elastic(
    g: &Grid,
    m: &MediumModel,
    omega: f64,
    q: &[C64],
    cfg: &SolveConfig,
    cycle: &CycleConfig,
) -> Result<(StaggeredField, SolveReport)> {
    cfg.validate()?;
    let t0 = Instant::now();
    let sys = assemble_mixed(g, m, omega)?;
    let b = sys.rhs(q)?;
    let shifted = sys.shifted(cfg.alpha);
    let (x, report) = preconditioned_solve(&sys.matrix, &shifted, g, Layout::Mixed, &b, cfg, cycle, t0)?;
    Ok((StaggeredField::from_mixed(g, &x)?, report))
}

/// Elastic solve in the displacement-only formulation.
pub fn solve_standard(
    g: &Grid,
    m: &MediumModel,
    omega: f64,
    q: &[C64],
    cfg: &SolveConfig,
    cycle: &CycleConfig,
) -> Result<(Vec<C64>, SolveReport)> {
    cfg.validate()?;
    let t0 = Instant::now();
    let sys = assemble_elastic(g, m, omega)?;
    let shifted = sys.shifted(cfg.alpha);
    preconditioned_solve(&sys.matrix, &shifted, g, Layout::Displacement, q, cfg, cycle, t0)
}

/// Cell-centered acoustic solve.
#[allow(clippy::too_many_arguments)]
pub fn solve_acoustic(
    g: &Grid,
    velocity: &[f64],
    rho: &[f64],
    gamma: &[f64],
    omega: f64,
    q: &[C64],
    cfg: &SolveConfig,
    cycle: &CycleConfig,
) -> Result<(Vec<C64>, SolveReport)> {
    cfg.validate()?;
    let t0 = Instant::now();
    let sys = assemble_acoustic(g, velocity, rho, gamma, omega)?;
    let shifted = sys.shifted(cfg.alpha);
    preconditioned_solve(&sys.matrix, &shifted, g, Layout::Cell, q, cfg, cycle, t0)
}
