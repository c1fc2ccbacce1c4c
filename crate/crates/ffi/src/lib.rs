//! C ABI over the shiftmg solvers.
//!
//! Objects are opaque heap handles released with the matching `_free`
//! function. Every fallible call returns a [`ShmgStatus`]; the message of the
//! last failure on the calling thread is available from
//! [`shmg_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use shiftmg::discretization::{point_source_acoustic, point_source_elastic};
use shiftmg::krylov::SolveConfig;
use shiftmg::medium::{build_gamma, AttenuationConfig};
use shiftmg::multigrid::CycleConfig;
use shiftmg::solve::{solve_acoustic, solve_elastic};
use shiftmg::{Error, Grid, MediumModel, C64};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShmgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidGrid = 3,
    InvalidModel = 4,
    Singular = 5,
    NonFinite = 6,
    OutOfRange = 7,
    Internal = 8,
}

/// Grid handle.
pub struct ShmgGrid(Grid);

/// Medium handle.
pub struct ShmgModel(MediumModel);

/// Solution handle: field components and convergence data.
pub struct ShmgSolution {
    components: Vec<Vec<C64>>,
    iterations: usize,
    converged: bool,
    final_residual: f64,
}

/// Solver parameters; obtain defaults from [`shmg_solver_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ShmgSolverOptions {
    pub restart: usize,
    pub tol: f64,
    pub max_applications: usize,
    pub alpha: f64,
    pub levels: usize,
    /// Absorbing layer width in cells; 0 disables the layer.
    pub abl_cells: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> ShmgStatus {
    match e {
        Error::InvalidGrid(_) => ShmgStatus::InvalidGrid,
        Error::InvalidModel(_) => ShmgStatus::InvalidModel,
        Error::SingularBlock { .. } | Error::SingularMatrix(_) | Error::ZeroDiagonal(_) => ShmgStatus::Singular,
        Error::NonFinite(_) => ShmgStatus::NonFinite,
        Error::InvalidConfig(_) | Error::LengthMismatch { .. } | Error::ShapeMismatch(_) => {
            ShmgStatus::InvalidArgument
        }
        _ => ShmgStatus::Internal,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), (ShmgStatus, String)>>(f: F) -> ShmgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ShmgStatus::Ok,
        Ok(Err((s, m))) => {
            set_error(&m);
            s
        }
        Err(_) => {
            set_error("internal panic");
            ShmgStatus::Internal
        }
    }
}

fn lift<T>(r: shiftmg::Result<T>) -> Result<T, (ShmgStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null() -> (ShmgStatus, String) {
    (ShmgStatus::NullPointer, "null pointer argument".into())
}

unsafe fn input<'a, T>(p: *const T, n: usize) -> Result<&'a [T], (ShmgStatus, String)> {
    if p.is_null() {
        return Err(null());
    }
    Ok(slice::from_raw_parts(p, n))
}

/// Message of the last failed call on this thread. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn shmg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn shmg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn shmg_solver_options_default() -> ShmgSolverOptions {
    let d = SolveConfig::default();
    ShmgSolverOptions {
        restart: d.restart,
        tol: d.tol,
        max_applications: d.max_applications,
        alpha: d.alpha,
        levels: 3,
        abl_cells: AttenuationConfig::default().abl_cells,
    }
}

/// Creates a grid of `ndim` (2 or 3) axes with per-axis cell counts and spacings.
///
/// # Safety
/// `dims` and `spacing` must point to `ndim` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn shmg_grid_new(
    dims: *const usize,
    spacing: *const f64,
    ndim: usize,
    out: *mut *mut ShmgGrid,
) -> ShmgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let g = lift(Grid::new(input(dims, ndim)?, input(spacing, ndim)?))?;
        *out = Box::into_raw(Box::new(ShmgGrid(g)));
        Ok(())
    })
}

/// # Safety
/// `grid` must come from [`shmg_grid_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn shmg_grid_free(grid: *mut ShmgGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Number of cells, or 0 for a null handle.
///
/// # Safety
/// `grid` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn shmg_grid_cell_count(grid: *const ShmgGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.cell_count())
}

/// Creates a medium from per-cell density and Lamé parameters, `n` = cell count.
///
/// # Safety
/// Arrays must hold `n` values; `grid` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn shmg_model_new(
    grid: *const ShmgGrid,
    rho: *const f64,
    mu: *const f64,
    lambda: *const f64,
    n: usize,
    out: *mut *mut ShmgModel,
) -> ShmgStatus {
    guard(|| {
        let g = grid.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let m = lift(MediumModel::new(
            &g.0,
            input(rho, n)?.to_vec(),
            input(mu, n)?.to_vec(),
            input(lambda, n)?.to_vec(),
        ))?;
        *out = Box::into_raw(Box::new(ShmgModel(m)));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`shmg_model_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn shmg_model_free(model: *mut ShmgModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

fn solver_parts(o: &ShmgSolverOptions) -> (SolveConfig, AttenuationConfig) {
    let solve = SolveConfig { restart: o.restart, tol: o.tol, max_applications: o.max_applications, alpha: o.alpha };
    (solve, AttenuationConfig { abl_cells: o.abl_cells, ..Default::default() })
}

fn finish(out: *mut *mut ShmgSolution, components: Vec<Vec<C64>>, r: &shiftmg::krylov::SolveReport) {
    let s = ShmgSolution {
        components,
        iterations: r.iterations,
        converged: r.converged,
        final_residual: r.final_residual(),
    };
    // SAFETY: checked non-null by the callers.
    unsafe { *out = Box::into_raw(Box::new(s)) };
}

/// Elastic solve (mixed formulation) for a unit point force along `component`
/// at the top center. Solution components are the displacement per axis
/// followed by the pressure.
///
/// # Safety
/// Handles must be live; `options` may be null for defaults; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn shmg_solve_elastic(
    grid: *const ShmgGrid,
    model: *const ShmgModel,
    omega: f64,
    component: usize,
    options: *const ShmgSolverOptions,
    out: *mut *mut ShmgSolution,
) -> ShmgStatus {
    guard(|| {
        let g = &grid.as_ref().ok_or_else(null)?.0;
        let m = &model.as_ref().ok_or_else(null)?.0;
        if out.is_null() {
            return Err(null());
        }
        let opts = options.as_ref().copied().unwrap_or_else(|| shmg_solver_options_default());
        let (solve, att) = solver_parts(&opts);
        let gamma = lift(build_gamma(g, &att, omega))?;
        let m = lift(m.clone().with_gamma(gamma))?;
        let q = lift(point_source_elastic(g, component, None))?;
        let (x, r) = lift(solve_elastic(g, &m, omega, &q, &solve, &CycleConfig::mixed(opts.levels)))?;
        let mut comps: Vec<Vec<C64>> = (0..g.dim()).map(|a| x.component(g, a).to_vec()).collect();
        comps.push(x.p);
        finish(out, comps, &r);
        Ok(())
    })
}

/// Acoustic solve for a unit point source at the top center; one component.
///
/// # Safety
/// Arrays must hold one value per cell; `options` may be null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn shmg_solve_acoustic(
    grid: *const ShmgGrid,
    velocity: *const f64,
    rho: *const f64,
    omega: f64,
    options: *const ShmgSolverOptions,
    out: *mut *mut ShmgSolution,
) -> ShmgStatus {
    guard(|| {
        let g = &grid.as_ref().ok_or_else(null)?.0;
        if out.is_null() {
            return Err(null());
        }
        let n = g.cell_count();
        let (v, d) = (input(velocity, n)?, input(rho, n)?);
        let opts = options.as_ref().copied().unwrap_or_else(|| shmg_solver_options_default());
        let (solve, att) = solver_parts(&opts);
        let gamma = lift(build_gamma(g, &att, omega))?;
        let q = lift(point_source_acoustic(g, None))?;
        let cycle = CycleConfig::jacobi(opts.levels, 0.8);
        let (p, r) = lift(solve_acoustic(g, v, d, &gamma, omega, &q, &solve, &cycle))?;
        finish(out, vec![p], &r);
        Ok(())
    })
}

/// Preconditioner applications used, or 0 for a null handle.
///
/// # Safety
/// `sol` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn shmg_solution_iterations(sol: *const ShmgSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.iterations)
}

/// # Safety
/// `sol` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn shmg_solution_converged(sol: *const ShmgSolution) -> bool {
    sol.as_ref().is_some_and(|s| s.converged)
}

/// Final relative residual, NaN for a null handle.
///
/// # Safety
/// `sol` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn shmg_solution_residual(sol: *const ShmgSolution) -> f64 {
    sol.as_ref().map_or(f64::NAN, |s| s.final_residual)
}

/// # Safety
/// `sol` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn shmg_solution_component_count(sol: *const ShmgSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.components.len())
}

/// Number of complex values in a component, 0 if out of range.
///
/// # Safety
/// `sol` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn shmg_solution_len(sol: *const ShmgSolution, component: usize) -> usize {
    sol.as_ref().and_then(|s| s.components.get(component)).map_or(0, Vec::len)
}

/// Copies a component as interleaved (re, im) pairs into `buf`, which must
/// hold `2 * len` doubles with `len` equal to [`shmg_solution_len`].
///
/// # Safety
/// `sol` must be live; `buf` must be writable for `2 * len` doubles.
#[no_mangle]
pub unsafe extern "C" fn shmg_solution_copy(
    sol: *const ShmgSolution,
    component: usize,
    buf: *mut f64,
    len: usize,
) -> ShmgStatus {
    guard(|| {
        let s = sol.as_ref().ok_or_else(null)?;
        let c = s
            .components
            .get(component)
            .ok_or((ShmgStatus::OutOfRange, format!("no component {component}")))?;
        if len != c.len() {
            return Err((ShmgStatus::InvalidArgument, format!("buffer holds {len} values, component has {}", c.len())));
        }
        if buf.is_null() {
            return Err(null());
        }
        let dst = slice::from_raw_parts_mut(buf, 2 * len);
        for (pair, z) in dst.chunks_exact_mut(2).zip(c) {
            pair[0] = z.re;
            pair[1] = z.im;
        }
        Ok(())
    })
}

/// # Safety
/// `sol` must come from a solve call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn shmg_solution_free(sol: *mut ShmgSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}
