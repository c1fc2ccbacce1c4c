//! Shifted-Laplacian multigrid preconditioning for the elastic and acoustic
//! Helmholtz equations on staggered grids.

// `!(x > 0.0)` deliberately rejects NaN; index loops mirror the stencils.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod direct;
pub mod discretization;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod krylov;
pub mod medium;
pub mod multigrid;
pub mod operators;
pub mod smoothers;
pub mod solve;
pub mod sparse;

pub use error::{Error, Result};
pub use grid::{Grid, StaggeredField};
pub use medium::MediumModel;
pub use sparse::{CsrMatrix, C64};
