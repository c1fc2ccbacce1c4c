//! Discrete differential and averaging operators on staggered grids.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::sparse::{CsrMatrix, C64};

/// One block of rows of the block gradient: the derivative of displacement
/// component `component` along `axis`, sampled on a box with extents `ext`.
///
/// Normal derivatives (`component == axis`) sit at cell centers. Tangential
/// ones sit at nodes (2D) or edges (3D), which are nodal along both
/// `component` and `axis` and cell-centered along the remaining axis, so
/// the pair `(i, j)` and `(j, i)` share one location set.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeBlock {
    pub component: usize,
    pub axis: usize,
    pub ext: Vec<usize>,
    pub offset: usize,
}

impl DerivativeBlock {
    pub fn len(&self) -> usize {
        self.ext.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_normal(&self) -> bool {
        self.component == self.axis
    }

    /// Physical coordinates of the location with local index `k`.
    pub fn location(&self, g: &Grid, k: usize) -> [f64; 3] {
        let idx = Grid::multi_index(&self.ext, k);
        let mut x = [0.0; 3];
        for a in 0..g.dim() {
            let nodal = !self.is_normal() && (a == self.component || a == self.axis);
            x[a] = if nodal {
                idx[a] as f64 * g.spacing()[a]
            } else {
                g.cell_center(a, idx[a])
            };
        }
        x
    }
}

/// Row layout of [`block_gradient`], component-major then derivative axis.
pub fn derivative_blocks(g: &Grid) -> Vec<DerivativeBlock> {
    let mut out = Vec::with_capacity(g.dim() * g.dim());
    let mut offset = 0;
    for component in 0..g.dim() {
        for axis in 0..g.dim() {
            let mut ext = g.dims().to_vec();
            if component != axis {
                ext[component] += 1;
                ext[axis] += 1;
            }
            let block = DerivativeBlock { component, axis, ext, offset };
            offset += block.len();
            out.push(block);
        }
    }
    out
}

fn check_len(g: &Grid, len: usize) -> Result<()> {
    if len != g.cell_count() {
        return Err(Error::LengthMismatch { expected: g.cell_count(), actual: len });
    }
    Ok(())
}

/// Cell-to-face gradient: one row per interior face, `(p_high - p_low) / h`.
pub fn cell_gradient(g: &Grid) -> CsrMatrix {
    let mut trips = Vec::with_capacity(2 * g.total_face_count());
    for axis in 0..g.dim() {
        let fdims = g.face_dims(axis);
        let inv_h = 1.0 / g.spacing()[axis];
        let off = g.face_offset(axis);
        for k in 0..g.face_count(axis) {
            let idx = Grid::multi_index(&fdims, k);
            let mut hi = idx;
            hi[axis] += 1;
            trips.push((off + k, g.cell_index(&idx[..g.dim()]), C64::new(-inv_h, 0.0)));
            trips.push((off + k, g.cell_index(&hi[..g.dim()]), C64::new(inv_h, 0.0)));
        }
    }
    CsrMatrix::from_triplets(g.total_face_count(), g.cell_count(), trips)
        .expect("gradient triplets are in range")
}

/// Divergence from faces to cells, the negative transpose of [`cell_gradient`].
pub fn divergence(g: &Grid) -> CsrMatrix {
    let mut d = cell_gradient(g).transpose();
    d.scale(C64::new(-1.0, 0.0));
    d
}

/// Block-diagonal gradient of the displacement components, rows laid out by
/// [`derivative_blocks`]. Outside-domain values are taken as zero.
pub fn block_gradient(g: &Grid) -> CsrMatrix {
    let blocks = derivative_blocks(g);
    let nrows: usize = blocks.iter().map(|b| b.len()).sum();
    let dim = g.dim();
    let mut trips = Vec::new();
    for b in &blocks {
        let inv_h = 1.0 / g.spacing()[b.axis];
        for k in 0..b.len() {
            let row = b.offset + k;
            let idx = Grid::multi_index(&b.ext, k);
            if b.is_normal() {
                let d = b.component;
                if let Some(f) = g.face_index(d, idx[d] + 1, &idx[..dim]) {
                    trips.push((row, f, C64::new(inv_h, 0.0)));
                }
                if let Some(f) = g.face_index(d, idx[d], &idx[..dim]) {
                    trips.push((row, f, C64::new(-inv_h, 0.0)));
                }
            } else {
                let (d, j) = (b.component, b.axis);
                let plane = idx[d];
                let kj = idx[j];
                let mut at = idx;
                if kj < g.dims()[j] {
                    at[j] = kj;
                    if let Some(f) = g.face_index(d, plane, &at[..dim]) {
                        trips.push((row, f, C64::new(inv_h, 0.0)));
                    }
                }
                if kj >= 1 {
                    at[j] = kj - 1;
                    if let Some(f) = g.face_index(d, plane, &at[..dim]) {
                        trips.push((row, f, C64::new(-inv_h, 0.0)));
                    }
                }
            }
        }
    }
    CsrMatrix::from_triplets(nrows, g.total_face_count(), trips)
        .expect("block gradient triplets are in range")
}

/// Arithmetic mean of the two cells adjacent to every interior face.
pub fn face_average<T: Copy + Into<C64>>(g: &Grid, c: &[T]) -> Result<Vec<C64>> {
    check_len(g, c.len())?;
    let mut out = Vec::with_capacity(g.total_face_count());
    for axis in 0..g.dim() {
        let fdims = g.face_dims(axis);
        for k in 0..g.face_count(axis) {
            let idx = Grid::multi_index(&fdims, k);
            let mut hi = idx;
            hi[axis] += 1;
            let lo_v: C64 = c[g.cell_index(&idx[..g.dim()])].into();
            let hi_v: C64 = c[g.cell_index(&hi[..g.dim()])].into();
            out.push(0.5 * (lo_v + hi_v));
        }
    }
    Ok(out)
}

/// Diagonal face-averaging matrix `A_f(c)`.
pub fn average_cells_to_faces<T: Copy + Into<C64>>(g: &Grid, c: &[T]) -> Result<CsrMatrix> {
    Ok(CsrMatrix::from_diagonal(&face_average(g, c)?))
}

/// Weights at every row location of [`block_gradient`]: the cell value at
/// cell centers and the mean of the existing surrounding cells at nodes/edges.
pub fn edge_average<T: Copy + Into<C64>>(g: &Grid, c: &[T]) -> Result<Vec<C64>> {
    check_len(g, c.len())?;
    let dim = g.dim();
    let mut out = Vec::new();
    for b in derivative_blocks(g) {
        for k in 0..b.len() {
            let idx = Grid::multi_index(&b.ext, k);
            if b.is_normal() {
                out.push(c[g.cell_index(&idx[..dim])].into());
                continue;
            }
            let (d, j) = (b.component, b.axis);
            let mut sum = C64::new(0.0, 0.0);
            let mut count = 0usize;
            for sd in [idx[d].wrapping_sub(1), idx[d]] {
                if sd >= g.dims()[d] {
                    continue;
                }
                for sj in [idx[j].wrapping_sub(1), idx[j]] {
                    if sj >= g.dims()[j] {
                        continue;
                    }
                    let mut at = idx;
                    at[d] = sd;
                    at[j] = sj;
                    sum += c[g.cell_index(&at[..dim])].into();
                    count += 1;
                }
            }
            out.push(sum / count as f64);
        }
    }
    Ok(out)
}

/// Diagonal edge/node-averaging matrix `A_e(c)`.
pub fn average_cells_to_edges<T: Copy + Into<C64>>(g: &Grid, c: &[T]) -> Result<CsrMatrix> {
    Ok(CsrMatrix::from_diagonal(&edge_average(g, c)?))
}

/// Diagonal embedding `D_c(c)` of a cell field.
pub fn diag_cells<T: Copy + Into<C64>>(g: &Grid, c: &[T]) -> Result<CsrMatrix> {
    check_len(g, c.len())?;
    let d: Vec<C64> = c.iter().map(|&v| v.into()).collect();
    Ok(CsrMatrix::from_diagonal(&d))
}
