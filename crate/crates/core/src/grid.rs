//! Regular cell-based grids with staggered unknown placement.
//!
//! Cells are numbered lexicographically with axis 0 fastest. Displacement
//! component `d` lives on the interior faces normal to axis `d`; boundary
//! normal faces are eliminated (the displacement vanishes there). Face
//! blocks are stored axis by axis, and in the mixed layout the cell-centered
//! pressure follows all face unknowns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dims: Vec<usize>,
    spacing: Vec<f64>,
}

impl Grid {
    pub fn new(dims: &[usize], spacing: &[f64]) -> Result<Self> {
        if dims.len() != 2 && dims.len() != 3 {
            return Err(Error::InvalidGrid(format!("dimension must be 2 or 3, got {}", dims.len())));
        }
        if spacing.len() != dims.len() {
            return Err(Error::InvalidGrid("spacing and dims differ in length".into()));
        }
        if dims.iter().any(|&n| n < 2) {
            return Err(Error::InvalidGrid(format!("every axis needs at least 2 cells: {dims:?}")));
        }
        if spacing.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing must be positive: {spacing:?}")));
        }
        Ok(Self { dims: dims.to_vec(), spacing: spacing.to_vec() })
    }

    /// Grid with the same spacing on every axis.
    pub fn uniform(dims: &[usize], h: f64) -> Result<Self> {
        Self::new(dims, &vec![h; dims.len()])
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn cell_count(&self) -> usize {
        self.dims.iter().product()
    }

    /// Per-axis extents of the interior faces normal to `axis`.
    pub fn face_dims(&self, axis: usize) -> Vec<usize> {
        let mut d = self.dims.clone();
        d[axis] -= 1;
        d
    }

    pub fn face_count(&self, axis: usize) -> usize {
        self.face_dims(axis).iter().product()
    }

    /// First global index of the faces normal to `axis`.
    pub fn face_offset(&self, axis: usize) -> usize {
        (0..axis).map(|a| self.face_count(a)).sum()
    }

    pub fn total_face_count(&self) -> usize {
        (0..self.dim()).map(|a| self.face_count(a)).sum()
    }

    /// Unknown count of the mixed (displacement, pressure) layout.
    pub fn mixed_count(&self) -> usize {
        self.total_face_count() + self.cell_count()
    }

    /// Coarse grid with every axis halved and spacing doubled.
    pub fn coarsen(&self) -> Result<Grid> {
        if self.dims.iter().any(|&n| n % 2 != 0 || n < 4) {
            return Err(Error::InvalidGrid(format!("cannot coarsen dims {:?}", self.dims)));
        }
        let dims: Vec<usize> = self.dims.iter().map(|&n| n / 2).collect();
        let spacing: Vec<f64> = self.spacing.iter().map(|&h| 2.0 * h).collect();
        Grid::new(&dims, &spacing)
    }

    /// Checks that `levels - 1` halvings leave every axis with at least two cells.
    pub fn check_levels(&self, levels: usize) -> Result<()> {
        if levels == 0 {
            return Err(Error::InvalidConfig("at least one level is required".into()));
        }
        let factor = 1usize << (levels - 1);
        for &n in &self.dims {
            if n % factor != 0 || n / factor < 2 {
                return Err(Error::InvalidGrid(format!(
                    "dims {:?} are not divisible by {factor} for {levels} levels",
                    self.dims
                )));
            }
        }
        Ok(())
    }

    /// Lexicographic index of the point `idx` in a box with extents `ext`.
    #[inline]
    pub fn linear_index(ext: &[usize], idx: &[usize]) -> usize {
        let mut k = 0;
        for a in (0..ext.len()).rev() {
            k = k * ext[a] + idx[a];
        }
        k
    }

    /// Inverse of [`Grid::linear_index`].
    #[inline]
    pub fn multi_index(ext: &[usize], mut k: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for a in 0..ext.len() {
            idx[a] = k % ext[a];
            k /= ext[a];
        }
        idx
    }

    pub fn cell_index(&self, idx: &[usize]) -> usize {
        Self::linear_index(&self.dims, idx)
    }

    pub fn cell_multi_index(&self, c: usize) -> [usize; 3] {
        Self::multi_index(&self.dims, c)
    }

    /// Global index of the face normal to `axis` whose plane index is `plane`
    /// (the face between cells `plane - 1` and `plane`), with the remaining
    /// coordinates taken from `idx`. Returns `None` for boundary planes.
    pub fn face_index(&self, axis: usize, plane: usize, idx: &[usize]) -> Option<usize> {
        if plane == 0 || plane >= self.dims[axis] {
            return None;
        }
        let mut fi = [0usize; 3];
        fi[..self.dim()].copy_from_slice(&idx[..self.dim()]);
        fi[axis] = plane - 1;
        Some(self.face_offset(axis) + Self::linear_index(&self.face_dims(axis), &fi[..self.dim()]))
    }

    /// Cell-center coordinate along `axis` of cell index `i`.
    pub fn cell_center(&self, axis: usize, i: usize) -> f64 {
        (i as f64 + 0.5) * self.spacing[axis]
    }

    /// Physical coordinates of a cell center.
    pub fn cell_coords(&self, c: usize) -> [f64; 3] {
        let idx = self.cell_multi_index(c);
        let mut x = [0.0; 3];
        for a in 0..self.dim() {
            x[a] = self.cell_center(a, idx[a]);
        }
        x
    }

    /// Physical coordinates of the face with global index `f` and its axis.
    pub fn face_coords(&self, f: usize) -> (usize, [f64; 3]) {
        let axis = self.face_axis(f);
        let local = f - self.face_offset(axis);
        let idx = Self::multi_index(&self.face_dims(axis), local);
        let mut x = [0.0; 3];
        for a in 0..self.dim() {
            x[a] = if a == axis {
                (idx[a] + 1) as f64 * self.spacing[a]
            } else {
                self.cell_center(a, idx[a])
            };
        }
        (axis, x)
    }

    pub fn face_axis(&self, f: usize) -> usize {
        let mut off = 0;
        for a in 0..self.dim() {
            off += self.face_count(a);
            if f < off {
                return a;
            }
        }
        panic!("face index {f} out of range");
    }

    /// Red/black color of a cell by parity of its index sum (0 = red).
    pub fn cell_color(&self, c: usize) -> usize {
        let idx = self.cell_multi_index(c);
        idx[..self.dim()].iter().sum::<usize>() % 2
    }

    /// Existing face unknowns of cell `c` followed by nothing else: for each
    /// axis the low face then the high face, skipping eliminated boundary faces.
    pub fn cell_faces(&self, c: usize) -> Vec<usize> {
        let idx = self.cell_multi_index(c);
        let mut out = Vec::with_capacity(2 * self.dim());
        for axis in 0..self.dim() {
            if let Some(f) = self.face_index(axis, idx[axis], &idx) {
                out.push(f);
            }
            if let Some(f) = self.face_index(axis, idx[axis] + 1, &idx) {
                out.push(f);
            }
        }
        out
    }
}

/// Displacement on faces plus pressure on cells.
#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredField {
    pub u: Vec<C64>,
    pub p: Vec<C64>,
}

impl StaggeredField {
    pub fn zeros(g: &Grid) -> Self {
        Self {
            u: vec![C64::new(0.0, 0.0); g.total_face_count()],
            p: vec![C64::new(0.0, 0.0); g.cell_count()],
        }
    }

    /// Splits a mixed-layout vector into its displacement and pressure parts.
    pub fn from_mixed(g: &Grid, x: &[C64]) -> Result<Self> {
        if x.len() != g.mixed_count() {
            return Err(Error::LengthMismatch { expected: g.mixed_count(), actual: x.len() });
        }
        let nf = g.total_face_count();
        Ok(Self { u: x[..nf].to_vec(), p: x[nf..].to_vec() })
    }

    pub fn to_mixed(&self) -> Vec<C64> {
        let mut x = self.u.clone();
        x.extend_from_slice(&self.p);
        x
    }

    /// Values of displacement component `axis`.
    pub fn component<'a>(&'a self, g: &Grid, axis: usize) -> &'a [C64] {
        let off = g.face_offset(axis);
        &self.u[off..off + g.face_count(axis)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_2d() {
        let g = Grid::uniform(&[4, 3], 1.0).unwrap();
        assert_eq!(g.cell_count(), 12);
        assert_eq!(g.face_count(0), 9);
        assert_eq!(g.face_count(1), 8);
        assert_eq!(g.total_face_count(), 17);
        assert_eq!(g.mixed_count(), 29);
    }

    #[test]
    fn counts_3d() {
        let g = Grid::uniform(&[4, 3, 2], 0.5).unwrap();
        assert_eq!(g.face_count(0), 3 * 3 * 2);
        assert_eq!(g.face_count(1), 4 * 2 * 2);
        assert_eq!(g.face_count(2), 4 * 3);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::uniform(&[1, 4], 1.0).is_err());
        assert!(Grid::uniform(&[4], 1.0).is_err());
        assert!(Grid::new(&[4, 4], &[1.0, 0.0]).is_err());
        assert!(Grid::new(&[4, 4], &[1.0]).is_err());
    }

    #[test]
    fn index_round_trip() {
        let ext = [5, 3, 2];
        for k in 0..30 {
            let idx = Grid::multi_index(&ext, k);
            assert_eq!(Grid::linear_index(&ext, &idx), k);
        }
    }

    #[test]
    fn cell_faces_2x2() {
        let g = Grid::uniform(&[2, 2], 1.0).unwrap();
        for c in 0..4 {
            assert_eq!(g.cell_faces(c).len(), 2);
        }
        let g = Grid::uniform(&[3, 3], 1.0).unwrap();
        assert_eq!(g.cell_faces(g.cell_index(&[1, 1])).len(), 4);
    }

    #[test]
    fn face_axis_and_coords() {
        let g = Grid::uniform(&[3, 2], 1.0).unwrap();
        let f = g.face_index(1, 1, &[2, 0]).unwrap();
        let (axis, x) = g.face_coords(f);
        assert_eq!(axis, 1);
        assert_eq!(&x[..2], &[2.5, 1.0]);
    }

    #[test]
    fn level_divisibility() {
        let g = Grid::uniform(&[16, 8], 1.0).unwrap();
        assert!(g.check_levels(3).is_ok());
        assert!(g.check_levels(4).is_err());
        let g = Grid::uniform(&[6, 4], 1.0).unwrap();
        assert!(g.check_levels(3).is_err());
    }
}
