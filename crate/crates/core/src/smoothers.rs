//! Relaxation schemes: red-black cell-wise (Vanka) relaxation for the mixed
//! system and damped point Jacobi.

use half::f16;
use num_complex::Complex32;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::direct::DenseLu;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::sparse::{CsrMatrix, C64};

/// Storage precision of the precomputed local inverses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockPrecision {
    Half,
    #[default]
    Single,
    Double,
}

impl BlockPrecision {
    /// Relative tolerance of `inverse · block ≈ I` expected at this precision.
    pub fn tolerance(self) -> f64 {
        match self {
            BlockPrecision::Half => 1e-2,
            BlockPrecision::Single => 1e-5,
            BlockPrecision::Double => 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
enum InverseStore {
    /// Per-block scale and normalized half-precision (re, im) pairs.
    Half { scale: Vec<f32>, vals: Vec<[f16; 2]> },
    Single(Vec<Complex32>),
    Double(Vec<C64>),
}

/// Local unknown sets with their precomputed inverted blocks.
///
/// Every block occupies a fixed stride; boundary blocks use a prefix of it.
#[derive(Debug, Clone)]
pub struct VankaBlocks {
    n: usize,
    stride: usize,
    /// Block ids ordered by color.
    order: Vec<usize>,
    color_start: [usize; 3],
    lens: Vec<usize>,
    indices: Vec<usize>,
    owner: Vec<usize>,
    inverses: InverseStore,
    precision: BlockPrecision,
}

/// Dense row-major block `A[idx, idx]`.
pub fn extract_block(a: &CsrMatrix, idx: &[usize]) -> Vec<C64> {
    let s = idx.len();
    let mut out = vec![C64::new(0.0, 0.0); s * s];
    for (i, &r) in idx.iter().enumerate() {
        for (j, &c) in idx.iter().enumerate() {
            out[i * s + j] = a.get(r, c);
        }
    }
    out
}

impl VankaBlocks {
    /// Sets up blocks from explicit unknown sets and colors (0 or 1).
    /// `owner` is reported in errors, normally the cell id.
    pub fn from_sets(
        a: &CsrMatrix,
        sets: &[Vec<usize>],
        colors: &[usize],
        precision: BlockPrecision,
    ) -> Result<Self> {
        if sets.len() != colors.len() {
            return Err(Error::LengthMismatch { expected: sets.len(), actual: colors.len() });
        }
        let n = a.nrows();
        let stride = sets.iter().map(|s| s.len()).max().unwrap_or(0);
        let nb = sets.len();
        let mut lens = Vec::with_capacity(nb);
        let mut indices = vec![0usize; nb * stride];
        for (k, set) in sets.iter().enumerate() {
            if set.iter().any(|&i| i >= n) {
                return Err(Error::ShapeMismatch(format!("block {k} indexes outside the matrix")));
            }
            lens.push(set.len());
            indices[k * stride..k * stride + set.len()].copy_from_slice(set);
        }
        let mut order: Vec<usize> = (0..nb).filter(|&k| colors[k] == 0).collect();
        let reds = order.len();
        order.extend((0..nb).filter(|&k| colors[k] == 1));
        if order.len() != nb {
            return Err(Error::InvalidConfig("block colors must be 0 or 1".into()));
        }

        let inverted: Vec<Result<Vec<C64>>> = (0..nb)
            .into_par_iter()
            .map(|k| {
                let idx = &indices[k * stride..k * stride + lens[k]];
                let block = extract_block(a, idx);
                let lu = DenseLu::factor(idx.len(), block).map_err(|_| Error::SingularBlock { cell: k })?;
                let inv = lu.inverse();
                if inv.iter().any(|v| !v.is_finite()) {
                    return Err(Error::SingularBlock { cell: k });
                }
                Ok(inv)
            })
            .collect();
        let ss = stride * stride;
        let inverses = match precision {
            BlockPrecision::Double => {
                let mut v = vec![C64::new(0.0, 0.0); nb * ss];
                for (k, inv) in inverted.into_iter().enumerate() {
                    let inv = inv?;
                    v[k * ss..k * ss + inv.len()].copy_from_slice(&inv);
                }
                InverseStore::Double(v)
            }
            BlockPrecision::Single => {
                let mut v = vec![Complex32::new(0.0, 0.0); nb * ss];
                for (k, inv) in inverted.into_iter().enumerate() {
                    for (slot, x) in v[k * ss..].iter_mut().zip(inv?) {
                        *slot = Complex32::new(x.re as f32, x.im as f32);
                    }
                }
                InverseStore::Single(v)
            }
            BlockPrecision::Half => {
                let mut scale = vec![0f32; nb];
                let mut vals = vec![[f16::ZERO; 2]; nb * ss];
                for (k, inv) in inverted.into_iter().enumerate() {
                    let inv = inv?;
                    let m = inv.iter().map(|x| x.re.abs().max(x.im.abs())).fold(0.0, f64::max);
                    let s = if m > 0.0 { m } else { 1.0 };
                    scale[k] = s as f32;
                    for (slot, x) in vals[k * ss..].iter_mut().zip(&inv) {
                        *slot = [f16::from_f64(x.re / s), f16::from_f64(x.im / s)];
                    }
                }
                InverseStore::Half { scale, vals }
            }
        };
        Ok(Self {
            n,
            stride,
            order,
            color_start: [0, reds, nb],
            lens,
            indices,
            owner: (0..nb).collect(),
            inverses,
            precision,
        })
    }

    pub fn len(&self) -> usize {
        self.lens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lens.is_empty()
    }

    pub fn precision(&self) -> BlockPrecision {
        self.precision
    }

    pub fn block_indices(&self, k: usize) -> &[usize] {
        &self.indices[k * self.stride..k * self.stride + self.lens[k]]
    }

    /// Block ids of one color (0 = red, 1 = black).
    pub fn color(&self, c: usize) -> &[usize] {
        &self.order[self.color_start[c]..self.color_start[c + 1]]
    }

    pub fn owner(&self, k: usize) -> usize {
        self.owner[k]
    }

    /// Stored inverse of block `k`, widened to double precision.
    pub fn inverse(&self, k: usize) -> Vec<C64> {
        let s = self.lens[k];
        let base = k * self.stride * self.stride;
        (0..s * s)
            .map(|i| match &self.inverses {
                InverseStore::Double(v) => v[base + i],
                InverseStore::Single(v) => C64::new(v[base + i].re as f64, v[base + i].im as f64),
                InverseStore::Half { scale, vals } => {
                    let [re, im] = vals[base + i];
                    C64::new(re.to_f64(), im.to_f64()) * scale[k] as f64
                }
            })
            .collect()
    }

    /// `out = inverse(k) · r`.
    #[inline]
    fn apply_inverse(&self, k: usize, r: &[C64], out: &mut [C64]) {
        let s = self.lens[k];
        let base = k * self.stride * self.stride;
        match &self.inverses {
            InverseStore::Double(v) => {
                for i in 0..s {
                    let row = &v[base + i * s..base + (i + 1) * s];
                    out[i] = row.iter().zip(r).map(|(a, b)| a * b).sum();
                }
            }
            InverseStore::Single(v) => {
                for i in 0..s {
                    let row = &v[base + i * s..base + (i + 1) * s];
                    out[i] = row
                        .iter()
                        .zip(r)
                        .map(|(a, b)| C64::new(a.re as f64, a.im as f64) * b)
                        .sum();
                }
            }
            InverseStore::Half { scale, vals } => {
                let sc = scale[k] as f64;
                for i in 0..s {
                    let row = &vals[base + i * s..base + (i + 1) * s];
                    let acc: C64 = row
                        .iter()
                        .zip(r)
                        .map(|([re, im], b)| C64::new(re.to_f64(), im.to_f64()) * b)
                        .sum();
                    out[i] = acc * sc;
                }
            }
        }
    }

    /// One red-then-black sweep. Within a color every block update is computed
    /// from the iterate at the start of that color, so the result does not
    /// depend on the processing order or thread count.
    pub fn sweep(&self, a: &CsrMatrix, x: &mut [C64], b: &[C64], damping: f64) -> Result<()> {
        if x.len() != self.n || b.len() != self.n || a.nrows() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, actual: x.len() });
        }
        let stride = self.stride;
        let mut delta = vec![C64::new(0.0, 0.0); self.len() * stride];
        for color in 0..2 {
            let ids = self.color(color);
            let frozen: &[C64] = x;
            let work = |(&k, out): (&usize, &mut [C64])| {
                let idx = self.block_indices(k);
                let mut r = [C64::new(0.0, 0.0); 16];
                let r = &mut r[..idx.len().min(16)];
                let mut heap;
                let r: &mut [C64] = if idx.len() <= 16 {
                    r
                } else {
                    heap = vec![C64::new(0.0, 0.0); idx.len()];
                    &mut heap
                };
                for (ri, &row) in r.iter_mut().zip(idx) {
                    *ri = b[row] - a.row_dot(row, frozen);
                }
                self.apply_inverse(k, r, out);
            };
            let chunks = &mut delta[..ids.len() * stride];
            if ids.len() >= 512 {
                ids.par_iter().zip(chunks.par_chunks_mut(stride)).for_each(work);
            } else {
                ids.iter().zip(chunks.chunks_mut(stride)).for_each(work);
            }
            for (&k, d) in ids.iter().zip(delta.chunks(stride)) {
                for (&i, &dv) in self.block_indices(k).iter().zip(d) {
                    x[i] += damping * dv;
                }
            }
        }
        Ok(())
    }
}

/// Cell blocks of the mixed layout on grid `g`: each cell's existing face
/// unknowns followed by its pressure, colored by index-sum parity.
pub fn vanka_setup(a: &CsrMatrix, g: &Grid, precision: BlockPrecision) -> Result<VankaBlocks> {
    if a.nrows() != g.mixed_count() || a.ncols() != g.mixed_count() {
        return Err(Error::ShapeMismatch(format!(
            "operator is {}x{}, mixed layout on {:?} needs {}",
            a.nrows(),
            a.ncols(),
            g.dims(),
            g.mixed_count()
        )));
    }
    let nf = g.total_face_count();
    let sets: Vec<Vec<usize>> = (0..g.cell_count())
        .map(|c| {
            let mut s = g.cell_faces(c);
            s.push(nf + c);
            s
        })
        .collect();
    let colors: Vec<usize> = (0..g.cell_count()).map(|c| g.cell_color(c)).collect();
    VankaBlocks::from_sets(a, &sets, &colors, precision)
}

/// Damped point Jacobi.
#[derive(Debug, Clone)]
pub struct Jacobi {
    inv_diag: Vec<C64>,
}

impl Jacobi {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let diag = a.diagonal();
        if let Some(r) = diag.iter().position(|d| d.norm() == 0.0) {
            return Err(Error::ZeroDiagonal(r));
        }
        Ok(Self { inv_diag: diag.iter().map(|d| 1.0 / d).collect() })
    }

    /// `x ← x + weight · D⁻¹ (b − A x)`.
    pub fn sweep(&self, a: &CsrMatrix, x: &mut [C64], b: &[C64], weight: f64) -> Result<()> {
        let mut r = vec![C64::new(0.0, 0.0); x.len()];
        a.residual(b, x, &mut r)?;
        for ((xi, ri), di) in x.iter_mut().zip(&r).zip(&self.inv_diag) {
            *xi += weight * di * ri;
        }
        Ok(())
    }
}

pub fn jacobi_sweep(a: &CsrMatrix, x: &mut [C64], b: &[C64], weight: f64) -> Result<()> {
    Jacobi::new(a)?.sweep(a, x, b, weight)
}

/// Relaxation scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    VankaRedblack,
    Jacobi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelaxConfig {
    pub damping: f64,
    pub sweeps: usize,
    pub scheme: Scheme,
}

impl RelaxConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidConfig(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::assemble_mixed;
    use crate::medium::make_constant_model;
    use crate::sparse::norm2;

    #[test]
    fn identity_blocks_invert_to_identity() {
        let g = Grid::uniform(&[3, 3], 1.0).unwrap();
        let a = CsrMatrix::identity(g.mixed_count());
        let v = vanka_setup(&a, &g, BlockPrecision::Double).unwrap();
        for k in 0..v.len() {
            let s = v.block_indices(k).len();
            let inv = v.inverse(k);
            for i in 0..s {
                for j in 0..s {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert_eq!(inv[i * s + j], C64::new(e, 0.0));
                }
            }
        }
    }

    #[test]
    fn block_sizes_on_small_grids() {
        let g = Grid::uniform(&[2, 2], 1.0).unwrap();
        let v = vanka_setup(&CsrMatrix::identity(g.mixed_count()), &g, BlockPrecision::Single).unwrap();
        assert!((0..4).all(|k| v.block_indices(k).len() == 3));
        let g = Grid::uniform(&[3, 3, 3], 1.0).unwrap();
        let v = vanka_setup(&CsrMatrix::identity(g.mixed_count()), &g, BlockPrecision::Single).unwrap();
        assert_eq!(v.block_indices(g.cell_index(&[1, 1, 1])).len(), 7);
    }

    #[test]
    fn singular_block_is_reported() {
        let g = Grid::uniform(&[2, 2], 1.0).unwrap();
        let a = CsrMatrix::zeros(g.mixed_count(), g.mixed_count());
        assert!(matches!(vanka_setup(&a, &g, BlockPrecision::Single), Err(Error::SingularBlock { .. })));
    }

    #[test]
    fn exact_solution_is_a_fixed_point() {
        let g = Grid::uniform(&[6, 4], 0.25).unwrap();
        let m = make_constant_model(&g, 1.0, 1.0, 2.0).unwrap();
        let a = assemble_mixed(&g, &m, 2.0).unwrap().shifted(0.5);
        let x: Vec<C64> = (0..a.nrows()).map(|k| C64::new((k as f64).sin(), 0.3)).collect();
        let b = a.mul_vec(&x).unwrap();
        let v = vanka_setup(&a, &g, BlockPrecision::Double).unwrap();
        let mut y = x.clone();
        v.sweep(&a, &mut y, &b, 0.5).unwrap();
        let diff: Vec<C64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        assert!(norm2(&diff) < 1e-12 * norm2(&x));
    }

    #[test]
    fn whole_system_block_solves_in_one_sweep() {
        let g = Grid::uniform(&[3, 2], 0.5).unwrap();
        let m = make_constant_model(&g, 1.0, 1.0, 2.0).unwrap();
        let a = assemble_mixed(&g, &m, 1.0).unwrap().shifted(0.5);
        let n = a.nrows();
        let v = VankaBlocks::from_sets(&a, &[(0..n).collect()], &[0], BlockPrecision::Double).unwrap();
        let b: Vec<C64> = (0..n).map(|k| C64::new(1.0, k as f64)).collect();
        let mut x = vec![C64::new(0.0, 0.0); n];
        v.sweep(&a, &mut x, &b, 1.0).unwrap();
        let mut r = vec![C64::new(0.0, 0.0); n];
        a.residual(&b, &x, &mut r).unwrap();
        assert!(norm2(&r) < 1e-12 * norm2(&b));
    }

    #[test]
    fn jacobi_examples() {
        let d: Vec<C64> = (1..5).map(|k| C64::new(k as f64, 1.0)).collect();
        let a = CsrMatrix::from_diagonal(&d);
        let b = vec![C64::new(1.0, 0.0); 4];
        let mut x = vec![C64::new(0.0, 0.0); 4];
        jacobi_sweep(&a, &mut x, &b, 1.0).unwrap();
        for k in 0..4 {
            assert!((x[k] * d[k] - b[k]).norm() < 1e-15);
        }
        let before = x.clone();
        jacobi_sweep(&a, &mut x, &b, 0.8).unwrap();
        assert!(x.iter().zip(&before).all(|(p, q)| (p - q).norm() < 1e-15));
        let z = CsrMatrix::zeros(2, 2);
        assert!(matches!(jacobi_sweep(&z, &mut [C64::new(0.0, 0.0); 2], &[C64::new(0.0, 0.0); 2], 1.0), Err(Error::ZeroDiagonal(0))));
    }

    #[test]
    fn relax_config_rejects_bad_damping() {
        let c = RelaxConfig { damping: 0.0, sweeps: 1, scheme: Scheme::Jacobi };
        assert!(c.validate().is_err());
        let c = RelaxConfig { damping: 0.5, sweeps: 1, scheme: Scheme::VankaRedblack };
        assert!(c.validate().is_ok());
    }
}
