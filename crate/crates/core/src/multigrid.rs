//! Geometric multigrid on the staggered grid: transfer operators, Galerkin
//! hierarchy and V/W cycles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::direct::DirectSolver;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::smoothers::{vanka_setup, BlockPrecision, Jacobi, Scheme, VankaBlocks};
use crate::sparse::{norm2, CsrMatrix, C64};

/// Unknown layout of an operator on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// One unknown per cell.
    Cell,
    /// Interior faces normal to one axis.
    Face(usize),
    /// All interior faces, axis-major.
    Displacement,
    /// Faces followed by cells.
    Mixed,
}

impl Layout {
    pub fn size(self, g: &Grid) -> usize {
        match self {
            Layout::Cell => g.cell_count(),
            Layout::Face(a) => g.face_count(a),
            Layout::Displacement => g.total_face_count(),
            Layout::Mixed => g.mixed_count(),
        }
    }
}

/// 1D interpolation weights: rows are fine points, entries (coarse point, weight).
fn cell_weights_1d(nc: usize) -> Vec<Vec<(usize, f64)>> {
    let mut rows = Vec::with_capacity(2 * nc);
    for i in 0..nc {
        for side in [-1i64, 1] {
            let j = i as i64 + side;
            if j < 0 || j >= nc as i64 {
                rows.push(vec![(i, 1.0)]);
            } else {
                rows.push(vec![(i, 0.75), (j as usize, 0.25)]);
            }
        }
    }
    rows
}

/// Normal direction of faces: interior planes `1..n` (fine `1..2nc`), coarse
/// plane indices shifted by one to count from zero. Boundary planes are zero.
fn face_weights_1d(nc: usize) -> Vec<Vec<(usize, f64)>> {
    let mut rows = Vec::with_capacity(2 * nc - 1);
    for pf in 1..2 * nc {
        if pf % 2 == 0 {
            rows.push(vec![(pf / 2 - 1, 1.0)]);
        } else {
            let lo = pf / 2;
            let hi = lo + 1;
            let mut r = Vec::with_capacity(2);
            if lo >= 1 {
                r.push((lo - 1, 0.5));
            }
            if hi < nc {
                r.push((hi - 1, 0.5));
            }
            rows.push(r);
        }
    }
    rows
}

fn tensor_prolongation(factors: &[Vec<Vec<(usize, f64)>>], coarse_ext: &[usize]) -> Result<CsrMatrix> {
    let fine_ext: Vec<usize> = factors.iter().map(|f| f.len()).collect();
    let nf: usize = fine_ext.iter().product();
    let nc: usize = coarse_ext.iter().product();
    let d = factors.len();
    let mut trips = Vec::with_capacity(nf * (1 << d));
    for k in 0..nf {
        let idx = Grid::multi_index(&fine_ext, k);
        let mut terms: Vec<([usize; 3], f64)> = vec![([0; 3], 1.0)];
        for a in 0..d {
            let mut next = Vec::with_capacity(terms.len() * 2);
            for (ci, w) in &terms {
                for &(c, wa) in &factors[a][idx[a]] {
                    let mut cj = *ci;
                    cj[a] = c;
                    next.push((cj, w * wa));
                }
            }
            terms = next;
        }
        for (ci, w) in terms {
            trips.push((k, Grid::linear_index(coarse_ext, &ci[..d]), C64::new(w, 0.0)));
        }
    }
    CsrMatrix::from_triplets(nf, nc, trips)
}

fn check_pair(coarse: &Grid, fine: &Grid) -> Result<()> {
    if coarse.dim() != fine.dim() || coarse.dims().iter().zip(fine.dims()).any(|(&c, &f)| 2 * c != f) {
        return Err(Error::InvalidGrid(format!(
            "fine dims {:?} are not twice coarse dims {:?}",
            fine.dims(),
            coarse.dims()
        )));
    }
    Ok(())
}

fn block_diagonal(blocks: &[CsrMatrix]) -> Result<CsrMatrix> {
    let nrows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let ncols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut trips = Vec::with_capacity(blocks.iter().map(|b| b.nnz()).sum());
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        for r in 0..b.nrows() {
            let (cols, vals) = b.row(r);
            trips.extend(cols.iter().zip(vals).map(|(&c, &v)| (r0 + r, c0 + c, v)));
        }
        r0 += b.nrows();
        c0 += b.ncols();
    }
    CsrMatrix::from_triplets(nrows, ncols, trips)
}

/// Interpolation from `coarse` to `fine` for the given layout. Restriction is
/// the transpose.
pub fn prolongation(coarse: &Grid, fine: &Grid, layout: Layout) -> Result<CsrMatrix> {
    check_pair(coarse, fine)?;
    let cd = coarse.dims();
    match layout {
        Layout::Cell => {
            let f: Vec<_> = cd.iter().map(|&n| cell_weights_1d(n)).collect();
            tensor_prolongation(&f, cd)
        }
        Layout::Face(axis) => {
            if axis >= coarse.dim() {
                return Err(Error::InvalidConfig(format!("no axis {axis}")));
            }
            let f: Vec<_> = cd
                .iter()
                .enumerate()
                .map(|(a, &n)| if a == axis { face_weights_1d(n) } else { cell_weights_1d(n) })
                .collect();
            tensor_prolongation(&f, &coarse.face_dims(axis))
        }
        Layout::Displacement => {
            let blocks = (0..coarse.dim())
                .map(|a| prolongation(coarse, fine, Layout::Face(a)))
                .collect::<Result<Vec<_>>>()?;
            block_diagonal(&blocks)
        }
        Layout::Mixed => {
            let mut blocks = (0..coarse.dim())
                .map(|a| prolongation(coarse, fine, Layout::Face(a)))
                .collect::<Result<Vec<_>>>()?;
            blocks.push(prolongation(coarse, fine, Layout::Cell)?);
            block_diagonal(&blocks)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CycleType {
    V,
    #[default]
    W,
}

/// Damping per smoothed level for `levels` levels.
pub fn default_damping(levels: usize) -> Vec<f64> {
    match levels {
        4 => vec![0.5, 0.5, 0.2, 0.2],
        n => vec![0.5; n.max(1)],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleConfig {
    pub levels: usize,
    pub cycle: CycleType,
    pub pre: usize,
    pub post: usize,
    /// Relaxation weight per level, finest first. Missing entries repeat the last.
    pub damping: Vec<f64>,
    pub scheme: Scheme,
    #[serde(default)]
    pub precision: BlockPrecision,
}

impl CycleConfig {
    /// W(1,1) with red-black Vanka, for the mixed system.
    pub fn mixed(levels: usize) -> Self {
        Self {
            levels,
            cycle: CycleType::W,
            pre: 1,
            post: 1,
            damping: default_damping(levels),
            scheme: Scheme::VankaRedblack,
            precision: BlockPrecision::Single,
        }
    }

    /// W(2,2) with Jacobi, for displacement-only and acoustic systems.
    pub fn jacobi(levels: usize, weight: f64) -> Self {
        Self {
            levels,
            cycle: CycleType::W,
            pre: 2,
            post: 2,
            damping: vec![weight],
            scheme: Scheme::Jacobi,
            precision: BlockPrecision::Single,
        }
    }

    pub fn damping_at(&self, level: usize) -> f64 {
        self.damping.get(level).or(self.damping.last()).copied().unwrap_or(0.5)
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 || self.levels > 6 {
            return Err(Error::InvalidConfig(format!("levels must be in 1..=6, got {}", self.levels)));
        }
        if self.pre + self.post == 0 && self.levels > 1 {
            return Err(Error::InvalidConfig("at least one relaxation sweep is required".into()));
        }
        if self.damping.iter().any(|&w| !(w > 0.0 && w <= 1.0)) {
            return Err(Error::InvalidConfig(format!("damping must lie in (0, 1]: {:?}", self.damping)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum Relaxation {
    Vanka(VankaBlocks),
    Jacobi(Jacobi),
}

#[derive(Debug, Clone)]
pub struct Level {
    pub grid: Grid,
    pub operator: CsrMatrix,
    /// Interpolation from the next coarser level; absent on the coarsest.
    pub prolongation: Option<CsrMatrix>,
    restriction: Option<CsrMatrix>,
    relax: Option<Relaxation>,
    damping: f64,
}

impl Level {
    pub fn vanka(&self) -> Option<&VankaBlocks> {
        match &self.relax {
            Some(Relaxation::Vanka(v)) => Some(v),
            _ => None,
        }
    }

    fn smooth(&self, x: &mut [C64], b: &[C64], sweeps: usize) -> Result<()> {
        for _ in 0..sweeps {
            match &self.relax {
                Some(Relaxation::Vanka(v)) => v.sweep(&self.operator, x, b, self.damping)?,
                Some(Relaxation::Jacobi(j)) => j.sweep(&self.operator, x, b, self.damping)?,
                None => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MultigridHierarchy {
    levels: Vec<Level>,
    coarse: DirectSolver,
    config: CycleConfig,
    layout: Layout,
}

/// Builds the Galerkin hierarchy of `a` (laid out as `layout` on `g`).
pub fn build_hierarchy(a: &CsrMatrix, g: &Grid, layout: Layout, cfg: &CycleConfig) -> Result<MultigridHierarchy> {
    cfg.validate()?;
    g.check_levels(cfg.levels)?;
    if a.nrows() != layout.size(g) || a.ncols() != layout.size(g) {
        return Err(Error::ShapeMismatch(format!(
            "operator is {}x{}, layout needs {}",
            a.nrows(),
            a.ncols(),
            layout.size(g)
        )));
    }
    if cfg.scheme == Scheme::VankaRedblack && layout != Layout::Mixed {
        return Err(Error::InvalidConfig("Vanka relaxation needs the mixed layout".into()));
    }

    let mut grids = vec![g.clone()];
    for _ in 1..cfg.levels {
        let next = grids.last().unwrap().coarsen()?;
        grids.push(next);
    }
    let mut ops = vec![a.clone()];
    let mut prolongs = Vec::with_capacity(cfg.levels);
    for l in 1..cfg.levels {
        let p = prolongation(&grids[l], &grids[l - 1], layout)?;
        let coarse = CsrMatrix::triple_product(&p, &ops[l - 1])?;
        prolongs.push(p);
        ops.push(coarse);
    }
    let coarse = DirectSolver::new(ops.last().unwrap())?;

    let relax: Vec<Option<Relaxation>> = (0..cfg.levels)
        .into_par_iter()
        .map(|l| -> Result<Option<Relaxation>> {
            if l + 1 == cfg.levels {
                return Ok(None);
            }
            Ok(Some(match cfg.scheme {
                Scheme::VankaRedblack => Relaxation::Vanka(vanka_setup(&ops[l], &grids[l], cfg.precision)?),
                Scheme::Jacobi => Relaxation::Jacobi(Jacobi::new(&ops[l])?),
            }))
        })
        .collect::<Result<_>>()?;

    let mut prolongs = prolongs.into_iter().map(Some).collect::<Vec<_>>();
    prolongs.push(None);
    let levels = grids
        .into_iter()
        .zip(ops)
        .zip(prolongs)
        .zip(relax)
        .enumerate()
        .map(|(l, (((grid, operator), prolongation), relax))| Level {
            grid,
            operator,
            restriction: prolongation.as_ref().map(CsrMatrix::transpose),
            prolongation,
            relax,
            damping: cfg.damping_at(l),
        })
        .collect();
    Ok(MultigridHierarchy { levels, coarse, config: cfg.clone(), layout })
}

impl MultigridHierarchy {
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn config(&self) -> &CycleConfig {
        &self.config
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn size(&self) -> usize {
        self.levels[0].operator.nrows()
    }

    /// Applies one cycle to `x` in place.
    pub fn cycle(&self, b: &[C64], x: &mut [C64]) -> Result<()> {
        if b.len() != self.size() || x.len() != self.size() {
            return Err(Error::LengthMismatch { expected: self.size(), actual: b.len().min(x.len()) });
        }
        self.cycle_at(0, b, x)
    }

    /// One cycle from a zero initial guess.
    pub fn apply(&self, b: &[C64]) -> Result<Vec<C64>> {
        let mut x = vec![C64::new(0.0, 0.0); b.len()];
        self.cycle(b, &mut x)?;
        Ok(x)
    }

    fn cycle_at(&self, l: usize, b: &[C64], x: &mut [C64]) -> Result<()> {
        let level = &self.levels[l];
        let (Some(p), Some(rt)) = (&level.prolongation, &level.restriction) else {
            // Coarsest level: exact solve for the correction.
            let mut r = vec![C64::new(0.0, 0.0); b.len()];
            level.operator.residual(b, x, &mut r)?;
            let d = self.coarse.solve(&r)?;
            x.iter_mut().zip(d).for_each(|(xi, di)| *xi += di);
            return Ok(());
        };
        level.smooth(x, b, self.config.pre)?;
        let mut r = vec![C64::new(0.0, 0.0); b.len()];
        level.operator.residual(b, x, &mut r)?;
        let rc = rt.mul_vec(&r)?;
        let mut xc = vec![C64::new(0.0, 0.0); rc.len()];
        // A second visit to an exactly solved level changes nothing.
        let visits = match self.config.cycle {
            CycleType::W if l + 2 < self.levels.len() => 2,
            _ => 1,
        };
        for _ in 0..visits {
            self.cycle_at(l + 1, &rc, &mut xc)?;
        }
        let corr = p.mul_vec(&xc)?;
        x.iter_mut().zip(corr).for_each(|(xi, ci)| *xi += ci);
        level.smooth(x, b, self.config.post)
    }
}

/// Asymptotic error reduction per cycle: geometric mean of the per-cycle
/// reductions over the second half of `iterations` cycles on the
/// homogeneous problem, from a seeded random start.
pub fn convergence_factor(h: &MultigridHierarchy, iterations: usize, seed: u64) -> Result<f64> {
    let n = h.size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let zero = vec![C64::new(0.0, 0.0); n];
    let skip = iterations / 2;
    let mut log_sum = 0.0;
    for it in 0..iterations.max(1) {
        let before = norm2(&e);
        if before == 0.0 {
            return Ok(0.0);
        }
        e.iter_mut().for_each(|v| *v /= before);
        h.cycle(&zero, &mut e)?;
        if it >= skip {
            log_sum += norm2(&e).ln();
        }
    }
    Ok((log_sum / (iterations.max(1) - skip) as f64).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::assemble_mixed;
    use crate::medium::make_constant_model;

    #[test]
    fn cell_prolongation_1d_weights() {
        let rows = cell_weights_1d(3);
        assert_eq!(rows[2], vec![(1, 0.75), (0, 0.25)]);
        assert_eq!(rows[3], vec![(1, 0.75), (2, 0.25)]);
        assert_eq!(rows[0], vec![(0, 1.0)]);
    }

    #[test]
    fn rows_sum_to_one() {
        let c = Grid::uniform(&[4, 3], 0.5).unwrap();
        let f = Grid::uniform(&[8, 6], 0.25).unwrap();
        let p = prolongation(&c, &f, Layout::Cell).unwrap();
        let ones = vec![C64::new(1.0, 0.0); p.ncols()];
        assert!(p.mul_vec(&ones).unwrap().iter().all(|v| (v - 1.0).norm() < 1e-15));
    }

    #[test]
    fn face_prolongation_is_linear_in_the_normal_direction() {
        let c = Grid::uniform(&[4, 4], 0.5).unwrap();
        let f = Grid::uniform(&[8, 8], 0.25).unwrap();
        let p = prolongation(&c, &f, Layout::Face(0)).unwrap();
        let coarse: Vec<C64> = (0..c.face_count(0)).map(|k| C64::new(c.face_coords(k).1[0], 0.0)).collect();
        let fine = p.mul_vec(&coarse).unwrap();
        for k in 0..f.face_count(0) {
            let (_, x) = f.face_coords(k);
            // The last fine plane borders the eliminated boundary face.
            if x[0] < 1.7 {
                assert!((fine[k].re - x[0]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_mismatched_grids() {
        let c = Grid::uniform(&[4, 3], 0.5).unwrap();
        let f = Grid::uniform(&[8, 8], 0.25).unwrap();
        assert!(prolongation(&c, &f, Layout::Mixed).is_err());
    }

    #[test]
    fn zero_in_zero_out_and_single_level_is_direct() {
        let g = Grid::uniform(&[8, 4], 0.25).unwrap();
        let m = make_constant_model(&g, 1.0, 1.0, 2.0).unwrap();
        let a = assemble_mixed(&g, &m, 3.0).unwrap().shifted(0.5);
        let h = build_hierarchy(&a, &g, Layout::Mixed, &CycleConfig::mixed(2)).unwrap();
        let z = vec![C64::new(0.0, 0.0); a.nrows()];
        assert!(h.apply(&z).unwrap().iter().all(|v| v.norm() == 0.0));

        let h1 = build_hierarchy(&a, &g, Layout::Mixed, &CycleConfig::mixed(1)).unwrap();
        let b: Vec<C64> = (0..a.nrows()).map(|k| C64::new(1.0, k as f64 * 0.1)).collect();
        let x = h1.apply(&b).unwrap();
        let mut r = vec![C64::new(0.0, 0.0); b.len()];
        a.residual(&b, &x, &mut r).unwrap();
        assert!(norm2(&r) < 1e-12 * norm2(&b));
    }

    #[test]
    fn default_schedules() {
        assert_eq!(default_damping(3), vec![0.5, 0.5, 0.5]);
        assert_eq!(default_damping(4), vec![0.5, 0.5, 0.2, 0.2]);
        let mut c = CycleConfig::mixed(3);
        c.pre = 0;
        c.post = 0;
        assert!(c.validate().is_err());
    }
}
