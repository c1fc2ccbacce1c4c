//! Experiment drivers behind the command-line harness: JSON configuration,
//! model setup, result rows, CSV and wavefield output.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::discretization::{point_source_acoustic, point_source_elastic, pressure_from_displacement};
use crate::error::{Error, Result};
use crate::grid::{Grid, StaggeredField};
use crate::krylov::{SolveConfig, SolveReport};
use crate::medium::{
    build_gamma, load_raw_model, make_constant_model, make_layered_model, make_linear_model, model_from_velocities,
    poisson_ratio, AttenuationConfig, LayeredModelSpec, LinearModelSpec, MediumModel, ValueKind,
};
use crate::multigrid::{CycleConfig, CycleType};
use crate::solve::{solve_acoustic, solve_elastic, solve_standard};
use crate::sparse::C64;

/// Fixed CSV header of every results file.
pub const CSV_HEADER: &str = "grid,omega,lambda,variant,iters,converged,setup_s,solve_s";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Solve,
    LambdaSweep,
    AcousticVsElastic,
    LevelsStudy,
    #[serde(rename = "3d-check")]
    Check3d,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Solve => "solve",
            ExperimentKind::LambdaSweep => "lambda-sweep",
            ExperimentKind::AcousticVsElastic => "acoustic-vs-elastic",
            ExperimentKind::LevelsStudy => "levels-study",
            ExperimentKind::Check3d => "3d-check",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Spacing {
    Uniform(f64),
    PerAxis(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dims: Vec<usize>,
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        match &self.spacing {
            Spacing::Uniform(h) => Grid::uniform(&self.dims, *h),
            Spacing::PerAxis(h) => Grid::new(&self.dims, h),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Constant {
        rho: f64,
        mu: f64,
        lambda: f64,
    },
    Linear(LinearModelSpec),
    Layered(LayeredModelSpec),
    /// Raw little-endian grids, axis 0 fastest.
    Files {
        vp: PathBuf,
        #[serde(default)]
        vs: Option<PathBuf>,
        #[serde(default)]
        rho: Option<PathBuf>,
        format: ValueKind,
        #[serde(default = "default_rho")]
        default_rho: f64,
    },
}

fn default_rho() -> f64 {
    1.0
}

impl ModelSpec {
    /// Builds the model; `lambda` overrides the constant model's λ.
    pub fn build(&self, g: &Grid, lambda: Option<f64>, base: &Path) -> Result<MediumModel> {
        match self {
            ModelSpec::Constant { rho, mu, lambda: l } => make_constant_model(g, *rho, *mu, lambda.unwrap_or(*l)),
            ModelSpec::Linear(s) => make_linear_model(g, s),
            ModelSpec::Layered(s) => make_layered_model(g, s),
            ModelSpec::Files { vp, vs, rho, format, default_rho } => {
                let load = |p: &PathBuf| load_raw_model(&base.join(p), g.dims(), *format);
                let vp = load(vp)?;
                let vs = vs.as_ref().map(load).transpose()?;
                let rho = rho.as_ref().map(load).transpose()?;
                model_from_velocities(g, &vp, vs.as_deref(), rho.as_deref(), *default_rho)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    #[default]
    Mixed,
    Standard,
    Acoustic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelVariant {
    pub levels: usize,
    pub alpha: f64,
}

/// Solver overrides. Unset fields keep the defaults of each formulation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOverrides {
    pub alpha: Option<f64>,
    pub levels: Option<usize>,
    pub cycle: Option<CycleType>,
    pub pre: Option<usize>,
    pub post: Option<usize>,
    pub damping: Option<Vec<f64>>,
    pub restart: Option<usize>,
    pub tol: Option<f64>,
    pub max_applications: Option<usize>,
    /// Jacobi weight for the displacement-only formulation.
    pub standard_weight: Option<f64>,
    /// Jacobi weight for the acoustic formulation.
    pub acoustic_weight: Option<f64>,
}

pub const STANDARD_JACOBI_WEIGHT: f64 = 0.5;
pub const ACOUSTIC_JACOBI_WEIGHT: f64 = 0.8;

impl SolverOverrides {
    pub fn solve_config(&self) -> SolveConfig {
        let d = SolveConfig::default();
        SolveConfig {
            restart: self.restart.unwrap_or(d.restart),
            tol: self.tol.unwrap_or(d.tol),
            max_applications: self.max_applications.unwrap_or(d.max_applications),
            alpha: self.alpha.unwrap_or(d.alpha),
        }
    }

    fn levels(&self) -> usize {
        self.levels.unwrap_or(3)
    }

    fn apply(&self, mut c: CycleConfig) -> CycleConfig {
        if let Some(t) = self.cycle {
            c.cycle = t;
        }
        if let Some(n) = self.pre {
            c.pre = n;
        }
        if let Some(n) = self.post {
            c.post = n;
        }
        c
    }

    pub fn cycle_config(&self, f: Formulation, levels: usize) -> CycleConfig {
        let c = match f {
            Formulation::Mixed => {
                let mut c = CycleConfig::mixed(levels);
                if let Some(d) = &self.damping {
                    c.damping = d.clone();
                }
                c
            }
            Formulation::Standard => {
                CycleConfig::jacobi(levels, self.standard_weight.unwrap_or(STANDARD_JACOBI_WEIGHT))
            }
            Formulation::Acoustic => {
                CycleConfig::jacobi(levels, self.acoustic_weight.unwrap_or(ACOUSTIC_JACOBI_WEIGHT))
            }
        };
        self.apply(c)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceSpec {
    /// Displacement component of the point force; defaults to the depth axis.
    pub component: Option<usize>,
    /// Physical position; defaults to the top center.
    pub position: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    /// CSV file name inside the output directory.
    pub csv: Option<String>,
    /// Stem of wavefield dumps (solve only).
    pub wavefield: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub description: Option<String>,
    pub experiment: ExperimentKind,
    pub grid: GridSpec,
    pub model: ModelSpec,
    /// Explicit angular frequencies.
    #[serde(default)]
    pub omega: Vec<f64>,
    /// Points per minimum shear wavelength; each entry yields one frequency.
    #[serde(default)]
    pub ppw: Vec<f64>,
    /// λ values for the sweep over a constant model.
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub formulation: Formulation,
    #[serde(default)]
    pub variants: Vec<LevelVariant>,
    /// Also run the grid refined by two with ω scaled to keep ppw (3d-check).
    #[serde(default)]
    pub refine: bool,
    #[serde(default)]
    pub attenuation: AttenuationConfig,
    #[serde(default)]
    pub solver: SolverOverrides,
    #[serde(default)]
    pub source: SourceSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.grid.build()?;
        if self.omega.is_empty() && self.ppw.is_empty() {
            return Err(Error::InvalidConfig("either omega or ppw must be given".into()));
        }
        if self.omega.iter().chain(&self.ppw).any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidConfig("omega and ppw entries must be positive".into()));
        }
        self.attenuation.validate(&g)?;
        let solve = self.solver.solve_config();
        solve.validate()?;
        self.solver.cycle_config(self.formulation, self.solver.levels()).validate()?;
        match self.experiment {
            ExperimentKind::LambdaSweep => {
                if !matches!(self.model, ModelSpec::Constant { .. }) {
                    return Err(Error::InvalidConfig("lambda-sweep needs a constant model".into()));
                }
                if self.lambdas.is_empty() {
                    return Err(Error::InvalidConfig("lambda-sweep needs a lambdas list".into()));
                }
            }
            ExperimentKind::LevelsStudy => {
                if self.variants.is_empty() {
                    return Err(Error::InvalidConfig("levels-study needs variants".into()));
                }
                for v in &self.variants {
                    g.check_levels(v.levels)?;
                }
            }
            ExperimentKind::Check3d if g.dim() != 3 => {
                return Err(Error::InvalidConfig("3d-check needs a 3D grid".into()));
            }
            _ => {}
        }
        if self.experiment != ExperimentKind::LevelsStudy {
            g.check_levels(self.solver.levels())?;
        }
        Ok(())
    }
}

/// One line of the results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub grid: String,
    pub omega: f64,
    pub lambda: Option<f64>,
    pub variant: String,
    pub iters: usize,
    pub converged: bool,
    pub setup_s: f64,
    pub solve_s: f64,
}

impl ResultRow {
    fn new(g: &Grid, omega: f64, lambda: Option<f64>, variant: String, r: &SolveReport) -> Self {
        Self {
            grid: dims_label(g.dims()),
            omega,
            lambda,
            variant,
            iters: r.iterations,
            converged: r.converged,
            setup_s: r.setup_s,
            solve_s: r.solve_s,
        }
    }
}

pub fn dims_label(dims: &[usize]) -> String {
    dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x")
}

/// Two decimals without trailing zeros: 0.40 prints as 0.4.
pub fn short_number(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// `ω = 2π V_s,min / (ppw · h_max)`.
pub fn omega_from_ppw(vs_min: f64, ppw: f64, h: f64) -> f64 {
    2.0 * PI * vs_min / (ppw * h)
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(CSV_HEADER.split(','))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::InvalidConfig(format!("unexpected CSV header {header:?}")));
    }
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Outcome of an experiment: rows plus an optional plain-text table.
#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub table: Option<String>,
}

fn source_for(g: &Grid, spec: &SourceSpec, acoustic: bool) -> Result<Vec<C64>> {
    let pos = spec.position.as_deref();
    if acoustic {
        point_source_acoustic(g, pos)
    } else {
        point_source_elastic(g, spec.component.unwrap_or(g.dim() - 1), pos)
    }
}

fn frequencies(cfg: &ExperimentConfig, g: &Grid, m: &MediumModel) -> Vec<(f64, Option<f64>)> {
    let h = g.spacing().iter().cloned().fold(0.0, f64::max);
    let mut out: Vec<(f64, Option<f64>)> = cfg.omega.iter().map(|&w| (w, None)).collect();
    out.extend(cfg.ppw.iter().map(|&p| (omega_from_ppw(m.min_shear_velocity(), p, h), Some(p))));
    out
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
}

impl Runner<'_> {
    fn attenuated(&self, g: &Grid, m: MediumModel, omega: f64) -> Result<(MediumModel, Vec<f64>)> {
        let gamma = build_gamma(g, &self.cfg.attenuation, omega)?;
        Ok((m.with_gamma(gamma.clone())?, gamma))
    }

    fn run_one(
        &self,
        g: &Grid,
        m: &MediumModel,
        omega: f64,
        f: Formulation,
        solve: &SolveConfig,
        levels: usize,
    ) -> Result<(SolveReport, Option<StaggeredField>, Option<Vec<C64>>)> {
        let cycle = self.cfg.solver.cycle_config(f, levels);
        let (m, gamma) = self.attenuated(g, m.clone(), omega)?;
        match f {
            Formulation::Mixed => {
                let q = source_for(g, &self.cfg.source, false)?;
                let (x, r) = solve_elastic(g, &m, omega, &q, solve, &cycle)?;
                Ok((r, Some(x), None))
            }
            Formulation::Standard => {
                let q = source_for(g, &self.cfg.source, false)?;
                let (u, r) = solve_standard(g, &m, omega, &q, solve, &cycle)?;
                let p = pressure_from_displacement(g, &m, &u)?;
                Ok((r, Some(StaggeredField { u, p }), None))
            }
            Formulation::Acoustic => {
                // The acoustic reference uses the shear velocity.
                let (_, vs) = m.velocities();
                let q = source_for(g, &self.cfg.source, true)?;
                let (p, r) = solve_acoustic(g, &vs, &m.rho, &gamma, omega, &q, solve, &cycle)?;
                Ok((r, None, Some(p)))
            }
        }
    }
}

fn label(f: Formulation) -> &'static str {
    match f {
        Formulation::Mixed => "mixed",
        Formulation::Standard => "standard",
        Formulation::Acoustic => "acoustic",
    }
}

/// Single solves, one row per frequency, with optional wavefield dumps.
pub fn run_solve(cfg: &ExperimentConfig, base: &Path, out_dir: Option<&Path>) -> Result<ExperimentOutput> {
    let runner = Runner { cfg };
    let g = cfg.grid.build()?;
    let m = cfg.model.build(&g, None, base)?;
    let solve = cfg.solver.solve_config();
    let mut rows = Vec::new();
    for (k, (omega, _)) in frequencies(cfg, &g, &m).into_iter().enumerate() {
        let (r, field, acoustic) = runner.run_one(&g, &m, omega, cfg.formulation, &solve, cfg.solver.levels())?;
        rows.push(ResultRow::new(&g, omega, None, label(cfg.formulation).to_string(), &r));
        if let (Some(dir), Some(stem)) = (out_dir, &cfg.output.wavefield) {
            let stem = format!("{stem}_{k}");
            if let Some(f) = field {
                dump_wavefield(&f, &g, omega, dir, &stem)?;
            } else if let Some(p) = acoustic {
                dump_acoustic(&p, &g, omega, dir, &stem)?;
            }
        }
    }
    Ok(ExperimentOutput { rows, table: None })
}

/// Standard and mixed formulations across λ on a constant model.
pub fn run_lambda_sweep(cfg: &ExperimentConfig, base: &Path) -> Result<ExperimentOutput> {
    let runner = Runner { cfg };
    let g = cfg.grid.build()?;
    let solve = cfg.solver.solve_config();
    let levels = cfg.solver.levels();
    let mut rows = Vec::new();
    let mut sigmas = Vec::new();
    for &lam in &cfg.lambdas {
        let m = cfg.model.build(&g, Some(lam), base)?;
        let mu = m.mu[0];
        sigmas.push(short_number(poisson_ratio(lam, mu)?));
    }
    let m0 = cfg.model.build(&g, Some(cfg.lambdas[0]), base)?;
    let mut table = String::new();
    table.push_str(&format!("{:>10}", "omega"));
    for s in &sigmas {
        table.push_str(&format!(" | {:>14}", format!("σ = {s}")));
    }
    table.push('\n');
    for (omega, _) in frequencies(cfg, &g, &m0) {
        table.push_str(&format!("{:>10.4}", omega));
        for (&lam, sigma) in cfg.lambdas.iter().zip(&sigmas) {
            let m = cfg.model.build(&g, Some(lam), base)?;
            let (rs, _, _) = runner.run_one(&g, &m, omega, Formulation::Standard, &solve, levels)?;
            let (rm, _, _) = runner.run_one(&g, &m, omega, Formulation::Mixed, &solve, levels)?;
            table.push_str(&format!(" | {:>14}", format!("{} ({})", count_label(&rs), count_label(&rm))));
            rows.push(ResultRow::new(&g, omega, Some(lam), format!("standard sigma={sigma}"), &rs));
            rows.push(ResultRow::new(&g, omega, Some(lam), format!("mixed sigma={sigma}"), &rm));
        }
        table.push('\n');
    }
    Ok(ExperimentOutput { rows, table: Some(table) })
}

fn count_label(r: &SolveReport) -> String {
    if r.converged {
        r.iterations.to_string()
    } else {
        format!(">{}", r.iterations)
    }
}

/// Acoustic (shear-velocity) and mixed elastic solves at matched frequencies.
pub fn run_acoustic_vs_elastic(cfg: &ExperimentConfig, base: &Path) -> Result<ExperimentOutput> {
    let runner = Runner { cfg };
    let g = cfg.grid.build()?;
    let m = cfg.model.build(&g, None, base)?;
    let solve = cfg.solver.solve_config();
    let levels = cfg.solver.levels();
    let mut rows = Vec::new();
    let mut table = format!("{:>10} | {:>8} | {:>8} | {:>8}\n", "omega", "ppw", "acoustic", "elastic");
    for (omega, ppw) in frequencies(cfg, &g, &m) {
        let tag = ppw.map_or(String::new(), |p| format!(" ppw={}", short_number(p)));
        let (ra, _, _) = runner.run_one(&g, &m, omega, Formulation::Acoustic, &solve, levels)?;
        let (re, _, _) = runner.run_one(&g, &m, omega, Formulation::Mixed, &solve, levels)?;
        table.push_str(&format!(
            "{:>10.4} | {:>8} | {:>8} | {:>8}\n",
            omega,
            ppw.map_or("-".into(), short_number),
            count_label(&ra),
            count_label(&re)
        ));
        rows.push(ResultRow::new(&g, omega, None, format!("acoustic{tag}"), &ra));
        rows.push(ResultRow::new(&g, omega, None, format!("elastic{tag}"), &re));
    }
    Ok(ExperimentOutput { rows, table: Some(table) })
}

/// Mixed solves for each (levels, shift) variant.
pub fn run_levels_study(cfg: &ExperimentConfig, base: &Path) -> Result<ExperimentOutput> {
    let runner = Runner { cfg };
    let g = cfg.grid.build()?;
    let m = cfg.model.build(&g, None, base)?;
    let mut rows = Vec::new();
    let mut table = format!("{:>10}", "omega");
    for v in &cfg.variants {
        table.push_str(&format!(" | {:>16}", format!("L={} α={}", v.levels, short_number(v.alpha))));
    }
    table.push('\n');
    for (omega, _) in frequencies(cfg, &g, &m) {
        table.push_str(&format!("{:>10.4}", omega));
        for v in &cfg.variants {
            let solve = SolveConfig { alpha: v.alpha, ..cfg.solver.solve_config() };
            let (r, _, _) = runner.run_one(&g, &m, omega, Formulation::Mixed, &solve, v.levels)?;
            table.push_str(&format!(" | {:>16}", count_label(&r)));
            rows.push(ResultRow::new(
                &g,
                omega,
                None,
                format!("levels={} alpha={}", v.levels, short_number(v.alpha)),
                &r,
            ));
        }
        table.push('\n');
    }
    Ok(ExperimentOutput { rows, table: Some(table) })
}

/// Small 3D mixed solve, optionally repeated on the refined grid at fixed ppw.
pub fn run_check_3d(cfg: &ExperimentConfig, base: &Path) -> Result<ExperimentOutput> {
    let runner = Runner { cfg };
    let g = cfg.grid.build()?;
    let solve = cfg.solver.solve_config();
    let levels = cfg.solver.levels();
    let mut grids = vec![(g.clone(), 1.0)];
    if cfg.refine {
        let dims: Vec<usize> = g.dims().iter().map(|d| 2 * d).collect();
        let spacing: Vec<f64> = g.spacing().iter().map(|h| h / 2.0).collect();
        grids.push((Grid::new(&dims, &spacing)?, 2.0));
    }
    let m0 = cfg.model.build(&g, None, base)?;
    let base_freqs = frequencies(cfg, &g, &m0);
    let mut rows = Vec::new();
    for (gk, scale) in grids {
        let m = cfg.model.build(&gk, None, base)?;
        for &(omega, ppw) in &base_freqs {
            // Fixed ppw: recompute from the refined spacing; fixed ω otherwise scales.
            let omega = match ppw {
                Some(p) => omega_from_ppw(m.min_shear_velocity(), p, gk.spacing().iter().cloned().fold(0.0, f64::max)),
                None => omega * scale,
            };
            let (r, _, _) = runner.run_one(&gk, &m, omega, Formulation::Mixed, &solve, levels)?;
            rows.push(ResultRow::new(
                &gk,
                omega,
                None,
                format!("3d levels={levels} alpha={}", short_number(solve.alpha)),
                &r,
            ));
        }
    }
    Ok(ExperimentOutput { rows, table: None })
}

/// Dispatches on the experiment kind. Relative model paths resolve against `base`.
pub fn run_experiment(cfg: &ExperimentConfig, base: &Path, out_dir: Option<&Path>) -> Result<ExperimentOutput> {
    match cfg.experiment {
        ExperimentKind::Solve => run_solve(cfg, base, out_dir),
        ExperimentKind::LambdaSweep => run_lambda_sweep(cfg, base),
        ExperimentKind::AcousticVsElastic => run_acoustic_vs_elastic(cfg, base),
        ExperimentKind::LevelsStudy => run_levels_study(cfg, base),
        ExperimentKind::Check3d => run_check_3d(cfg, base),
    }
}

/// Writes `<name>.csv` (and `<name>_table.txt` when present) into `dir`.
pub fn write_outputs(cfg: &ExperimentConfig, out: &ExperimentOutput, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let name = cfg.output.csv.clone().unwrap_or_else(|| format!("{}.csv", cfg.experiment.name()));
    let path = dir.join(&name);
    write_csv(&path, &out.rows)?;
    if let Some(t) = &out.table {
        let stem = name.strip_suffix(".csv").unwrap_or(&name);
        fs::write(dir.join(format!("{stem}_table.txt")), t)?;
    }
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentMeta {
    pub name: String,
    pub file: String,
    pub dims: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavefieldMeta {
    pub dims: Vec<usize>,
    pub spacing: Vec<f64>,
    pub omega: f64,
    pub components: Vec<ComponentMeta>,
}

const AXIS_NAMES: [&str; 3] = ["u0", "u1", "u2"];

fn write_complex(path: &Path, v: &[C64]) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    for z in v {
        f.write_all(&z.re.to_le_bytes())?;
        f.write_all(&z.im.to_le_bytes())?;
    }
    f.flush()?;
    Ok(())
}

/// Reads interleaved little-endian (re, im) float64 values.
pub fn read_complex(path: &Path) -> Result<Vec<C64>> {
    let bytes = fs::read(path)?;
    if bytes.len() % 16 != 0 {
        return Err(Error::ShapeMismatch(format!("{} is not a whole number of complex values", path.display())));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect())
}

fn write_meta(meta: &WavefieldMeta, dir: &Path, stem: &str) -> Result<()> {
    fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(meta)?)?;
    Ok(())
}

/// Writes each displacement component and the pressure as raw grids plus a
/// JSON sidecar `<stem>.json`.
pub fn dump_wavefield(field: &StaggeredField, g: &Grid, omega: f64, dir: &Path, stem: &str) -> Result<WavefieldMeta> {
    fs::create_dir_all(dir)?;
    let mut components = Vec::new();
    for a in 0..g.dim() {
        let file = format!("{stem}_{}.bin", AXIS_NAMES[a]);
        write_complex(&dir.join(&file), field.component(g, a))?;
        components.push(ComponentMeta { name: AXIS_NAMES[a].into(), file, dims: g.face_dims(a) });
    }
    let file = format!("{stem}_p.bin");
    write_complex(&dir.join(&file), &field.p)?;
    components.push(ComponentMeta { name: "p".into(), file, dims: g.dims().to_vec() });
    let meta = WavefieldMeta { dims: g.dims().to_vec(), spacing: g.spacing().to_vec(), omega, components };
    write_meta(&meta, dir, stem)?;
    Ok(meta)
}

/// Acoustic pressure dump in the same format.
pub fn dump_acoustic(p: &[C64], g: &Grid, omega: f64, dir: &Path, stem: &str) -> Result<WavefieldMeta> {
    fs::create_dir_all(dir)?;
    let file = format!("{stem}_p.bin");
    write_complex(&dir.join(&file), p)?;
    let meta = WavefieldMeta {
        dims: g.dims().to_vec(),
        spacing: g.spacing().to_vec(),
        omega,
        components: vec![ComponentMeta { name: "p".into(), file, dims: g.dims().to_vec() }],
    };
    write_meta(&meta, dir, stem)?;
    Ok(meta)
}
