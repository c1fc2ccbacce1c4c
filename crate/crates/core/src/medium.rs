//! Cell-centered medium parameters, attenuation layers and model generators.

use std::io::Read;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Density, Lame parameters and attenuation per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumModel {
    pub rho: Vec<f64>,
    pub mu: Vec<f64>,
    pub lambda: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl MediumModel {
    /// Builds a model with zero attenuation, validating every field.
    pub fn new(g: &Grid, rho: Vec<f64>, mu: Vec<f64>, lambda: Vec<f64>) -> Result<Self> {
        let gamma = vec![0.0; g.cell_count()];
        let m = Self { rho, mu, lambda, gamma };
        m.validate(g)?;
        Ok(m)
    }

    pub fn validate(&self, g: &Grid) -> Result<()> {
        let n = g.cell_count();
        for (name, f) in [
            ("rho", &self.rho),
            ("mu", &self.mu),
            ("lambda", &self.lambda),
            ("gamma", &self.gamma),
        ] {
            if f.len() != n {
                return Err(Error::InvalidModel(format!(
                    "{name} has {} values, grid has {n} cells",
                    f.len()
                )));
            }
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidModel(format!("{name} contains non-finite values")));
            }
        }
        if self.rho.iter().any(|&v| v <= 0.0) {
            return Err(Error::InvalidModel("rho must be positive".into()));
        }
        if self.mu.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidModel("mu must be non-negative".into()));
        }
        if self.lambda.iter().any(|&v| v <= 0.0) {
            return Err(Error::InvalidModel("lambda must be positive".into()));
        }
        if self.gamma.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidModel("gamma must be non-negative".into()));
        }
        Ok(())
    }

    pub fn with_gamma(mut self, gamma: Vec<f64>) -> Result<Self> {
        if gamma.len() != self.rho.len() {
            return Err(Error::LengthMismatch { expected: self.rho.len(), actual: gamma.len() });
        }
        self.gamma = gamma;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// `λ + μ` per cell.
    pub fn lambda_plus_mu(&self) -> Vec<f64> {
        self.lambda.iter().zip(&self.mu).map(|(l, m)| l + m).collect()
    }

    /// Pressure and shear velocities per cell.
    pub fn velocities(&self) -> (Vec<f64>, Vec<f64>) {
        let vp = (0..self.len())
            .map(|k| ((self.lambda[k] + 2.0 * self.mu[k]) / self.rho[k]).sqrt())
            .collect();
        let vs = (0..self.len()).map(|k| (self.mu[k] / self.rho[k]).sqrt()).collect();
        (vp, vs)
    }

    /// Poisson's ratio `λ / (2(λ + μ))` per cell.
    pub fn poisson_ratio(&self) -> Result<Vec<f64>> {
        self.lambda
            .iter()
            .zip(&self.mu)
            .map(|(&l, &m)| poisson_ratio(l, m))
            .collect()
    }

    pub fn min_shear_velocity(&self) -> f64 {
        self.velocities().1.into_iter().fold(f64::INFINITY, f64::min)
    }
}

pub fn poisson_ratio(lambda: f64, mu: f64) -> Result<f64> {
    let s = lambda + mu;
    if s == 0.0 {
        return Err(Error::InvalidModel("lambda + mu vanishes".into()));
    }
    Ok(lambda / (2.0 * s))
}

/// Which boundary sides carry the absorbing layer, as `[low, high]` per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActiveSides(pub [[bool; 2]; 3]);

impl Default for ActiveSides {
    fn default() -> Self {
        Self([[true; 2]; 3])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttenuationConfig {
    /// Layer width in cells.
    pub abl_cells: usize,
    /// Peak layer attenuation; `None` means the angular frequency.
    pub abl_amplitude: Option<f64>,
    /// Multiple of ω added to γ everywhere.
    pub bulk_factor: f64,
    pub sides: ActiveSides,
}

impl Default for AttenuationConfig {
    fn default() -> Self {
        Self { abl_cells: 20, abl_amplitude: None, bulk_factor: 0.005, sides: ActiveSides::default() }
    }
}

impl AttenuationConfig {
    /// No layer and no bulk attenuation.
    pub fn none() -> Self {
        Self { abl_cells: 0, abl_amplitude: None, bulk_factor: 0.0, sides: ActiveSides::default() }
    }

    pub fn validate(&self, g: &Grid) -> Result<()> {
        if !(self.bulk_factor >= 0.0) {
            return Err(Error::InvalidConfig("bulk_factor must be non-negative".into()));
        }
        if let Some(a) = self.abl_amplitude {
            if !(a >= 0.0) {
                return Err(Error::InvalidConfig("abl_amplitude must be non-negative".into()));
            }
        }
        let min_dim = *g.dims().iter().min().unwrap();
        if self.abl_cells > 0 && 2 * self.abl_cells >= min_dim {
            return Err(Error::InvalidConfig(format!(
                "absorbing layer of {} cells does not fit in dims {:?}",
                self.abl_cells,
                g.dims()
            )));
        }
        Ok(())
    }
}

/// Attenuation field: `bulk·ω + amplitude·q`, where `q` grows quadratically
/// from zero at the inner edge of the layer, evaluated at cell centers.
pub fn build_gamma(g: &Grid, cfg: &AttenuationConfig, omega: f64) -> Result<Vec<f64>> {
    cfg.validate(g)?;
    let amplitude = cfg.abl_amplitude.unwrap_or(omega);
    let width = cfg.abl_cells as f64;
    let mut out = Vec::with_capacity(g.cell_count());
    for c in 0..g.cell_count() {
        let idx = g.cell_multi_index(c);
        let mut q: f64 = 0.0;
        if cfg.abl_cells > 0 {
            for a in 0..g.dim() {
                let n = g.dims()[a];
                let from_low = idx[a] as f64 + 0.5;
                let from_high = (n - idx[a]) as f64 - 0.5;
                if cfg.sides.0[a][0] && from_low < width {
                    q = q.max(((width - from_low) / width).powi(2));
                }
                if cfg.sides.0[a][1] && from_high < width {
                    q = q.max(((width - from_high) / width).powi(2));
                }
            }
        }
        out.push(cfg.bulk_factor * omega + amplitude * q);
    }
    Ok(out)
}

pub fn make_constant_model(g: &Grid, rho: f64, mu: f64, lambda: f64) -> Result<MediumModel> {
    let n = g.cell_count();
    MediumModel::new(g, vec![rho; n], vec![mu; n], vec![lambda; n])
}

/// Back-computes Lame parameters from velocities and density.
pub fn lame_from_velocities(vp: f64, vs: f64, rho: f64) -> (f64, f64) {
    let mu = rho * vs * vs;
    (mu, rho * vp * vp - 2.0 * mu)
}

/// Parameters of a model whose velocities and density vary linearly with depth
/// (the last axis).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinearModelSpec {
    pub vs_top: f64,
    pub vs_bottom: f64,
    /// `V_p / V_s`.
    pub vp_vs_ratio: f64,
    pub rho_top: f64,
    pub rho_bottom: f64,
}

impl Default for LinearModelSpec {
    fn default() -> Self {
        Self { vs_top: 0.9, vs_bottom: 2.4, vp_vs_ratio: 2.0, rho_top: 1.8, rho_bottom: 2.6 }
    }
}

/// Model with `V_s` linear in depth between the given endpoints (sampled at
/// cell centers over the full depth) and `V_p = ratio · V_s`.
pub fn make_linear_model(g: &Grid, spec: &LinearModelSpec) -> Result<MediumModel> {
    if !(spec.vs_top > 0.0 && spec.vs_bottom > 0.0 && spec.rho_top > 0.0 && spec.rho_bottom > 0.0)
    {
        return Err(Error::InvalidModel("velocities and densities must be positive".into()));
    }
    if !(spec.vp_vs_ratio > std::f64::consts::SQRT_2) {
        return Err(Error::InvalidModel("vp/vs ratio must exceed sqrt(2) for positive lambda".into()));
    }
    let depth_axis = g.dim() - 1;
    let nz = g.dims()[depth_axis] as f64;
    let n = g.cell_count();
    let (mut rho, mut mu, mut lambda) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for c in 0..n {
        let t = (g.cell_multi_index(c)[depth_axis] as f64 + 0.5) / nz;
        let vs = spec.vs_top + t * (spec.vs_bottom - spec.vs_top);
        let r = spec.rho_top + t * (spec.rho_bottom - spec.rho_top);
        let (m, l) = lame_from_velocities(spec.vp_vs_ratio * vs, vs, r);
        rho[c] = r;
        mu[c] = m;
        lambda[c] = l;
    }
    MediumModel::new(g, rho, mu, lambda)
}

/// Parameters of a synthetic heterogeneous model: dipping layers with
/// velocity increasing with depth, a few lenses and a fault offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayeredModelSpec {
    pub layers: usize,
    pub vs_min: f64,
    pub vs_max: f64,
    /// Poisson's ratio range sampled per layer.
    pub poisson_min: f64,
    pub poisson_max: f64,
    pub lenses: usize,
    pub seed: u64,
}

impl Default for LayeredModelSpec {
    fn default() -> Self {
        Self {
            layers: 9,
            vs_min: 0.6,
            vs_max: 2.6,
            poisson_min: 0.25,
            poisson_max: 0.42,
            lenses: 4,
            seed: 7,
        }
    }
}

/// Deterministic heterogeneous model resembling a layered, faulted basin.
/// Density follows Gardner's relation `ρ = 1.74 V_p^0.25` (km/s, g/cm³).
pub fn make_layered_model(g: &Grid, spec: &LayeredModelSpec) -> Result<MediumModel> {
    if spec.layers == 0 || !(spec.vs_min > 0.0) || spec.vs_max < spec.vs_min {
        return Err(Error::InvalidModel("invalid layered model velocities".into()));
    }
    if !(0.0..0.5).contains(&spec.poisson_min) || !(spec.poisson_min..0.5).contains(&spec.poisson_max)
    {
        return Err(Error::InvalidModel("poisson ratio range must lie in [0, 0.5)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let depth_axis = g.dim() - 1;
    let extent: Vec<f64> = (0..g.dim()).map(|a| g.dims()[a] as f64 * g.spacing()[a]).collect();
    let depth = extent[depth_axis];
    let width = extent[0];

    let mut vs_layer = Vec::with_capacity(spec.layers);
    let mut sigma_layer = Vec::with_capacity(spec.layers);
    for k in 0..spec.layers {
        let t = k as f64 / (spec.layers.max(2) - 1) as f64;
        let base = spec.vs_min + t * (spec.vs_max - spec.vs_min);
        let jitter = if k == 0 { 0.0 } else { rng.gen_range(-0.08..0.08) * (spec.vs_max - spec.vs_min) };
        vs_layer.push((base + jitter).clamp(spec.vs_min, spec.vs_max));
        sigma_layer.push(rng.gen_range(spec.poisson_min..=spec.poisson_max));
    }
    let dips: Vec<f64> = (0..spec.layers).map(|_| rng.gen_range(-0.12..0.12)).collect();
    let fault_x = width * rng.gen_range(0.35..0.65);
    let fault_throw = depth * rng.gen_range(0.04..0.1);
    let lenses: Vec<([f64; 3], f64, f64)> = (0..spec.lenses)
        .map(|_| {
            let mut center = [0.0; 3];
            for (a, c) in center.iter_mut().enumerate().take(g.dim()) {
                *c = extent[a] * rng.gen_range(0.15..0.85);
            }
            center[depth_axis] = depth * rng.gen_range(0.3..0.8);
            let radius = depth * rng.gen_range(0.06..0.14);
            let factor = rng.gen_range(0.8..1.2);
            (center, radius, factor)
        })
        .collect();

    let n = g.cell_count();
    let (mut rho, mut mu, mut lambda) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for c in 0..n {
        let x = g.cell_coords(c);
        let mut z = x[depth_axis];
        if x[0] > fault_x {
            z -= fault_throw;
        }
        // layer boundaries are tilted planes, slightly undulating
        let mut layer = 0;
        for k in 1..spec.layers {
            let z0 = depth * k as f64 / spec.layers as f64;
            let wave = 0.02 * depth * (2.0 * std::f64::consts::PI * x[0] / width * (k as f64 + 1.0)).sin();
            if z > z0 + dips[k] * (x[0] - 0.5 * width) + wave {
                layer = k;
            }
        }
        let mut vs = vs_layer[layer];
        for (center, radius, factor) in &lenses {
            let r2: f64 = (0..g.dim()).map(|a| (x[a] - center[a]).powi(2)).sum();
            if r2 < radius * radius {
                vs *= factor;
            }
        }
        let vs = vs.clamp(spec.vs_min, spec.vs_max);
        let sigma = sigma_layer[layer];
        let ratio = ((2.0 - 2.0 * sigma) / (1.0 - 2.0 * sigma)).sqrt();
        let vp = ratio * vs;
        let r = 1.74 * vp.powf(0.25);
        let (m, l) = lame_from_velocities(vp, vs, r);
        rho[c] = r;
        mu[c] = m;
        lambda[c] = l;
    }
    MediumModel::new(g, rho, mu, lambda)
}

/// Sample type of a headerless raw grid file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    F32,
    F64,
}

impl ValueKind {
    pub fn bytes(self) -> usize {
        match self {
            ValueKind::F32 => 4,
            ValueKind::F64 => 8,
        }
    }
}

/// Reads a little-endian raw grid (axis 0 fastest) into a cell field.
pub fn load_raw_model(path: &Path, dims: &[usize], kind: ValueKind) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_raw(&bytes, dims, kind)
}

pub fn decode_raw(bytes: &[u8], dims: &[usize], kind: ValueKind) -> Result<Vec<f64>> {
    let count: usize = dims.iter().product();
    let expected = count * kind.bytes();
    if bytes.len() != expected {
        return Err(Error::InvalidModel(format!(
            "raw file has {} bytes, expected {expected} for dims {dims:?}",
            bytes.len()
        )));
    }
    let out = match kind {
        ValueKind::F32 => bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
            .collect(),
        ValueKind::F64 => bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect(),
    };
    Ok(out)
}

/// Writes a cell field as a little-endian raw grid.
pub fn save_raw_model(path: &Path, values: &[f64], kind: ValueKind) -> Result<()> {
    let mut bytes = Vec::with_capacity(values.len() * kind.bytes());
    for &v in values {
        match kind {
            ValueKind::F32 => bytes.extend_from_slice(&(v as f32).to_le_bytes()),
            ValueKind::F64 => bytes.extend_from_slice(&v.to_le_bytes()),
        }
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Builds a model from raw velocity grids. Without a shear file, `V_s = V_p / 2`;
/// without a density file, density is `default_rho`.
pub fn model_from_velocities(
    g: &Grid,
    vp: &[f64],
    vs: Option<&[f64]>,
    rho: Option<&[f64]>,
    default_rho: f64,
) -> Result<MediumModel> {
    let n = g.cell_count();
    if vp.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: vp.len() });
    }
    let (mut r, mut mu, mut lambda) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for c in 0..n {
        let p = vp[c];
        let s = vs.map_or(0.5 * p, |v| v[c]);
        let d = rho.map_or(default_rho, |v| v[c]);
        if !(p > 0.0) || s < 0.0 {
            return Err(Error::InvalidModel(format!("non-positive velocity at cell {c}")));
        }
        let (m, l) = lame_from_velocities(p, s, d);
        r[c] = d;
        mu[c] = m;
        lambda[c] = l;
    }
    MediumModel::new(g, r, mu, lambda)
}
