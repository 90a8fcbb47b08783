//! Physical parameters, forcing data and run configuration, loaded from a flat
//! TOML file and validated in one place.

use crate::error::{Error, Result};
use crate::spectral::{lm_count, SpectralResolution};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub mu_i: f64,
    pub mu_o: f64,
    pub mu_e: f64,
    pub sigma_i: f64,
    pub sigma_o: f64,
    pub rho: f64,
    pub rho_i: Option<f64>,
    pub nu: f64,
    pub kappa: f64,
    pub g: f64,
    /// Rotation rate multiplying the Coriolis term.
    pub l_rot: f64,
    /// Inner-core moment of inertia.
    pub j: f64,
    pub r_i: f64,
    pub r_o: f64,
}

impl PhysicalParams {
    /// All coefficients one, R_i = 0.35, R_o = 1.
    pub fn unit() -> Self {
        Self {
            mu_i: 1.0,
            mu_o: 1.0,
            mu_e: 1.0,
            sigma_i: 1.0,
            sigma_o: 1.0,
            rho: 1.0,
            rho_i: None,
            nu: 1.0,
            kappa: 1.0,
            g: 1.0,
            l_rot: 1.0,
            j: 1.0,
            r_i: 0.35,
            r_o: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mu_i", self.mu_i),
            ("mu_o", self.mu_o),
            ("mu_e", self.mu_e),
            ("sigma_i", self.sigma_i),
            ("sigma_o", self.sigma_o),
            ("rho", self.rho),
            ("nu", self.nu),
            ("kappa", self.kappa),
            ("J", self.j),
            ("R_i", self.r_i),
            ("R_o", self.r_o),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Invalid(format!("{name} must be positive")));
            }
        }
        for (name, v) in [("g", self.g), ("L", self.l_rot)] {
            if !v.is_finite() {
                return Err(Error::Invalid(format!("{name} must be finite")));
            }
        }
        if self.r_i >= self.r_o {
            return Err(Error::Invalid("R_i >= R_o".into()));
        }
        if let Some(rho_i) = self.rho_i {
            if !(rho_i.is_finite() && rho_i > 0.0) {
                return Err(Error::Invalid("rho_i must be positive".into()));
            }
            let expected = 8.0 * PI / 15.0 * rho_i * self.r_i.powi(5);
            if ((self.j - expected) / expected).abs() > 1e-12 {
                return Err(Error::Invalid(format!(
                    "J inconsistent with rho_i and R_i: J = {}, (8π/15) rho_i R_i^5 = {expected}",
                    self.j
                )));
            }
        }
        Ok(())
    }

    pub fn mu(&self, region: crate::spectral::Region) -> f64 {
        match region {
            crate::spectral::Region::Inner => self.mu_i,
            crate::spectral::Region::Outer => self.mu_o,
            crate::spectral::Region::Exterior => self.mu_e,
        }
    }

    pub fn sigma(&self, region: crate::spectral::Region) -> f64 {
        match region {
            crate::spectral::Region::Inner => self.sigma_i,
            crate::spectral::Region::Outer => self.sigma_o,
            crate::spectral::Region::Exterior => 0.0,
        }
    }
}

/// Dirichlet data for the buoyancy on the outer boundary.
#[derive(Clone, Debug, PartialEq)]
pub enum ThetaB {
    Constant(f64),
    /// Coefficients on the unit-sphere harmonics, flat (l, m) order.
    Harmonics(Vec<f64>),
}

impl ThetaB {
    pub fn is_constant(&self) -> bool {
        match self {
            ThetaB::Constant(_) => true,
            ThetaB::Harmonics(c) => c.iter().skip(1).all(|v| *v == 0.0),
        }
    }

    /// Coefficient array of length `lm_count(l_max)`.
    pub fn coeffs(&self, l_max: usize) -> Vec<f64> {
        let mut out = vec![0.0; lm_count(l_max)];
        match self {
            ThetaB::Constant(c) => out[0] = c * (4.0 * PI).sqrt(),
            ThetaB::Harmonics(c) => out[..c.len()].copy_from_slice(c),
        }
        out
    }
}

/// Volumetric buoyancy source, given as coefficients on the orthonormal
/// buoyancy basis so that `⟨f, φ_j⟩ = f_j(t)`.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum VolumeSource {
    #[default]
    Zero,
    Steady(Vec<f64>),
    /// `f_j(t) = a_j cos(ω t)`.
    Oscillating { amplitude: Vec<f64>, frequency: f64 },
}

impl VolumeSource {
    pub fn eval(&self, t: f64, n: usize) -> Option<Vec<f64>> {
        let pad = |v: &[f64], s: f64| {
            let mut out = vec![0.0; n];
            for (o, x) in out.iter_mut().zip(v) {
                *o = x * s;
            }
            out
        };
        match self {
            VolumeSource::Zero => None,
            VolumeSource::Steady(v) => Some(pad(v, 1.0)),
            VolumeSource::Oscillating { amplitude, frequency } => Some(pad(amplitude, (frequency * t).cos())),
        }
    }

    /// sup over t of the Euclidean norm of the coefficients.
    pub fn sup_norm(&self) -> f64 {
        match self {
            VolumeSource::Zero => 0.0,
            VolumeSource::Steady(v) | VolumeSource::Oscillating { amplitude: v, .. } => {
                v.iter().map(|x| x * x).sum::<f64>().sqrt()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForcingData {
    pub theta_b: ThetaB,
    /// Heat-flux coefficients on ∂Ω_i (unit-sphere harmonics, flat order).
    pub f_b: Vec<f64>,
    pub f: VolumeSource,
}

impl ForcingData {
    pub fn none(l_max: usize) -> Self {
        Self {
            theta_b: ThetaB::Constant(0.0),
            f_b: vec![0.0; lm_count(l_max)],
            f: VolumeSource::Zero,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub resolution: SpectralResolution,
    pub t_end: f64,
    pub dt: f64,
    pub output_stride: usize,
    pub energy_tolerance: f64,
    pub seed: u64,
}

impl RunConfig {
    pub fn n_steps(&self) -> usize {
        ((self.t_end / self.dt) - 1e-9).ceil().max(0.0) as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub params: PhysicalParams,
    pub forcing: ForcingData,
    pub run: RunConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ThetaBFile {
    Scalar(f64),
    Array(Vec<f64>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    mu_i: f64,
    mu_o: f64,
    mu_e: f64,
    sigma_i: f64,
    sigma_o: f64,
    rho: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho_i: Option<f64>,
    nu: f64,
    kappa: f64,
    g: f64,
    #[serde(rename = "L")]
    l: f64,
    #[serde(rename = "J")]
    j: f64,
    #[serde(rename = "R_i")]
    r_i: f64,
    #[serde(rename = "R_o")]
    r_o: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta_b: Option<ThetaBFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    f_b_coeffs: Option<Vec<f64>>,
    t_end: f64,
    dt: f64,
    #[serde(default = "default_stride")]
    output_stride: usize,
    #[serde(default = "default_tolerance")]
    energy_tolerance: f64,
    l_max: usize,
    n_r_inner: usize,
    n_r_outer: usize,
    #[serde(default)]
    seed: u64,
}

fn default_stride() -> usize {
    1
}

fn default_tolerance() -> f64 {
    1e-8
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(file)
    }

    fn from_file(file: ConfigFile) -> Result<Self> {
        let params = PhysicalParams {
            mu_i: file.mu_i,
            mu_o: file.mu_o,
            mu_e: file.mu_e,
            sigma_i: file.sigma_i,
            sigma_o: file.sigma_o,
            rho: file.rho,
            rho_i: file.rho_i,
            nu: file.nu,
            kappa: file.kappa,
            g: file.g,
            l_rot: file.l,
            j: file.j,
            r_i: file.r_i,
            r_o: file.r_o,
        };
        params.validate()?;
        let resolution = SpectralResolution::new(file.l_max, file.n_r_inner, file.n_r_outer);
        resolution.validate()?;
        let nlm = lm_count(file.l_max);
        let theta_b = match file.theta_b {
            None => ThetaB::Constant(0.0),
            Some(ThetaBFile::Scalar(v)) => ThetaB::Constant(v),
            Some(ThetaBFile::Array(v)) => {
                if v.len() != nlm {
                    return Err(Error::Invalid(format!(
                        "theta_b has {} coefficients, expected {nlm} for l_max={}",
                        v.len(),
                        file.l_max
                    )));
                }
                ThetaB::Harmonics(v)
            }
        };
        let f_b = match file.f_b_coeffs {
            None => vec![0.0; nlm],
            Some(v) if v.is_empty() => vec![0.0; nlm],
            Some(v) => {
                if v.len() != nlm {
                    return Err(Error::Invalid(format!(
                        "f_b_coeffs has {} coefficients, expected {nlm} for l_max={}",
                        v.len(),
                        file.l_max
                    )));
                }
                v
            }
        };
        if let ThetaB::Harmonics(v) = &theta_b {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Invalid("theta_b must be finite".into()));
            }
        }
        if f_b.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("f_b_coeffs must be finite".into()));
        }
        let run = RunConfig {
            resolution,
            t_end: file.t_end,
            dt: file.dt,
            output_stride: file.output_stride,
            energy_tolerance: file.energy_tolerance,
            seed: file.seed,
        };
        for (name, v) in [("dt", run.dt), ("t_end", run.t_end), ("energy_tolerance", run.energy_tolerance)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Invalid(format!("{name} must be positive")));
            }
        }
        if run.output_stride == 0 {
            return Err(Error::Invalid("output_stride must be positive".into()));
        }
        Ok(Config {
            params,
            forcing: ForcingData {
                theta_b,
                f_b,
                f: VolumeSource::Zero,
            },
            run,
        })
    }

    pub fn to_toml_string(&self) -> String {
        let p = &self.params;
        let file = ConfigFile {
            mu_i: p.mu_i,
            mu_o: p.mu_o,
            mu_e: p.mu_e,
            sigma_i: p.sigma_i,
            sigma_o: p.sigma_o,
            rho: p.rho,
            rho_i: p.rho_i,
            nu: p.nu,
            kappa: p.kappa,
            g: p.g,
            l: p.l_rot,
            j: p.j,
            r_i: p.r_i,
            r_o: p.r_o,
            theta_b: Some(match &self.forcing.theta_b {
                ThetaB::Constant(v) => ThetaBFile::Scalar(*v),
                ThetaB::Harmonics(v) => ThetaBFile::Array(v.clone()),
            }),
            f_b_coeffs: Some(self.forcing.f_b.clone()),
            t_end: self.run.t_end,
            dt: self.run.dt,
            output_stride: self.run.output_stride,
            energy_tolerance: self.run.energy_tolerance,
            l_max: self.run.resolution.l_max,
            n_r_inner: self.run.resolution.n_r_inner,
            n_r_outer: self.run.resolution.n_r_outer,
            seed: self.run.seed,
        };
        toml::to_string(&file).expect("config serializes")
    }

    /// Stable hash of the physical and resolution parameters, used to tie
    /// snapshots to the configuration that produced them.
    pub fn params_hash(&self) -> u64 {
        use sha2::{Digest, Sha256};
        let p = &self.params;
        let mut h = Sha256::new();
        for v in [
            p.mu_i, p.mu_o, p.mu_e, p.sigma_i, p.sigma_o, p.rho, p.nu, p.kappa, p.g, p.l_rot, p.j, p.r_i, p.r_o,
        ] {
            h.update(v.to_le_bytes());
        }
        let r = &self.run.resolution;
        for v in [r.l_max, r.n_r_inner, r.n_r_outer] {
            h.update((v as u64).to_le_bytes());
        }
        for v in self.forcing.theta_b.coeffs(r.l_max).iter().chain(&self.forcing.f_b) {
            h.update(v.to_le_bytes());
        }
        let d = h.finalize();
        u64::from_le_bytes(d[..8].try_into().expect("digest has 8 bytes"))
    }
}

pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path)?;
    Config::from_toml_str(&text)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NondimensionalSummary {
    pub magnetic_diffusion_time: f64,
    pub viscous_time: f64,
    pub thermal_diffusion_time: f64,
    /// magnetic diffusion time / viscous time (a magnetic Prandtl number).
    pub magnetic_to_viscous: f64,
    pub thermal_to_viscous: f64,
    pub rotation_period: Option<f64>,
}

pub fn nondimensional_summary(p: &PhysicalParams) -> NondimensionalSummary {
    let r2 = p.r_o * p.r_o;
    let tm = p.mu_o * p.sigma_o * r2;
    let tv = r2 / p.nu;
    let tk = r2 / p.kappa;
    NondimensionalSummary {
        magnetic_diffusion_time: tm,
        viscous_time: tv,
        thermal_diffusion_time: tk,
        magnetic_to_viscous: tm / tv,
        thermal_to_viscous: tk / tv,
        rotation_period: if p.l_rot != 0.0 { Some(2.0 * PI / p.l_rot.abs()) } else { None },
    }
}

impl fmt::Display for NondimensionalSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "magnetic diffusion time  {:.6e}", self.magnetic_diffusion_time)?;
        writeln!(f, "viscous time             {:.6e}", self.viscous_time)?;
        writeln!(f, "thermal diffusion time   {:.6e}", self.thermal_diffusion_time)?;
        writeln!(f, "magnetic / viscous       {:.6e}", self.magnetic_to_viscous)?;
        write!(f, "thermal / viscous        {:.6e}", self.thermal_to_viscous)?;
        if let Some(p) = self.rotation_period {
            write!(f, "\nrotation period          {p:.6e}")?;
        }
        Ok(())
    }
}
