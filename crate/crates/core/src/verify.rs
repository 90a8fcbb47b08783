//! Verification suites run by `geodynamo verify`.

use crate::audit::Auditor;
use crate::basis::Family;
use crate::biot_savart::{biot_savart_reconstruct, round_trip, CurrentDensity};
use crate::config::Config;
use crate::driver::{run, RunOptions};
use crate::dynamo::{random_state, Model, StateVector};
use crate::error::{Error, Result};
use crate::magnetic::{build_magnetic_basis, conformance, norm_equivalence, MagneticBasis};
use crate::mechanical::korn_identity_check;
use crate::par;
use crate::spectral::{PolyFamily, SpectralResolution};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Basis,
    BiotSavart,
    Cancellations,
    Decay,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basis" => Ok(Suite::Basis),
            "biotsavart" => Ok(Suite::BiotSavart),
            "cancellations" => Ok(Suite::Cancellations),
            "decay" => Ok(Suite::Decay),
            other => Err(Error::Invalid(format!(
                "unknown suite {other:?}; expected basis, biotsavart, cancellations or decay"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `measured ≤ threshold`.
    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold,
            pass: measured <= threshold,
        }
    }

    /// Reported constant: passes when finite and positive.
    pub fn finite(name: impl Into<String>, measured: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold: f64::INFINITY,
            pass: measured.is_finite() && measured > 0.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("check_name,measured,threshold,pass\n");
        for c in &self.checks {
            let _ = writeln!(s, "{},{:?},{:?},{}", c.name, c.measured, c.threshold, c.pass);
        }
        s
    }
}

pub fn run_suite(cfg: &Config, suite: Suite) -> Result<Report> {
    match suite {
        Suite::Basis => basis_suite(cfg),
        Suite::BiotSavart => biot_savart_suite(cfg),
        Suite::Cancellations => cancellation_suite(cfg, 100),
        Suite::Decay => decay_suite(cfg),
    }
}

fn orthonormality(mats: impl Iterator<Item = DMatrix<f64>>) -> f64 {
    mats.map(|m| (m.clone() - DMatrix::identity(m.nrows(), m.ncols())).amax())
        .fold(0.0, f64::max)
}

pub fn basis_suite(cfg: &Config) -> Result<Report> {
    let model = Model::from_config(cfg)?;
    let sp = &model.sp;
    let l_max = cfg.run.resolution.l_max;
    let c = conformance(&sp.mag);
    let keys: Vec<(usize, Family)> = (1..=l_max).flat_map(|l| [(l, Family::Toroidal), (l, Family::Poloidal)]).collect();
    let mag = orthonormality(keys.iter().map(|&(l, f)| sp.mag.block_matrices(l, f).0));
    let vel = orthonormality(keys.iter().map(|&(l, f)| sp.vel.block_matrices(l, f).0));
    let buoy = orthonormality((0..=l_max).map(|l| sp.buoy.block_matrices(l).0));
    let korn = korn_identity_check(&sp.vel, 50, cfg.run.seed);
    let d_min = sp.mag.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Report {
        checks: vec![
            Check::at_most("magnetic_divergence", c.divergence, 1e-10),
            Check::at_most("magnetic_normal_jump", c.normal_jump, 1e-10),
            Check::at_most("magnetic_tangential_jump", c.tangential_jump, 1e-10),
            Check::at_most("magnetic_exterior_curl", c.exterior_curl, 1e-10),
            Check::at_most("magnetic_orthonormality", mag, 1e-10),
            Check::at_most("velocity_orthonormality", vel, 1e-10),
            Check::at_most("buoyancy_orthonormality", buoy, 1e-10),
            Check::at_most("rigid_symmetric_gradient", korn.inner_sym_grad, 1e-10),
            Check::finite("korn_constant", korn.korn_max),
            Check::finite("magnetic_smallest_decay_rate", d_min),
        ],
    })
}

/// Largest round-trip error over all magnetic modes. Modes of equal
/// (l, family, radial index) share their profiles and give bit-identical
/// round trips, so one order m per degree is evaluated.
pub fn round_trip_all(basis: &MagneticBasis) -> Result<f64> {
    let modes: Vec<usize> = basis
        .layout
        .slots
        .iter()
        .filter(|s| s.m == 0)
        .flat_map(|s| s.offset..s.offset + s.len)
        .collect();
    par::map(&modes, |&i| round_trip(basis, i, PolyFamily::Legendre))
        .into_iter()
        .try_fold(0.0_f64, |acc, e| e.map(|e| acc.max(e)))
}

/// Random current `h = curl μ⁻¹ B` for B with coefficients of decaying size.
pub fn random_current(basis: &MagneticBasis, seed: u64) -> (Vec<f64>, CurrentDensity) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<f64> = basis
        .eigenvalues
        .iter()
        .map(|l| rng.random_range(-1.0..1.0) / (1.0 + l).sqrt())
        .collect();
    let h = CurrentDensity::from_magnetic(basis, &g, PolyFamily::Chebyshev);
    (g, h)
}

/// Series length for refitting a reconstruction before taking its curl:
/// enough to hold the polynomial degree of the field, no more, since the
/// check differentiates twice.
pub fn curl_check_terms(res: &SpectralResolution) -> usize {
    2 * res.n_r_inner.max(res.n_r_outer) + 8
}

/// Relative drift of the norm-equivalence constants when the radial
/// resolution doubles: `[H¹/𝔹¹ max, curl/𝔹¹ min, H¹/curl max]`.
pub fn norm_equivalence_drift(cfg: &Config, samples: usize) -> Result<([f64; 3], [f64; 3], [f64; 3])> {
    let res = &cfg.run.resolution;
    let fine = SpectralResolution::new(res.l_max, 2 * res.n_r_inner, 2 * res.n_r_outer);
    let a = norm_equivalence(&build_magnetic_basis(&cfg.params, res)?, samples, cfg.run.seed);
    let b = norm_equivalence(&build_magnetic_basis(&cfg.params, &fine)?, samples, cfg.run.seed);
    let va = [a.h1_max, a.curl_min, a.estimate_max];
    let vb = [b.h1_max, b.curl_min, b.estimate_max];
    let drift = [0, 1, 2].map(|k| (vb[k] - va[k]).abs() / va[k]);
    Ok((va, vb, drift))
}

pub fn biot_savart_suite(cfg: &Config) -> Result<Report> {
    let basis = build_magnetic_basis(&cfg.params, &cfg.run.resolution)?;
    let worst = round_trip_all(&basis)?;
    let (_, h) = random_current(&basis, cfg.run.seed);
    let f = biot_savart_reconstruct(&h, &cfg.params)?;
    let (normal, tangential) = f.interface_residuals();
    let curl = f.curl_residual(curl_check_terms(&cfg.run.resolution), 100);
    let (coarse, _, drift) = norm_equivalence_drift(cfg, 200)?;
    Ok(Report {
        checks: vec![
            Check::at_most("round_trip_max_b0_error", worst, 1e-8),
            Check::at_most("reconstruction_normal_jump", normal, 1e-9),
            Check::at_most("reconstruction_tangential_jump", tangential, 1e-9),
            Check::at_most("reconstruction_curl_residual", curl, 1e-9),
            Check::finite("h1_over_b1_max", coarse[0]),
            Check::finite("curl_over_b1_min", coarse[1]),
            Check::finite("h1_over_curl_max", coarse[2]),
            Check::at_most("h1_over_b1_refinement_drift", drift[0], 0.1),
            Check::at_most("curl_over_b1_refinement_drift", drift[1], 0.1),
            Check::at_most("h1_over_curl_refinement_drift", drift[2], 0.1),
        ],
    })
}

/// Largest relative cancellation residuals `[(a), (b), (c)]` over random
/// states.
pub fn cancellation_residuals(model: &Model, states: usize, seed: u64) -> [f64; 3] {
    let auditor = Auditor::new(model, 1);
    let mut worst = [0.0_f64; 3];
    for k in 0..states {
        let s = random_state(&model.sp, seed.wrapping_add(k as u64), 0.0);
        let t = auditor.terms(model, &s, 0.0);
        worst[0] = worst[0].max(t.canc_a);
        worst[1] = worst[1].max(t.canc_b);
        worst[2] = worst[2].max(t.canc_c);
    }
    worst
}

pub fn cancellation_suite(cfg: &Config, states: usize) -> Result<Report> {
    let model = Model::from_config(cfg)?;
    let w = cancellation_residuals(&model, states, cfg.run.seed);
    Ok(Report {
        checks: vec![
            Check::at_most("advection_cancellation", w[0], 1e-10),
            Check::at_most("coriolis_cancellation", w[1], 1e-10),
            Check::at_most("lorentz_cancellation", w[2], 1e-10),
        ],
    })
}

/// Free decay in a uniform conductor: discrete slowest dipole rate and the
/// rate fitted from a simulated run over one diffusion time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayMeasurement {
    pub exact: f64,
    pub eigenvalue: f64,
    pub fitted: f64,
}

pub fn free_decay(cfg: &Config) -> Result<DecayMeasurement> {
    let p = &cfg.params;
    if p.mu_i != p.mu_o || p.mu_o != p.mu_e || p.sigma_i != p.sigma_o {
        return Err(Error::Invalid(
            "decay suite needs uniform permeability and conductivity (mu_i = mu_o = mu_e, sigma_i = sigma_o)".into(),
        ));
    }
    let model = Model::from_config(cfg)?;
    let sp = &model.sp;
    let exact = PI * PI / (p.mu_o * p.sigma_o * p.r_o * p.r_o);
    let (mode, eigenvalue) = (0..sp.mag.n_modes())
        .filter(|&i| {
            let m = sp.mag.mode(i);
            m.idx.l == 1 && m.family == Family::Poloidal
        })
        .map(|i| (i, model.tables.d[i]))
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let t_diff = p.mu_o * p.sigma_o * p.r_o * p.r_o;
    let mut run_cfg = cfg.clone();
    run_cfg.run.t_end = t_diff;
    run_cfg.run.dt = (t_diff / 200.0).min(cfg.run.dt);
    // Perturb only modes the step damps; stiff modes ring under Crank-Nicolson.
    let mut start = StateVector::zeros(model.sizes(), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
    for (i, g) in start.g_b.iter_mut().enumerate() {
        let x: f64 = rng.random_range(-1.0..1.0);
        if model.tables.d[i] * run_cfg.run.dt < 1.0 {
            *g = 1e-3 * x;
        }
    }
    start.g_b[mode] = 1.0;
    let opts = RunOptions {
        freeze_velocity: true,
        tolerance: f64::INFINITY,
        ..RunOptions::from_config(&run_cfg)
    };
    let out = run(&run_cfg, &model, start, &opts)?;
    // Least-squares slope of ln E_B over the second half.
    let rows: Vec<(f64, f64)> = out
        .ledger
        .rows
        .iter()
        .filter(|r| r.t >= 0.5 * t_diff)
        .map(|r| (r.t, r.terms.e_b.ln()))
        .collect();
    let n = rows.len() as f64;
    let (mt, my) = (rows.iter().map(|r| r.0).sum::<f64>() / n, rows.iter().map(|r| r.1).sum::<f64>() / n);
    let sxy: f64 = rows.iter().map(|r| (r.0 - mt) * (r.1 - my)).sum();
    let sxx: f64 = rows.iter().map(|r| (r.0 - mt).powi(2)).sum();
    Ok(DecayMeasurement {
        exact,
        eigenvalue,
        fitted: -0.5 * sxy / sxx,
    })
}

pub fn decay_suite(cfg: &Config) -> Result<Report> {
    let m = free_decay(cfg)?;
    Ok(Report {
        checks: vec![
            Check::at_most("dipole_eigenvalue_relative_error", (m.eigenvalue / m.exact - 1.0).abs(), 1e-3),
            Check::at_most("dipole_fitted_rate_relative_error", (m.fitted / m.exact - 1.0).abs(), 5e-3),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ForcingData, PhysicalParams, RunConfig};

    fn cfg(l_max: usize, n: usize) -> Config {
        Config {
            params: PhysicalParams::unit(),
            forcing: ForcingData::none(l_max),
            run: RunConfig {
                resolution: SpectralResolution::new(l_max, n, n),
                t_end: 0.1,
                dt: 0.01,
                output_stride: 1,
                energy_tolerance: 1e-8,
                seed: 3,
            },
        }
    }

    #[test]
    fn suite_names_parse() {
        assert_eq!("decay".parse::<Suite>().unwrap(), Suite::Decay);
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn report_csv_has_fixed_header() {
        let r = Report {
            checks: vec![Check::at_most("x", 0.5, 1.0), Check::at_most("y", 2.0, 1.0)],
        };
        assert!(!r.all_pass());
        assert_eq!(r.to_csv(), "check_name,measured,threshold,pass\nx,0.5,1.0,true\ny,2.0,1.0,false\n");
    }

    #[test]
    fn basis_and_cancellation_suites_pass_small() {
        let c = cfg(2, 5);
        assert!(basis_suite(&c).unwrap().all_pass());
        assert!(cancellation_suite(&c, 5).unwrap().all_pass());
    }

    #[test]
    fn round_trip_is_independent_of_order() {
        let p = cfg(2, 4).params;
        let b = build_magnetic_basis(&p, &SpectralResolution::new(2, 4, 4)).unwrap();
        let slot = |m: i64| b.layout.slots.iter().find(|s| s.l == 2 && s.m == m && s.family == Family::Poloidal).unwrap().offset;
        let e0 = round_trip(&b, slot(0) + 1, PolyFamily::Legendre).unwrap();
        for m in [-2, 1] {
            assert_eq!(round_trip(&b, slot(m) + 1, PolyFamily::Legendre).unwrap().to_bits(), e0.to_bits());
        }
    }

    #[test]
    fn decay_requires_uniform_materials() {
        let mut c = cfg(1, 6);
        c.params.mu_i = 2.0;
        assert!(free_decay(&c).is_err());
    }
}
