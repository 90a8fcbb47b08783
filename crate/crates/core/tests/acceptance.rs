//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Pass criterion numbers as arguments to run a subset:
//! `cargo test --test acceptance -- 2 5`.

use geodynamo::config::{Config, ForcingData, PhysicalParams, RunConfig, ThetaB, VolumeSource};
use geodynamo::driver::{run, seeded_initial_state, RunOptions};
use geodynamo::dynamo::{project_initial_data, random_state, BasisField, InitialData, Model, StateVector};
use geodynamo::magnetic::{build_magnetic_basis, conformance};
use geodynamo::spectral::{lm_count, SpectralResolution};
use geodynamo::verify::{cancellation_residuals, free_decay, norm_equivalence_drift, round_trip_all};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (usize, &'static str, fn() -> Outcome);

fn config(params: PhysicalParams, l_max: usize, n_r: usize) -> Config {
    Config {
        params,
        forcing: ForcingData::none(l_max),
        run: RunConfig {
            resolution: SpectralResolution::new(l_max, n_r, n_r),
            t_end: 0.01,
            dt: 1e-3,
            output_stride: 1_000_000,
            energy_tolerance: 1e-8,
            seed: 1,
        },
    }
}

fn contrasting() -> PhysicalParams {
    PhysicalParams {
        mu_i: 2.0,
        mu_e: 0.7,
        sigma_i: 1.5,
        rho: 1.2,
        nu: 0.8,
        kappa: 1.3,
        g: 0.6,
        l_rot: 3.0,
        j: 0.4,
        ..PhysicalParams::unit()
    }
}

fn basis_conformance() -> Outcome {
    let start = Instant::now();
    let res = SpectralResolution::new(8, 24, 24);
    let worst = match build_magnetic_basis(&contrasting(), &res) {
        Ok(b) => {
            let c = conformance(&b);
            [c.divergence, c.normal_jump, c.tangential_jump, c.exterior_curl]
        }
        Err(e) => return fail(e),
    };
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: worst.iter().all(|w| *w <= 1e-9) && secs < 30.0,
        detail: format!(
            "div {:.1e}, normal jump {:.1e}, tangential jump {:.1e}, exterior curl {:.1e} (≤ 1e-9); {secs:.1} s (< 30 s)",
            worst[0], worst[1], worst[2], worst[3]
        ),
    }
}

fn free_decay_oracle() -> Outcome {
    let start = Instant::now();
    let mut cfg = config(PhysicalParams { g: 0.0, ..PhysicalParams::unit() }, 1, 24);
    cfg.run.dt = 0.005;
    let m = match free_decay(&cfg) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let secs = start.elapsed().as_secs_f64();
    let eig = (m.eigenvalue / m.exact - 1.0).abs();
    let fit = (m.fitted / m.exact - 1.0).abs();
    Outcome {
        pass: eig <= 1e-3 && fit <= 5e-3 && secs < 60.0,
        detail: format!(
            "exact {:.6}, eigenvalue error {eig:.1e} (≤ 1e-3), fitted error {fit:.1e} (≤ 5e-3); {secs:.1} s (< 60 s)",
            m.exact
        ),
    }
}

fn cancellations() -> Outcome {
    let mut cfg = config(contrasting(), 6, 10);
    cfg.forcing.theta_b = ThetaB::Harmonics(harmonics(6, 0.5));
    let model = match Model::from_config(&cfg) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let w = cancellation_residuals(&model, 100, 17);
    Outcome {
        pass: w.iter().all(|x| *x <= 1e-10),
        detail: format!(
            "advection {:.1e}, Coriolis {:.1e}, Lorentz/induction {:.1e} over 100 states (≤ 1e-10)",
            w[0], w[1], w[2]
        ),
    }
}

/// Sum of per-step identity residuals over the run: the gap in the
/// cumulative energy identity.
fn accumulated_defect(cfg: &Config, model: &Model, start: &StateVector, dt: f64) -> Result<(f64, f64, bool), String> {
    let mut c = cfg.clone();
    c.run.dt = dt;
    c.run.t_end = 500.0 * dt;
    let out = run(&c, model, start.clone(), &RunOptions::from_config(&c)).map_err(|e| e.to_string())?;
    let worst = out.reports.iter().map(|r| r.relative_residual).fold(0.0, f64::max);
    let monotone = out.ledger.rows.windows(2).all(|w| w[1].terms.energy() <= w[0].terms.energy());
    let defect = out.reports.iter().map(|r| r.residual).sum::<f64>().abs();
    Ok((defect, worst, monotone && out.flagged() == 0 && out.reports.len() == 500))
}

fn energy_identity() -> Outcome {
    let params = PhysicalParams {
        sigma_i: 10.0,
        sigma_o: 10.0,
        g: 0.5,
        ..PhysicalParams::unit()
    };
    let cfg = config(params, 6, 8);
    let model = match Model::from_config(&cfg) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    // Leave the start-up layer before measuring the defect.
    let mut settle = cfg.clone();
    settle.run.dt = 1e-4;
    settle.run.t_end = 0.02;
    let mut start = match run(&settle, &model, seeded_initial_state(&model, 11), &RunOptions::from_config(&settle)) {
        Ok(o) => o.final_state,
        Err(e) => return fail(e),
    };
    start.t = 0.0;
    for v in [&mut start.g_b, &mut start.g_u, &mut start.g_t] {
        v.iter_mut().for_each(|x| *x *= 3.0);
    }
    let mut rows = Vec::new();
    for dt in [2e-5, 1e-5, 5e-6] {
        match accumulated_defect(&cfg, &model, &start, dt) {
            Ok(r) => rows.push(r),
            Err(e) => return fail(e),
        }
    }
    let ok = rows.iter().all(|r| r.2);
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let coarse = rows[0].0 / rows[1].0;
    let ratio = rows[1].0 / rows[2].0;
    Outcome {
        pass: ok && ratio >= 6.0,
        detail: format!(
            "worst relative residual {worst:.1e} (≤ 1e-8), F nonincreasing {ok}; defect {:.2e} → {:.2e} → {:.2e}, halving ratios {coarse:.2} then {ratio:.2} (≥ 6)",
            rows[0].0, rows[1].0, rows[2].0
        ),
    }
}

fn harmonics(l_max: usize, scale: f64) -> Vec<f64> {
    (0..lm_count(l_max)).map(|i| scale * ((i * 7 % 5) as f64 - 2.0) / (1.0 + i as f64)).collect()
}

fn gronwall() -> Outcome {
    let l_max = 4;
    let mut cfg = config(contrasting(), l_max, 8);
    cfg.run.t_end = 0.2;
    cfg.run.dt = 2e-3;
    cfg.forcing.theta_b = ThetaB::Harmonics(harmonics(l_max, 1.0));
    cfg.forcing.f_b = harmonics(l_max, 0.5);
    let forced = match forced_run(&cfg) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    cfg.forcing.theta_b = ThetaB::Constant(1.0);
    let constant = match forced_run(&cfg) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let tau = constant.tau_holds == Some(true) && constant.linear_holds == Some(true);
    Outcome {
        pass: forced.holds && tau,
        detail: format!(
            "forced: max F/((F0+1)e^Ct) {:.3} with C {:.3}; constant θ_b: sup‖τ‖ {:.3} ≤ bound {:.3}, linear growth {}",
            forced.worst_ratio,
            forced.constants.c,
            constant.tau_sup,
            constant.tau_bound.unwrap_or(f64::NAN),
            constant.linear_holds == Some(true)
        ),
    }
}

fn forced_run(cfg: &Config) -> Result<geodynamo::dynamo::GronwallCertificate, String> {
    let mut cfg = cfg.clone();
    let model = Model::from_config(&cfg).map_err(|e| e.to_string())?;
    let n = model.sizes()[2];
    cfg.forcing.f = VolumeSource::Oscillating {
        amplitude: (0..n).map(|k| 0.3 / (1.0 + k as f64)).collect(),
        frequency: 20.0,
    };
    let model = Model::from_config(&cfg).map_err(|e| e.to_string())?;
    let start = seeded_initial_state(&model, 4);
    let out = run(&cfg, &model, start, &RunOptions::from_config(&cfg)).map_err(|e| e.to_string())?;
    Ok(out.certificate)
}

fn biot_savart_round_trip() -> Outcome {
    let cfg = config(contrasting(), 6, 12);
    let worst = match build_magnetic_basis(&cfg.params, &cfg.run.resolution).and_then(|b| round_trip_all(&b)) {
        Ok(w) => w,
        Err(e) => return fail(e),
    };
    let (_, _, drift) = match norm_equivalence_drift(&cfg, 200) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    Outcome {
        pass: worst <= 1e-8 && drift.iter().all(|d| *d <= 0.1),
        detail: format!(
            "round trip {worst:.1e} (≤ 1e-8); norm-equivalence drift {:.3}, {:.3}, {:.3} (≤ 0.1)",
            drift[0], drift[1], drift[2]
        ),
    }
}

fn projection_sweep() -> Outcome {
    let params = contrasting();
    let fine = match Model::new(&params, &SpectralResolution::new(6, 14, 14), &ForcingData::none(6)) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let sp = &fine.sp;
    let raw = random_state(sp, 23, 0.0);
    let b = BasisField {
        blocks: &sp.mag.blocks,
        layout: &sp.mag.layout,
        g: &raw.g_b,
    };
    let u = BasisField {
        blocks: &sp.vel.blocks,
        layout: &sp.vel.layout,
        g: &raw.g_u,
    };
    let t = BasisField {
        blocks: &sp.buoy.blocks,
        layout: &sp.buoy.layout,
        g: &raw.g_t,
    };
    let data = InitialData {
        b: Some(&b),
        u: Some(&u),
        omega: sp.vel.omega(&raw.g_u),
        tau: Some(&t),
    };
    let mut prev = [0.0; 3];
    let mut ok = true;
    let mut input = [0.0; 3];
    for (l, n) in [(1, 3), (2, 4), (3, 6), (4, 8), (5, 10), (6, 12)] {
        let coarse = match Model::new(&params, &SpectralResolution::new(l, n, n), &ForcingData::none(l)) {
            Ok(m) => m,
            Err(e) => return fail(e),
        };
        let p = project_initial_data(&coarse.sp, &data, 0.0);
        input = p.input;
        for k in 0..3 {
            ok &= p.projected[k] >= prev[k] && p.projected[k] <= p.input[k];
        }
        prev = p.projected;
    }
    Outcome {
        pass: ok,
        detail: format!(
            "six nested spaces; final projected/input energy B {:.4}, u {:.4}, τ {:.4}; monotone and bounded {ok}",
            prev[0] / input[0],
            prev[1] / input[1],
            prev[2] / input[2]
        ),
    }
}

fn cli_run(config: &Path, out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_geodynamo"))
        .args(["simulate", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    if status.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&status.stderr).into_owned())
    }
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .map(|r| {
            r.filter_map(|e| e.ok())
                .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap_or_default()))
                .collect()
        })
        .unwrap_or_default();
    v.sort();
    v
}

fn determinism() -> Outcome {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/tiny.toml");
    let tmp = match tempfile::tempdir() {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        if let Err(e) = cli_run(&config, d) {
            return fail(e);
        }
    }
    let (fa, fb) = (files(&a), files(&b));
    let same = fa == fb && fa.iter().any(|f| f.0 == "energy.csv");
    Outcome {
        pass: same,
        detail: format!("{} files compared, byte-identical {same}", fa.len()),
    }
}

fn fail(e: impl std::fmt::Display) -> Outcome {
    Outcome {
        pass: false,
        detail: format!("error: {e}"),
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "basis conformance", basis_conformance),
        (2, "free-decay oracle", free_decay_oracle),
        (3, "exact cancellations", cancellations),
        (4, "energy-identity regression", energy_identity),
        (5, "Grönwall certificate", gronwall),
        (6, "Biot-Savart round trip", biot_savart_round_trip),
        (7, "initial-data projection", projection_sweep),
        (8, "determinism", determinism),
    ];
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut all = true;
    for (n, name, f) in criteria {
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        all &= o.pass;
        println!(
            "criterion {n} {name}: {} | {} [{:.1} s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
