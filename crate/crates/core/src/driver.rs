//! Time loop: stepping, auditing, snapshot emission and step reports.

use crate::audit::{audit_transition, Auditor, EnergyLedger, LedgerRow};
use crate::config::Config;
use crate::dynamo::{
    gronwall_constants, gronwall_monitor, project_initial_data, random_state, step_imex, BasisField, EnergySample,
    GronwallCertificate, InitialData, Model, StateVector, StepOptions, Stepper,
};
use crate::error::{Error, Result};
use crate::snapshot::SnapshotFile;
use std::path::{Path, PathBuf};

/// Per-step diagnostics.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepReport {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub nonlinear: [f64; 3],
    pub residual: f64,
    pub relative_residual: f64,
    pub cancellations: [f64; 3],
    pub energy: f64,
    /// `(F(0) + 1) e^{C (t - t₀)}`.
    pub gronwall_bound: f64,
    /// Advisory only: `dt · max|u| / min radial spacing`.
    pub cfl: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub tolerance: f64,
    pub freeze_velocity: bool,
    /// Directory for `state_NNNN.gdyn` snapshots; none disables them.
    pub snapshot_dir: Option<PathBuf>,
    pub stride: usize,
    /// Quadrature refinement factor of the audit grid.
    pub audit_refine: usize,
}

impl RunOptions {
    pub fn from_config(cfg: &Config) -> Self {
        Self {
            tolerance: cfg.run.energy_tolerance,
            freeze_velocity: false,
            snapshot_dir: None,
            stride: cfg.run.output_stride.max(1),
            audit_refine: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub ledger: EnergyLedger,
    pub reports: Vec<StepReport>,
    pub final_state: StateVector,
    pub snapshots: Vec<PathBuf>,
    pub history: Vec<EnergySample>,
    pub certificate: GronwallCertificate,
}

impl RunOutput {
    pub fn flagged(&self) -> usize {
        self.reports.iter().filter(|r| r.flagged).count()
    }
}

/// Seeded random coefficients, passed through the initial-data projection.
pub fn seeded_initial_state(model: &Model, seed: u64) -> StateVector {
    let sp = &model.sp;
    let raw = random_state(sp, seed, 0.0);
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
    project_initial_data(
        sp,
        &InitialData {
            b: Some(&b),
            u: Some(&u),
            omega: sp.vel.omega(&raw.g_u),
            tau: Some(&t),
        },
        0.0,
    )
    .state
}

pub fn snapshot_of(cfg: &Config, s: &StateVector) -> SnapshotFile {
    let r = &cfg.run.resolution;
    SnapshotFile {
        l_max: r.l_max,
        n_r_inner: r.n_r_inner,
        n_r_outer: r.n_r_outer,
        params_hash: cfg.params_hash(),
        state: s.clone(),
    }
}

pub fn snapshot_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("state_{step:04}.gdyn"))
}

fn radial_spacing(model: &Model) -> f64 {
    let r = &model.sp.outer.r;
    r.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

/// Runs from `start` to `cfg.run.t_end`.
pub fn run(cfg: &Config, model: &Model, start: StateVector, opts: &RunOptions) -> Result<RunOutput> {
    let dt = cfg.run.dt;
    let t0 = start.t;
    let n_steps = (((cfg.run.t_end - t0) / dt) - 1e-9).ceil().max(0.0) as usize;
    let first_step = (t0 / dt).round() as usize;
    let auditor = Auditor::new(model, opts.audit_refine);
    let constants = gronwall_constants(model);
    let f0 = start.energy();
    let dx = radial_spacing(model);
    let mut stepper = Stepper::new(
        dt,
        StepOptions {
            freeze_velocity: opts.freeze_velocity,
        },
    );
    let mut ledger = EnergyLedger::default();
    let mut reports = Vec::with_capacity(n_steps);
    let mut snapshots = Vec::new();
    let mut history = Vec::with_capacity(n_steps + 1);
    let emit = |s: &StateVector, step: usize, snaps: &mut Vec<PathBuf>| -> Result<()> {
        if let Some(dir) = &opts.snapshot_dir {
            let p = snapshot_path(dir, step);
            snapshot_of(cfg, s).write(&p)?;
            snaps.push(p);
        }
        Ok(())
    };
    let sample = |row: &LedgerRow| EnergySample {
        t: row.t,
        energy: row.terms.energy(),
        tau_norm: (2.0 * row.terms.e_tau).sqrt(),
    };
    emit(&start, first_step, &mut snapshots)?;
    let mut here = auditor.terms(model, &start, start.t);
    let mut s = start;
    for k in 0..n_steps {
        let (mut next, info) = match step_imex(model, &s, &mut stepper) {
            Ok(x) => x,
            Err(Error::NonFinite { t, last_good }) => {
                let hint = snapshots.last().map(|p| p.display().to_string()).unwrap_or_else(|| "none".into());
                return Err(Error::Invalid(format!(
                    "non-finite state at t={t}; last good state t={last_good}, last snapshot {hint}"
                )));
            }
            Err(e) => return Err(e),
        };
        next.t = t0 + (k + 1) as f64 * dt;
        let (row, there) = audit_transition(&auditor, model, &s, &here, &next, opts.tolerance);
        here = there;
        history.push(sample(&row));
        let t = row.terms;
        reports.push(StepReport {
            step: first_step + k,
            t: s.t,
            dt,
            nonlinear: info.nonlinear,
            residual: row.residual,
            relative_residual: row.relative_residual,
            cancellations: [t.canc_a, t.canc_b, t.canc_c],
            energy: t.energy(),
            gronwall_bound: (f0 + 1.0) * (constants.c * (s.t - t0)).exp(),
            cfl: dt * t.u_max / dx,
            flagged: row.flagged,
        });
        ledger.push(row);
        s = next;
        let step = first_step + k + 1;
        if (k + 1) % opts.stride == 0 || k + 1 == n_steps {
            emit(&s, step, &mut snapshots)?;
        }
    }
    let last = LedgerRow {
        t: s.t,
        terms: here,
        ..Default::default()
    };
    history.push(sample(&last));
    ledger.push(last);
    let certificate = gronwall_monitor(model, &history);
    Ok(RunOutput {
        ledger,
        reports,
        final_state: s,
        snapshots,
        history,
        certificate,
    })
}
