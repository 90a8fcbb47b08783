//! Energy ledger: every energy, dissipation and work term of the energy
//! identity, recomputed from the coefficients by direct quadrature on a
//! grid of its own.

use crate::basis::{Layout, ProfileTable, RadialBlock};
use crate::dynamo::{exterior_energy_of, Model, StateVector};
use crate::error::Result;
use crate::forms::{advect, cross, dot};
use crate::par;
use crate::spectral::quadrature::gauss_legendre_on;
use crate::spectral::{AngularGrid, RadialGrid, Region, ScalarSample, VectorSample};
use crate::magnetic::MagneticBasis;
use nalgebra::DMatrix;
use std::fmt::Write as _;
use std::path::Path;

pub const COLUMNS: [&str; 18] = [
    "t", "E_B", "E_u", "E_omega", "E_tau", "D_B", "D_u", "D_tau", "W_thetac", "W_buoy", "W_bconv", "W_adiff", "W_fb",
    "W_f", "residual", "canc_a", "canc_b", "canc_c",
];

/// Ledger quantities of one state.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Terms {
    pub e_b: f64,
    pub e_u: f64,
    pub e_omega: f64,
    pub e_tau: f64,
    pub d_b: f64,
    pub d_u: f64,
    pub d_tau: f64,
    pub w_thetac: f64,
    pub w_buoy: f64,
    pub w_bconv: f64,
    pub w_adiff: f64,
    pub w_fb: f64,
    pub w_f: f64,
    /// `|ρ b(u,u,u)| + |b(u,τ,τ)|` over the absolute integrands.
    pub canc_a: f64,
    /// Coriolis energy over `|L|(ρ‖u‖² + J|ω|²)`.
    pub canc_b: f64,
    /// Lorentz pairing minus the transport term, over their absolute integrands.
    pub canc_c: f64,
    /// Largest flow speed on the shell nodes (not exported).
    pub u_max: f64,
}

impl Terms {
    pub fn energy(&self) -> f64 {
        self.e_b + self.e_u + self.e_omega + self.e_tau
    }

    pub fn dissipation(&self) -> f64 {
        self.d_b + self.d_u + self.d_tau
    }

    pub fn work(&self) -> f64 {
        self.w_thetac + self.w_buoy + self.w_bconv + self.w_adiff + self.w_fb + self.w_f
    }

    fn abs_work(&self) -> f64 {
        [self.w_thetac, self.w_buoy, self.w_bconv, self.w_adiff, self.w_fb, self.w_f]
            .iter()
            .map(|x| x.abs())
            .sum()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LedgerRow {
    pub t: f64,
    pub terms: Terms,
    /// `ΔF + dt·G(ḡ) − dt·W(ḡ)` for the step leaving this row; zero on the
    /// last row.
    pub residual: f64,
    /// Residual over `|ΔF| + dt·G(ḡ) + dt·Σ|W(ḡ)|`.
    pub relative_residual: f64,
    pub flagged: bool,
}

impl LedgerRow {
    pub fn values(&self) -> [f64; 18] {
        let s = &self.terms;
        [
            self.t, s.e_b, s.e_u, s.e_omega, s.e_tau, s.d_b, s.d_u, s.d_tau, s.w_thetac, s.w_buoy, s.w_bconv,
            s.w_adiff, s.w_fb, s.w_f, self.residual, s.canc_a, s.canc_b, s.canc_c,
        ]
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnergyLedger {
    pub rows: Vec<LedgerRow>,
}

impl EnergyLedger {
    pub fn push(&mut self, row: LedgerRow) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = COLUMNS.join(",");
        s.push('\n');
        for r in &self.rows {
            let v = r.values();
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                // Debug formatting of f64 is the shortest round-trip decimal.
                let _ = write!(s, "{x:?}");
            }
            s.push('\n');
        }
        s
    }

    pub fn flagged(&self) -> usize {
        self.rows.iter().filter(|r| r.flagged).count()
    }
}

pub fn export_ledger(ledger: &EnergyLedger, path: &Path) -> Result<()> {
    if ledger.rows.is_empty() {
        return Err(crate::Error::Invalid("empty ledger".into()));
    }
    std::fs::write(path, ledger.to_csv())?;
    Ok(())
}

/// Parses a ledger CSV written by [`export_ledger`] back into rows.
pub fn read_ledger(text: &str) -> Result<Vec<[f64; 18]>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != COLUMNS.join(",") {
        return Err(crate::Error::Parse(format!("unexpected ledger header: {header}")));
    }
    lines
        .map(|l| {
            let v: Vec<f64> = l
                .split(',')
                .map(|x| x.parse::<f64>().map_err(|e| crate::Error::Parse(format!("{x}: {e}"))))
                .collect::<Result<_>>()?;
            v.try_into().map_err(|_| crate::Error::Parse(format!("expected 18 columns: {l}")))
        })
        .collect()
}

fn grid_on(region: Region, n: usize, a: f64, b: f64) -> RadialGrid {
    let (r, w) = gauss_legendre_on(n, a, b);
    let w = r.iter().zip(&w).map(|(r, w)| w * r * r).collect();
    RadialGrid {
        region,
        r,
        w,
        diff: DMatrix::zeros(0, 0),
    }
}

/// Quadrature and profile tables used by the ledger.
#[derive(Clone, Debug)]
pub struct Auditor {
    pub refine: usize,
    pub angular: AngularGrid,
    pub inner: RadialGrid,
    pub outer: RadialGrid,
    nlm: usize,
    b_in: ProfileTable,
    b_out: ProfileTable,
    c_in: ProfileTable,
    c_out: ProfileTable,
    u_in: ProfileTable,
    u_out: ProfileTable,
    t_out: ProfileTable,
    t_ri: ProfileTable,
}

fn curl_table(mag: &MagneticBasis, grid: &RadialGrid, region: Region, mu: f64) -> ProfileTable {
    ProfileTable::build(&mag.blocks, grid, |b, j, r| {
        crate::basis::curl_vecrad(b.family, b.l, r, &b.jet(j, region, r), 1.0 / mu)
    })
}

fn field_table(blocks: &[RadialBlock], grid: &RadialGrid, region: Region) -> ProfileTable {
    ProfileTable::build(blocks, grid, |b, j, r| b.vecrad(j, region, r))
}

impl Auditor {
    /// `refine` multiplies the angular and radial node counts of the model.
    pub fn new(model: &Model, refine: usize) -> Self {
        let sp = &model.sp;
        let p = &sp.params;
        let refine = refine.max(1);
        let res = &sp.resolution;
        let angular = AngularGrid::new(res.l_max, res.n_theta * refine, res.n_phi * refine);
        let inner = grid_on(Region::Inner, sp.inner.len() * refine, 0.0, p.r_i);
        let outer = grid_on(Region::Outer, sp.outer.len() * refine, p.r_i, p.r_o);
        Self {
            refine,
            nlm: sp.nlm,
            b_in: field_table(&sp.mag.blocks, &inner, Region::Inner),
            b_out: field_table(&sp.mag.blocks, &outer, Region::Outer),
            c_in: curl_table(&sp.mag, &inner, Region::Inner, p.mu_i),
            c_out: curl_table(&sp.mag, &outer, Region::Outer, p.mu_o),
            u_in: field_table(&sp.vel.blocks, &inner, Region::Inner),
            u_out: field_table(&sp.vel.blocks, &outer, Region::Outer),
            t_out: field_table(&sp.buoy.blocks, &outer, Region::Outer),
            t_ri: ProfileTable::at_radius(&sp.buoy.blocks, p.r_i, |b, j, r| b.vecrad(j, Region::Outer, r)),
            angular,
            inner,
            outer,
        }
    }

    fn vector(&self, tab: &ProfileTable, layout: &Layout, grid: &RadialGrid, n: usize, g: &[f64], grad: bool) -> VectorSample {
        self.angular.synth_vector(&tab.synth(layout, self.nlm, n, g), grid.r[n], grad)
    }

    fn scalar(&self, tab: &ProfileTable, layout: &Layout, r: f64, n: usize, g: &[f64], grad: bool) -> ScalarSample {
        self.angular.synth_scalar(&tab.synth_scalar(layout, self.nlm, n, g), r, grad)
    }

    /// All ledger quantities of state `s`, with boundary data at time `t`.
    pub fn terms(&self, model: &Model, s: &StateVector, t: f64) -> Terms {
        let sp = &model.sp;
        let p = &sp.params;
        let ang = &self.angular;
        let np = ang.n_points();
        let e3: Vec<[f64; 3]> = (0..np)
            .map(|q| {
                let f = ang.frame(q);
                [f[0][2], f[1][2], f[2][2]]
            })
            .collect();
        let theta = &model.tables.theta;
        // [E_B, E_u, E_tau, D_B, D_u, D_tau, W_thetac, W_buoy, W_bconv, W_adiff,
        //  buu, |buu|, btt, |btt|, cor, |cor|, lor, |lor|, bbub, |bbub|]
        let shell = par::map_range(self.outer.len(), |n| {
            let r = self.outer.r[n];
            let b = self.vector(&self.b_out, &sp.mag.layout, &self.outer, n, &s.g_b, true);
            let c = self.vector(&self.c_out, &sp.mag.layout, &self.outer, n, &s.g_b, false);
            let u = self.vector(&self.u_out, &sp.vel.layout, &self.outer, n, &s.g_u, true);
            let tau = self.scalar(&self.t_out, &sp.buoy.layout, r, n, &s.g_t, true);
            let mut th = self.angular.synth_scalar(&theta.at(r), r, true);
            if theta.gradient_free() {
                th.grad.iter_mut().for_each(|g| *g = [0.0; 3]);
            }
            let mut a = [0.0; 20];
            let mut umax: f64 = 0.0;
            for q in 0..np {
                let wq = ang.weight(q);
                let (bv, uv, gu) = (&b.v[q], &u.v[q], &u.grad[q]);
                umax = umax.max(dot(uv, uv).sqrt());
                let mut sym = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        let d = 0.5 * (gu[i][j] + gu[j][i]);
                        sym += d * d;
                    }
                }
                let buu = dot(&advect(uv, gu), uv);
                let btt = dot(uv, &tau.grad[q]) * tau.v[q];
                let cor = dot(&cross(&e3[q], uv), uv);
                let lor = dot(&cross(uv, bv), &c.v[q]);
                let bbub = dot(&advect(bv, gu), bv);
                let vals = [
                    dot(bv, bv) / p.mu_o,
                    p.rho * dot(uv, uv),
                    tau.v[q] * tau.v[q],
                    dot(&c.v[q], &c.v[q]) / p.sigma_o,
                    2.0 * p.rho * p.nu * sym,
                    p.kappa * dot(&tau.grad[q], &tau.grad[q]),
                    p.rho * p.g * th.v[q] * uv[0],
                    p.rho * p.g * tau.v[q] * uv[0],
                    -dot(uv, &th.grad[q]) * tau.v[q],
                    -p.kappa * dot(&th.grad[q], &tau.grad[q]),
                    p.rho * buu,
                    p.rho * buu.abs(),
                    btt,
                    btt.abs(),
                    p.rho * p.l_rot * cor,
                    p.rho * p.l_rot.abs() * dot(uv, uv),
                    lor,
                    lor.abs(),
                    bbub / p.mu_o,
                    bbub.abs() / p.mu_o,
                ];
                for (ak, v) in a.iter_mut().zip(vals) {
                    *ak += wq * v;
                }
            }
            (a.map(|x| x * self.outer.w[n]), umax)
        });
        // [E_B, D_B, lor, |lor|]
        let core = par::map_range(self.inner.len(), |n| {
            let b = self.vector(&self.b_in, &sp.mag.layout, &self.inner, n, &s.g_b, false);
            let c = self.vector(&self.c_in, &sp.mag.layout, &self.inner, n, &s.g_b, false);
            let u = self.vector(&self.u_in, &sp.vel.layout, &self.inner, n, &s.g_u, false);
            let mut a = [0.0; 4];
            for q in 0..np {
                let wq = ang.weight(q);
                let lor = dot(&cross(&u.v[q], &b.v[q]), &c.v[q]);
                let vals = [dot(&b.v[q], &b.v[q]) / p.mu_i, dot(&c.v[q], &c.v[q]) / p.sigma_i, lor, lor.abs()];
                for (ak, v) in a.iter_mut().zip(vals) {
                    *ak += wq * v;
                }
            }
            a.map(|x| x * self.inner.w[n])
        });
        let mut a = [0.0; 20];
        let mut u_max: f64 = 0.0;
        for (x, m) in &shell {
            u_max = u_max.max(*m);
            for (ak, v) in a.iter_mut().zip(x) {
                *ak += v;
            }
        }
        let mut ci = [0.0; 4];
        for x in &core {
            for (ak, v) in ci.iter_mut().zip(x) {
                *ak += v;
            }
        }
        let omega = sp.vel.omega(&s.g_u);
        let tau_ri = self.scalar(&self.t_ri, &sp.buoy.layout, p.r_i, 0, &s.g_t, false);
        let fb: Vec<[f64; 2]> = model.forcing.f_b.iter().map(|x| [*x, 0.0]).collect();
        let fb = ang.synth_scalar(&fb, p.r_i, false);
        let w_fb = -p.kappa * p.r_i * p.r_i * ang.integrate(|q| fb.v[q] * tau_ri.v[q]);
        let w_f = model
            .source(t)
            .map(|f| f.iter().zip(&s.g_t).map(|(a, b)| a * b).sum())
            .unwrap_or(0.0);
        let cor_rigid = p.j * p.l_rot * dot(&cross(&[0.0, 0.0, 1.0], &omega), &omega);
        let rel = |x: f64, scale: f64| if scale > 0.0 { x.abs() / scale } else { 0.0 };
        Terms {
            e_b: 0.5 * (a[0] + ci[0] + exterior_energy_of(sp, &s.g_b)),
            e_u: 0.5 * a[1],
            e_omega: 0.5 * p.j * dot(&omega, &omega),
            e_tau: 0.5 * a[2],
            d_b: a[3] + ci[1],
            d_u: a[4],
            d_tau: a[5],
            w_thetac: a[6],
            w_buoy: a[7],
            w_bconv: a[8],
            w_adiff: a[9],
            w_fb,
            w_f,
            canc_a: rel(a[10], a[11]).max(rel(a[12], a[13])),
            canc_b: rel(a[14] + cor_rigid, a[15] + p.j * p.l_rot.abs() * dot(&omega, &omega)),
            canc_c: rel(a[16] + ci[2] - a[18], a[17] + ci[3] + a[19]),
            u_max,
        }
    }
}

/// Ledger row for the step `prev → next`. `tolerance` bounds the relative
/// residual; breaching rows are flagged.
pub fn audit_step(auditor: &Auditor, model: &Model, prev: &StateVector, next: &StateVector, tolerance: f64) -> LedgerRow {
    let here = auditor.terms(model, prev, prev.t);
    audit_transition(auditor, model, prev, &here, next, tolerance).0
}

/// Same as [`audit_step`] with the terms of `prev` already known; also
/// returns the terms of `next`.
pub fn audit_transition(
    auditor: &Auditor,
    model: &Model,
    prev: &StateVector,
    here: &Terms,
    next: &StateVector,
    tolerance: f64,
) -> (LedgerRow, Terms) {
    let dt = next.t - prev.t;
    let there = auditor.terms(model, next, next.t);
    let mid_state = prev.midpoint(next);
    let mid = auditor.terms(model, &mid_state, mid_state.t);
    let df = there.energy() - here.energy();
    let residual = df + dt * mid.dissipation() - dt * mid.work();
    let scale = df.abs() + dt * mid.dissipation() + dt * mid.abs_work();
    let relative_residual = if scale > 0.0 { residual.abs() / scale } else { 0.0 };
    let row = LedgerRow {
        t: prev.t,
        terms: *here,
        residual,
        relative_residual,
        flagged: relative_residual > tolerance,
    };
    (row, there)
}

/// Row of a state with no outgoing step.
pub fn final_row(auditor: &Auditor, model: &Model, s: &StateVector) -> LedgerRow {
    LedgerRow {
        t: s.t,
        terms: auditor.terms(model, s, s.t),
        ..Default::default()
    }
}
