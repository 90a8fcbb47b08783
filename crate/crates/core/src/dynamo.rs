//! The Galerkin system for the magnetic, velocity and buoyancy coefficients,
//! its time integrator, initial-data projection and the Grönwall monitor.
//!
//! All three bases are orthonormal in their energy inner products and
//! diagonalize their dissipation forms, so the system reads
//! `dg/dt = -Λ g + N(g, t)` with diagonal Λ. Λ is integrated by
//! Crank-Nicolson and N by second-order Adams-Bashforth.

use crate::basis::{Layout, RadialBlock};
use crate::config::{Config, ForcingData, PhysicalParams};
use crate::error::{Error, Result};
use crate::forms::{advect, assemble, cross, dot, FormTables, Spaces};
use crate::magnetic::{exterior_energy_coeffs, factor_dot};
use crate::par;
use crate::spectral::quadrature::gauss_legendre_on;
use crate::spectral::{Region, SpectralResolution, SphericalHarmonicIndex, VecRad};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub t: f64,
    pub g_b: Vec<f64>,
    pub g_u: Vec<f64>,
    pub g_t: Vec<f64>,
}

impl StateVector {
    pub fn zeros(sizes: [usize; 3], t: f64) -> Self {
        Self {
            t,
            g_b: vec![0.0; sizes[0]],
            g_u: vec![0.0; sizes[1]],
            g_t: vec![0.0; sizes[2]],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.g_b.iter().chain(&self.g_u).chain(&self.g_t).all(|x| x.is_finite())
    }

    /// `F = ½(‖μ^{-1/2}B‖² + ρ‖u‖² + J|ω|² + ‖τ‖²)`: half the squared
    /// coefficient norm in the orthonormal bases.
    pub fn energy(&self) -> f64 {
        0.5 * self.g_b.iter().chain(&self.g_u).chain(&self.g_t).map(|x| x * x).sum::<f64>()
    }

    /// `(g + other) / 2` with time at the midpoint.
    pub fn midpoint(&self, other: &StateVector) -> StateVector {
        let avg = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
        StateVector {
            t: 0.5 * (self.t + other.t),
            g_b: avg(&self.g_b, &other.g_b),
            g_u: avg(&self.g_u, &other.g_u),
            g_t: avg(&self.g_t, &other.g_t),
        }
    }
}

/// Discrete spaces, form tables and forcing of one configuration.
#[derive(Clone, Debug)]
pub struct Model {
    pub sp: Spaces,
    pub tables: FormTables,
    pub forcing: ForcingData,
}

impl Model {
    pub fn new(params: &PhysicalParams, res: &SpectralResolution, forcing: &ForcingData) -> Result<Self> {
        let (sp, tables) = assemble(params, res, forcing)?;
        Ok(Self {
            sp,
            tables,
            forcing: forcing.clone(),
        })
    }

    pub fn from_config(cfg: &Config) -> Result<Self> {
        Self::new(&cfg.params, &cfg.run.resolution, &cfg.forcing)
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.sp.params
    }

    pub fn sizes(&self) -> [usize; 3] {
        self.sp.sizes()
    }

    /// Coefficients of the volume source at time t, if any.
    pub fn source(&self, t: f64) -> Option<Vec<f64>> {
        self.forcing.f.eval(t, self.sp.buoy.n_modes())
    }
}

/// Right-hand side split: `N` holds everything except the diagonal
/// dissipation.
#[derive(Clone, Debug, PartialEq)]
pub struct Tendency {
    pub b: Vec<f64>,
    pub u: Vec<f64>,
    pub t: Vec<f64>,
}

impl Tendency {
    fn zeros(sizes: [usize; 3]) -> Self {
        Self {
            b: vec![0.0; sizes[0]],
            u: vec![0.0; sizes[1]],
            t: vec![0.0; sizes[2]],
        }
    }

    fn add(&mut self, o: &Tendency) {
        for (a, b) in [(&mut self.b, &o.b), (&mut self.u, &o.u), (&mut self.t, &o.t)] {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn norms(&self) -> [f64; 3] {
        let n = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        [n(&self.b), n(&self.u), n(&self.t)]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepOptions {
    /// Keep the velocity coefficients fixed (kinematic runs).
    pub freeze_velocity: bool,
}

fn is_zero(v: &[f64]) -> bool {
    v.iter().all(|x| *x == 0.0)
}

/// `N(g, t)`: Lorentz pairing, advection, Lorentz force, Coriolis,
/// buoyancy and the boundary-data sources, tested against every basis
/// element.
pub fn explicit_terms(model: &Model, s: &StateVector, t: f64, opts: &StepOptions) -> Tendency {
    let sp = &model.sp;
    let tb = &model.tables;
    let p = &sp.params;
    let sizes = sp.sizes();
    let grid = &sp.angular;
    let (u0, b0, t0) = (is_zero(&s.g_u), is_zero(&s.g_b), is_zero(&s.g_t));
    let thc = !tb.theta.gradient_free();
    let want_u = !opts.freeze_velocity;

    let partial = par::map_range(sp.outer.len(), |n| {
        let mut out = Tendency::zeros(sizes);
        let w = sp.outer.w[n];
        let u = (!u0).then(|| sp.velocity(false, n, &s.g_u, want_u));
        let b = (!b0).then(|| sp.magnetic(false, n, &s.g_b, want_u));
        if let (Some(u), Some(b)) = (&u, &b) {
            let e: Vec<[f64; 3]> = u.v.iter().zip(&b.v).map(|(x, y)| cross(x, y)).collect();
            sp.mag.curl_out.project(&sp.mag.layout, n, w, &grid.vector_moments(&e), &mut out.b);
        }
        if want_u && (u.is_some() || b.is_some()) {
            let mut f = vec![[0.0; 3]; grid.n_points()];
            if let Some(u) = &u {
                for (q, fq) in f.iter_mut().enumerate() {
                    let a = advect(&u.v[q], &u.grad[q]);
                    for c in 0..3 {
                        fq[c] -= p.rho * a[c];
                    }
                }
            }
            if let Some(b) = &b {
                for (q, fq) in f.iter_mut().enumerate() {
                    let a = advect(&b.v[q], &b.grad[q]);
                    for c in 0..3 {
                        fq[c] += a[c] / p.mu_o;
                    }
                }
            }
            sp.vel.field_out.project(&sp.vel.layout, n, w, &grid.vector_moments(&f), &mut out.u);
        }
        if let Some(u) = &u {
            if !t0 || thc {
                let mut f = vec![0.0; grid.n_points()];
                if !t0 {
                    let tau = sp.buoyancy(n, &s.g_t, true);
                    for (q, fq) in f.iter_mut().enumerate() {
                        *fq -= dot(&u.v[q], &tau.grad[q]);
                    }
                }
                if thc {
                    let th = sp.theta(&tb.theta, n, true);
                    for (q, fq) in f.iter_mut().enumerate() {
                        *fq -= dot(&u.v[q], &th.grad[q]);
                    }
                }
                sp.buoy.field_out.project_scalar(&sp.buoy.layout, n, w, &grid.scalar_moments(&f), &mut out.t);
            }
        }
        out
    });
    let mut acc = Tendency::zeros(sizes);
    for x in &partial {
        acc.add(x);
    }
    if !u0 && !b0 {
        let inner = par::map_range(sp.inner.len(), |n| {
            let mut out = vec![0.0; sizes[0]];
            let u = sp.velocity(true, n, &s.g_u, false);
            let b = sp.magnetic(true, n, &s.g_b, false);
            let e: Vec<[f64; 3]> = u.v.iter().zip(&b.v).map(|(x, y)| cross(x, y)).collect();
            sp.mag.curl_in.project(&sp.mag.layout, n, sp.inner.w[n], &grid.vector_moments(&e), &mut out);
            out
        });
        for x in &inner {
            for (a, b) in acc.b.iter_mut().zip(x) {
                *a += b;
            }
        }
    }
    if want_u {
        if !b0 {
            // Boundary term of the Lorentz force on the rigid-coupled modes:
            // μ_o⁻¹ ∫_{r=R_i} B_r (B · v_j) dS.
            let b = sp.magnetic_at_ri(&s.g_b);
            let f: Vec<[f64; 3]> = b.v.iter().map(|v| [v[0] * v[0], v[0] * v[1], v[0] * v[2]]).collect();
            let ri2 = p.r_i * p.r_i;
            sp.vel.field_ri.project(&sp.vel.layout, 0, ri2 / p.mu_o, &grid.vector_moments(&f), &mut acc.u);
        }
        tb.coriolis.apply(&s.g_u, &mut acc.u);
        tb.buoyancy_coupling.apply(&s.g_t, &mut acc.u);
        for (a, b) in acc.u.iter_mut().zip(&tb.thetac_buoyancy) {
            *a += b;
        }
    }
    for j in 0..sizes[2] {
        acc.t[j] -= p.kappa * (tb.thetac_diffusion[j] + tb.flux[j]);
    }
    if let Some(f) = model.source(t) {
        for (a, b) in acc.t.iter_mut().zip(&f) {
            *a += b;
        }
    }
    if opts.freeze_velocity {
        acc.u.iter_mut().for_each(|x| *x = 0.0);
    }
    acc
}

/// Full time derivative `-Λ g + N(g, t)`.
pub fn rhs(model: &Model, s: &StateVector, t: f64) -> Tendency {
    let mut n = explicit_terms(model, s, t, &StepOptions::default());
    let tb = &model.tables;
    for (x, (g, l)) in n.b.iter_mut().zip(s.g_b.iter().zip(&tb.d)) {
        *x -= l * g;
    }
    for (x, (g, l)) in n.u.iter_mut().zip(s.g_u.iter().zip(&tb.a_s)) {
        *x -= l * g;
    }
    for (x, (g, l)) in n.t.iter_mut().zip(s.g_t.iter().zip(&tb.a)) {
        *x -= l * g;
    }
    n
}

/// Per-step diagnostics of the integrator itself.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepInfo {
    pub dt: f64,
    /// Norms of the explicit terms `[N_B, N_u, N_τ]` at the start of the step.
    pub nonlinear: [f64; 3],
    pub startup: bool,
}

/// CN-AB2 integrator state.
#[derive(Clone, Debug)]
pub struct Stepper {
    pub dt: f64,
    pub opts: StepOptions,
    history: Option<Tendency>,
}

impl Stepper {
    pub fn new(dt: f64, opts: StepOptions) -> Self {
        Self { dt, opts, history: None }
    }

    /// Drops the Adams-Bashforth history; the next step is a start-up step.
    pub fn reset(&mut self) {
        self.history = None;
    }
}

fn cn_update(g: &[f64], lam: &[f64], n: &[f64], dt: f64) -> Vec<f64> {
    g.iter()
        .zip(lam)
        .zip(n)
        .map(|((g, l), n)| ((1.0 - 0.5 * l * dt) * g + dt * n) / (1.0 + 0.5 * l * dt))
        .collect()
}

fn advance(model: &Model, s: &StateVector, n: &Tendency, dt: f64, freeze: bool) -> StateVector {
    let tb = &model.tables;
    StateVector {
        t: s.t + dt,
        g_b: cn_update(&s.g_b, &tb.d, &n.b, dt),
        g_u: if freeze { s.g_u.clone() } else { cn_update(&s.g_u, &tb.a_s, &n.u, dt) },
        g_t: cn_update(&s.g_t, &tb.a, &n.t, dt),
    }
}

/// One step: Crank-Nicolson on the diagonal dissipation, Adams-Bashforth 2
/// on N. Without history the step uses the explicit midpoint for N.
pub fn step_imex(model: &Model, s: &StateVector, stepper: &mut Stepper) -> Result<(StateVector, StepInfo)> {
    let dt = stepper.dt;
    if !(dt > 0.0) {
        return Err(Error::Invalid(format!("time step must be positive, got {dt}")));
    }
    let freeze = stepper.opts.freeze_velocity;
    let n0 = explicit_terms(model, s, s.t, &stepper.opts);
    let (next, startup) = match &stepper.history {
        Some(prev) => {
            let mix = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| 1.5 * x - 0.5 * y).collect();
            let n = Tendency {
                b: mix(&n0.b, &prev.b),
                u: mix(&n0.u, &prev.u),
                t: mix(&n0.t, &prev.t),
            };
            (advance(model, s, &n, dt, freeze), false)
        }
        None => {
            let half = advance(model, s, &n0, 0.5 * dt, freeze);
            let nh = explicit_terms(model, &half, s.t + 0.5 * dt, &stepper.opts);
            (advance(model, s, &nh, dt, freeze), true)
        }
    };
    let info = StepInfo {
        dt,
        nonlinear: n0.norms(),
        startup,
    };
    stepper.history = Some(n0);
    if !next.is_finite() {
        return Err(Error::NonFinite {
            t: next.t,
            last_good: s.t,
        });
    }
    Ok((next, info))
}

/// Per-(l, m) radial profiles of a vector field (factors per region).
pub trait VectorProfiles: Sync {
    fn factors(&self, lm: usize, region: Region, r: f64) -> VecRad;
}

/// Per-(l, m) radial profiles of a scalar field on the shell.
pub trait ScalarProfiles: Sync {
    fn value(&self, lm: usize, r: f64) -> f64;
}

/// A field spanned by radial blocks with coefficients in `layout` order.
pub struct BasisField<'a> {
    pub blocks: &'a [RadialBlock],
    pub layout: &'a Layout,
    pub g: &'a [f64],
}

impl VectorProfiles for BasisField<'_> {
    fn factors(&self, lm: usize, region: Region, r: f64) -> VecRad {
        let mut v = VecRad::default();
        for s in self.layout.slots.iter().filter(|s| s.lm == lm) {
            for k in 0..s.len {
                let c = self.g[s.offset + k];
                if c != 0.0 {
                    v.axpy(c, &self.blocks[s.profile].vecrad(k, region, r));
                }
            }
        }
        v
    }
}

impl ScalarProfiles for BasisField<'_> {
    fn value(&self, lm: usize, r: f64) -> f64 {
        self.factors(lm, Region::Outer, r).a
    }
}

#[derive(Default)]
pub struct InitialData<'a> {
    pub b: Option<&'a dyn VectorProfiles>,
    pub u: Option<&'a dyn VectorProfiles>,
    pub omega: [f64; 3],
    pub tau: Option<&'a dyn ScalarProfiles>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub state: StateVector,
    /// `[‖B₀‖²_𝔹⁰, ‖(u₀, ω₀)‖²_𝕌⁰, ‖τ₀‖²]`.
    pub input: [f64; 3],
    /// Same norms of the projection.
    pub projected: [f64; 3],
}

/// Gauss rules for projecting arbitrary smooth profiles.
pub(crate) struct ProjectionRules {
    pub(crate) inner: (Vec<f64>, Vec<f64>),
    pub(crate) outer: (Vec<f64>, Vec<f64>),
    /// `s ∈ (0, 1]`, `r = R_o / s`.
    pub(crate) exterior: (Vec<f64>, Vec<f64>),
}

impl ProjectionRules {
    pub(crate) fn new(p: &PhysicalParams, n: usize) -> Self {
        let with_r2 = |(r, w): (Vec<f64>, Vec<f64>)| {
            let w = r.iter().zip(&w).map(|(r, w)| w * r * r).collect();
            (r, w)
        };
        let (s, ws) = gauss_legendre_on(n, 0.0, 1.0);
        let r: Vec<f64> = s.iter().map(|s| p.r_o / s).collect();
        let w = s.iter().zip(&ws).zip(&r).map(|((s, w), r)| w * p.r_o / (s * s) * r * r).collect();
        Self {
            inner: with_r2(gauss_legendre_on(n, 0.0, p.r_i)),
            outer: with_r2(gauss_legendre_on(n, p.r_i, p.r_o)),
            exterior: (r, w),
        }
    }
}

/// Orthogonal projection onto the discrete spans in the 𝔹⁰, 𝕌⁰ and 𝕋⁰
/// inner products.
pub fn project_initial_data(sp: &Spaces, data: &InitialData, t0: f64) -> Projection {
    let p = &sp.params;
    let rules = ProjectionRules::new(p, 96);
    let mut st = StateVector::zeros(sp.sizes(), t0);
    let mut input = [0.0; 3];
    if let Some(b) = data.b {
        let regions = [(Region::Inner, &rules.inner), (Region::Outer, &rules.outer), (Region::Exterior, &rules.exterior)];
        let rows = par::map(&sp.mag.layout.slots, |s| {
            let blk = &sp.mag.blocks[s.profile];
            let mut g = vec![0.0; s.len];
            let mut e = 0.0;
            for (region, (r, w)) in regions {
                let mu = if region == Region::Exterior { p.mu_e } else { p.mu(region) };
                for (ri, wi) in r.iter().zip(w) {
                    let f = b.factors(s.lm, region, *ri);
                    if f.is_zero() {
                        continue;
                    }
                    if s.family == crate::basis::Family::Toroidal {
                        // Each (l, m) has two family slots; count the input once.
                        e += wi * factor_dot(s.l, &f, &f) / mu;
                    }
                    for (k, gk) in g.iter_mut().enumerate() {
                        *gk += wi * factor_dot(s.l, &f, &blk.vecrad(k, region, *ri)) / mu;
                    }
                }
            }
            (g, e)
        });
        for (s, (g, e)) in sp.mag.layout.slots.iter().zip(rows) {
            st.g_b[s.offset..s.offset + s.len].copy_from_slice(&g);
            input[0] += e;
        }
    }
    if data.u.is_some() || data.omega.iter().any(|x| *x != 0.0) {
        let rows = par::map(&sp.vel.layout.slots, |s| {
            let blk = &sp.vel.blocks[s.profile];
            let mut g = vec![0.0; s.len];
            let mut e = 0.0;
            if let Some(u) = data.u {
                let (r, w) = &rules.outer;
                for (ri, wi) in r.iter().zip(w) {
                    let f = u.factors(s.lm, Region::Outer, *ri);
                    if f.is_zero() {
                        continue;
                    }
                    if s.family == crate::basis::Family::Toroidal {
                        e += wi * p.rho * factor_dot(s.l, &f, &f);
                    }
                    for (k, gk) in g.iter_mut().enumerate() {
                        *gk += wi * p.rho * factor_dot(s.l, &f, &blk.vecrad(k, Region::Outer, *ri));
                    }
                }
            }
            for (k, gk) in g.iter_mut().enumerate() {
                *gk += p.j * dot(&data.omega, &sp.vel.omega_of(s.offset + k));
            }
            (g, e)
        });
        for (s, (g, e)) in sp.vel.layout.slots.iter().zip(rows) {
            st.g_u[s.offset..s.offset + s.len].copy_from_slice(&g);
            input[1] += e;
        }
        input[1] += p.j * dot(&data.omega, &data.omega);
    }
    if let Some(tau) = data.tau {
        let (r, w) = &rules.outer;
        for s in &sp.buoy.layout.slots {
            let blk = &sp.buoy.blocks[s.profile];
            for (ri, wi) in r.iter().zip(w) {
                let v = tau.value(s.lm, *ri);
                if v == 0.0 {
                    continue;
                }
                input[2] += wi * v * v;
                for k in 0..s.len {
                    st.g_t[s.offset + k] += wi * v * blk.jet(k, Region::Outer, *ri).v();
                }
            }
        }
    }
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    Projection {
        projected: [sq(&st.g_b), sq(&st.g_u), sq(&st.g_t)],
        state: st,
        input,
    }
}

/// Seeded random coefficients `0.1 z (1+l)^{-2} (1+k)^{-2}`, z standard
/// normal, drawn in mode order for B, then (u, ω), then τ.
pub fn random_state(sp: &Spaces, seed: u64, t0: f64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |layout: &Layout| -> Vec<f64> {
        let mut g = vec![0.0; layout.n];
        for s in &layout.slots {
            for k in 0..s.len {
                let z: f64 = StandardNormal.sample(&mut rng);
                g[s.offset + k] = 0.1 * z / ((1.0 + s.l as f64).powi(2) * (1.0 + k as f64).powi(2));
            }
        }
        g
    };
    StateVector {
        t: t0,
        g_b: draw(&sp.mag.layout),
        g_u: draw(&sp.vel.layout),
        g_t: draw(&sp.buoy.layout),
    }
}

/// Data-dependent constants of the a priori energy bound.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GronwallConstants {
    pub theta_norm: f64,
    pub grad_theta_norm: f64,
    pub grad_theta_sup: f64,
    /// `‖f_b‖_{L²(∂Ω_i)}`.
    pub flux_norm: f64,
    pub source_sup: f64,
    /// Smallest C with `‖τ‖²_{L²(∂Ω_i)} ≤ C ‖∇τ‖²` on the discrete span.
    pub trace: f64,
    /// Smallest eigenvalue of `a` (Poincaré constant of the buoyancy span).
    pub lambda_tau: f64,
    /// Smallest eigenvalue of `2ρν a^S` against the 𝕌⁰ mass.
    pub lambda_u: f64,
    /// Additive part A and multiplicative part C₀ of `F' ≤ A + C₀ F`.
    pub additive: f64,
    pub growth: f64,
    /// `C = max(A, C₀)`.
    pub c: f64,
}

/// Young-inequality bookkeeping of the energy identity:
/// `F' + G = W ≤ A + C₀ F + ½ κ ‖∇τ‖² + ½ κ ‖∇τ‖²`, with
/// - `ρg⟨θ^c x̂, u⟩ ≤ g‖θ^c‖(ρ/2 + F)`
/// - `ρg⟨τ x̂, u⟩ ≤ g√ρ F`
/// - `|b(u, θ^c, τ)| ≤ ‖∇θ^c‖_∞ F / √ρ`
/// - `|κ a(θ^c, τ)| ≤ κ‖∇θ^c‖²/2 + κ‖∇τ‖²/2`
/// - `|κ⟨f_b, τ⟩| ≤ κ C_tr ‖f_b‖²/2 + κ‖∇τ‖²/2`
/// - `|⟨f, τ⟩| ≤ |f|/2 + |f| F`
///
/// so that `(F + 1)' ≤ C (F + 1)`.
pub fn gronwall_constants(model: &Model) -> GronwallConstants {
    let sp = &model.sp;
    let p = &sp.params;
    let grid = &sp.angular;
    let th = &model.tables.theta;
    let mut c = GronwallConstants::default();
    for n in 0..sp.outer.len() {
        let s = sp.theta(th, n, true);
        c.theta_norm += sp.outer.w[n] * grid.integrate(|q| s.v[q] * s.v[q]);
        c.grad_theta_norm += sp.outer.w[n] * grid.integrate(|q| dot(&s.grad[q], &s.grad[q]));
        for g in &s.grad {
            c.grad_theta_sup = c.grad_theta_sup.max(dot(g, g).sqrt());
        }
    }
    c.theta_norm = c.theta_norm.sqrt();
    c.grad_theta_norm = c.grad_theta_norm.sqrt();
    c.flux_norm = p.r_i * model.forcing.f_b.iter().map(|x| x * x).sum::<f64>().sqrt();
    c.source_sup = model.forcing.f.sup_norm();
    for s in &sp.buoy.layout.slots {
        let lam = &sp.buoy.blocks[s.profile].eigenvalues;
        let t = &sp.buoy.field_ri.f[s.profile][0];
        let tr: f64 = (0..s.len).map(|k| p.r_i * p.r_i * t[k].a * t[k].a / lam[k]).sum();
        c.trace = c.trace.max(tr);
    }
    c.lambda_tau = sp.buoy.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    c.lambda_u = sp.vel.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    c.additive = p.g * c.theta_norm * p.rho / 2.0
        + 0.5 * p.kappa * c.grad_theta_norm.powi(2)
        + 0.5 * p.kappa * c.trace * c.flux_norm.powi(2)
        + 0.5 * c.source_sup;
    c.growth = p.g * c.theta_norm + p.g * p.rho.sqrt() + c.grad_theta_sup / p.rho.sqrt() + c.source_sup;
    c.c = c.additive.max(c.growth);
    c
}

/// One sample of the energy history.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergySample {
    pub t: f64,
    pub energy: f64,
    /// `‖τ‖_{L²(Ω_o)}`.
    pub tau_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GronwallCertificate {
    pub constants: GronwallConstants,
    /// Largest `F(t) / ((F(0)+1) e^{Ct})`.
    pub worst_ratio: f64,
    pub holds: bool,
    /// `F(t) ≤ F(0) + S t` for constant boundary data.
    pub linear_slope: Option<f64>,
    pub linear_holds: Option<bool>,
    /// Uniform bound on `‖τ‖` for constant boundary data.
    pub tau_bound: Option<f64>,
    pub tau_sup: f64,
    pub tau_holds: Option<bool>,
    /// Whether F is nonincreasing along the history.
    pub monotone: bool,
}

/// Checks the exponential a priori bound, and for constant boundary data
/// the linear-growth and uniform buoyancy bounds.
///
/// For constant θ^c the buoyancy equation alone gives
/// `(‖τ‖²)' ≤ -a ‖τ‖² + K` with `a = κλ₁/2`,
/// `K = κ C_tr ‖f_b‖² + 2|f|²/(κλ₁)`, so `‖τ‖² ≤ max(‖τ₀‖², K/a)`; then
/// `ρg⟨τ x̂, u⟩ ≤ ρg²τ_sup²/(2λ_u) + D_u/2` gives the slope
/// `S = ρg²τ_sup²/(2λ_u) + κC_tr‖f_b‖²/2 + |f| τ_sup`.
pub fn gronwall_monitor(model: &Model, history: &[EnergySample]) -> GronwallCertificate {
    let c = gronwall_constants(model);
    let p = model.params();
    let f0 = history.first().map(|h| h.energy).unwrap_or(0.0);
    let t0 = history.first().map(|h| h.t).unwrap_or(0.0);
    let mut worst: f64 = 0.0;
    for h in history {
        worst = worst.max(h.energy / ((f0 + 1.0) * (c.c * (h.t - t0)).exp()));
    }
    let tau_sup = history.iter().map(|h| h.tau_norm).fold(0.0, f64::max);
    let monotone = history.windows(2).all(|w| w[1].energy <= w[0].energy);
    let mut cert = GronwallCertificate {
        constants: c,
        worst_ratio: worst,
        holds: worst <= 1.0,
        linear_slope: None,
        linear_holds: None,
        tau_bound: None,
        tau_sup,
        tau_holds: None,
        monotone,
    };
    if model.tables.theta.gradient_free() {
        let a = p.kappa * c.lambda_tau / 2.0;
        let k = p.kappa * c.trace * c.flux_norm.powi(2) + 2.0 * c.source_sup.powi(2) / (p.kappa * c.lambda_tau);
        let tau0 = history.first().map(|h| h.tau_norm).unwrap_or(0.0);
        let bound = tau0.powi(2).max(k / a).sqrt();
        let slope = p.rho * p.g.powi(2) * bound.powi(2) / (2.0 * c.lambda_u)
            + 0.5 * p.kappa * c.trace * c.flux_norm.powi(2)
            + c.source_sup * bound;
        cert.tau_bound = Some(bound);
        cert.tau_holds = Some(tau_sup <= bound * (1.0 + 1e-9));
        cert.linear_slope = Some(slope);
        cert.linear_holds = Some(history.iter().all(|h| h.energy <= f0 + slope * (h.t - t0) + 1e-12 * (1.0 + f0)));
    }
    cert
}

/// Unit vector of mode i in a space of size n.
pub fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// Exterior coefficient per (l, m) for magnetic coefficients g.
pub fn exterior_coefficients(sp: &Spaces, g: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; sp.nlm];
    for s in &sp.mag.layout.slots {
        let b = &sp.mag.blocks[s.profile];
        for k in 0..s.len {
            c[s.lm] += g[s.offset + k] * b.exterior(k);
        }
    }
    c
}

/// Closed-form `∫_{r>R_o} μ_e⁻¹|B|²`.
pub fn exterior_energy_of(sp: &Spaces, g: &[f64]) -> f64 {
    exterior_coefficients(sp, g)
        .iter()
        .enumerate()
        .skip(1)
        .map(|(lm, c)| {
            let l = SphericalHarmonicIndex::from_flat(lm).l;
            exterior_energy_coeffs(l, *c, *c, sp.params.r_o, sp.params.mu_e)
        })
        .sum()
}
