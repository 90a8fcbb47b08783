//! Biot-Savart law with refraction: recover the divergence-free field f with
//! `curl(μ⁻¹ f) = h` and the transmission conditions of 𝔹¹ from a current h
//! supported in the conductor.
//!
//! Everything is done per (l, m). A div-free h is stored through its
//! toroidal and poloidal scalars `(T_h, P_h)`. The Newton step builds
//! `f₁ = toroidal(P_h) + poloidal(P_f)` with `D_l P_f = -T_h`, solved by the
//! Green's kernel `r_<^l / r_>^{l+1}`; the refraction step adds `∇φ` with φ
//! a piecewise solid harmonic fixing the jumps of `μ (f₁ + ∇φ)·n`.

use crate::basis::{curl_vecrad, jet_to_vecrad, radial_laplacian, Family};
use crate::config::PhysicalParams;
use crate::dynamo::{ProjectionRules, VectorProfiles};
use crate::error::{Error, Result};
use crate::magnetic::{factor_dot, MagneticBasis};
use crate::par;
use crate::spectral::poly::{jacobi_jets, jacobi_sum};
use crate::spectral::quadrature::{gauss_legendre, gauss_legendre_on};
use crate::spectral::{Jet, PolyFamily, Region, SphericalHarmonicIndex, VecRad};
use nalgebra::{Matrix4, Vector4};

/// Radial basis of a series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    /// Polynomials in the affine coordinate of `[a, b]`.
    Interval(PolyFamily),
    /// `(r/b)^l J_k(2 (r/b)² - 1)` on the ball of radius b, with `J_k` the
    /// orthonormal Jacobi polynomials `P_k^{(0, l+1/2)}`.
    Ball,
}

/// Polynomial series on `[a, b]`, or a regular series on the ball `r < b`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialSeries {
    pub kind: SeriesKind,
    pub a: f64,
    pub b: f64,
    /// Degree l of a ball series.
    pub power: usize,
    pub c: Vec<f64>,
}

impl RadialSeries {
    /// Interpolates `f` at n Gauss nodes of the family.
    pub fn fit(family: PolyFamily, a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        let h = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut c = vec![0.0; n];
        match family {
            PolyFamily::Legendre => {
                let (x, w) = gauss_legendre(n);
                for (xi, wi) in x.iter().zip(&w) {
                    let v = f(mid + h * xi);
                    for (k, p) in family.jets(*xi, n).iter().enumerate() {
                        c[k] += (2.0 * k as f64 + 1.0) / 2.0 * wi * v * p.v();
                    }
                }
            }
            PolyFamily::Chebyshev => {
                for j in 0..n {
                    let xi = (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos();
                    let v = f(mid + h * xi);
                    for (k, p) in family.jets(xi, n).iter().enumerate() {
                        let s = if k == 0 { 1.0 } else { 2.0 };
                        c[k] += s / n as f64 * v * p.v();
                    }
                }
            }
        }
        Self {
            kind: SeriesKind::Interval(family),
            a,
            b,
            power: 0,
            c,
        }
    }

    /// Projects `q` onto n ball polynomials of degree l, where the field is
    /// `(r/b)^l q(r)`. The projection weight `(r/b)^{2l+2}` is polynomial in
    /// r, so Gauss-Legendre nodes in r integrate it exactly.
    pub fn fit_ball(b: f64, l: usize, n: usize, q: impl Fn(f64) -> f64) -> Self {
        let beta = l as f64 + 0.5;
        let (x, w) = gauss_legendre_on(2 * n + l + 4, 0.0, 1.0);
        let mut c = vec![0.0; n];
        for (rho, wi) in x.iter().zip(&w) {
            let v = 2.0 * wi * rho.powi(2 * l as i32 + 2) * q(rho * b);
            for (k, p) in jacobi_jets(beta, 2.0 * rho * rho - 1.0, n).iter().enumerate() {
                c[k] += v * p.v();
            }
        }
        Self {
            kind: SeriesKind::Ball,
            a: 0.0,
            b,
            power: l,
            c,
        }
    }

    pub fn jet(&self, r: f64) -> Jet {
        match self.kind {
            SeriesKind::Interval(family) => {
                let h = 0.5 * (self.b - self.a);
                let x = Jet::affine(-0.5 * (self.a + self.b) / h, 1.0 / h, r);
                let mut s = Jet::ZERO;
                for (k, p) in family.jets(x.v(), self.c.len()).iter().enumerate() {
                    s.axpy(self.c[k], p);
                }
                s.compose(x)
            }
            SeriesKind::Ball => {
                let rho = Jet::affine(0.0, 1.0 / self.b, r);
                let y = rho.mul(rho).scale(2.0).add(Jet::constant(-1.0));
                let mut s = Jet::ZERO;
                for (k, p) in jacobi_jets(self.power as f64 + 0.5, y.v(), self.c.len()).iter().enumerate() {
                    s.axpy(self.c[k], p);
                }
                Jet::power(rho.v(), self.power).compose(rho).mul(s.compose(y))
            }
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        match self.kind {
            SeriesKind::Interval(family) => {
                let x = (r - 0.5 * (self.a + self.b)) / (0.5 * (self.b - self.a));
                let (mut p0, mut p1) = (1.0, x);
                let mut s = 0.0;
                for (k, c) in self.c.iter().enumerate() {
                    let p = match k {
                        0 => 1.0,
                        1 => x,
                        _ => {
                            let kf = (k - 1) as f64;
                            let next = match family {
                                PolyFamily::Chebyshev => 2.0 * x * p1 - p0,
                                PolyFamily::Legendre => ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0),
                            };
                            p0 = p1;
                            p1 = next;
                            next
                        }
                    };
                    s += c * p;
                }
                s
            }
            SeriesKind::Ball => {
                let rho = r / self.b;
                rho.powi(self.power as i32) * jacobi_sum(self.power as f64 + 0.5, 2.0 * rho * rho - 1.0, &self.c)
            }
        }
    }
}

/// Toroidal and poloidal scalars of h for one (l, m) on both regions.
#[derive(Clone, Debug, PartialEq)]
pub struct CurrentMode {
    pub lm: usize,
    pub l: usize,
    /// `[inner, outer]` series of `T_h` and `P_h`.
    pub t: [RadialSeries; 2],
    pub p: [RadialSeries; 2],
}

impl CurrentMode {
    fn pick(&self, region: Region) -> Option<usize> {
        match region {
            Region::Inner => Some(0),
            Region::Outer => Some(1),
            Region::Exterior => None,
        }
    }

    pub fn t_jet(&self, region: Region, r: f64) -> Jet {
        self.pick(region).map(|k| self.t[k].jet(r)).unwrap_or(Jet::ZERO)
    }

    pub fn t_value(&self, region: Region, r: f64) -> f64 {
        self.pick(region).map(|k| self.t[k].value(r)).unwrap_or(0.0)
    }

    pub fn p_jet(&self, region: Region, r: f64) -> Jet {
        self.pick(region).map(|k| self.p[k].jet(r)).unwrap_or(Jet::ZERO)
    }

    /// Factors of h.
    pub fn vecrad(&self, region: Region, r: f64) -> VecRad {
        let mut v = jet_to_vecrad(Family::Toroidal, self.l, r, &self.t_jet(region, r));
        v.axpy(1.0, &jet_to_vecrad(Family::Poloidal, self.l, r, &self.p_jet(region, r)));
        v
    }
}

/// Divergence-free current supported in the conductor, zero outside.
#[derive(Clone, Debug, PartialEq)]
pub struct CurrentDensity {
    pub r_i: f64,
    pub r_o: f64,
    pub modes: Vec<CurrentMode>,
}

impl CurrentDensity {
    /// Fits per-mode scalars `(T_h, P_h)` given as functions of (lm, region, r).
    pub fn from_profiles(
        params: &PhysicalParams,
        lms: &[usize],
        family: PolyFamily,
        n_fit: usize,
        f: impl Fn(usize, Region, f64) -> (f64, f64) + Sync,
    ) -> Self {
        Self::fit_profiles(params, lms, family, n_fit, false, f)
    }

    /// With `reduced`, inner-ball values are given divided by `(r/R_i)^l`.
    fn fit_profiles(
        params: &PhysicalParams,
        lms: &[usize],
        family: PolyFamily,
        n_fit: usize,
        reduced: bool,
        f: impl Fn(usize, Region, f64) -> (f64, f64) + Sync,
    ) -> Self {
        let (ri, ro) = (params.r_i, params.r_o);
        let modes = par::map(lms, |&lm| {
            let l = SphericalHarmonicIndex::from_flat(lm).l;
            let fit = |region: Region, a: f64, b: f64, k: usize| {
                let pick = |r: f64| {
                    let v = f(lm, region, r);
                    if k == 0 { v.0 } else { v.1 }
                };
                if region == Region::Inner {
                    let pre = |r: f64| if reduced { 1.0 } else { (r / b).powi(l as i32) };
                    RadialSeries::fit_ball(b, l, n_fit, |r| pick(r) / pre(r))
                } else {
                    RadialSeries::fit(family, a, b, n_fit + l, pick)
                }
            };
            CurrentMode {
                lm,
                l,
                t: [fit(Region::Inner, 0.0, ri, 0), fit(Region::Outer, ri, ro, 0)],
                p: [fit(Region::Inner, 0.0, ri, 1), fit(Region::Outer, ri, ro, 1)],
            }
        });
        Self { r_i: ri, r_o: ro, modes }
    }

    /// `h = curl(μ⁻¹ B)` for magnetic coefficients g.
    pub fn from_magnetic(basis: &MagneticBasis, g: &[f64], family: PolyFamily) -> Self {
        let p = &basis.params;
        let res = &basis.resolution;
        let mut lms: Vec<usize> = basis
            .layout
            .slots
            .iter()
            .filter(|s| g[s.offset..s.offset + s.len].iter().any(|x| *x != 0.0))
            .map(|s| s.lm)
            .collect();
        lms.dedup();
        let n_fit = 2 * res.n_r_inner.max(res.n_r_outer) + 24;
        // Inner values are reduced: D_l((r/R_i)^l q) = (r/R_i)^l (q'' + 2(l+1) q'/r).
        Self::fit_profiles(p, &lms, family, n_fit, true, |lm, region, r| {
            let mut th = 0.0;
            let mut ph = 0.0;
            for s in basis.layout.slots.iter().filter(|s| s.lm == lm) {
                let b = &basis.blocks[s.profile];
                for k in 0..s.len {
                    let c = g[s.offset + k];
                    if c == 0.0 {
                        continue;
                    }
                    let (v, d) = if region == Region::Inner {
                        let q = b.inner_reduced_jet(k, r);
                        (q.v(), q.d2() + 2.0 * (s.l as f64 + 1.0) * q.d1() / r)
                    } else {
                        let j = b.jet(k, region, r);
                        (j.v(), radial_laplacian(s.l, r, &j).0)
                    };
                    match s.family {
                        Family::Toroidal => ph += c * v / p.mu(region),
                        _ => th -= c * d / p.mu(region),
                    }
                }
            }
            (th, ph)
        })
    }

    pub fn mode(&self, lm: usize) -> Option<&CurrentMode> {
        self.modes.iter().find(|m| m.lm == lm)
    }

    /// `‖h‖²_{L²(Ω_c)}`.
    pub fn norm_sq(&self, params: &PhysicalParams) -> f64 {
        let rules = ProjectionRules::new(params, 96);
        self.modes
            .iter()
            .map(|m| {
                [(Region::Inner, &rules.inner), (Region::Outer, &rules.outer)]
                    .iter()
                    .map(|(region, (r, w))| {
                        r.iter()
                            .zip(w.iter())
                            .map(|(r, w)| {
                                let v = m.vecrad(*region, *r);
                                w * factor_dot(m.l, &v, &v)
                            })
                            .sum::<f64>()
                    })
                    .sum::<f64>()
            })
            .sum()
    }
}

/// `∫_a^b s^pw S(s) ds` with `rule` a Gauss-Legendre rule on [-1, 1].
fn segment(rule: &(Vec<f64>, Vec<f64>), a: f64, b: f64, pw: i32, src: impl Fn(f64) -> f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (h, c) = (0.5 * (b - a), 0.5 * (b + a));
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(x, w)| {
            let s = c + h * x;
            h * w * s.powi(pw) * src(s)
        })
        .sum()
}

/// Green integrals `I₁(r) = ∫₀^r s^{l+2} S ds`, `I₂(r) = ∫_r^{R_o} s^{1-l} S ds`
/// of a source piecewise on `[0, R_i] ∪ [R_i, R_o]`.
fn green_integrals(l: usize, r: f64, r_i: f64, r_o: f64, rule: &(Vec<f64>, Vec<f64>), src: &dyn Fn(Region, f64) -> f64) -> (f64, f64) {
    let (pw1, pw2) = (l as i32 + 2, 1 - l as i32);
    let (inner, outer) = (|s| src(Region::Inner, s), |s| src(Region::Outer, s));
    let rc = r.min(r_o);
    let i1 = segment(rule, 0.0, rc.min(r_i), pw1, inner) + segment(rule, r_i, rc, pw1, outer);
    let i2 = if r >= r_o {
        0.0
    } else {
        segment(rule, r, r_i, pw2, inner) + segment(rule, r.max(r_i), r_o, pw2, outer)
    };
    (i1, i2)
}

/// Scalar Newton potential of one (l, m) component:
/// `ψ(r) = -(1/(2l+1)) ∫ r_<^l / r_>^{l+1} S(s) s² ds`, so that
/// `Δ(ψ Y) = S Y` with decay at infinity. `S` is supported in `[0, R_o]`
/// with a possible kink at `R_i`.
pub fn newton_potential_scalar(l: usize, r: f64, r_i: f64, r_o: f64, n: usize, src: &dyn Fn(Region, f64) -> f64) -> f64 {
    let (i1, i2) = green_integrals(l, r, r_i, r_o, &gauss_legendre(n), src);
    let lf = l as f64;
    -(r.powf(-(lf + 1.0)) * i1 + r.powi(l as i32) * i2) / (2.0 * lf + 1.0)
}

/// `f₁ = -curl 𝓛₀ h`, one (l, m) at a time.
#[derive(Clone, Debug, PartialEq)]
pub struct NewtonField {
    pub h: CurrentDensity,
    pub n_quad: usize,
    rule: (Vec<f64>, Vec<f64>),
    /// Per mode: `I₁` over the inner ball, `I₁` and `I₂` over the shell.
    totals: Vec<[f64; 3]>,
}

/// Divergence-free `f₁` with `curl f₁ = h` on all of ℝ³ and decay at infinity.
pub fn newton_div_curl(h: &CurrentDensity) -> NewtonField {
    let n = h.modes.iter().map(|m| m.t[0].c.len().max(m.t[1].c.len()) + m.l + 8).max().unwrap_or(8);
    let rule = gauss_legendre(n);
    let totals = h
        .modes
        .iter()
        .map(|m| {
            let (pw1, pw2) = (m.l as i32 + 2, 1 - m.l as i32);
            let (inner, outer) = (|s| m.t_value(Region::Inner, s), |s| m.t_value(Region::Outer, s));
            [
                segment(&rule, 0.0, h.r_i, pw1, inner),
                segment(&rule, h.r_i, h.r_o, pw1, outer),
                segment(&rule, h.r_i, h.r_o, pw2, outer),
            ]
        })
        .collect();
    NewtonField {
        h: h.clone(),
        n_quad: n,
        rule,
        totals,
    }
}

impl NewtonField {
    /// Jet `[P, P', P'']` of the poloidal scalar of f₁ (third entry unused).
    pub fn poloidal_jet(&self, m: &CurrentMode, region: Region, r: f64) -> Jet {
        let (ri, ro) = (self.h.r_i, self.h.r_o);
        let k = self.h.modes.iter().position(|x| x.lm == m.lm);
        let (i1, i2) = match k.map(|k| self.totals[k]) {
            Some([in1, out1, out2]) => {
                let (pw1, pw2) = (m.l as i32 + 2, 1 - m.l as i32);
                let (inner, outer) = (|s| m.t_value(Region::Inner, s), |s| m.t_value(Region::Outer, s));
                if r <= ri {
                    (segment(&self.rule, 0.0, r, pw1, inner), segment(&self.rule, r, ri, pw2, inner) + out2)
                } else if r < ro {
                    (in1 + segment(&self.rule, ri, r, pw1, outer), segment(&self.rule, r, ro, pw2, outer))
                } else {
                    (in1 + out1, 0.0)
                }
            }
            None => {
                let src = |reg: Region, s: f64| m.t_value(reg, s);
                green_integrals(m.l, r, ri, ro, &self.rule, &src)
            }
        };
        let l = m.l as f64;
        let c = 1.0 / (2.0 * l + 1.0);
        let p = c * (r.powf(-(l + 1.0)) * i1 + r.powf(l) * i2);
        let dp = c * (-(l + 1.0) * r.powf(-(l + 2.0)) * i1 + l * r.powf(l - 1.0) * i2);
        let d2p = -m.t_value(region, r) - 2.0 * dp / r + l * (l + 1.0) * p / (r * r);
        Jet([p, dp, d2p, 0.0])
    }

    /// Factors of f₁.
    pub fn vecrad(&self, lm: usize, region: Region, r: f64) -> VecRad {
        let Some(m) = self.h.mode(lm) else {
            return VecRad::default();
        };
        let mut v = jet_to_vecrad(Family::Toroidal, m.l, r, &m.p_jet(region, r));
        v.axpy(1.0, &jet_to_vecrad(Family::Poloidal, m.l, r, &self.poloidal_jet(m, region, r)));
        v
    }

    /// Radial component factor `L P_f / r` (the normal trace).
    pub fn normal(&self, m: &CurrentMode, r: f64) -> f64 {
        let region = if r < self.h.r_o { Region::Outer } else { Region::Exterior };
        let l = m.l as f64;
        l * (l + 1.0) * self.poloidal_jet(m, region, r).v() / r
    }
}

/// Per-(l, m) solution of `div(μ ∇φ) = 0` with prescribed jumps of `μ ∂_r φ`:
/// `φ = a r^l` inside, `b r^l + c r^{-(l+1)}` in the shell, `d r^{-(l+1)}`
/// outside.
#[derive(Clone, Debug, PartialEq)]
pub struct RefractionSolve {
    pub lm: usize,
    pub l: usize,
    pub coeffs: [f64; 4],
    /// Prescribed jumps `[μ∂_rφ]` (outside minus inside) at R_i and R_o.
    pub jumps: [f64; 2],
    /// Largest mismatch of φ continuity and of the flux jumps.
    pub continuity_residual: f64,
    pub jump_residual: f64,
}

impl RefractionSolve {
    /// Jet of φ on `region`.
    pub fn phi(&self, region: Region, r: f64) -> Jet {
        let [a, b, c, d] = self.coeffs;
        let up = Jet::power(r, self.l);
        let down = decay_jet(self.l, r);
        match region {
            Region::Inner => up.scale(a),
            Region::Outer => up.scale(b).add(down.scale(c)),
            Region::Exterior => down.scale(d),
        }
    }

    /// Poloidal scalar of `∇φ`: `r^l ↦ r^l/(l+1)`, `r^{-(l+1)} ↦ -r^{-(l+1)}/l`.
    pub fn gradient_poloidal(&self, region: Region, r: f64) -> Jet {
        let [a, b, c, d] = self.coeffs;
        let l = self.l as f64;
        let up = Jet::power(r, self.l).scale(1.0 / (l + 1.0));
        let down = decay_jet(self.l, r).scale(-1.0 / l);
        match region {
            Region::Inner => up.scale(a),
            Region::Outer => up.scale(b).add(down.scale(c)),
            Region::Exterior => down.scale(d),
        }
    }
}

fn decay_jet(l: usize, r: f64) -> Jet {
    let n = -(l as f64 + 1.0);
    let f = r.powf(n);
    Jet([f, n * f / r, n * (n - 1.0) * f / (r * r), n * (n - 1.0) * (n - 2.0) * f / (r * r * r)])
}

/// Solves the two-interface refraction problem for one (l, m), l ≥ 1.
pub fn refraction_correction(lm: usize, jumps: [f64; 2], params: &PhysicalParams) -> Result<RefractionSolve> {
    let l = SphericalHarmonicIndex::from_flat(lm).l;
    if l == 0 {
        if jumps.iter().any(|j| *j != 0.0) {
            return Err(Error::Invalid("l = 0 admits no nonzero flux jump with decay".into()));
        }
        return Ok(RefractionSolve {
            lm,
            l,
            coeffs: [0.0; 4],
            jumps,
            continuity_residual: 0.0,
            jump_residual: 0.0,
        });
    }
    let (ri, ro) = (params.r_i, params.r_o);
    let (ui, di) = (Jet::power(ri, l), decay_jet(l, ri));
    let (uo, dout) = (Jet::power(ro, l), decay_jet(l, ro));
    let (mi, mo, me) = (params.mu_i, params.mu_o, params.mu_e);
    #[rustfmt::skip]
    let m = Matrix4::new(
        ui.v(), -ui.v(), -di.v(), 0.0,
        0.0, uo.v(), dout.v(), -dout.v(),
        -mi * ui.d1(), mo * ui.d1(), mo * di.d1(), 0.0,
        0.0, -mo * uo.d1(), -mo * dout.d1(), me * dout.d1(),
    );
    let rhs = Vector4::new(0.0, 0.0, jumps[0], jumps[1]);
    let x = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Invalid(format!("singular refraction system at l = {l}")))?;
    let mut s = RefractionSolve {
        lm,
        l,
        coeffs: [x[0], x[1], x[2], x[3]],
        jumps,
        continuity_residual: 0.0,
        jump_residual: 0.0,
    };
    let (pi, po) = (s.phi(Region::Inner, ri), s.phi(Region::Outer, ri));
    let (qo, qe) = (s.phi(Region::Outer, ro), s.phi(Region::Exterior, ro));
    let scale = x.amax().max(1e-300);
    s.continuity_residual = ((pi.v() - po.v()).abs() / (ri.powi(l as i32))).max((qo.v() - qe.v()).abs() / ro.powi(l as i32)) / scale;
    let jmax = jumps[0].abs().max(jumps[1].abs()).max(1e-300);
    s.jump_residual = ((mo * po.d1() - mi * pi.d1() - jumps[0]).abs()).max((me * qe.d1() - mo * qo.d1() - jumps[1]).abs()) / jmax;
    Ok(s)
}

/// `f = μ (f₁ + ∇φ)`, the unique element of 𝔹¹ with `curl(μ⁻¹ f) = h`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiotSavartField {
    pub params: PhysicalParams,
    pub newton: NewtonField,
    pub refraction: Vec<RefractionSolve>,
}

pub fn biot_savart_reconstruct(h: &CurrentDensity, params: &PhysicalParams) -> Result<BiotSavartField> {
    let newton = newton_div_curl(h);
    let refraction = par::map(&h.modes, |m| {
        let (ni, no) = (newton.normal(m, params.r_i), newton.normal(m, params.r_o));
        let jumps = [-(params.mu_o - params.mu_i) * ni, -(params.mu_e - params.mu_o) * no];
        refraction_correction(m.lm, jumps, params)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(BiotSavartField {
        params: params.clone(),
        newton,
        refraction,
    })
}

impl BiotSavartField {
    fn mu(&self, region: Region) -> f64 {
        match region {
            Region::Exterior => self.params.mu_e,
            r => self.params.mu(r),
        }
    }

    /// Factors of `μ⁻¹ f = f₁ + ∇φ`.
    pub fn potential_factors(&self, lm: usize, region: Region, r: f64) -> VecRad {
        let Some(k) = self.newton.h.modes.iter().position(|m| m.lm == lm) else {
            return VecRad::default();
        };
        let m = &self.newton.h.modes[k];
        let mut v = jet_to_vecrad(Family::Toroidal, m.l, r, &m.p_jet(region, r));
        let p = self.newton.poloidal_jet(m, region, r).add(self.refraction[k].gradient_poloidal(region, r));
        v.axpy(1.0, &jet_to_vecrad(Family::Poloidal, m.l, r, &p));
        v
    }

    /// Coefficient of `r^{-(l+1)}/l` in the exterior poloidal scalar of f.
    pub fn exterior_coefficient(&self, lm: usize) -> f64 {
        let Some(k) = self.newton.h.modes.iter().position(|m| m.lm == lm) else {
            return 0.0;
        };
        let m = &self.newton.h.modes[k];
        let ro = self.params.r_o;
        let l = m.l as f64;
        let p = self.newton.poloidal_jet(m, Region::Exterior, ro).v() * ro.powf(l + 1.0);
        self.params.mu_e * (l * p - self.refraction[k].coeffs[3])
    }

    /// Membership residuals: jumps of `f·n` and of tangential `μ⁻¹ f` at both
    /// interfaces, relative to the largest factor involved.
    pub fn interface_residuals(&self) -> (f64, f64) {
        let (mut normal, mut tangential) = (0.0_f64, 0.0_f64);
        for m in &self.newton.h.modes {
            for (r, a, b) in [(self.params.r_i, Region::Inner, Region::Outer), (self.params.r_o, Region::Outer, Region::Exterior)] {
                let (fa, fb) = (self.factors(m.lm, a, r), self.factors(m.lm, b, r));
                let (ga, gb) = (self.potential_factors(m.lm, a, r), self.potential_factors(m.lm, b, r));
                let sn = fa.a.abs().max(fb.a.abs()).max(1e-300);
                let st = ga.q.abs().max(gb.q.abs()).max(ga.t.abs()).max(gb.t.abs()).max(1e-300);
                normal = normal.max((fa.a - fb.a).abs() / sn);
                tangential = tangential.max((ga.q - gb.q).abs().max((ga.t - gb.t).abs()) / st);
            }
        }
        (normal, tangential)
    }

    /// Relative L² mismatch of `curl(μ⁻¹ f)` against h, where the curl is
    /// taken spectrally from fresh series fits of the reconstructed scalars.
    pub fn curl_residual(&self, n_fit: usize, checks: usize) -> f64 {
        let p = &self.params;
        let (mut num, mut den) = (0.0, 0.0);
        for (k, m) in self.newton.h.modes.iter().enumerate() {
            for (region, a, b) in [(Region::Inner, 0.0, p.r_i), (Region::Outer, p.r_i, p.r_o)] {
                let refit = |f: &dyn Fn(f64) -> f64| match region {
                    Region::Inner => RadialSeries::fit_ball(b, m.l, n_fit, |r| f(r) / (r / b).powi(m.l as i32)),
                    _ => RadialSeries::fit(PolyFamily::Chebyshev, a, b, n_fit + m.l, f),
                };
                let pol = refit(&|r| {
                    self.newton.poloidal_jet(m, region, r).add(self.refraction[k].gradient_poloidal(region, r)).v()
                });
                let tor = refit(&|r| m.p_jet(region, r).v());
                let (x, w) = gauss_legendre_on(checks, a, b);
                for (r, w) in x.iter().zip(&w) {
                    let mut c = curl_vecrad(Family::Poloidal, m.l, *r, &pol.jet(*r), 1.0);
                    c.axpy(1.0, &curl_vecrad(Family::Toroidal, m.l, *r, &tor.jet(*r), 1.0));
                    let h = m.vecrad(region, *r);
                    let mut d = c;
                    d.axpy(-1.0, &h);
                    num += w * r * r * factor_dot(m.l, &d, &d);
                    den += w * r * r * factor_dot(m.l, &h, &h);
                }
            }
        }
        if den > 0.0 { (num / den).sqrt() } else { num.sqrt() }
    }
}

impl VectorProfiles for BiotSavartField {
    fn factors(&self, lm: usize, region: Region, r: f64) -> VecRad {
        let mut v = self.potential_factors(lm, region, r);
        let mu = self.mu(region);
        for x in [&mut v.a, &mut v.da, &mut v.q, &mut v.dq, &mut v.t, &mut v.dt] {
            *x *= mu;
        }
        v
    }
}

/// `‖f - g‖²_{𝔹⁰}` over the given (l, m) by radial quadrature, the exterior
/// on the mapped half-line.
pub fn b0_distance_sq(params: &PhysicalParams, lms: &[usize], f: &dyn VectorProfiles, g: &dyn VectorProfiles) -> f64 {
    let rules = ProjectionRules::new(params, 96);
    let regions = [(Region::Inner, &rules.inner), (Region::Outer, &rules.outer), (Region::Exterior, &rules.exterior)];
    par::map(lms, |&lm| {
        let l = SphericalHarmonicIndex::from_flat(lm).l;
        let mut s = 0.0;
        for (region, (r, w)) in regions {
            let mu = if region == Region::Exterior { params.mu_e } else { params.mu(region) };
            for (r, w) in r.iter().zip(w) {
                let mut d = f.factors(lm, region, *r);
                d.axpy(-1.0, &g.factors(lm, region, *r));
                s += w * factor_dot(l, &d, &d) / mu;
            }
        }
        s
    })
    .iter()
    .sum()
}

/// Round trip of one magnetic mode: relative 𝔹⁰ distance between the mode
/// and its reconstruction from `curl(μ⁻¹ B)`.
pub fn round_trip(basis: &MagneticBasis, mode: usize, family: PolyFamily) -> Result<f64> {
    let mut g = vec![0.0; basis.n_modes()];
    g[mode] = 1.0;
    let h = CurrentDensity::from_magnetic(basis, &g, family);
    let f = biot_savart_reconstruct(&h, &basis.params)?;
    let b = crate::dynamo::BasisField {
        blocks: &basis.blocks,
        layout: &basis.layout,
        g: &g,
    };
    let lms: Vec<usize> = h.modes.iter().map(|m| m.lm).collect();
    // Basis modes have unit 𝔹⁰ norm.
    Ok(b0_distance_sq(&basis.params, &lms, &f, &b).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::magnetic::build_magnetic_basis;
    use crate::spectral::SpectralResolution;
    use std::f64::consts::PI;

    fn params() -> PhysicalParams {
        let mut p = PhysicalParams::unit();
        p.mu_i = 2.0;
        p.mu_o = 1.0;
        p.mu_e = 0.7;
        p.sigma_i = 1.5;
        p
    }

    /// `∫_{|y|<1} -1/(4π|x-y|) dy` by tensor Gauss quadrature in spherical
    /// coordinates around the origin.
    fn ball_potential_brute(x: [f64; 3]) -> f64 {
        let (rr, wr) = gauss_legendre_on(40, 0.0, 1.0);
        let (ct, wt) = gauss_legendre(40);
        let nphi = 40;
        let mut s = 0.0;
        for (r, w1) in rr.iter().zip(&wr) {
            for (c, w2) in ct.iter().zip(&wt) {
                let st = (1.0 - c * c).sqrt();
                for k in 0..nphi {
                    let ph = 2.0 * PI * (k as f64 + 0.5) / nphi as f64;
                    let y = [r * st * ph.cos(), r * st * ph.sin(), r * c];
                    let d = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt();
                    s += w1 * w2 * (2.0 * PI / nphi as f64) * r * r * (-1.0 / (4.0 * PI * d));
                }
            }
        }
        s
    }

    #[test]
    fn newton_potential_of_unit_ball() {
        // Source is the l = 0 component of the indicator; Y₀₀ = 1/√(4π), so
        // the radial profile carries √(4π) and the value is read back with Y₀₀.
        let y00 = 1.0 / (4.0 * PI).sqrt();
        let src = |reg: Region, _s: f64| if reg == Region::Inner { 1.0 / y00 } else { 0.0 };
        let at = |r: f64| newton_potential_scalar(0, r, 1.0, 3.0, 20, &src) * y00;
        assert!((at(1e-12) + 0.5).abs() < 1e-12);
        assert!((at(2.0) + 1.0 / 6.0).abs() < 1e-12);
        assert!((ball_potential_brute([0.0, 0.0, 2.0]) + 1.0 / 6.0).abs() < 1e-10);
        assert!((ball_potential_brute([0.0, 0.0, 0.0]) + 0.5).abs() < 1e-10);
        assert!((ball_potential_brute([0.3, -0.2, 1.5]) - at((0.09f64 + 0.04 + 2.25).sqrt())).abs() < 1e-10);
    }

    #[test]
    fn refraction_zero_data_and_closed_form() {
        let p = params();
        let z = refraction_correction(3, [0.0, 0.0], &p).unwrap();
        assert_eq!(z.coeffs, [0.0; 4]);
        // Equal inner permeabilities and a unit jump at R_o only reduce to two
        // unknowns: a = b, c = 0, d = a R_o^{2l+1},
        // a = -R_o^{1-l} / (μ_e (l+1) + μ_o l).
        let mut q = p.clone();
        q.mu_i = q.mu_o;
        let s = refraction_correction(1, [0.0, 1.0], &q).unwrap();
        let l = 1.0;
        let a = -q.r_o.powf(1.0 - l) / (q.mu_e * (l + 1.0) + q.mu_o * l);
        let [sa, sb, sc, sd] = s.coeffs;
        assert!((sa - a).abs() < 1e-14 && (sb - a).abs() < 1e-14 && sc.abs() < 1e-14);
        assert!((sd - a * q.r_o.powf(2.0 * l + 1.0)).abs() < 1e-14);
        let g = refraction_correction(7, [0.3, -1.2], &p).unwrap();
        assert!(g.jump_residual < 1e-10 && g.continuity_residual < 1e-10);
    }

    #[test]
    fn zero_current_gives_zero_field() {
        let p = params();
        let h = CurrentDensity {
            r_i: p.r_i,
            r_o: p.r_o,
            modes: vec![],
        };
        let f = biot_savart_reconstruct(&h, &p).unwrap();
        assert!(f.factors(3, Region::Outer, 0.6).is_zero());
    }

    #[test]
    fn series_fit_is_exact_on_polynomials() {
        for fam in [PolyFamily::Chebyshev, PolyFamily::Legendre] {
            let s = RadialSeries::fit(fam, 0.1, 0.5, 8, |r| r * r * (1.0 - 3.0 * r + r.powi(4)));
            let r = 0.31;
            let j = s.jet(r);
            assert!((j.v() - r * r * (1.0 - 3.0 * r + r.powi(4))).abs() < 1e-14);
            assert!((j.d1() - (2.0 * r - 9.0 * r * r + 6.0 * r.powi(5))).abs() < 1e-12);
            assert!((s.value(r) - j.v()).abs() < 1e-15);
        }
        // (r/b)² (1 - 3ρ² + ρ⁴) on the ball of radius b.
        let b = 0.5;
        let s = RadialSeries::fit_ball(b, 2, 6, |r| {
            let p2 = (r / b).powi(2);
            1.0 - 3.0 * p2 + p2 * p2
        });
        let r = 0.31;
        let rho = r / b;
        let want = rho.powi(2) * (1.0 - 3.0 * rho.powi(2) + rho.powi(4));
        let dwant = (2.0 * rho - 12.0 * rho.powi(3) + 6.0 * rho.powi(5)) / b;
        let j = s.jet(r);
        assert!((j.v() - want).abs() < 1e-14);
        assert!((j.d1() - dwant).abs() < 1e-12);
        assert!((s.value(r) - want).abs() < 1e-14);
        assert!(s.c[4..].iter().all(|c| c.abs() < 1e-14));
    }

    #[test]
    fn round_trip_recovers_modes_and_satisfies_membership() {
        let p = params();
        let b = build_magnetic_basis(&p, &SpectralResolution::new(3, 6, 8)).unwrap();
        for i in (0..b.n_modes()).step_by(5) {
            let e = round_trip(&b, i, PolyFamily::Legendre).unwrap();
            assert!(e < 1e-8, "mode {i}: {e}");
        }
        let mut g = vec![0.0; b.n_modes()];
        g[4] = 1.0;
        g[20] = -0.5;
        let h = CurrentDensity::from_magnetic(&b, &g, PolyFamily::Chebyshev);
        let f = biot_savart_reconstruct(&h, &p).unwrap();
        let (n, t) = f.interface_residuals();
        assert!(n < 1e-9 && t < 1e-9, "{n} {t}");
        let c = f.curl_residual(40, 48);
        assert!(c < 1e-9, "{c}");
        // Independent of the fitting family used for h.
        let h2 = CurrentDensity::from_magnetic(&b, &g, PolyFamily::Legendre);
        let f2 = biot_savart_reconstruct(&h2, &p).unwrap();
        let lms: Vec<usize> = h.modes.iter().map(|m| m.lm).collect();
        assert!(b0_distance_sq(&p, &lms, &f, &f2).sqrt() < 1e-10);
    }

    #[test]
    fn uniform_permeability_needs_no_correction() {
        let mut p = PhysicalParams::unit();
        p.mu_i = 1.0;
        p.mu_o = 1.0;
        p.mu_e = 1.0;
        let b = build_magnetic_basis(&p, &SpectralResolution::new(2, 5, 6)).unwrap();
        let mut g = vec![0.0; b.n_modes()];
        g[2] = 1.0;
        g[9] = 0.4;
        let h = CurrentDensity::from_magnetic(&b, &g, PolyFamily::Legendre);
        let f = biot_savart_reconstruct(&h, &p).unwrap();
        assert!(f.refraction.iter().all(|r| r.coeffs.iter().all(|c| c.abs() < 1e-13)));
    }
}

