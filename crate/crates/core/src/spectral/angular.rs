//! Gauss-Legendre × uniform-longitude grid on the unit sphere, with vector
//! and scalar synthesis (including the full spherical-frame gradient) and the
//! matching projections.
//!
//! A vector field at one radius is described per (l, m) by a [`VecRad`]:
//! `v = A Y r̂ + Q ∇₁Y + T ∇₁Y × r̂`, together with the radial derivatives
//! of A, Q and T. For a poloidal potential P this means `A = L P / r` and
//! `Q = P' + P / r`; for a toroidal profile, T is the profile itself.

use super::harmonics::{azimuthal_norm, legendre_column, lm_count, tri};
use super::quadrature::gauss_legendre;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VecRad {
    pub a: f64,
    pub da: f64,
    pub q: f64,
    pub dq: f64,
    pub t: f64,
    pub dt: f64,
}

impl VecRad {
    pub fn axpy(&mut self, s: f64, o: &VecRad) {
        self.a += s * o.a;
        self.da += s * o.da;
        self.q += s * o.q;
        self.dq += s * o.dq;
        self.t += s * o.t;
        self.dt += s * o.dt;
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0.0 && self.da == 0.0 && self.q == 0.0 && self.dq == 0.0 && self.t == 0.0 && self.dt == 0.0
    }

    /// Factors of the poloidal field with potential jet (P, P', P'') at r.
    pub fn poloidal(l: usize, r: f64, p: f64, dp: f64, d2p: f64) -> Self {
        let ll = (l * (l + 1)) as f64;
        VecRad {
            a: ll * p / r,
            da: ll * (dp / r - p / (r * r)),
            q: dp + p / r,
            dq: d2p + dp / r - p / (r * r),
            t: 0.0,
            dt: 0.0,
        }
    }

    pub fn toroidal(t: f64, dt: f64) -> Self {
        VecRad {
            t,
            dt,
            ..Default::default()
        }
    }

    /// Test-function pairing with moments `(a, b, c)` from [`AngularGrid::vector_moments`].
    #[inline]
    pub fn pair(&self, m: &[f64; 3]) -> f64 {
        self.a * m[0] + self.q * m[1] + self.t * m[2]
    }
}

/// Pointwise samples of a vector field at one radius, in the (r, θ, φ)
/// frame; `grad[p][i][j]` is component i differentiated along direction j.
#[derive(Clone, Debug, Default)]
pub struct VectorSample {
    pub v: Vec<[f64; 3]>,
    pub grad: Vec<[[f64; 3]; 3]>,
}

#[derive(Clone, Debug, Default)]
pub struct ScalarSample {
    pub v: Vec<f64>,
    pub grad: Vec<[f64; 3]>,
}

#[derive(Clone, Debug)]
pub struct AngularGrid {
    pub l_max: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub theta: Vec<f64>,
    pub sin_t: Vec<f64>,
    pub cot_t: Vec<f64>,
    pub w_theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub w_phi: f64,
    ntri: usize,
    p: Vec<f64>,
    dp: Vec<f64>,
    d2p: Vec<f64>,
    ps: Vec<f64>,
    dps: Vec<f64>,
    cos_mp: Vec<f64>,
    sin_mp: Vec<f64>,
}

const NQ: usize = 15;

impl AngularGrid {
    /// Grid for fields of degree ≤ `l_max` with `n_theta` latitudes and
    /// `n_phi` longitudes.
    pub fn new(l_max: usize, n_theta: usize, n_phi: usize) -> Self {
        assert!(n_phi > 2 * l_max, "n_phi must exceed 2 l_max");
        let (x, w) = gauss_legendre(n_theta);
        // colatitude ascending: x = cos θ descending
        let xs: Vec<f64> = x.iter().rev().copied().collect();
        let ws: Vec<f64> = w.iter().rev().copied().collect();
        let theta: Vec<f64> = xs.iter().map(|c| c.acos()).collect();
        let sin_t: Vec<f64> = theta.iter().map(|t| t.sin()).collect();
        let cot_t: Vec<f64> = theta.iter().map(|t| t.cos() / t.sin()).collect();
        let ntri = tri(l_max, l_max) + 1;
        let mut p = vec![0.0; n_theta * ntri];
        let mut dp = vec![0.0; n_theta * ntri];
        let mut d2p = vec![0.0; n_theta * ntri];
        let mut ps = vec![0.0; n_theta * ntri];
        let mut dps = vec![0.0; n_theta * ntri];
        for (j, &th) in theta.iter().enumerate() {
            let col = legendre_column(l_max, th);
            let s = sin_t[j];
            let c = th.cos();
            for k in 0..ntri {
                let o = j * ntri + k;
                p[o] = col.p[k];
                dp[o] = col.dp[k];
                d2p[o] = col.d2p[k];
                ps[o] = col.p[k] / s;
                dps[o] = col.dp[k] / s - c * col.p[k] / (s * s);
            }
        }
        let w_phi = 2.0 * PI / n_phi as f64;
        let phi: Vec<f64> = (0..n_phi).map(|i| i as f64 * w_phi).collect();
        let mut cos_mp = vec![0.0; (l_max + 1) * n_phi];
        let mut sin_mp = vec![0.0; (l_max + 1) * n_phi];
        for m in 0..=l_max {
            let nu = azimuthal_norm(m);
            for (i, &ph) in phi.iter().enumerate() {
                cos_mp[m * n_phi + i] = nu * (m as f64 * ph).cos();
                sin_mp[m * n_phi + i] = nu * (m as f64 * ph).sin();
            }
        }
        Self {
            l_max,
            n_theta,
            n_phi,
            theta,
            sin_t,
            cot_t,
            w_theta: ws,
            phi,
            w_phi,
            ntri,
            p,
            dp,
            d2p,
            ps,
            dps,
            cos_mp,
            sin_mp,
        }
    }

    pub fn n_points(&self) -> usize {
        self.n_theta * self.n_phi
    }

    /// Quadrature weight of point `pt` on the unit sphere.
    #[inline]
    pub fn weight(&self, pt: usize) -> f64 {
        self.w_theta[pt / self.n_phi] * self.w_phi
    }

    /// Legendre stage: per latitude, per order m and parity channel, the 15
    /// θ-sums used by vector synthesis.
    fn vector_legendre(&self, rad: &[VecRad], grad: bool) -> Vec<[f64; NQ]> {
        let lmx = self.l_max;
        let mut acc = vec![[0.0; NQ]; self.n_theta * (lmx + 1) * 2];
        let nl = lm_count(lmx).min(rad.len());
        for j in 0..self.n_theta {
            let base = j * self.ntri;
            for m in 0..=lmx {
                for ch in 0..2 {
                    if ch == 1 && m == 0 {
                        continue;
                    }
                    let slot = &mut acc[(j * (lmx + 1) + m) * 2 + ch];
                    for l in m.max(1)..=lmx {
                        let mi = if ch == 0 { m as i64 } else { -(m as i64) };
                        let f = l * l + (mi + l as i64) as usize;
                        if f >= nl {
                            continue;
                        }
                        let r = &rad[f];
                        if r.is_zero() {
                            continue;
                        }
                        let k = base + tri(l, m);
                        let (p, dp, d2p, ps, dps) = (self.p[k], self.dp[k], self.d2p[k], self.ps[k], self.dps[k]);
                        slot[0] += r.a * p;
                        slot[3] += r.t * ps;
                        slot[6] += r.q * dp;
                        slot[9] += r.t * dp;
                        slot[12] += r.q * ps;
                        if grad {
                            slot[1] += r.da * p;
                            slot[2] += r.a * dp;
                            slot[4] += r.dt * ps;
                            slot[5] += r.t * dps;
                            slot[7] += r.dq * dp;
                            slot[8] += r.q * d2p;
                            slot[10] += r.dt * dp;
                            slot[11] += r.t * d2p;
                            slot[13] += r.dq * ps;
                            slot[14] += r.q * dps;
                        }
                    }
                }
            }
        }
        acc
    }

    /// Vector field (and optionally its gradient) at radius `r` from per-(l,m)
    /// factors indexed by flat (l, m) position.
    pub fn synth_vector(&self, rad: &[VecRad], r: f64, grad: bool) -> VectorSample {
        let lmx = self.l_max;
        let acc = self.vector_legendre(rad, grad);
        let np = self.n_phi;
        let mut out = VectorSample {
            v: vec![[0.0; 3]; self.n_points()],
            grad: if grad { vec![[[0.0; 3]; 3]; self.n_points()] } else { Vec::new() },
        };
        for j in 0..self.n_theta {
            let s = self.sin_t[j];
            let cot = self.cot_t[j];
            for i in 0..np {
                let mut f = [0.0; NQ];
                let mut fp = [0.0; NQ];
                let mut fpp_g1 = 0.0;
                let mut fpp_h2 = 0.0;
                for m in 0..=lmx {
                    let cm = self.cos_mp[m * np + i];
                    let sm = self.sin_mp[m * np + i];
                    let mf = m as f64;
                    let c = &acc[(j * (lmx + 1) + m) * 2];
                    let sn = &acc[(j * (lmx + 1) + m) * 2 + 1];
                    if grad {
                        for q in 0..NQ {
                            f[q] += c[q] * cm + sn[q] * sm;
                            fp[q] += mf * (sn[q] * cm - c[q] * sm);
                        }
                        fpp_g1 -= mf * mf * (c[3] * cm + sn[3] * sm);
                        fpp_h2 -= mf * mf * (c[12] * cm + sn[12] * sm);
                    } else {
                        for q in [0usize, 6, 9] {
                            f[q] += c[q] * cm + sn[q] * sm;
                        }
                        for q in [3usize, 12] {
                            fp[q] += mf * (sn[q] * cm - c[q] * sm);
                        }
                    }
                }
                let vr = f[0];
                let vt = fp[3] + f[6];
                let vp = -f[9] + fp[12];
                let pt = j * np + i;
                out.v[pt] = [vr, vt, vp];
                if grad {
                    let dvr = [f[1], f[2], fp[0]];
                    let dvt = [fp[4] + f[7], fp[5] + f[8], fpp_g1 + fp[6]];
                    let dvp = [-f[10] + fp[13], -f[11] + fp[14], -fp[9] + fpp_h2];
                    out.grad[pt] = [
                        [dvr[0], (dvr[1] - vt) / r, (dvr[2] / s - vp) / r],
                        [dvt[0], (dvt[1] + vr) / r, (dvt[2] / s - vp * cot) / r],
                        [dvp[0], dvp[1] / r, (dvp[2] / s + vr + vt * cot) / r],
                    ];
                }
            }
        }
        out
    }

    /// Scalar field from per-(l,m) `[s, ds/dr]` (gradient only if requested).
    pub fn synth_scalar(&self, rad: &[[f64; 2]], r: f64, grad: bool) -> ScalarSample {
        let lmx = self.l_max;
        let np = self.n_phi;
        let nl = lm_count(lmx).min(rad.len());
        let mut acc = vec![[0.0; 3]; self.n_theta * (lmx + 1) * 2];
        for j in 0..self.n_theta {
            let base = j * self.ntri;
            for m in 0..=lmx {
                for ch in 0..2 {
                    if ch == 1 && m == 0 {
                        continue;
                    }
                    let slot = &mut acc[(j * (lmx + 1) + m) * 2 + ch];
                    for l in m..=lmx {
                        let mi = if ch == 0 { m as i64 } else { -(m as i64) };
                        let f = l * l + (mi + l as i64) as usize;
                        if f >= nl {
                            continue;
                        }
                        let [s, ds] = rad[f];
                        if s == 0.0 && ds == 0.0 {
                            continue;
                        }
                        let k = base + tri(l, m);
                        slot[0] += s * self.p[k];
                        if grad {
                            slot[1] += ds * self.p[k];
                            slot[2] += s * self.dp[k];
                        }
                    }
                }
            }
        }
        let mut out = ScalarSample {
            v: vec![0.0; self.n_points()],
            grad: if grad { vec![[0.0; 3]; self.n_points()] } else { Vec::new() },
        };
        for j in 0..self.n_theta {
            let s = self.sin_t[j];
            for i in 0..np {
                let (mut f0, mut f1, mut f2, mut fp) = (0.0, 0.0, 0.0, 0.0);
                for m in 0..=lmx {
                    let cm = self.cos_mp[m * np + i];
                    let sm = self.sin_mp[m * np + i];
                    let c = &acc[(j * (lmx + 1) + m) * 2];
                    let sn = &acc[(j * (lmx + 1) + m) * 2 + 1];
                    f0 += c[0] * cm + sn[0] * sm;
                    if grad {
                        f1 += c[1] * cm + sn[1] * sm;
                        f2 += c[2] * cm + sn[2] * sm;
                        fp += m as f64 * (sn[0] * cm - c[0] * sm);
                    }
                }
                let pt = j * np + i;
                out.v[pt] = f0;
                if grad {
                    out.grad[pt] = [f1, f2 / r, fp / (r * s)];
                }
            }
        }
        out
    }

    /// Moments `(∫N_r Y, ∫N_θ Y_θ + N_φ Y_φ/sinθ, ∫N_θ Y_φ/sinθ − N_φ Y_θ)`
    /// per flat (l, m), over the unit sphere.
    pub fn vector_moments(&self, field: &[[f64; 3]]) -> Vec<[f64; 3]> {
        let lmx = self.l_max;
        let np = self.n_phi;
        let mut out = vec![[0.0; 3]; lm_count(lmx)];
        // per latitude: for each m, [cos, sin] moments of the three components
        let mut mom = vec![[[0.0; 3]; 2]; lmx + 1];
        for j in 0..self.n_theta {
            for slot in mom.iter_mut() {
                *slot = [[0.0; 3]; 2];
            }
            let row = &field[j * np..(j + 1) * np];
            for m in 0..=lmx {
                let cs = &self.cos_mp[m * np..(m + 1) * np];
                let sn = &self.sin_mp[m * np..(m + 1) * np];
                let mut c = [0.0; 3];
                let mut s = [0.0; 3];
                for i in 0..np {
                    let v = row[i];
                    for k in 0..3 {
                        c[k] += v[k] * cs[i];
                        s[k] += v[k] * sn[i];
                    }
                }
                for k in 0..3 {
                    mom[m][0][k] = c[k] * self.w_phi;
                    mom[m][1][k] = s[k] * self.w_phi;
                }
            }
            let wt = self.w_theta[j];
            let base = j * self.ntri;
            for l in 1..=lmx {
                for mi in -(l as i64)..=(l as i64) {
                    let m = mi.unsigned_abs() as usize;
                    let k = base + tri(l, m);
                    let (p, dp, ps) = (self.p[k], self.dp[k], self.ps[k]);
                    let mf = m as f64;
                    // moments against t_m and against ∂_φ t_m
                    let (mt, mdt) = if mi >= 0 {
                        (mom[m][0], [-mf * mom[m][1][0], -mf * mom[m][1][1], -mf * mom[m][1][2]])
                    } else {
                        (mom[m][1], [mf * mom[m][0][0], mf * mom[m][0][1], mf * mom[m][0][2]])
                    };
                    let o = &mut out[l * l + (mi + l as i64) as usize];
                    o[0] += wt * p * mt[0];
                    o[1] += wt * (dp * mt[1] + ps * mdt[2]);
                    o[2] += wt * (ps * mdt[1] - dp * mt[2]);
                }
            }
        }
        out
    }

    /// `∫ N Y_lm` over the unit sphere per flat (l, m).
    pub fn scalar_moments(&self, field: &[f64]) -> Vec<f64> {
        let lmx = self.l_max;
        let np = self.n_phi;
        let mut out = vec![0.0; lm_count(lmx)];
        let mut mom = vec![[0.0; 2]; lmx + 1];
        for j in 0..self.n_theta {
            let row = &field[j * np..(j + 1) * np];
            for m in 0..=lmx {
                let cs = &self.cos_mp[m * np..(m + 1) * np];
                let sn = &self.sin_mp[m * np..(m + 1) * np];
                let mut c = 0.0;
                let mut s = 0.0;
                for i in 0..np {
                    c += row[i] * cs[i];
                    s += row[i] * sn[i];
                }
                mom[m] = [c * self.w_phi, s * self.w_phi];
            }
            let wt = self.w_theta[j];
            let base = j * self.ntri;
            for l in 0..=lmx {
                for mi in -(l as i64)..=(l as i64) {
                    let m = mi.unsigned_abs() as usize;
                    let p = self.p[base + tri(l, m)];
                    let v = if mi >= 0 { mom[m][0] } else { mom[m][1] };
                    out[l * l + (mi + l as i64) as usize] += wt * p * v;
                }
            }
        }
        out
    }

    /// Integral of a pointwise field over the unit sphere.
    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        let mut s = 0.0;
        for j in 0..self.n_theta {
            let mut row = 0.0;
            for i in 0..self.n_phi {
                row += f(j * self.n_phi + i);
            }
            s += self.w_theta[j] * row;
        }
        s * self.w_phi
    }

    /// Cartesian position of grid point `pt` on the sphere of radius r, and the
    /// rotation taking (r, θ, φ) components to Cartesian ones.
    pub fn frame(&self, pt: usize) -> [[f64; 3]; 3] {
        let th = self.theta[pt / self.n_phi];
        let ph = self.phi[pt % self.n_phi];
        let (st, ct) = th.sin_cos();
        let (sp, cp) = ph.sin_cos();
        [[st * cp, st * sp, ct], [ct * cp, ct * sp, -st], [-sp, cp, 0.0]]
    }
}

/// Angular Gram matrices of a single degree-l harmonic at radius r: entry
/// (i, j) pairs unit factors i, j in `VecRad` order (a, da, q, dq, t, dt).
/// Returns (∫∇v:∇w, ∫D^S v:D^S w) over the unit sphere.
pub fn gradient_grams(grid: &AngularGrid, l: usize, r: f64) -> ([[f64; 6]; 6], [[f64; 6]; 6]) {
    let f = l * l + l;
    let mut samples = Vec::with_capacity(6);
    for c in 0..6 {
        let mut rad = vec![VecRad::default(); lm_count(grid.l_max)];
        let e = &mut rad[f];
        match c {
            0 => e.a = 1.0,
            1 => e.da = 1.0,
            2 => e.q = 1.0,
            3 => e.dq = 1.0,
            4 => e.t = 1.0,
            _ => e.dt = 1.0,
        }
        samples.push(grid.synth_vector(&rad, r, true).grad);
    }
    let mut full = [[0.0; 6]; 6];
    let mut sym = [[0.0; 6]; 6];
    for a in 0..6 {
        for b in a..6 {
            let (ga, gb) = (&samples[a], &samples[b]);
            let ff = grid.integrate(|p| {
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        s += ga[p][i][j] * gb[p][i][j];
                    }
                }
                s
            });
            let ss = grid.integrate(|p| {
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        let da = 0.5 * (ga[p][i][j] + ga[p][j][i]);
                        let db = 0.5 * (gb[p][i][j] + gb[p][j][i]);
                        s += da * db;
                    }
                }
                s
            });
            full[a][b] = ff;
            full[b][a] = ff;
            sym[a][b] = ss;
            sym[b][a] = ss;
        }
    }
    (full, sym)
}

/// [`gradient_grams`] at every radius of a radial grid.
pub fn gradient_grams_table(grid: &AngularGrid, l: usize, r: &[f64]) -> Vec<([[f64; 6]; 6], [[f64; 6]; 6])> {
    r.iter().map(|&ri| gradient_grams(grid, l, ri)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::harmonics::{eval_real_harmonic, eval_real_harmonic_gradient, lm_list, SphericalHarmonicIndex};
    use proptest::prelude::*;

    fn grid(l_max: usize) -> AngularGrid {
        AngularGrid::new(l_max, l_max + 3, 2 * l_max + 4)
    }

    #[test]
    fn scalar_round_trip_and_constant() {
        let g = grid(6);
        let mut rad = vec![[0.0; 2]; lm_count(6)];
        rad[0] = [1.0, 0.0];
        let s = g.synth_scalar(&rad, 1.0, false);
        for v in &s.v {
            assert!((v - 0.28209479177387814).abs() < 1e-14);
        }
        let ones = vec![1.0; g.n_points()];
        let m = g.scalar_moments(&ones);
        assert!((m[0] - (4.0 * PI).sqrt()).abs() < 1e-13);
        for v in &m[1..] {
            assert!(v.abs() < 1e-13);
        }
    }

    #[test]
    fn toroidal_synthesis_matches_direct_evaluation() {
        let g = grid(5);
        let lms = lm_list(5);
        let mut rad = vec![VecRad::default(); lms.len()];
        let idx = 3 * 3 + 1; // (3, -2)
        rad[idx].t = 0.7;
        rad[idx].q = -0.4;
        rad[idx].a = 1.3;
        let s = g.synth_vector(&rad, 1.0, false);
        for pt in (0..g.n_points()).step_by(7) {
            let th = g.theta[pt / g.n_phi];
            let ph = g.phi[pt % g.n_phi];
            let yg = eval_real_harmonic_gradient(lms[idx], th, ph);
            let y = eval_real_harmonic(lms[idx], th, ph);
            let vr = 1.3 * y;
            let vt = 0.7 * yg[2] - 0.4 * yg[1];
            let vp = -0.7 * yg[1] - 0.4 * yg[2];
            assert!((s.v[pt][0] - vr).abs() < 1e-13);
            assert!((s.v[pt][1] - vt).abs() < 1e-13);
            assert!((s.v[pt][2] - vp).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn vector_moments_invert_synthesis(seed in 0u64..1000) {
            let l_max = 5;
            let g = grid(l_max);
            let n = lm_count(l_max);
            let mut rad = vec![VecRad::default(); n];
            let mut x = seed as f64 * 0.618;
            for f in 1..n {
                x = (x * 7.3 + 0.17).fract();
                rad[f].a = x - 0.5;
                x = (x * 5.1 + 0.31).fract();
                rad[f].q = x - 0.5;
                x = (x * 3.7 + 0.11).fract();
                rad[f].t = x - 0.5;
            }
            let s = g.synth_vector(&rad, 1.0, false);
            let m = g.vector_moments(&s.v);
            for f in 1..n {
                let l = SphericalHarmonicIndex::from_flat(f).l as f64;
                let ll = l * (l + 1.0);
                prop_assert!((m[f][0] - rad[f].a).abs() < 1e-12);
                prop_assert!((m[f][1] - ll * rad[f].q).abs() < 1e-11);
                prop_assert!((m[f][2] - ll * rad[f].t).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn gradient_of_rigid_rotation_is_antisymmetric() {
        // ω × x with ω = e_z is toroidal l=1, m=0 with T = r / c1.
        let c1 = (3.0 / (4.0 * PI)).sqrt();
        let g = grid(3);
        let r = 0.8;
        let mut rad = vec![VecRad::default(); lm_count(3)];
        rad[2] = VecRad::toroidal(r / c1, 1.0 / c1);
        let s = g.synth_vector(&rad, r, true);
        for p in 0..g.n_points() {
            let gr = s.grad[p];
            for i in 0..3 {
                for j in 0..3 {
                    assert!((gr[i][j] + gr[j][i]).abs() < 1e-13);
                }
            }
            // v should equal e_z × x
            let th = g.theta[p / g.n_phi];
            let expected_phi = r * th.sin();
            assert!((s.v[p][2] - expected_phi).abs() < 1e-13);
        }
    }

    #[test]
    fn hessian_of_harmonic_function() {
        // v = ∇(r^2 Y_20) is poloidal with P = r^2/3.
        let g = grid(4);
        let r = 0.9;
        let l = 2;
        let p = r * r / 3.0;
        let dp = 2.0 * r / 3.0;
        let d2p = 2.0 / 3.0;
        let mut rad = vec![VecRad::default(); lm_count(4)];
        rad[l * l + l] = VecRad::poloidal(l, r, p, dp, d2p);
        let s = g.synth_vector(&rad, r, true);
        for pt in 0..g.n_points() {
            let gr = s.grad[pt];
            // Hessian of a harmonic function: symmetric and traceless.
            let tr = gr[0][0] + gr[1][1] + gr[2][2];
            assert!(tr.abs() < 1e-12);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((gr[i][j] - gr[j][i]).abs() < 1e-12);
                }
            }
        }
    }
}
