//! Bilinear and trilinear forms of the weak formulation, evaluated on the
//! discrete spaces.
//!
//! Linear couplings are assembled once into [`FormTables`]. Nonlinear terms
//! are evaluated pseudo-spectrally: fields are synthesized at every radial
//! node on the dealiased angular grid, multiplied pointwise and integrated.
//! The quadrature is exact for the polynomial integrands, so the algebraic
//! cancellations of the energy identity hold to roundoff.

use crate::config::{ForcingData, PhysicalParams};
use crate::error::{Error, Result};
use crate::magnetic::{build_magnetic_basis, MagneticBasis};
use crate::mechanical::{
    build_buoyancy_basis, build_theta_extension, build_velocity_basis, BuoyancyBasis, ThetaExtension, VelocityBasis,
};
use crate::par;
use crate::spectral::{lm_count, AngularGrid, RadialGrid, ScalarSample, SpectralResolution, VecRad, VectorSample};
use nalgebra::{DMatrix, DVector};

/// The three discrete spaces on a shared set of grids.
#[derive(Clone, Debug)]
pub struct Spaces {
    pub params: PhysicalParams,
    pub resolution: SpectralResolution,
    pub mag: MagneticBasis,
    pub vel: VelocityBasis,
    pub buoy: BuoyancyBasis,
    pub angular: AngularGrid,
    pub inner: RadialGrid,
    pub outer: RadialGrid,
    pub nlm: usize,
}

impl Spaces {
    pub fn build(params: &PhysicalParams, res: &SpectralResolution) -> Result<Self> {
        let mag = build_magnetic_basis(params, res)?;
        let vel = build_velocity_basis(params, res)?;
        let buoy = build_buoyancy_basis(params, res)?;
        Ok(Self {
            params: params.clone(),
            resolution: res.clone(),
            angular: mag.angular.clone(),
            inner: mag.inner.clone(),
            outer: mag.outer.clone(),
            nlm: lm_count(res.l_max),
            mag,
            vel,
            buoy,
        })
    }

    pub fn sizes(&self) -> [usize; 3] {
        [self.mag.n_modes(), self.vel.n_modes(), self.buoy.n_modes()]
    }

    pub fn velocity(&self, inner: bool, node: usize, g: &[f64], grad: bool) -> VectorSample {
        let (tab, grid) = if inner { (&self.vel.field_in, &self.inner) } else { (&self.vel.field_out, &self.outer) };
        self.angular
            .synth_vector(&tab.synth(&self.vel.layout, self.nlm, node, g), grid.r[node], grad)
    }

    pub fn magnetic(&self, inner: bool, node: usize, g: &[f64], grad: bool) -> VectorSample {
        let (tab, grid) = if inner { (&self.mag.field_in, &self.inner) } else { (&self.mag.field_out, &self.outer) };
        self.angular
            .synth_vector(&tab.synth(&self.mag.layout, self.nlm, node, g), grid.r[node], grad)
    }

    /// `curl μ⁻¹ B` at a node.
    pub fn magnetic_curl(&self, inner: bool, node: usize, g: &[f64]) -> VectorSample {
        let (tab, grid) = if inner { (&self.mag.curl_in, &self.inner) } else { (&self.mag.curl_out, &self.outer) };
        self.angular
            .synth_vector(&tab.synth(&self.mag.layout, self.nlm, node, g), grid.r[node], false)
    }

    /// B on the shell side of r = R_i.
    pub fn magnetic_at_ri(&self, g: &[f64]) -> VectorSample {
        self.angular
            .synth_vector(&self.mag.field_ri.synth(&self.mag.layout, self.nlm, 0, g), self.params.r_i, false)
    }

    pub fn buoyancy(&self, node: usize, g: &[f64], grad: bool) -> ScalarSample {
        let rad = self.buoy.field_out.synth_scalar(&self.buoy.layout, self.nlm, node, g);
        self.angular.synth_scalar(&rad, self.outer.r[node], grad)
    }

    pub fn theta(&self, ext: &ThetaExtension, node: usize, grad: bool) -> ScalarSample {
        let r = self.outer.r[node];
        self.angular.synth_scalar(&ext.at(r), r, grad)
    }
}

/// Block-sparse matrix: dense blocks between (row slot, column slot) pairs.
#[derive(Clone, Debug, Default)]
pub struct BlockSparse {
    pub rows: usize,
    pub cols: usize,
    /// (row offset, column offset, block)
    pub blocks: Vec<(usize, usize, DMatrix<f64>)>,
}

impl BlockSparse {
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (ro, co, m) in &self.blocks {
            for i in 0..m.nrows() {
                let mut s = 0.0;
                for j in 0..m.ncols() {
                    s += m[(i, j)] * x[co + j];
                }
                y[ro + i] += s;
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.rows, self.cols);
        for (ro, co, m) in &self.blocks {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    d[(ro + i, co + j)] += m[(i, j)];
                }
            }
        }
        d
    }

    /// `xᵀ M y`.
    pub fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut out = vec![0.0; self.rows];
        self.apply(y, &mut out);
        out.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

#[derive(Clone, Debug)]
pub struct FormTables {
    /// Diagonal of the d-form (magnetic diffusion) in the magnetic basis.
    pub d: Vec<f64>,
    /// Diagonal of `2ρν a^S` in the velocity basis.
    pub a_s: Vec<f64>,
    /// Diagonal of `κ a` in the buoyancy basis.
    pub a: Vec<f64>,
    /// `-ρ⟨L e₃ × v_i, v_j⟩ - J L (e₃ × ω_i)·α_j`, row j, column i.
    pub coriolis: BlockSparse,
    /// `ρ g ⟨φ_k x̂, v_j⟩`, row j (velocity), column k (buoyancy).
    pub buoyancy_coupling: BlockSparse,
    /// `ρ g ⟨θ^c x̂, v_j⟩`.
    pub thetac_buoyancy: Vec<f64>,
    /// `a(θ^c, φ_j)`.
    pub thetac_diffusion: Vec<f64>,
    /// `⟨f_b, φ_j⟩` on r = R_i.
    pub flux: Vec<f64>,
    pub theta: ThetaExtension,
}

/// Angular coupling of `e₃ × v`: for each source (l, m) and unit factor
/// (a, q, t), the moments against every target (l', m).
fn rotation_couplings(grid: &AngularGrid) -> Vec<[Vec<(usize, [f64; 3])>; 3]> {
    let nlm = lm_count(grid.l_max);
    let e3: Vec<[f64; 3]> = (0..grid.n_points())
        .map(|p| {
            let f = grid.frame(p);
            [f[0][2], f[1][2], f[2][2]]
        })
        .collect();
    par::map_range(nlm, |lm| {
        let unit = |c: usize| {
            if lm == 0 {
                return Vec::new();
            }
            let mut rad = vec![VecRad::default(); nlm];
            match c {
                0 => rad[lm].a = 1.0,
                1 => rad[lm].q = 1.0,
                _ => rad[lm].t = 1.0,
            }
            let v = grid.synth_vector(&rad, 1.0, false).v;
            let w: Vec<[f64; 3]> = v.iter().zip(&e3).map(|(v, e)| cross(e, v)).collect();
            grid.vector_moments(&w)
                .into_iter()
                .enumerate()
                .filter(|(_, m)| m.iter().any(|x| x.abs() > 1e-14))
                .collect()
        };
        [unit(0), unit(1), unit(2)]
    })
}

#[inline]
pub fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[inline]
pub fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `(u·∇) v` from u and the gradient tensor of v.
#[inline]
pub fn advect(u: &[f64; 3], gv: &[[f64; 3]; 3]) -> [f64; 3] {
    [dot(&gv[0], u), dot(&gv[1], u), dot(&gv[2], u)]
}

fn coriolis_matrix(sp: &Spaces) -> BlockSparse {
    let p = &sp.params;
    let lay = &sp.vel.layout;
    let tab = &sp.vel.field_out.f;
    let k = rotation_couplings(&sp.angular);
    let n = lay.n;
    let blocks = par::map(&lay.slots, |src| {
        let mut out = Vec::new();
        for dst in &lay.slots {
            let (a, b) = (dst.lm, src.lm);
            let hits: Vec<[f64; 3]> = (0..3)
                .map(|c| k[b][c].iter().find(|(t, _)| *t == a).map(|x| x.1).unwrap_or([0.0; 3]))
                .collect();
            if hits.iter().all(|h| h.iter().all(|x| *x == 0.0)) {
                continue;
            }
            let mut m = DMatrix::zeros(dst.len, src.len);
            for node in 0..sp.outer.len() {
                let w = sp.outer.w[node];
                for i in 0..src.len {
                    let fi = &tab[src.profile][node][i];
                    let f = [fi.a, fi.q, fi.t];
                    for j in 0..dst.len {
                        let fj = &tab[dst.profile][node][j];
                        let mut s = 0.0;
                        for c in 0..3 {
                            s += f[c] * fj.pair(&hits[c]);
                        }
                        m[(j, i)] -= w * p.rho * p.l_rot * s;
                    }
                }
            }
            if src.l == 1 && dst.l == 1 {
                for i in 0..src.len {
                    let wi = sp.vel.omega_of(src.offset + i);
                    let e = cross(&[0.0, 0.0, 1.0], &wi);
                    for j in 0..dst.len {
                        let wj = sp.vel.omega_of(dst.offset + j);
                        m[(j, i)] -= p.j * p.l_rot * dot(&e, &wj);
                    }
                }
            }
            out.push((dst.offset, src.offset, m));
        }
        out
    });
    BlockSparse {
        rows: n,
        cols: n,
        blocks: blocks.into_iter().flatten().collect(),
    }
}

pub fn assemble_form_tables(sp: &Spaces, theta: &ThetaExtension, forcing: &ForcingData) -> Result<FormTables> {
    let p = &sp.params;
    let [nb, nu, nt] = sp.sizes();
    let vt = &sp.vel.field_out.f;
    let bt = &sp.buoy.field_out.f;
    let mut coupling = BlockSparse {
        rows: nu,
        cols: nt,
        blocks: Vec::new(),
    };
    let mut thetac_buoyancy = vec![0.0; nu];
    for vs in &sp.vel.layout.slots {
        let bs = sp.buoy.layout.slots.iter().find(|s| s.lm == vs.lm).expect("buoyancy covers every (l, m)");
        let mut m = DMatrix::zeros(vs.len, bs.len);
        for node in 0..sp.outer.len() {
            let w = sp.outer.w[node] * p.rho * p.g;
            let phi = theta.profile(vs.lm, sp.outer.r[node])[0];
            for j in 0..vs.len {
                let a = vt[vs.profile][node][j].a;
                thetac_buoyancy[vs.offset + j] += w * a * phi;
                for k in 0..bs.len {
                    m[(j, k)] += w * a * bt[bs.profile][node][k].a;
                }
            }
        }
        coupling.blocks.push((vs.offset, bs.offset, m));
    }
    let mut thetac_diffusion = vec![0.0; nt];
    let mut flux = vec![0.0; nt];
    for bs in &sp.buoy.layout.slots {
        let ll = (bs.l * (bs.l + 1)) as f64;
        if !theta.gradient_free() {
            for node in 0..sp.outer.len() {
                let r = sp.outer.r[node];
                let [ph, dph] = theta.profile(bs.lm, r);
                for j in 0..bs.len {
                    let f = &bt[bs.profile][node][j];
                    thetac_diffusion[bs.offset + j] += sp.outer.w[node] * (dph * f.da + ll * ph * f.a / (r * r));
                }
            }
        }
        let fb = forcing.f_b.get(bs.lm).copied().unwrap_or(0.0);
        if fb != 0.0 {
            for j in 0..bs.len {
                flux[bs.offset + j] = p.r_i * p.r_i * fb * sp.buoy.field_ri.f[bs.profile][0][j].a;
            }
        }
    }
    let t = FormTables {
        d: sp.mag.eigenvalues.clone(),
        a_s: sp.vel.eigenvalues.clone(),
        a: sp.buoy.eigenvalues.iter().map(|x| p.kappa * x).collect(),
        coriolis: coriolis_matrix(sp),
        buoyancy_coupling: coupling,
        thetac_buoyancy,
        thetac_diffusion,
        flux,
        theta: theta.clone(),
    };
    debug_assert_eq!(t.d.len(), nb);
    check_tables(&t)?;
    Ok(t)
}

fn check_tables(t: &FormTables) -> Result<()> {
    for (name, v) in [("d", &t.d), ("a^S", &t.a_s), ("a", &t.a)] {
        if let Some(x) = v.iter().find(|x| !(**x >= -1e-10)) {
            return Err(Error::Form {
                name,
                detail: format!("negative diagonal entry {x}"),
            });
        }
    }
    let c = t.coriolis.to_dense();
    let scale = c.abs().max().max(f64::MIN_POSITIVE);
    let asym = (&c + c.transpose()).abs().max();
    if asym > 1e-13 * scale.max(1.0) {
        return Err(Error::Form {
            name: "coriolis",
            detail: format!("symmetric part {asym:e} relative to {scale:e}"),
        });
    }
    Ok(())
}

/// Builds spaces, the θ^c extension and the form tables in one go.
pub fn assemble(params: &PhysicalParams, res: &SpectralResolution, forcing: &ForcingData) -> Result<(Spaces, FormTables)> {
    let sp = Spaces::build(params, res)?;
    let theta = build_theta_extension(&forcing.theta_b, params, res);
    let t = assemble_form_tables(&sp, &theta, forcing)?;
    Ok((sp, t))
}

fn check_nodes(grid: &RadialGrid, n: &[usize]) -> Result<()> {
    if n.iter().any(|&k| k != grid.len()) {
        return Err(Error::Shape(format!(
            "expected samples at {} radial nodes, got {:?}",
            grid.len(),
            n
        )));
    }
    Ok(())
}

/// `b(u, v, w) = ∫_{Ω_o} [(u·∇) v]·w` from samples at the shell nodes
/// (v with gradient).
pub fn trilinear_b(sp: &Spaces, u: &[VectorSample], v: &[VectorSample], w: &[VectorSample]) -> Result<f64> {
    check_nodes(&sp.outer, &[u.len(), v.len(), w.len()])?;
    let g = &sp.angular;
    Ok((0..sp.outer.len())
        .map(|n| sp.outer.w[n] * g.integrate(|p| dot(&advect(&u[n].v[p], &v[n].grad[p]), &w[n].v[p])))
        .sum())
}

/// Scalar version: `∫_{Ω_o} (u·∇v) w`.
pub fn trilinear_b_scalar(sp: &Spaces, u: &[VectorSample], v: &[ScalarSample], w: &[ScalarSample]) -> Result<f64> {
    check_nodes(&sp.outer, &[u.len(), v.len(), w.len()])?;
    let g = &sp.angular;
    Ok((0..sp.outer.len())
        .map(|n| sp.outer.w[n] * g.integrate(|p| dot(&u[n].v[p], &v[n].grad[p]) * w[n].v[p]))
        .sum())
}

/// Samples of one field on both regions.
#[derive(Clone, Debug, Default)]
pub struct CoreSamples {
    pub inner: Vec<VectorSample>,
    pub outer: Vec<VectorSample>,
}

/// `⟨u × B, c⟩_{Ω_c}` where c holds samples of `curl μ⁻¹ A`.
pub fn lorentz_pairing(sp: &Spaces, u: &CoreSamples, b: &CoreSamples, c: &CoreSamples) -> Result<f64> {
    check_nodes(&sp.inner, &[u.inner.len(), b.inner.len(), c.inner.len()])?;
    check_nodes(&sp.outer, &[u.outer.len(), b.outer.len(), c.outer.len()])?;
    let g = &sp.angular;
    let mut s = 0.0;
    for (grid, (uu, bb, cc)) in [(&sp.inner, (&u.inner, &b.inner, &c.inner)), (&sp.outer, (&u.outer, &b.outer, &c.outer))] {
        for n in 0..grid.len() {
            s += grid.w[n] * g.integrate(|p| dot(&cross(&uu[n].v[p], &bb[n].v[p]), &cc[n].v[p]));
        }
    }
    Ok(s)
}

/// `ρ⟨L e₃ × u, u⟩_{Ω_o} + J L (e₃ × ω)·ω` by pointwise quadrature.
pub fn coriolis_energy(sp: &Spaces, g_u: &[f64]) -> f64 {
    let p = &sp.params;
    let g = &sp.angular;
    let e3: Vec<[f64; 3]> = (0..g.n_points()).map(|q| { let f = g.frame(q); [f[0][2], f[1][2], f[2][2]] }).collect();
    let shell: f64 = par::map_range(sp.outer.len(), |n| {
        let u = sp.velocity(false, n, g_u, false);
        sp.outer.w[n] * g.integrate(|q| dot(&cross(&e3[q], &u.v[q]), &u.v[q]))
    })
    .iter()
    .sum();
    let w = sp.vel.omega(g_u);
    p.rho * p.l_rot * shell + p.j * p.l_rot * dot(&cross(&[0.0, 0.0, 1.0], &w), &w)
}

/// Dense copy of the velocity-block Coriolis operator applied to g.
pub fn coriolis_apply(t: &FormTables, g_u: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; g_u.len()];
    t.coriolis.apply(g_u, &mut y);
    y
}

/// Euclidean norm helper.
pub fn norm(v: &[f64]) -> f64 {
    DVector::from_column_slice(v).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ThetaB;
    use crate::spectral::harmonics::eval_real_harmonic;
    use crate::spectral::quadrature::gauss_legendre;
    use crate::spectral::SphericalHarmonicIndex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn params() -> PhysicalParams {
        let mut p = PhysicalParams::unit();
        p.mu_i = 1.7;
        p.mu_o = 1.2;
        p.sigma_i = 2.0;
        p.rho = 1.3;
        p.l_rot = 2.5;
        p.j = 0.6;
        p.g = 0.8;
        p
    }

    fn random(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn setup() -> (Spaces, FormTables) {
        let res = SpectralResolution::new(3, 3, 5);
        let mut f = ForcingData::none(3);
        f.f_b[5] = 0.7;
        let mut h = vec![0.0; 16];
        h[2] = 0.4;
        h[7] = -0.3;
        f.theta_b = ThetaB::Harmonics(h);
        assemble(&params(), &res, &f).unwrap()
    }

    #[test]
    fn antisymmetry_of_advection() {
        let (sp, _) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let [_, nu, nt] = sp.sizes();
        let (gu, gv, gw) = (random(nu, &mut rng), random(nu, &mut rng), random(nu, &mut rng));
        let n = sp.outer.len();
        let u: Vec<_> = (0..n).map(|k| sp.velocity(false, k, &gu, true)).collect();
        let v: Vec<_> = (0..n).map(|k| sp.velocity(false, k, &gv, true)).collect();
        let w: Vec<_> = (0..n).map(|k| sp.velocity(false, k, &gw, true)).collect();
        let a = trilinear_b(&sp, &u, &v, &w).unwrap();
        let b = trilinear_b(&sp, &u, &w, &v).unwrap();
        assert!((a + b).abs() < 1e-11 * a.abs().max(1.0), "{a} {b}");
        assert!(trilinear_b(&sp, &u, &v, &v).unwrap().abs() < 1e-11 * norm(&gv).powi(2) * norm(&gu));
        let (ts, tt) = (random(nt, &mut rng), random(nt, &mut rng));
        let s: Vec<_> = (0..n).map(|k| sp.buoyancy(k, &ts, true)).collect();
        let t: Vec<_> = (0..n).map(|k| sp.buoyancy(k, &tt, true)).collect();
        let x = trilinear_b_scalar(&sp, &u, &s, &t).unwrap();
        let y = trilinear_b_scalar(&sp, &u, &t, &s).unwrap();
        assert!((x + y).abs() < 1e-11 * x.abs().max(1.0));
        let zero: Vec<_> = (0..n).map(|k| sp.velocity(false, k, &vec![0.0; nu], true)).collect();
        assert_eq!(trilinear_b(&sp, &zero, &v, &w).unwrap(), 0.0);
        assert!(trilinear_b(&sp, &u[..2], &v, &w).is_err());
    }

    #[test]
    fn coriolis_is_antisymmetric_and_energy_free() {
        let (sp, t) = setup();
        let c = t.coriolis.to_dense();
        assert!((&c + c.transpose()).abs().max() < 1e-13 * c.abs().max());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random(sp.sizes()[1], &mut rng);
        let e = coriolis_energy(&sp, &g);
        assert!(e.abs() < 1e-13 * sp.params.l_rot * norm(&g).powi(2));
        assert!(t.coriolis.form(&g, &g).abs() < 1e-13 * norm(&g).powi(2) * c.abs().max());
        let mut p = params();
        p.l_rot = 0.0;
        let (sp0, t0) = assemble(&p, &sp.resolution, &ForcingData::none(3)).unwrap();
        assert_eq!(coriolis_energy(&sp0, &g), 0.0);
        assert!(t0.coriolis.to_dense().abs().max() == 0.0);
    }

    #[test]
    fn coriolis_matches_pointwise_projection() {
        // Row j of C·g equals -ρL⟨e₃ × u, v_j⟩ - JL(e₃ × ω)·α_j computed on the grid.
        let (sp, t) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let nu = sp.sizes()[1];
        let g = random(nu, &mut rng);
        let cg = coriolis_apply(&t, &g);
        let grid = &sp.angular;
        let mut direct = vec![0.0; nu];
        for n in 0..sp.outer.len() {
            let u = sp.velocity(false, n, &g, false);
            let f: Vec<[f64; 3]> = (0..grid.n_points())
                .map(|q| {
                    let fr = grid.frame(q);
                    cross(&[fr[0][2], fr[1][2], fr[2][2]], &u.v[q])
                })
                .collect();
            let m = grid.vector_moments(&f);
            sp.vel.field_out.project(&sp.vel.layout, n, -sp.params.rho * sp.params.l_rot * sp.outer.w[n], &m, &mut direct);
        }
        let w = sp.vel.omega(&g);
        let e = cross(&[0.0, 0.0, 1.0], &w);
        for j in 0..nu {
            direct[j] -= sp.params.j * sp.params.l_rot * dot(&e, &sp.vel.omega_of(j));
        }
        for j in 0..nu {
            assert!((direct[j] - cg[j]).abs() < 1e-12 * norm(&cg));
        }
    }

    #[test]
    fn lorentz_identity_c() {
        let (sp, _) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let [nb, nu, _] = sp.sizes();
        let (gb, gu) = (random(nb, &mut rng), random(nu, &mut rng));
        let ni = sp.inner.len();
        let no = sp.outer.len();
        let u = CoreSamples {
            inner: (0..ni).map(|k| sp.velocity(true, k, &gu, false)).collect(),
            outer: (0..no).map(|k| sp.velocity(false, k, &gu, true)).collect(),
        };
        let b = CoreSamples {
            inner: (0..ni).map(|k| sp.magnetic(true, k, &gb, false)).collect(),
            outer: (0..no).map(|k| sp.magnetic(false, k, &gb, false)).collect(),
        };
        let c = CoreSamples {
            inner: (0..ni).map(|k| sp.magnetic_curl(true, k, &gb)).collect(),
            outer: (0..no).map(|k| sp.magnetic_curl(false, k, &gb)).collect(),
        };
        let lhs = lorentz_pairing(&sp, &u, &b, &c).unwrap();
        let rhs = trilinear_b(&sp, &b.outer, &u.outer, &b.outer).unwrap() / sp.params.mu_o;
        let scale = lhs.abs() + rhs.abs();
        assert!((lhs - rhs).abs() < 1e-10 * scale, "{lhs} {rhs}");
        let zero = CoreSamples {
            inner: (0..ni).map(|k| sp.velocity(true, k, &vec![0.0; nu], false)).collect(),
            outer: (0..no).map(|k| sp.velocity(false, k, &vec![0.0; nu], false)).collect(),
        };
        assert_eq!(lorentz_pairing(&sp, &zero, &b, &c).unwrap(), 0.0);
    }

    #[test]
    fn flux_matches_refined_surface_quadrature() {
        let (sp, t) = setup();
        let ri = sp.params.r_i;
        let (x, w) = gauss_legendre(24);
        let nphi = 48;
        let idx = SphericalHarmonicIndex::from_flat(5);
        for s in sp.buoy.layout.slots.iter().filter(|s| s.lm == 5) {
            for j in 0..s.len {
                let tj = sp.buoy.blocks[s.profile].jet(j, crate::spectral::Region::Outer, ri).v();
                let mut q = 0.0;
                for (xi, wi) in x.iter().zip(&w) {
                    for k in 0..nphi {
                        let ph = 2.0 * PI * k as f64 / nphi as f64;
                        let y = eval_real_harmonic(idx, xi.acos(), ph);
                        q += wi * 2.0 * PI / nphi as f64 * 0.7 * y * tj * y;
                    }
                }
                assert!((q * ri * ri - t.flux[s.offset + j]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn constant_data_gives_no_sources() {
        let res = SpectralResolution::new(2, 2, 4);
        let mut f = ForcingData::none(2);
        f.theta_b = ThetaB::Constant(3.0);
        let (_, t) = assemble(&params(), &res, &f).unwrap();
        assert!(t.thetac_diffusion.iter().all(|x| *x == 0.0));
        assert!(t.flux.iter().all(|x| *x == 0.0));
        // ρ g ⟨θ^c x̂, v⟩ vanishes: a constant has no degree ≥ 1 content.
        assert!(t.thetac_buoyancy.iter().all(|x| *x == 0.0));
        assert!(t.d.windows(1).all(|x| x[0] > 0.0));
    }
}
