//! Velocity/rigid-rotation pairs, buoyancy, and the harmonic extension of
//! the outer-boundary buoyancy data.
//!
//! Velocity lives on the shell and vanishes at R_o. On the degree-one
//! toroidal blocks a lifting profile carries the trace `ω × x` at R_i, so
//! those modes also carry an angular velocity of the inner core; inside the
//! inner core the velocity is the rigid rotation itself.

use crate::basis::{
    c1, jet_to_vecrad, vecrad_array, BlockForms, Candidate, Extra, Family, Layout, ProfileTable, RadialBlock,
    RadialContext, Shape,
};
use crate::config::{PhysicalParams, ThetaB};
use crate::error::Result;
use crate::magnetic::factor_dot;
use crate::par;
use crate::spectral::{
    build_radial_grid, gradient_grams_table, lm_count, AngularGrid, RadialGrid, Region, SpectralResolution,
    SphericalHarmonicIndex, VecRad,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VelocityMode {
    pub idx: SphericalHarmonicIndex,
    pub family: Family,
    pub k: usize,
    pub omega: [f64; 3],
    pub mass_norm: f64,
    pub a_s_diag: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuoyancyMode {
    pub idx: SphericalHarmonicIndex,
    pub k: usize,
    pub mass_norm: f64,
    pub a_diag: f64,
}

/// Unit axis carried by the rigid rotation of the (1, m) toroidal field.
pub fn rigid_axis(m: i64) -> [f64; 3] {
    match m {
        0 => [0.0, 0.0, 1.0],
        1 => [1.0, 0.0, 0.0],
        _ => [0.0, 1.0, 0.0],
    }
}

#[derive(Clone, Debug)]
pub struct VelocityBasis {
    pub params: PhysicalParams,
    pub resolution: SpectralResolution,
    pub blocks: Vec<RadialBlock>,
    pub layout: Layout,
    pub inner: RadialGrid,
    pub outer: RadialGrid,
    pub angular: AngularGrid,
    pub field_in: ProfileTable,
    pub field_out: ProfileTable,
    pub field_ri: ProfileTable,
    /// Eigenvalues of `2ρν a^S` against the 𝕌⁰ mass.
    pub eigenvalues: Vec<f64>,
}

impl VelocityBasis {
    pub fn profile_id(l: usize, family: Family) -> usize {
        2 * (l - 1) + usize::from(family == Family::Poloidal)
    }

    pub fn n_modes(&self) -> usize {
        self.layout.n
    }

    pub fn mode(&self, i: usize) -> VelocityMode {
        let (s, k) = self.layout.locate(i);
        let slot = &self.layout.slots[s];
        let b = &self.blocks[slot.profile];
        VelocityMode {
            idx: SphericalHarmonicIndex::new(slot.l, slot.m),
            family: slot.family,
            k,
            omega: self.omega_of(i),
            mass_norm: 1.0,
            a_s_diag: b.eigenvalues[k],
        }
    }

    pub fn modes(&self) -> Vec<VelocityMode> {
        (0..self.n_modes()).map(|i| self.mode(i)).collect()
    }

    /// Angular velocity carried by mode i.
    pub fn omega_of(&self, i: usize) -> [f64; 3] {
        let (s, k) = self.layout.locate(i);
        let slot = &self.layout.slots[s];
        let b = &self.blocks[slot.profile];
        match b.cands.iter().position(|c| *c == Candidate::Lifting) {
            Some(p) => rigid_axis(slot.m).map(|e| e * b.coef[(p, k)]),
            None => [0.0; 3],
        }
    }

    /// Angular velocity of the inner core for coefficients g.
    pub fn omega(&self, g: &[f64]) -> [f64; 3] {
        let mut w = [0.0; 3];
        for s in self.layout.slots.iter().filter(|s| s.l == 1 && s.family == Family::Toroidal) {
            for k in 0..s.len {
                let o = self.omega_of(s.offset + k);
                for c in 0..3 {
                    w[c] += g[s.offset + k] * o[c];
                }
            }
        }
        w
    }

    pub fn factors(&self, i: usize, region: Region, r: f64) -> VecRad {
        let (s, k) = self.layout.locate(i);
        self.blocks[self.layout.slots[s].profile].vecrad(k, region, r)
    }

    /// 𝕌⁰ mass and `2ρν a^S` of one block in the final basis, by quadrature.
    pub fn block_matrices(&self, l: usize, family: Family) -> (DMatrix<f64>, DMatrix<f64>) {
        let b = &self.blocks[Self::profile_id(l, family)];
        let f = velocity_forms(l, family, &b.cands, &b.ctx, &self.params, &self.outer, &self.angular);
        (b.coef.transpose() * &f.mass * &b.coef, b.coef.transpose() * &f.stiffness * &b.coef)
    }
}

pub fn velocity_candidates(l: usize, family: Family, res: &SpectralResolution) -> Vec<Candidate> {
    let shape = if family == Family::Toroidal { Shape::Clamp } else { Shape::RClamp2 };
    let mut c: Vec<Candidate> = (0..res.n_r_outer).map(|k| Candidate::Outer { k, shape }).collect();
    if l == 1 && family == Family::Toroidal {
        c.push(Candidate::Lifting);
    }
    c
}

/// 𝕌⁰ mass `ρ⟨u,v⟩_{Ω_o} + J ω·α` and `2ρν ⟨D^S u, D^S v⟩_{Ω_o}`.
pub fn velocity_forms(
    l: usize,
    family: Family,
    cands: &[Candidate],
    ctx: &RadialContext,
    params: &PhysicalParams,
    outer: &RadialGrid,
    angular: &AngularGrid,
) -> BlockForms {
    let n = cands.len();
    let mut mass = DMatrix::zeros(n, n);
    let mut stiff = DMatrix::zeros(n, n);
    let grams = gradient_grams_table(angular, l, &outer.r);
    for (node, &r) in outer.r.iter().enumerate() {
        let f: Vec<VecRad> = cands
            .iter()
            .map(|c| jet_to_vecrad(family, l, r, &ctx.jet(*c, l, Region::Outer, r)))
            .collect();
        let fa: Vec<[f64; 6]> = f.iter().map(vecrad_array).collect();
        let sym = &grams[node].1;
        let w = outer.w[node];
        for a in 0..n {
            for b in a..n {
                let mut s = 0.0;
                for x in 0..6 {
                    for y in 0..6 {
                        s += fa[a][x] * sym[x][y] * fa[b][y];
                    }
                }
                mass[(a, b)] += w * params.rho * factor_dot(l, &f[a], &f[b]);
                stiff[(a, b)] += w * 2.0 * params.rho * params.nu * s;
            }
        }
    }
    if let Some(p) = cands.iter().position(|c| *c == Candidate::Lifting) {
        mass[(p, p)] += params.j;
    }
    for a in 0..n {
        for b in 0..a {
            mass[(a, b)] = mass[(b, a)];
            stiff[(a, b)] = stiff[(b, a)];
        }
    }
    BlockForms {
        constraints: DMatrix::zeros(0, n),
        mass,
        stiffness: stiff,
    }
}

pub fn build_velocity_basis(params: &PhysicalParams, res: &SpectralResolution) -> Result<VelocityBasis> {
    params.validate()?;
    res.validate()?;
    let ctx = RadialContext::new(params, res.poly);
    let inner = build_radial_grid(Region::Inner, res, params);
    let outer = build_radial_grid(Region::Outer, res, params);
    let angular = res.angular_grid();
    let keys: Vec<(usize, Family)> = (1..=res.l_max)
        .flat_map(|l| [(l, Family::Toroidal), (l, Family::Poloidal)])
        .collect();
    let blocks = par::map(&keys, |&(l, family)| {
        let cands = velocity_candidates(l, family, res);
        let forms = velocity_forms(l, family, &cands, &ctx, params, &outer, &angular);
        RadialBlock::solve(l, family, cands, Extra::None, ctx, forms, &outer)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let spec: Vec<_> = keys
        .iter()
        .enumerate()
        .map(|(p, &(l, f))| (l, f, p, blocks[p].n_modes()))
        .collect();
    let layout = Layout::build(res.l_max, &spec);
    let eigenvalues = (0..layout.n)
        .map(|i| {
            let (s, k) = layout.locate(i);
            blocks[layout.slots[s].profile].eigenvalues[k]
        })
        .collect();
    Ok(VelocityBasis {
        field_in: ProfileTable::build(&blocks, &inner, |b, j, r| b.vecrad(j, Region::Inner, r)),
        field_out: ProfileTable::build(&blocks, &outer, |b, j, r| b.vecrad(j, Region::Outer, r)),
        field_ri: ProfileTable::at_radius(&blocks, params.r_i, |b, j, r| b.vecrad(j, Region::Outer, r)),
        params: params.clone(),
        resolution: res.clone(),
        angular,
        blocks,
        layout,
        inner,
        outer,
        eigenvalues,
    })
}

#[derive(Clone, Debug)]
pub struct BuoyancyBasis {
    pub resolution: SpectralResolution,
    /// Indexed by degree l.
    pub blocks: Vec<RadialBlock>,
    pub layout: Layout,
    pub outer: RadialGrid,
    pub field_out: ProfileTable,
    pub field_ri: ProfileTable,
    /// Eigenvalues of `a` against the L² mass.
    pub eigenvalues: Vec<f64>,
}

impl BuoyancyBasis {
    pub fn n_modes(&self) -> usize {
        self.layout.n
    }

    pub fn mode(&self, i: usize) -> BuoyancyMode {
        let (s, k) = self.layout.locate(i);
        let slot = &self.layout.slots[s];
        BuoyancyMode {
            idx: SphericalHarmonicIndex::new(slot.l, slot.m),
            k,
            mass_norm: 1.0,
            a_diag: self.blocks[slot.profile].eigenvalues[k],
        }
    }

    pub fn block_matrices(&self, l: usize) -> (DMatrix<f64>, DMatrix<f64>) {
        let b = &self.blocks[l];
        let f = buoyancy_forms(l, &b.cands, &b.ctx, &self.outer);
        (b.coef.transpose() * &f.mass * &b.coef, b.coef.transpose() * &f.stiffness * &b.coef)
    }
}

pub fn buoyancy_forms(l: usize, cands: &[Candidate], ctx: &RadialContext, outer: &RadialGrid) -> BlockForms {
    let n = cands.len();
    let ll = (l * (l + 1)) as f64;
    let mut mass = DMatrix::zeros(n, n);
    let mut stiff = DMatrix::zeros(n, n);
    for (node, &r) in outer.r.iter().enumerate() {
        let j: Vec<_> = cands.iter().map(|c| ctx.jet(*c, l, Region::Outer, r)).collect();
        let w = outer.w[node];
        for a in 0..n {
            for b in a..n {
                mass[(a, b)] += w * j[a].v() * j[b].v();
                stiff[(a, b)] += w * (j[a].d1() * j[b].d1() + ll * j[a].v() * j[b].v() / (r * r));
            }
        }
    }
    for a in 0..n {
        for b in 0..a {
            mass[(a, b)] = mass[(b, a)];
            stiff[(a, b)] = stiff[(b, a)];
        }
    }
    BlockForms {
        constraints: DMatrix::zeros(0, n),
        mass,
        stiffness: stiff,
    }
}

pub fn build_buoyancy_basis(params: &PhysicalParams, res: &SpectralResolution) -> Result<BuoyancyBasis> {
    res.validate()?;
    let ctx = RadialContext::new(params, res.poly);
    let outer = build_radial_grid(Region::Outer, res, params);
    let ls: Vec<usize> = (0..=res.l_max).collect();
    let blocks = par::map(&ls, |&l| {
        let cands: Vec<Candidate> = (0..res.n_r_outer)
            .map(|k| Candidate::Outer { k, shape: Shape::Dirichlet })
            .collect();
        let forms = buoyancy_forms(l, &cands, &ctx, &outer);
        RadialBlock::solve(l, Family::Scalar, cands, Extra::None, ctx, forms, &outer)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let spec: Vec<_> = ls.iter().map(|&l| (l, Family::Scalar, l, blocks[l].n_modes())).collect();
    let layout = Layout::build(res.l_max, &spec);
    let eigenvalues = (0..layout.n)
        .map(|i| {
            let (s, k) = layout.locate(i);
            blocks[layout.slots[s].profile].eigenvalues[k]
        })
        .collect();
    Ok(BuoyancyBasis {
        field_out: ProfileTable::build(&blocks, &outer, |b, j, r| b.vecrad(j, Region::Outer, r)),
        field_ri: ProfileTable::at_radius(&blocks, params.r_i, |b, j, r| b.vecrad(j, Region::Outer, r)),
        resolution: res.clone(),
        blocks,
        layout,
        outer,
        eigenvalues,
    })
}

/// Harmonic extension θ^c of the outer-boundary data: per (l, m),
/// `α r^l + β r^{-(l+1)}` with the boundary value at R_o and zero radial
/// derivative at R_i.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaExtension {
    pub l_max: usize,
    /// `[α, β]` per flat (l, m).
    pub coeffs: Vec<[f64; 2]>,
    pub is_constant: bool,
}

impl ThetaExtension {
    /// `(Φ, Φ')` of the (l, m) radial profile at r.
    pub fn profile(&self, lm: usize, r: f64) -> [f64; 2] {
        let l = SphericalHarmonicIndex::from_flat(lm).l as i32;
        let [a, b] = self.coeffs[lm];
        let lf = l as f64;
        [
            a * r.powi(l) + b * r.powi(-(l + 1)),
            a * lf * r.powi(l - 1) - b * (lf + 1.0) * r.powi(-(l + 2)),
        ]
    }

    /// Per-(l, m) profiles at r.
    pub fn at(&self, r: f64) -> Vec<[f64; 2]> {
        (0..self.coeffs.len()).map(|lm| self.profile(lm, r)).collect()
    }

    /// Whether ∇θ^c vanishes identically.
    pub fn gradient_free(&self) -> bool {
        self.is_constant || self.coeffs.iter().skip(1).all(|c| c[0] == 0.0 && c[1] == 0.0)
    }
}

pub fn build_theta_extension(theta_b: &ThetaB, params: &PhysicalParams, res: &SpectralResolution) -> ThetaExtension {
    let data = theta_b.coeffs(res.l_max);
    let mut coeffs = vec![[0.0; 2]; lm_count(res.l_max)];
    let (ri, ro) = (params.r_i, params.r_o);
    for (lm, c) in coeffs.iter_mut().enumerate() {
        let l = SphericalHarmonicIndex::from_flat(lm).l as i32;
        if data[lm] == 0.0 {
            continue;
        }
        if l == 0 {
            *c = [data[lm], 0.0];
            continue;
        }
        let lf = l as f64;
        let ratio = lf / (lf + 1.0) * ri.powi(2 * l + 1);
        let a = data[lm] / (ro.powi(l) + ratio * ro.powi(-(l + 1)));
        *c = [a, ratio * a];
    }
    ThetaExtension {
        l_max: res.l_max,
        coeffs,
        is_constant: theta_b.is_constant(),
    }
}

/// Korn-inequality diagnostics over the discrete velocity span.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KornReport {
    /// Largest `‖D^S(ω × x)‖_{L²(Ω_i)}` over the rigid-coupled modes.
    pub inner_sym_grad: f64,
    /// Largest `‖u‖_{H¹(Ω_o)} / ‖D^S u‖_{L²(Ω_o)}` over the samples.
    pub korn_max: f64,
    pub samples: usize,
}

/// Rigid part: symmetric gradient of `ω × x` sampled on the inner grid.
/// Shell part: random unit combinations per (l, family) block.
pub fn korn_identity_check(basis: &VelocityBasis, samples: usize, seed: u64) -> KornReport {
    let nlm = lm_count(basis.resolution.l_max);
    let mut rep = KornReport {
        samples,
        ..Default::default()
    };
    for s in basis.layout.slots.iter().filter(|s| s.l == 1 && s.family == Family::Toroidal) {
        for k in 0..s.len {
            let i = s.offset + k;
            let mut acc: f64 = 0.0;
            for (node, &r) in basis.inner.r.iter().enumerate() {
                let mut rad = vec![VecRad::default(); nlm];
                rad[s.lm] = basis.factors(i, Region::Inner, r);
                let g = basis.angular.synth_vector(&rad, r, true).grad;
                acc += basis.inner.w[node]
                    * basis.angular.integrate(|p| {
                        let mut d = 0.0;
                        for a in 0..3 {
                            for b in 0..3 {
                                d += (0.5 * (g[p][a][b] + g[p][b][a])).powi(2);
                            }
                        }
                        d
                    });
            }
            rep.inner_sym_grad = rep.inner_sym_grad.max(acc.sqrt());
        }
    }
    let keys: Vec<(usize, Family)> = (1..=basis.resolution.l_max)
        .flat_map(|l| [(l, Family::Toroidal), (l, Family::Poloidal)])
        .collect();
    let grams = par::map(&keys, |&(l, f)| {
        let b = &basis.blocks[VelocityBasis::profile_id(l, f)];
        let n = b.n_modes();
        let g = gradient_grams_table(&basis.angular, l, &basis.outer.r);
        let mut h1 = DMatrix::<f64>::zeros(n, n);
        let mut ds = DMatrix::<f64>::zeros(n, n);
        for (node, &r) in basis.outer.r.iter().enumerate() {
            let f: Vec<VecRad> = (0..n).map(|j| b.vecrad(j, Region::Outer, r)).collect();
            let fa: Vec<[f64; 6]> = f.iter().map(vecrad_array).collect();
            let w = basis.outer.w[node];
            for a in 0..n {
                for c in 0..n {
                    let (mut full, mut sym) = (0.0, 0.0);
                    for x in 0..6 {
                        for y in 0..6 {
                            full += fa[a][x] * g[node].0[x][y] * fa[c][y];
                            sym += fa[a][x] * g[node].1[x][y] * fa[c][y];
                        }
                    }
                    h1[(a, c)] += w * (factor_dot(l, &f[a], &f[c]) + full);
                    ds[(a, c)] += w * sym;
                }
            }
        }
        (h1, ds)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let p = rng.random_range(0..keys.len());
        let (h1, ds) = &grams[p];
        let g: Vec<f64> = (0..h1.nrows()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (mut a, mut b): (f64, f64) = (0.0, 0.0);
        for x in 0..g.len() {
            for y in 0..g.len() {
                a += g[x] * h1[(x, y)] * g[y];
                b += g[x] * ds[(x, y)] * g[y];
            }
        }
        if b > 0.0 {
            rep.korn_max = rep.korn_max.max((a / b).sqrt());
        }
    }
    rep
}

/// Trace of `ω × x` on the sphere r = R_i: toroidal profile `R_i/c₁` per unit ω.
pub fn rigid_trace(omega: f64, r_i: f64) -> f64 {
    omega * r_i / c1()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (PhysicalParams, SpectralResolution) {
        let mut p = PhysicalParams::unit();
        p.rho = 1.3;
        p.nu = 0.7;
        p.j = 0.4;
        p.rho_i = None;
        (p, SpectralResolution::new(3, 4, 8))
    }

    #[test]
    fn velocity_gram_is_identity() {
        let (p, res) = setup();
        let v = build_velocity_basis(&p, &res).unwrap();
        for l in 1..=3 {
            for f in [Family::Toroidal, Family::Poloidal] {
                let (m, a) = v.block_matrices(l, f);
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        let e = if i == j { 1.0 } else { 0.0 };
                        assert!((m[(i, j)] - e).abs() < 1e-12);
                        if i != j {
                            assert!(a[(i, j)].abs() < 1e-9 * a[(i, i)].max(1.0));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn traces_and_rigid_coupling() {
        let (p, res) = setup();
        let v = build_velocity_basis(&p, &res).unwrap();
        let mut rigid = 0;
        for i in 0..v.n_modes() {
            let md = v.mode(i);
            let at_ro = v.factors(i, Region::Outer, p.r_o);
            assert!(at_ro.a.abs() < 1e-12 && at_ro.q.abs() < 1e-12 && at_ro.t.abs() < 1e-12);
            let at_ri = v.factors(i, Region::Outer, p.r_i);
            let w = md.omega.iter().map(|x| x * x).sum::<f64>().sqrt();
            if w > 0.0 {
                rigid += 1;
                assert_eq!((md.idx.l, md.family), (1, Family::Toroidal));
                assert!((at_ri.t - rigid_trace(w, p.r_i) * at_ri.t.signum()).abs() < 1e-12);
                let inner = v.factors(i, Region::Inner, p.r_i);
                assert!((inner.t - at_ri.t).abs() < 1e-12);
            } else {
                assert!(at_ri.a.abs() < 1e-12 && at_ri.q.abs() < 1e-12 && at_ri.t.abs() < 1e-12);
            }
        }
        assert!(rigid >= 3);
    }

    #[test]
    fn rigid_axes_follow_cartesian_harmonics() {
        // ω × x on the unit sphere for ω = e_z is the toroidal field of Y_10/c₁.
        let (p, res) = setup();
        let v = build_velocity_basis(&p, &res).unwrap();
        let s = v.layout.slots.iter().find(|s| s.l == 1 && s.m == 0 && s.family == Family::Toroidal).unwrap();
        let i = s.offset;
        let om = v.omega_of(i);
        assert!(om[0] == 0.0 && om[1] == 0.0 && om[2] != 0.0);
        let g = v.angular.synth_vector(
            &{
                let mut rad = vec![VecRad::default(); lm_count(3)];
                rad[s.lm] = v.factors(i, Region::Inner, 0.2);
                rad
            },
            0.2,
            false,
        );
        for pt in 0..v.angular.n_points() {
            let th = v.angular.theta[pt / v.angular.n_phi];
            // (ω e_z) × x has only a φ component ω r sin θ
            assert!((g.v[pt][2] - om[2] * 0.2 * th.sin()).abs() < 1e-12);
            assert!(g.v[pt][0].abs() < 1e-12 && g.v[pt][1].abs() < 1e-12);
        }
    }

    #[test]
    fn buoyancy_basis_properties() {
        let (p, res) = setup();
        let b = build_buoyancy_basis(&p, &res).unwrap();
        for l in 0..=3 {
            let (m, _) = b.block_matrices(l);
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((m[(i, j)] - e).abs() < 1e-12);
                }
                assert!(b.blocks[l].jet(i, Region::Outer, p.r_o).v().abs() < 1e-12);
            }
        }
        let fine = build_buoyancy_basis(&p, &SpectralResolution::new(3, 4, 16)).unwrap();
        let (l0, l1) = (b.blocks[0].eigenvalues[0], fine.blocks[0].eigenvalues[0]);
        assert!(l0 > 0.0 && ((l0 - l1) / l1).abs() < 1e-6);
        // The constant is not in the span: the projection of 1 misses a
        // fixed fraction of its norm.
        let bl = &b.blocks[0];
        let mut proj = 0.0;
        for j in 0..bl.n_modes() {
            let c = b.outer.integrate(|n| bl.jet(j, Region::Outer, b.outer.r[n]).v());
            proj += c * c;
        }
        let vol = b.outer.integrate(|_| 1.0);
        assert!(1.0 - proj / vol > 1e-3);
    }

    #[test]
    fn theta_extension_cases() {
        let (p, res) = setup();
        let c = build_theta_extension(&ThetaB::Constant(5.0), &p, &res);
        assert!(c.is_constant && c.gradient_free());
        let y00 = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
        assert!((c.profile(0, 0.6)[0] * y00 - 5.0).abs() < 1e-14);
        let z = build_theta_extension(&ThetaB::Constant(0.0), &p, &res);
        assert!(z.coeffs.iter().all(|c| *c == [0.0, 0.0]));
        let mut h = vec![0.0; lm_count(3)];
        h[2] = 1.0;
        let e = build_theta_extension(&ThetaB::Harmonics(h), &p, &res);
        assert!(!e.is_constant);
        assert!((e.profile(2, p.r_o)[0] - 1.0).abs() < 1e-14);
        assert!(e.profile(2, p.r_i)[1].abs() < 1e-10);
    }

    #[test]
    fn korn_rigid_part_is_antisymmetric() {
        let (p, res) = setup();
        let v = build_velocity_basis(&p, &res).unwrap();
        let k = korn_identity_check(&v, 50, 1);
        assert!(k.inner_sym_grad < 1e-12, "{k:?}");
        assert!(k.korn_max.is_finite() && k.korn_max > 1.0);
    }
}
