//! The discrete magnetic space: divergence-free fields on all of ℝ³ that
//! satisfy the transmission conditions at both interfaces, with a decaying
//! potential field outside the core.
//!
//! Per (l, family) the radial candidates on the inner ball and outer shell
//! (plus the exterior coefficient for poloidal blocks) are constrained by the
//! interface conditions and then orthonormalized against the 𝔹⁰ mass by
//! solving the magnetic diffusion eigenproblem.

use crate::basis::{
    curl_vecrad, exterior_potential_jet, jet_to_vecrad, Candidate, Extra, Family, Layout, ProfileTable, RadialBlock,
    RadialContext, Shape, BlockForms,
};
use crate::config::PhysicalParams;
use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{
    build_radial_grid, gradient_grams_table, lm_count, AngularGrid, RadialGrid, Region, SpectralResolution,
    SphericalHarmonicIndex, VecRad,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MagneticMode {
    pub idx: SphericalHarmonicIndex,
    pub family: Family,
    /// Radial index within its block.
    pub k: usize,
    pub c_ext: f64,
    pub mass_norm: f64,
    pub d_diag: f64,
}

#[derive(Clone, Debug)]
pub struct MagneticBasis {
    pub params: PhysicalParams,
    pub resolution: SpectralResolution,
    /// Indexed by [`MagneticBasis::profile_id`].
    pub blocks: Vec<RadialBlock>,
    pub layout: Layout,
    pub inner: RadialGrid,
    pub outer: RadialGrid,
    pub angular: AngularGrid,
    pub field_in: ProfileTable,
    pub field_out: ProfileTable,
    /// Factors of `curl μ⁻¹ B` on each region.
    pub curl_in: ProfileTable,
    pub curl_out: ProfileTable,
    /// Field factors at r = R_i on the shell side.
    pub field_ri: ProfileTable,
    /// d-form eigenvalue of each global mode.
    pub eigenvalues: Vec<f64>,
}

pub fn magnetic_candidates(family: Family, res: &SpectralResolution) -> Vec<Candidate> {
    let shape = if family == Family::Poloidal { Shape::R } else { Shape::One };
    (0..res.n_r_inner)
        .map(|k| Candidate::Inner { k })
        .chain((0..res.n_r_outer).map(|k| Candidate::Outer { k, shape }))
        .collect()
}

/// Unit-sphere pairing of two fields of the same (l, m): `a a' + L (q q' + t t')`.
pub fn factor_dot(l: usize, u: &VecRad, v: &VecRad) -> f64 {
    let ll = (l * (l + 1)) as f64;
    u.a * v.a + ll * (u.q * v.q + u.t * v.t)
}

/// Closed-form `∫_{r>R_o} μ_e⁻¹ B_a·B_b` for exterior potential coefficients.
pub fn exterior_energy_coeffs(l: usize, c_a: f64, c_b: f64, r_o: f64, mu_e: f64) -> f64 {
    c_a * c_b * (l as f64 + 1.0) * r_o.powi(-(2 * l as i32 + 1)) / mu_e
}

/// Constraint rows, mass and d-form of a raw magnetic block.
pub fn magnetic_forms(
    l: usize,
    family: Family,
    cands: &[Candidate],
    ctx: &RadialContext,
    params: &PhysicalParams,
    inner: &RadialGrid,
    outer: &RadialGrid,
) -> BlockForms {
    let nc = cands.len();
    let extra = family == Family::Poloidal;
    let n = nc + usize::from(extra);
    let mut mass = DMatrix::zeros(n, n);
    let mut stiff = DMatrix::zeros(n, n);
    for grid in [inner, outer] {
        let mu = params.mu(grid.region);
        let sigma = params.sigma(grid.region);
        for (node, &r) in grid.r.iter().enumerate() {
            let jets: Vec<_> = cands.iter().map(|c| ctx.jet(*c, l, grid.region, r)).collect();
            let f: Vec<VecRad> = jets.iter().map(|j| jet_to_vecrad(family, l, r, j)).collect();
            let c: Vec<VecRad> = jets.iter().map(|j| curl_vecrad(family, l, r, j, 1.0 / mu)).collect();
            let w = grid.w[node];
            for a in 0..nc {
                if f[a].is_zero() {
                    continue;
                }
                for b in a..nc {
                    let m = w * factor_dot(l, &f[a], &f[b]) / mu;
                    let d = w * factor_dot(l, &c[a], &c[b]) / sigma;
                    mass[(a, b)] += m;
                    stiff[(a, b)] += d;
                }
            }
        }
    }
    if extra {
        mass[(nc, nc)] = exterior_energy_coeffs(l, 1.0, 1.0, params.r_o, params.mu_e);
    }
    for a in 0..n {
        for b in 0..a {
            mass[(a, b)] = mass[(b, a)];
            stiff[(a, b)] = stiff[(b, a)];
        }
    }
    let (ri, ro) = (params.r_i, params.r_o);
    let at = |region, r| -> Vec<crate::spectral::Jet> { cands.iter().map(|c| ctx.jet(*c, l, region, r)).collect() };
    let (ji, jo, jro) = (at(Region::Inner, ri), at(Region::Outer, ri), at(Region::Outer, ro));
    let (mi, mo, me) = (params.mu_i, params.mu_o, params.mu_e);
    let constraints = match family {
        Family::Toroidal => {
            let mut c = DMatrix::zeros(2, n);
            for k in 0..nc {
                c[(0, k)] = ji[k].v() / mi - jo[k].v() / mo;
                c[(1, k)] = jro[k].v() / mo;
            }
            c
        }
        _ => {
            let mut c = DMatrix::zeros(4, n);
            let e = exterior_potential_jet(l, ro);
            for k in 0..nc {
                c[(0, k)] = ji[k].v() - jo[k].v();
                c[(1, k)] = (ji[k].v() + ri * ji[k].d1()) / mi - (jo[k].v() + ri * jo[k].d1()) / mo;
                c[(2, k)] = jro[k].v();
                c[(3, k)] = (jro[k].v() + ro * jro[k].d1()) / mo;
            }
            c[(2, nc)] = -e.v();
            c[(3, nc)] = -(e.v() + ro * e.d1()) / me;
            c
        }
    };
    BlockForms {
        constraints,
        mass,
        stiffness: stiff,
    }
}

impl MagneticBasis {
    pub fn profile_id(l: usize, family: Family) -> usize {
        2 * (l - 1) + usize::from(family == Family::Poloidal)
    }

    pub fn n_modes(&self) -> usize {
        self.layout.n
    }

    pub fn nlm(&self) -> usize {
        lm_count(self.resolution.l_max)
    }

    pub fn mode(&self, i: usize) -> MagneticMode {
        let (s, k) = self.layout.locate(i);
        let slot = &self.layout.slots[s];
        let b = &self.blocks[slot.profile];
        MagneticMode {
            idx: SphericalHarmonicIndex::new(slot.l, slot.m),
            family: slot.family,
            k,
            c_ext: b.exterior(k),
            mass_norm: 1.0,
            d_diag: b.eigenvalues[k],
        }
    }

    pub fn modes(&self) -> Vec<MagneticMode> {
        (0..self.n_modes()).map(|i| self.mode(i)).collect()
    }

    /// Radial block and radial index of global mode i.
    pub fn block_of(&self, i: usize) -> (&RadialBlock, usize, SphericalHarmonicIndex) {
        let (s, k) = self.layout.locate(i);
        let slot = &self.layout.slots[s];
        (&self.blocks[slot.profile], k, SphericalHarmonicIndex::new(slot.l, slot.m))
    }

    /// Field factors of mode i at radius r in `region`.
    pub fn factors(&self, i: usize, region: Region, r: f64) -> VecRad {
        let (b, k, _) = self.block_of(i);
        b.vecrad(k, region, r)
    }

    /// Pointwise B of mode i, spherical components, at (r, θ, φ, region).
    pub fn eval_mode(&self, i: usize, points: &[(f64, f64, f64, Region)]) -> Result<Vec<[f64; 3]>> {
        let (b, k, idx) = self.block_of(i);
        let (ri, ro) = (self.params.r_i, self.params.r_o);
        points
            .iter()
            .map(|&(r, th, ph, region)| {
                if !region.contains(r, ri, ro) || r <= 0.0 {
                    return Err(Error::Region { r, region: region.name() });
                }
                Ok(eval_factors(&b.vecrad(k, region, r), idx, th, ph))
            })
            .collect()
    }

    /// 𝔹⁰ mass of one (l, family) block in the final basis, re-assembled by
    /// quadrature.
    pub fn block_matrices(&self, l: usize, family: Family) -> (DMatrix<f64>, DMatrix<f64>) {
        let b = &self.blocks[Self::profile_id(l, family)];
        let f = magnetic_forms(l, family, &b.cands, &b.ctx, &self.params, &self.inner, &self.outer);
        (
            b.coef.transpose() * &f.mass * &b.coef,
            b.coef.transpose() * &f.stiffness * &b.coef,
        )
    }
}

/// Spherical components of `A Y r̂ + Q ∇₁Y + T ∇₁Y × r̂` at (θ, φ).
pub fn eval_factors(v: &VecRad, idx: SphericalHarmonicIndex, th: f64, ph: f64) -> [f64; 3] {
    let [y, yt, yp] = crate::spectral::harmonics::eval_real_harmonic_gradient(idx, th, ph);
    [v.a * y, v.q * yt + v.t * yp, v.q * yp - v.t * yt]
}

pub fn build_magnetic_basis(params: &PhysicalParams, res: &SpectralResolution) -> Result<MagneticBasis> {
    params.validate()?;
    res.validate()?;
    let ctx = RadialContext::new(params, res.poly);
    let inner = build_radial_grid(Region::Inner, res, params);
    let outer = build_radial_grid(Region::Outer, res, params);
    let keys: Vec<(usize, Family)> = (1..=res.l_max)
        .flat_map(|l| [(l, Family::Toroidal), (l, Family::Poloidal)])
        .collect();
    let blocks = par::map(&keys, |&(l, family)| {
        let cands = magnetic_candidates(family, res);
        let forms = magnetic_forms(l, family, &cands, &ctx, params, &inner, &outer);
        let extra = if family == Family::Poloidal { Extra::ExteriorPotential } else { Extra::None };
        RadialBlock::solve(l, family, cands, extra, ctx, forms, &outer)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let spec: Vec<_> = keys
        .iter()
        .enumerate()
        .map(|(p, &(l, f))| (l, f, p, blocks[p].n_modes()))
        .collect();
    let layout = Layout::build(res.l_max, &spec);
    let field = |b: &RadialBlock, j: usize, region: Region, r: f64| b.vecrad(j, region, r);
    let curl = |b: &RadialBlock, j: usize, region: Region, r: f64| {
        curl_vecrad(b.family, b.l, r, &b.jet(j, region, r), 1.0 / params.mu(region))
    };
    let eigenvalues = (0..layout.n)
        .map(|i| {
            let (s, k) = layout.locate(i);
            blocks[layout.slots[s].profile].eigenvalues[k]
        })
        .collect();
    Ok(MagneticBasis {
        field_in: ProfileTable::build(&blocks, &inner, |b, j, r| field(b, j, Region::Inner, r)),
        field_out: ProfileTable::build(&blocks, &outer, |b, j, r| field(b, j, Region::Outer, r)),
        curl_in: ProfileTable::build(&blocks, &inner, |b, j, r| curl(b, j, Region::Inner, r)),
        curl_out: ProfileTable::build(&blocks, &outer, |b, j, r| curl(b, j, Region::Outer, r)),
        field_ri: ProfileTable::at_radius(&blocks, params.r_i, |b, j, r| field(b, j, Region::Outer, r)),
        params: params.clone(),
        resolution: res.clone(),
        angular: res.angular_grid(),
        blocks,
        layout,
        inner,
        outer,
        eigenvalues,
    })
}

/// Closed-form exterior energy pairing of two global modes.
pub fn exterior_energy(basis: &MagneticBasis, i: usize, j: usize) -> f64 {
    let (a, b) = (basis.mode(i), basis.mode(j));
    if a.idx != b.idx || a.family != Family::Poloidal || b.family != Family::Poloidal {
        return 0.0;
    }
    exterior_energy_coeffs(a.idx.l, a.c_ext, b.c_ext, basis.params.r_o, basis.params.mu_e)
}

/// Worst-case membership residuals over all modes, sampled on the angular
/// quadrature grid.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConformanceReport {
    pub divergence: f64,
    pub normal_jump: f64,
    pub tangential_jump: f64,
    pub exterior_curl: f64,
    pub modes: usize,
}

impl ConformanceReport {
    pub fn worst(&self) -> f64 {
        self.divergence.max(self.normal_jump).max(self.tangential_jump).max(self.exterior_curl)
    }
}

/// Surface L² norms of the jumps of B·n and of n × μ⁻¹B at R_i and R_o,
/// the divergence at interior shells, and the curl outside the core.
pub fn conformance(basis: &MagneticBasis) -> ConformanceReport {
    let p = &basis.params;
    let grid = &basis.angular;
    let nlm = basis.nlm();
    // Every quantity depends on (l, family, k) only; the angular grid
    // samples one order per degree for each (l, family) block.
    let mut jobs = Vec::new();
    for s in &basis.layout.slots {
        for k in 0..s.len {
            jobs.push((s.offset + k, s.l, s.m));
        }
    }
    let rows = par::map(&jobs, |&(i, l, m)| {
        let lm = SphericalHarmonicIndex::new(l, m).flat();
        let sample = |region: Region, r: f64, grad: bool| {
            let mut rad = vec![VecRad::default(); nlm];
            rad[lm] = basis.factors(i, region, r);
            grid.synth_vector(&rad, r, grad)
        };
        let jump = |r: f64, a: Region, b: Region| {
            let (sa, sb) = (sample(a, r, false), sample(b, r, false));
            let (ma, mb) = (1.0 / p.mu(a), 1.0 / if b == Region::Exterior { p.mu_e } else { p.mu(b) });
            let n = grid.integrate(|q| (sa.v[q][0] - sb.v[q][0]).powi(2)).sqrt() * r;
            let t = grid
                .integrate(|q| (ma * sa.v[q][1] - mb * sb.v[q][1]).powi(2) + (ma * sa.v[q][2] - mb * sb.v[q][2]).powi(2))
                .sqrt()
                * r;
            (n, t)
        };
        let (n1, t1) = jump(p.r_i, Region::Inner, Region::Outer);
        let (n2, t2) = jump(p.r_o, Region::Outer, Region::Exterior);
        let mut div: f64 = 0.0;
        for (region, r) in [(Region::Inner, 0.5 * p.r_i), (Region::Outer, 0.5 * (p.r_i + p.r_o))] {
            let s = sample(region, r, true);
            div = div.max(grid.integrate(|q| (s.grad[q][0][0] + s.grad[q][1][1] + s.grad[q][2][2]).powi(2)).sqrt() * r);
        }
        let mut curl: f64 = 0.0;
        for r in [1.5 * p.r_o, 3.0 * p.r_o] {
            let s = sample(Region::Exterior, r, true);
            let c = grid.integrate(|q| {
                let g = &s.grad[q];
                (g[2][1] - g[1][2]).powi(2) + (g[0][2] - g[2][0]).powi(2) + (g[1][0] - g[0][1]).powi(2)
            });
            curl = curl.max(c.sqrt() * r);
        }
        [div, n1.max(n2), t1.max(t2), curl]
    });
    let mut rep = ConformanceReport {
        modes: rows.len(),
        ..Default::default()
    };
    for r in rows {
        rep.divergence = rep.divergence.max(r[0]);
        rep.normal_jump = rep.normal_jump.max(r[1]);
        rep.tangential_jump = rep.tangential_jump.max(r[2]);
        rep.exterior_curl = rep.exterior_curl.max(r[3]);
    }
    rep
}

/// Extremes of `‖B‖_{H¹(Ω_i)×H¹(Ω_o)} / ‖B‖_{𝔹¹}` and
/// `‖curl μ⁻¹B‖_{L²(ℝ³)} / ‖B‖_{𝔹¹}`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NormEquivalence {
    pub h1_min: f64,
    pub h1_max: f64,
    pub curl_min: f64,
    pub curl_max: f64,
    /// Largest H¹ ratio over individual basis modes.
    pub mode_h1_max: f64,
    /// Range of `‖B‖_{H¹} / ‖curl μ⁻¹ B‖_{L²(Ω_c)}` over the samples.
    pub estimate_min: f64,
    pub estimate_max: f64,
    pub samples: usize,
}

/// Per-(l, family) Gram matrices of the H¹ and `‖curl μ⁻¹·‖²` norms in the
/// orthonormal basis.
pub fn block_norm_grams(basis: &MagneticBasis, l: usize, family: Family) -> (DMatrix<f64>, DMatrix<f64>) {
    let b = &basis.blocks[MagneticBasis::profile_id(l, family)];
    let n = b.n_modes();
    let mut h1 = DMatrix::zeros(n, n);
    let mut cc = DMatrix::zeros(n, n);
    for grid in [&basis.inner, &basis.outer] {
        let grams = gradient_grams_table(&basis.angular, l, &grid.r);
        let mu = basis.params.mu(grid.region);
        for (node, &r) in grid.r.iter().enumerate() {
            let jets: Vec<_> = (0..n).map(|j| b.jet(j, grid.region, r)).collect();
            let f: Vec<[f64; 6]> = jets.iter().map(|j| crate::basis::vecrad_array(&b_vecrad(b, j, r))).collect();
            let c: Vec<VecRad> = jets.iter().map(|j| curl_vecrad(b.family, l, r, j, 1.0 / mu)).collect();
            let g = &grams[node].0;
            let w = grid.w[node];
            for a in 0..n {
                for bb in a..n {
                    let mut grad = 0.0;
                    for x in 0..6 {
                        for y in 0..6 {
                            grad += f[a][x] * g[x][y] * f[bb][y];
                        }
                    }
                    let fa = b_vecrad(b, &jets[a], r);
                    let fb = b_vecrad(b, &jets[bb], r);
                    h1[(a, bb)] += w * (factor_dot(l, &fa, &fb) + grad);
                    cc[(a, bb)] += w * factor_dot(l, &c[a], &c[bb]);
                }
            }
        }
    }
    for a in 0..n {
        for bb in 0..a {
            h1[(a, bb)] = h1[(bb, a)];
            cc[(a, bb)] = cc[(bb, a)];
        }
    }
    (h1, cc)
}

fn b_vecrad(b: &RadialBlock, j: &crate::spectral::Jet, r: f64) -> VecRad {
    jet_to_vecrad(b.family, b.l, r, j)
}

/// Samples `samples` random fields (coefficient envelope `(1+λ)^{-1}`),
/// plus every individual basis mode.
pub fn norm_equivalence(basis: &MagneticBasis, samples: usize, seed: u64) -> NormEquivalence {
    let keys: Vec<(usize, Family)> = (1..=basis.resolution.l_max)
        .flat_map(|l| [(l, Family::Toroidal), (l, Family::Poloidal)])
        .collect();
    let grams = par::map(&keys, |&(l, f)| block_norm_grams(basis, l, f));
    let mut out = NormEquivalence {
        h1_min: f64::INFINITY,
        curl_min: f64::INFINITY,
        estimate_min: f64::INFINITY,
        samples,
        ..Default::default()
    };
    for (p, (h1, _)) in grams.iter().enumerate() {
        let lam = &basis.blocks[p].eigenvalues;
        for k in 0..lam.len() {
            out.mode_h1_max = out.mode_h1_max.max((h1[(k, k)] / (1.0 + lam[k])).sqrt());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let mut h = 0.0;
        let mut c = 0.0;
        let mut b1 = 0.0;
        for l in 1..=basis.resolution.l_max {
            for _m in 0..(2 * l + 1) {
                for fam in [Family::Toroidal, Family::Poloidal] {
                    let p = MagneticBasis::profile_id(l, fam);
                    let lam = &basis.blocks[p].eigenvalues;
                    let g: Vec<f64> = lam.iter().map(|x| rng.random_range(-1.0..1.0) / (1.0 + x)).collect();
                    let (h1, cc) = &grams[p];
                    for a in 0..g.len() {
                        b1 += g[a] * g[a] * (1.0 + lam[a]);
                        for bb in 0..g.len() {
                            h += g[a] * h1[(a, bb)] * g[bb];
                            c += g[a] * cc[(a, bb)] * g[bb];
                        }
                    }
                }
            }
        }
        let (rh, rc) = ((h / b1).sqrt(), (c / b1).sqrt());
        out.h1_min = out.h1_min.min(rh);
        out.h1_max = out.h1_max.max(rh);
        out.curl_min = out.curl_min.min(rc);
        out.curl_max = out.curl_max.max(rc);
        out.estimate_min = out.estimate_min.min((h / c).sqrt());
        out.estimate_max = out.estimate_max.max((h / c).sqrt());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::quadrature::gauss_legendre_on;
    use std::f64::consts::PI;

    fn small() -> MagneticBasis {
        build_magnetic_basis(&PhysicalParams::unit(), &SpectralResolution::new(3, 6, 8)).unwrap()
    }

    #[test]
    fn free_decay_oracle() {
        // Uniform sphere of radius R_o in an insulator: the slowest dipole
        // mode is j₁(kr) with j₀(k R_o) = 0, so k = π/R_o.
        let b = build_magnetic_basis(&PhysicalParams::unit(), &SpectralResolution::new(1, 24, 24)).unwrap();
        let lam = b.blocks[MagneticBasis::profile_id(1, Family::Poloidal)].eigenvalues[0];
        assert!((lam / (PI * PI) - 1.0).abs() < 1e-3, "{lam}");
        // Toroidal l=1: j₁(k R_o) = 0, first root 4.4934...
        let lt = b.blocks[MagneticBasis::profile_id(1, Family::Toroidal)].eigenvalues[0];
        assert!((lt / 4.493409457909064f64.powi(2) - 1.0).abs() < 1e-3, "{lt}");
    }

    #[test]
    fn free_decay_scales_with_material_constants() {
        let mut p = PhysicalParams::unit();
        p.mu_i = 2.0;
        p.mu_o = 2.0;
        p.mu_e = 2.0;
        p.sigma_i = 3.0;
        p.sigma_o = 3.0;
        p.r_o = 2.0;
        p.r_i = 0.7;
        let b = build_magnetic_basis(&p, &SpectralResolution::new(1, 16, 16)).unwrap();
        let lam = b.blocks[MagneticBasis::profile_id(1, Family::Poloidal)].eigenvalues[0];
        let exact = PI * PI / (2.0 * 3.0 * 4.0);
        assert!((lam / exact - 1.0).abs() < 1e-3);
    }

    #[test]
    fn dipole_exterior_energy_against_mapped_quadrature() {
        // r = R_o / s maps (0, 1] onto [R_o, ∞); dr = R_o / s² ds.
        let (s, w) = gauss_legendre_on(64, 0.0, 1.0);
        let l = 1;
        let mut q = 0.0;
        for (si, wi) in s.iter().zip(&w) {
            let r = 1.0 / si;
            let v = jet_to_vecrad(Family::Poloidal, l, r, &exterior_potential_jet(l, r));
            q += wi * factor_dot(l, &v, &v) * r * r / (si * si);
        }
        let closed = exterior_energy_coeffs(1, 1.0, 1.0, 1.0, 1.0);
        assert!((closed - q).abs() < 1e-12);
        assert!((closed - 2.0).abs() < 1e-15);
        assert_eq!(exterior_energy_coeffs(2, 0.0, 0.0, 1.0, 1.0), 0.0);
        assert!((exterior_energy_coeffs(3, 2.0, 2.0, 1.3, 1.0) - 4.0 * exterior_energy_coeffs(3, 1.0, 1.0, 1.3, 1.0)).abs() < 1e-14);
    }

    #[test]
    fn toroidal_modes_have_no_exterior() {
        let b = small();
        for m in b.modes() {
            if m.family == Family::Toroidal {
                assert_eq!(m.c_ext, 0.0);
            }
        }
        let i = b.modes().iter().position(|m| m.family == Family::Toroidal).unwrap();
        let v = b.eval_mode(i, &[(1.5, 0.7, 0.2, Region::Exterior)]).unwrap();
        assert_eq!(v[0], [0.0; 3]);
    }

    #[test]
    fn blocks_are_orthonormal_and_diagonal() {
        let b = small();
        for l in 1..=3 {
            for f in [Family::Toroidal, Family::Poloidal] {
                let (m, d) = b.block_matrices(l, f);
                let lam = &b.blocks[MagneticBasis::profile_id(l, f)].eigenvalues;
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        let e = if i == j { 1.0 } else { 0.0 };
                        assert!((m[(i, j)] - e).abs() < 1e-10);
                        let dd = if i == j { lam[i] } else { 0.0 };
                        assert!((d[(i, j)] - dd).abs() < 1e-8 * (1.0 + lam[lam.len() - 1]));
                    }
                }
                assert!(lam[0] > 0.0);
            }
        }
    }

    #[test]
    fn conformance_with_contrasting_materials() {
        let mut p = PhysicalParams::unit();
        p.mu_i = 3.0;
        p.mu_o = 1.5;
        p.mu_e = 0.7;
        p.sigma_i = 5.0;
        let b = build_magnetic_basis(&p, &SpectralResolution::new(3, 6, 8)).unwrap();
        let rep = conformance(&b);
        assert!(rep.worst() < 1e-10, "{rep:?}");
    }

    #[test]
    fn poloidal_decay_rate_outside() {
        let b = small();
        let i = b.modes().iter().position(|m| m.family == Family::Poloidal && m.idx.l == 2).unwrap();
        let rs = [2.0, 4.0, 8.0, 16.0];
        let mags: Vec<f64> = rs
            .iter()
            .map(|&r| {
                let v = b.eval_mode(i, &[(r, 0.9, 0.4, Region::Exterior)]).unwrap()[0];
                (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
            })
            .collect();
        for w in 0..3 {
            let slope = (mags[w + 1] / mags[w]).ln() / 2f64.ln();
            assert!((slope + 4.0).abs() < 1e-10, "{slope}");
        }
    }

    #[test]
    fn region_mismatch_is_an_error() {
        let b = small();
        assert!(b.eval_mode(0, &[(0.9, 0.1, 0.1, Region::Inner)]).is_err());
    }

    #[test]
    fn interface_normal_continuity_by_point_evaluation() {
        let b = small();
        let ri = b.params.r_i;
        for i in 0..b.n_modes() {
            let pts = [(ri, 0.8, 1.1, Region::Inner), (ri, 0.8, 1.1, Region::Outer)];
            let v = b.eval_mode(i, &pts).unwrap();
            assert!((v[0][0] - v[1][0]).abs() < 1e-10);
        }
    }

    #[test]
    fn norm_ratios_are_bounded() {
        let b = small();
        let r = norm_equivalence(&b, 20, 3);
        assert!(r.h1_max.is_finite() && r.h1_min > 0.0);
        assert!(r.curl_min > 0.0 && r.curl_max <= 1.0 + 1e-12);
    }
}
