//! Radial candidate functions, per-degree constrained eigenbases, and the
//! mode layout shared by the magnetic, velocity and buoyancy spaces.
//!
//! Every space is rotationally invariant, so the radial profiles of a block
//! depend on the degree l and the family only; the same profiles serve all
//! orders m.

use crate::config::PhysicalParams;
use crate::error::{Error, Result};
use crate::linalg::{generalized_eigen, null_space};
use crate::spectral::poly::jacobi_jets;
use crate::spectral::{Jet, PolyFamily, RadialGrid, Region, VecRad};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Toroidal,
    Poloidal,
    Scalar,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Toroidal => "toroidal",
            Family::Poloidal => "poloidal",
            Family::Scalar => "scalar",
        }
    }
}

/// Envelope multiplying a polynomial Q_k(x) on the outer shell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    One,
    /// r
    R,
    /// 1 - x²
    Clamp,
    /// r (1 - x²)²
    RClamp2,
    /// 1 - x
    Dirichlet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Candidate {
    /// `(r/R_i)^l J_k(2 (r/R_i)² - 1)` on the inner ball, with `J_k` the
    /// Jacobi polynomial `P_k^{(0, l+1/2)}` orthogonal under the ball's
    /// `r^{2l+2}` weight.
    Inner { k: usize },
    /// `shape(r) Q_k(x)` on the outer shell, `x = (2r - R_i - R_o)/(R_o - R_i)`.
    Outer { k: usize, shape: Shape },
    /// Degree-one toroidal profile of rigid rotation: `r / c₁` on the inner
    /// ball, clamped to zero at R_o by a Hermite cubic on the shell.
    Lifting,
}

/// √(3/4π): `ω × x` is the toroidal field with profile `r / c₁`.
pub fn c1() -> f64 {
    (3.0 / (4.0 * PI)).sqrt()
}

#[derive(Clone, Copy, Debug)]
pub struct RadialContext {
    pub poly: PolyFamily,
    pub r_i: f64,
    pub r_o: f64,
}

impl RadialContext {
    pub fn new(params: &PhysicalParams, poly: PolyFamily) -> Self {
        Self {
            poly,
            r_i: params.r_i,
            r_o: params.r_o,
        }
    }

    /// Jet of q with `jet(c, l, Inner, r) = (r/R_i)^l q(r)`.
    pub fn inner_reduced_jet(&self, c: Candidate, l: usize, r: f64) -> Jet {
        match c {
            Candidate::Inner { k } => {
                let s = Jet::affine(0.0, 1.0 / self.r_i, r);
                let y = s.mul(s).scale(2.0).add(Jet::constant(-1.0));
                jacobi_jets(l as f64 + 0.5, y.v(), k + 1)[k].compose(y)
            }
            Candidate::Lifting if l == 1 => Jet::constant(self.r_i / c1()),
            _ => Jet::ZERO,
        }
    }

    /// Jet in r of candidate `c` for degree l, evaluated on `region` at r.
    pub fn jet(&self, c: Candidate, l: usize, region: Region, r: f64) -> Jet {
        match (c, region) {
            (Candidate::Inner { k }, Region::Inner) => {
                let s = Jet::affine(0.0, 1.0 / self.r_i, r);
                let y = s.mul(s).scale(2.0).add(Jet::constant(-1.0));
                let q = jacobi_jets(l as f64 + 0.5, y.v(), k + 1)[k].compose(y);
                Jet::power(s.v(), l).compose(s).mul(q)
            }
            (Candidate::Outer { k, shape }, Region::Outer) => {
                let h = self.r_o - self.r_i;
                let x = Jet::affine(-(self.r_i + self.r_o) / h, 2.0 / h, r);
                let q = self.poly.jets(x.v(), k + 1)[k].compose(x);
                let one_minus_x2 = Jet::constant(1.0).add(x.mul(x).scale(-1.0));
                let env = match shape {
                    Shape::One => Jet::constant(1.0),
                    Shape::R => Jet::affine(0.0, 1.0, r),
                    Shape::Clamp => one_minus_x2,
                    Shape::RClamp2 => Jet::affine(0.0, 1.0, r).mul(one_minus_x2).mul(one_minus_x2),
                    Shape::Dirichlet => Jet::constant(1.0).add(x.scale(-1.0)),
                };
                env.mul(q)
            }
            (Candidate::Lifting, Region::Inner) => Jet::affine(0.0, 1.0, r).scale(1.0 / c1()),
            (Candidate::Lifting, Region::Outer) => {
                let h = self.r_o - self.r_i;
                let u = Jet::affine(-self.r_i / h, 1.0 / h, r);
                let u2 = u.mul(u);
                let u3 = u2.mul(u);
                let h00 = u3.scale(2.0).add(u2.scale(-3.0)).add(Jet::constant(1.0));
                let h10 = u3.add(u2.scale(-2.0)).add(u);
                h00.scale(self.r_i).add(h10.scale(h)).scale(1.0 / c1())
            }
            _ => Jet::ZERO,
        }
    }
}

/// Extra non-radial degree of freedom carried by a block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extra {
    None,
    /// Coefficient c of the exterior potential `c r^{-(l+1)} Y`.
    ExteriorPotential,
}

/// Orthonormalized radial profiles for one (degree, family).
#[derive(Clone, Debug)]
pub struct RadialBlock {
    pub l: usize,
    pub family: Family,
    pub cands: Vec<Candidate>,
    pub extra: Extra,
    /// (candidates + extras) × modes.
    pub coef: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    pub ctx: RadialContext,
}

/// Quadratic forms of a block before orthonormalization.
pub struct BlockForms {
    pub constraints: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
}

impl RadialBlock {
    pub fn n_modes(&self) -> usize {
        self.coef.ncols()
    }

    pub fn n_cands(&self) -> usize {
        self.cands.len()
    }

    /// Constrains, then solves the generalized eigenproblem of stiffness
    /// against mass. Profiles are signed so their outer-shell integral is
    /// positive.
    pub fn solve(
        l: usize,
        family: Family,
        cands: Vec<Candidate>,
        extra: Extra,
        ctx: RadialContext,
        forms: BlockForms,
        outer: &RadialGrid,
    ) -> Result<Self> {
        let z = null_space(&forms.constraints).ok_or(Error::Rank { l, family: family.name() })?;
        let mz = z.transpose() * &forms.mass * &z;
        let dz = z.transpose() * &forms.stiffness * &z;
        let (vals, w) = generalized_eigen(&dz, &mz).map_err(|msg| Error::Eigen {
            l,
            family: family.name(),
            msg,
        })?;
        let mut coef = z * w;
        let mut block = RadialBlock {
            l,
            family,
            cands,
            extra,
            coef: coef.clone(),
            eigenvalues: vals,
            ctx,
        };
        for j in 0..coef.ncols() {
            let s: f64 = (0..outer.len())
                .map(|n| outer.w[n] * block.jet(j, Region::Outer, outer.r[n]).v())
                .sum();
            let s = if s.abs() > 1e-300 {
                s
            } else {
                coef.column(j).iter().copied().find(|v| v.abs() > 1e-14).unwrap_or(1.0)
            };
            if s < 0.0 {
                coef.column_mut(j).neg_mut();
            }
        }
        block.coef = coef;
        Ok(block)
    }

    /// Profile jet of mode j on `region` at r. In the exterior only a
    /// potential block is nonzero.
    pub fn jet(&self, j: usize, region: Region, r: f64) -> Jet {
        if region == Region::Exterior {
            return match self.extra {
                Extra::ExteriorPotential => exterior_potential_jet(self.l, r).scale(self.exterior(j)),
                Extra::None => Jet::ZERO,
            };
        }
        let mut out = Jet::ZERO;
        for (k, c) in self.cands.iter().enumerate() {
            let a = self.coef[(k, j)];
            if a != 0.0 {
                out.axpy(a, &self.ctx.jet(*c, self.l, region, r));
            }
        }
        out
    }

    /// Jet of q with profile `(r/R_i)^l q(r)` on the inner ball.
    pub fn inner_reduced_jet(&self, j: usize, r: f64) -> Jet {
        let mut out = Jet::ZERO;
        for (k, c) in self.cands.iter().enumerate() {
            let a = self.coef[(k, j)];
            if a != 0.0 {
                out.axpy(a, &self.ctx.inner_reduced_jet(*c, self.l, r));
            }
        }
        out
    }

    pub fn exterior(&self, j: usize) -> f64 {
        match self.extra {
            Extra::ExteriorPotential => self.coef[(self.cands.len(), j)],
            Extra::None => 0.0,
        }
    }

    /// Field factors of mode j at r.
    pub fn vecrad(&self, j: usize, region: Region, r: f64) -> VecRad {
        jet_to_vecrad(self.family, self.l, r, &self.jet(j, region, r))
    }
}

/// Jet of `r^{-(l+1)} / l`, the poloidal potential of `-∇(r^{-(l+1)} Y)`.
pub fn exterior_potential_jet(l: usize, r: f64) -> Jet {
    let n = -(l as f64 + 1.0);
    let f = r.powf(n) / l as f64;
    Jet([
        f,
        n * f / r,
        n * (n - 1.0) * f / (r * r),
        n * (n - 1.0) * (n - 2.0) * f / (r * r * r),
    ])
}

/// Field factors for a profile jet. Scalars store (s, s') in (a, da).
pub fn jet_to_vecrad(family: Family, l: usize, r: f64, j: &Jet) -> VecRad {
    match family {
        Family::Toroidal => VecRad::toroidal(j.v(), j.d1()),
        Family::Poloidal => VecRad::poloidal(l, r, j.v(), j.d1(), j.d2()),
        Family::Scalar => VecRad {
            a: j.v(),
            da: j.d1(),
            ..Default::default()
        },
    }
}

/// `D_l P = P'' + 2P'/r - L P / r²` and its r-derivative.
pub fn radial_laplacian(l: usize, r: f64, p: &Jet) -> (f64, f64) {
    let ll = (l * (l + 1)) as f64;
    let [p0, p1, p2, p3] = p.0;
    let d = p2 + 2.0 * p1 / r - ll * p0 / (r * r);
    let dd = p3 + 2.0 * p2 / r - 2.0 * p1 / (r * r) - ll * p1 / (r * r) + 2.0 * ll * p0 / (r * r * r);
    (d, dd)
}

/// Factors of `curl(s v)` for a field v of the given family and profile jet.
pub fn curl_vecrad(family: Family, l: usize, r: f64, j: &Jet, s: f64) -> VecRad {
    match family {
        Family::Toroidal => VecRad::poloidal(l, r, s * j.v(), s * j.d1(), s * j.d2()),
        Family::Poloidal => {
            let (d, dd) = radial_laplacian(l, r, j);
            VecRad::toroidal(-s * d, -s * dd)
        }
        Family::Scalar => VecRad::default(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockSlot {
    /// Flat (l, m) index.
    pub lm: usize,
    pub l: usize,
    pub m: i64,
    pub family: Family,
    pub offset: usize,
    pub len: usize,
    /// Index of the radial block holding the profiles.
    pub profile: usize,
}

/// Global mode ordering: l ascending, m ascending, toroidal before poloidal,
/// radial index ascending.
#[derive(Clone, Debug, Default)]
pub struct Layout {
    pub slots: Vec<BlockSlot>,
    pub n: usize,
}

impl Layout {
    /// `blocks` lists (l, family, profile id, mode count) in (l, family) order.
    pub fn build(l_max: usize, blocks: &[(usize, Family, usize, usize)]) -> Self {
        let mut slots = Vec::new();
        let mut offset = 0;
        for l in 0..=l_max {
            for m in -(l as i64)..=(l as i64) {
                for &(bl, family, profile, len) in blocks.iter().filter(|b| b.0 == l) {
                    slots.push(BlockSlot {
                        lm: l * l + (m + l as i64) as usize,
                        l: bl,
                        m,
                        family,
                        offset,
                        len,
                        profile,
                    });
                    offset += len;
                }
            }
        }
        Layout { slots, n: offset }
    }

    /// (slot, radial index) of global mode `i`.
    pub fn locate(&self, i: usize) -> (usize, usize) {
        let s = self.slots.partition_point(|s| s.offset + s.len <= i);
        (s, i - self.slots[s].offset)
    }
}

/// Per-node factors of every mode of every block on one radial grid.
/// `f[profile][node][mode]`.
#[derive(Clone, Debug, Default)]
pub struct ProfileTable {
    pub f: Vec<Vec<Vec<VecRad>>>,
}

impl ProfileTable {
    pub fn build(blocks: &[RadialBlock], grid: &RadialGrid, eval: impl Fn(&RadialBlock, usize, f64) -> VecRad) -> Self {
        Self {
            f: blocks
                .iter()
                .map(|b| {
                    grid.r
                        .iter()
                        .map(|&r| (0..b.n_modes()).map(|j| eval(b, j, r)).collect())
                        .collect()
                })
                .collect(),
        }
    }

    /// Same, at a list of radii (used for interface samples).
    pub fn at_radius(blocks: &[RadialBlock], r: f64, eval: impl Fn(&RadialBlock, usize, f64) -> VecRad) -> Self {
        Self {
            f: blocks
                .iter()
                .map(|b| vec![(0..b.n_modes()).map(|j| eval(b, j, r)).collect()])
                .collect(),
        }
    }

    /// Per-(l, m) factors at `node` for coefficient vector g.
    pub fn synth(&self, layout: &Layout, nlm: usize, node: usize, g: &[f64]) -> Vec<VecRad> {
        let mut out = vec![VecRad::default(); nlm];
        for s in &layout.slots {
            let f = &self.f[s.profile][node];
            let o = &mut out[s.lm];
            for (j, fj) in f.iter().enumerate() {
                let c = g[s.offset + j];
                if c != 0.0 {
                    o.axpy(c, fj);
                }
            }
        }
        out
    }

    /// Scalar `[s, s']` per (l, m) at `node`.
    pub fn synth_scalar(&self, layout: &Layout, nlm: usize, node: usize, g: &[f64]) -> Vec<[f64; 2]> {
        self.synth(layout, nlm, node, g).iter().map(|v| [v.a, v.da]).collect()
    }

    /// `out[mode] += w · ⟨moments, factors⟩` for every vector mode.
    pub fn project(&self, layout: &Layout, node: usize, w: f64, moments: &[[f64; 3]], out: &mut [f64]) {
        for s in &layout.slots {
            let f = &self.f[s.profile][node];
            let m = &moments[s.lm];
            for (j, fj) in f.iter().enumerate() {
                out[s.offset + j] += w * fj.pair(m);
            }
        }
    }

    pub fn project_scalar(&self, layout: &Layout, node: usize, w: f64, moments: &[f64], out: &mut [f64]) {
        for s in &layout.slots {
            let f = &self.f[s.profile][node];
            let m = moments[s.lm];
            for (j, fj) in f.iter().enumerate() {
                out[s.offset + j] += w * fj.a * m;
            }
        }
    }
}

/// Weighted per-node quadratic form `Σ_n w_n Σ_ab u_a(n) K_ab(n) v_b(n)`
/// between two lists of factor rows, where K(n) is 6×6 in `VecRad` order.
pub fn vecrad_array(v: &VecRad) -> [f64; 6] {
    [v.a, v.da, v.q, v.dq, v.t, v.dt]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx() -> RadialContext {
        RadialContext {
            poly: PolyFamily::Chebyshev,
            r_i: 0.35,
            r_o: 1.0,
        }
    }

    proptest! {
        #[test]
        fn candidate_jets_match_finite_differences(k in 0usize..6, l in 1usize..5, r in 0.4f64..0.95, which in 0usize..7) {
            let c = ctx();
            let (cand, region, r) = match which {
                0 => (Candidate::Inner { k }, Region::Inner, r * 0.3),
                1 => (Candidate::Outer { k, shape: Shape::One }, Region::Outer, r),
                2 => (Candidate::Outer { k, shape: Shape::R }, Region::Outer, r),
                3 => (Candidate::Outer { k, shape: Shape::Clamp }, Region::Outer, r),
                4 => (Candidate::Outer { k, shape: Shape::RClamp2 }, Region::Outer, r),
                5 => (Candidate::Outer { k, shape: Shape::Dirichlet }, Region::Outer, r),
                _ => (Candidate::Lifting, Region::Outer, r),
            };
            let h = 1e-5;
            let j0 = c.jet(cand, l, region, r);
            let jp = c.jet(cand, l, region, r + h);
            let jm = c.jet(cand, l, region, r - h);
            for d in 0..3 {
                let fd = (jp.0[d] - jm.0[d]) / (2.0 * h);
                prop_assert!((fd - j0.0[d + 1]).abs() < 1e-4 * (1.0 + j0.0[d + 1].abs()));
            }
        }
    }

    #[test]
    fn lifting_interpolates_rigid_rotation() {
        let c = ctx();
        let a = c.jet(Candidate::Lifting, 1, Region::Outer, 0.35);
        let b = c.jet(Candidate::Lifting, 1, Region::Inner, 0.35);
        assert!((a.v() - b.v()).abs() < 1e-15);
        assert!((a.d1() - b.d1()).abs() < 1e-14);
        let e = c.jet(Candidate::Lifting, 1, Region::Outer, 1.0);
        assert!(e.v().abs() < 1e-15 && e.d1().abs() < 1e-14);
    }

    #[test]
    fn inner_reduced_jet_times_prefactor_is_the_profile() {
        let c = ctx();
        for (cand, l) in [(Candidate::Inner { k: 3 }, 4), (Candidate::Lifting, 1)] {
            let r = 0.21;
            let full = c.jet(cand, l, Region::Inner, r);
            let pre = Jet::power(r, l).scale(c.r_i.powi(-(l as i32)));
            let q = c.inner_reduced_jet(cand, l, r);
            for d in 0..3 {
                assert!((pre.mul(q).0[d] - full.0[d]).abs() < 1e-12 * (1.0 + full.0[d].abs()));
            }
        }
    }

    #[test]
    fn boundary_envelopes_vanish() {
        let c = ctx();
        for k in 0..5 {
            for (shape, at) in [(Shape::Clamp, 0.35), (Shape::Clamp, 1.0), (Shape::Dirichlet, 1.0)] {
                let j = c.jet(Candidate::Outer { k, shape }, 2, Region::Outer, at);
                assert!(j.v().abs() < 1e-14);
            }
            for at in [0.35, 1.0] {
                let j = c.jet(Candidate::Outer { k, shape: Shape::RClamp2 }, 2, Region::Outer, at);
                assert!(j.v().abs() < 1e-14);
                assert!(j.d1().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn layout_order_and_locate() {
        let blocks = [(1, Family::Toroidal, 0, 2), (1, Family::Poloidal, 1, 3), (2, Family::Toroidal, 2, 1)];
        let lay = Layout::build(2, &blocks);
        assert_eq!(lay.n, 3 * 5 + 5);
        assert_eq!(lay.slots[0].m, -1);
        assert_eq!(lay.slots[1].family, Family::Poloidal);
        // m = -1 holds 0..5; m = 0 toroidal holds 5, 6 and poloidal 7..10.
        let (s, k) = lay.locate(6);
        assert_eq!((lay.slots[s].m, lay.slots[s].family, k), (0, Family::Toroidal, 1));
        let (s, k) = lay.locate(8);
        assert_eq!((lay.slots[s].m, lay.slots[s].family, k), (0, Family::Poloidal, 1));
    }

    #[test]
    fn exterior_potential_gradient() {
        // -∇(r^{-(l+1)} Y): radial factor (l+1) r^{-(l+2)}.
        let l = 2;
        let r = 1.7;
        let v = jet_to_vecrad(Family::Poloidal, l, r, &exterior_potential_jet(l, r));
        assert!((v.a - 3.0 * r.powi(-4)).abs() < 1e-14);
        assert!((v.q + r.powi(-4)).abs() < 1e-14);
    }
}
