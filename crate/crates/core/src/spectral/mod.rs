//! Numerical substrate: harmonics, polynomial jets, quadrature rules, radial
//! and angular grids, and grid transforms.

pub mod angular;
pub mod harmonics;
pub mod poly;
pub mod quadrature;
pub mod radial;
pub mod transform;

pub use angular::{gradient_grams, gradient_grams_table, AngularGrid, ScalarSample, VecRad, VectorSample};
pub use harmonics::{eval_real_harmonic, lm_count, lm_list, SphericalHarmonicIndex};
pub use poly::{Jet, PolyFamily};
pub use radial::{build_radial_grid, RadialGrid, Region};
pub use transform::{Analysis, ShellTransform};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Truncation and quadrature sizes.
///
/// Radial rules use `2 p + 2` Gauss nodes where p is the largest polynomial
/// degree of any radial profile in the region, so products of four profiles
/// (with the r² Jacobian) integrate exactly. The angular grid has at least
/// `dealias · (l_max + 1)` latitudes and twice as many longitudes, and never
/// fewer than needed for cubic products of degree-(l_max + 2) polynomials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralResolution {
    pub l_max: usize,
    pub n_r_inner: usize,
    pub n_r_outer: usize,
    pub n_quad_r_inner: usize,
    pub n_quad_r_outer: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub dealias: f64,
    pub poly: PolyFamily,
}

impl SpectralResolution {
    pub fn new(l_max: usize, n_r_inner: usize, n_r_outer: usize) -> Self {
        Self::with_dealias(l_max, n_r_inner, n_r_outer, 1.5)
    }

    pub fn with_dealias(l_max: usize, n_r_inner: usize, n_r_outer: usize, dealias: f64) -> Self {
        let p_inner = l_max + 2 * n_r_inner + 1;
        let p_outer = n_r_outer + 4;
        let n_theta = ((dealias * (l_max + 1) as f64).ceil() as usize).max((3 * l_max + 9).div_ceil(2));
        Self {
            l_max,
            n_r_inner,
            n_r_outer,
            n_quad_r_inner: 2 * p_inner + 2,
            n_quad_r_outer: 2 * p_outer + 2,
            n_theta,
            n_phi: 2 * n_theta,
            dealias,
            poly: PolyFamily::Chebyshev,
        }
    }

    /// Same truncation with every quadrature rule enlarged by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            n_quad_r_inner: self.n_quad_r_inner * factor,
            n_quad_r_outer: self.n_quad_r_outer * factor,
            n_theta: self.n_theta * factor,
            n_phi: self.n_phi * factor,
            ..self.clone()
        }
    }

    pub fn with_poly(&self, poly: PolyFamily) -> Self {
        Self { poly, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.l_max < 1 {
            return Err(Error::Invalid("l_max must be at least 1".into()));
        }
        if self.n_r_inner < 1 {
            return Err(Error::Invalid("n_r_inner must be at least 1".into()));
        }
        if self.n_r_outer < 2 {
            return Err(Error::Invalid("n_r_outer must be at least 2".into()));
        }
        if self.dealias < 1.5 {
            return Err(Error::Invalid("dealias must be at least 3/2".into()));
        }
        if (self.n_theta as f64) < self.dealias * self.l_max as f64 || (self.n_phi as f64) < self.dealias * self.l_max as f64 {
            return Err(Error::Invalid("angular grid smaller than dealias * l_max".into()));
        }
        Ok(())
    }

    pub fn angular_grid(&self) -> AngularGrid {
        AngularGrid::new(self.l_max, self.n_theta, self.n_phi)
    }
}
