//! Radial Gauss grids on the inner ball and the outer shell.

use super::quadrature::{differentiation_matrix, gauss_legendre_on};
use super::SpectralResolution;
use crate::config::PhysicalParams;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    Inner,
    Outer,
    Exterior,
}

impl Region {
    pub fn name(&self) -> &'static str {
        match self {
            Region::Inner => "inner",
            Region::Outer => "outer",
            Region::Exterior => "exterior",
        }
    }

    /// Region containing radius r; interface radii belong to the inner side.
    pub fn of_radius(r: f64, r_i: f64, r_o: f64) -> Region {
        if r <= r_i {
            Region::Inner
        } else if r <= r_o {
            Region::Outer
        } else {
            Region::Exterior
        }
    }

    pub fn contains(&self, r: f64, r_i: f64, r_o: f64) -> bool {
        match self {
            Region::Inner => (0.0..=r_i).contains(&r),
            Region::Outer => (r_i..=r_o).contains(&r),
            Region::Exterior => r >= r_o,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RadialGrid {
    pub region: Region,
    pub r: Vec<f64>,
    /// Gauss weights times r².
    pub w: Vec<f64>,
    pub diff: DMatrix<f64>,
}

impl RadialGrid {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Quadrature of f(r) r² dr over the region.
    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.w.iter().enumerate().map(|(k, w)| w * f(k)).sum()
    }
}

pub fn build_radial_grid(region: Region, res: &SpectralResolution, params: &PhysicalParams) -> RadialGrid {
    let (n, a, b) = match region {
        Region::Inner => (res.n_quad_r_inner, 0.0, params.r_i),
        Region::Outer => (res.n_quad_r_outer, params.r_i, params.r_o),
        Region::Exterior => panic!("the exterior is handled analytically"),
    };
    let (r, w) = gauss_legendre_on(n, a, b);
    let w = r.iter().zip(&w).map(|(ri, wi)| wi * ri * ri).collect();
    let diff = differentiation_matrix(&r);
    RadialGrid { region, r, w, diff }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(r_i: f64, r_o: f64) -> PhysicalParams {
        PhysicalParams {
            r_i,
            r_o,
            ..PhysicalParams::unit()
        }
    }

    #[test]
    fn weights_sum_to_volume_over_4pi() {
        let res = SpectralResolution::new(4, 6, 8);
        let g = build_radial_grid(Region::Inner, &res, &params(1.0, 2.0));
        let s: f64 = g.w.iter().sum();
        assert!((s - 1.0 / 3.0).abs() < 1e-13 / 3.0);
        let g = build_radial_grid(Region::Outer, &res, &params(0.5, 1.0));
        let s: f64 = g.w.iter().sum();
        let exact = (1.0 - 0.125) / 3.0;
        assert!((s - exact).abs() < 1e-13 * exact);
    }

    #[test]
    fn differentiation_annihilates_constants_and_differentiates_cubes() {
        let res = SpectralResolution::new(4, 6, 8);
        let g = build_radial_grid(Region::Outer, &res, &params(0.35, 1.0));
        let n = g.len();
        for i in 0..n {
            let c: f64 = (0..n).map(|j| g.diff[(i, j)]).sum();
            assert!(c.abs() < 1e-13 * n as f64 * 10.0);
            let d: f64 = (0..n).map(|j| g.diff[(i, j)] * g.r[j].powi(3)).sum();
            assert!((d - 3.0 * g.r[i] * g.r[i]).abs() < 1e-12 * 100.0);
        }
    }
}
