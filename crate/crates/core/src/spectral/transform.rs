//! Grid transforms on one region: spectral coefficients (per (l, m), per
//! radial Legendre polynomial in the mapped radius) to values on the
//! radial × angular quadrature grid and back.

use super::angular::VecRad;
use super::poly::PolyFamily;
use super::{build_radial_grid, lm_count, AngularGrid, RadialGrid, Region, SpectralResolution};
use crate::config::PhysicalParams;
use crate::error::{Error, Result};
use crate::par;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

pub struct ShellTransform {
    pub radial: RadialGrid,
    pub angular: AngularGrid,
    pub n_radial: usize,
    basis: Vec<Vec<f64>>,
    gram: Cholesky<f64, Dyn>,
}

/// Result of an analysis: coefficients plus the relative L² norm of the part
/// of the input that the resolved band cannot represent.
#[derive(Clone, Debug)]
pub struct Analysis<C> {
    pub coeffs: C,
    pub unresolved: f64,
}

impl ShellTransform {
    /// `n_radial` radial modes (Legendre in the mapped radius); requires the
    /// radial quadrature to integrate their pairwise products exactly.
    pub fn new(region: Region, res: &SpectralResolution, params: &PhysicalParams, n_radial: usize) -> Result<Self> {
        let radial = build_radial_grid(region, res, params);
        if 2 * n_radial + 2 > 2 * radial.len() {
            return Err(Error::Shape(format!(
                "{n_radial} radial modes need more than {} nodes",
                radial.len()
            )));
        }
        let (a, b) = match region {
            Region::Inner => (0.0, params.r_i),
            _ => (params.r_i, params.r_o),
        };
        let mut basis = vec![vec![0.0; radial.len()]; n_radial];
        for (n, &r) in radial.r.iter().enumerate() {
            let x = (2.0 * r - a - b) / (b - a);
            for (k, j) in PolyFamily::Legendre.jets(x, n_radial).iter().enumerate() {
                basis[k][n] = j.v();
            }
        }
        let mut g = DMatrix::zeros(n_radial, n_radial);
        for i in 0..n_radial {
            for j in 0..n_radial {
                g[(i, j)] = radial.integrate(|n| basis[i][n] * basis[j][n]);
            }
        }
        let gram = Cholesky::new(g).ok_or_else(|| Error::Shape("singular radial Gram matrix".into()))?;
        Ok(Self {
            radial,
            angular: res.angular_grid(),
            n_radial,
            basis,
            gram,
        })
    }

    fn check(&self, coeffs: &[Vec<f64>]) -> Result<()> {
        let n = lm_count(self.angular.l_max);
        if coeffs.len() != n {
            return Err(Error::Shape(format!("expected {n} (l,m) rows, got {}", coeffs.len())));
        }
        if let Some(row) = coeffs.iter().find(|c| c.len() != self.n_radial) {
            return Err(Error::Shape(format!(
                "expected {} radial coefficients, got {}",
                self.n_radial,
                row.len()
            )));
        }
        Ok(())
    }

    /// Values at every (radial node, angular point), node-major.
    pub fn synthesize(&self, coeffs: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.check(coeffs)?;
        let rows = par::map_range(self.radial.len(), |n| {
            let rad: Vec<[f64; 2]> = coeffs
                .iter()
                .map(|c| [c.iter().enumerate().map(|(k, ck)| ck * self.basis[k][n]).sum(), 0.0])
                .collect();
            self.angular.synth_scalar(&rad, self.radial.r[n], false).v
        });
        Ok(rows.concat())
    }

    pub fn analyze(&self, field: &[f64]) -> Result<Analysis<Vec<Vec<f64>>>> {
        let np = self.angular.n_points();
        if field.len() != np * self.radial.len() {
            return Err(Error::Shape(format!(
                "expected {} grid values, got {}",
                np * self.radial.len(),
                field.len()
            )));
        }
        let moments = par::map_range(self.radial.len(), |n| self.angular.scalar_moments(&field[n * np..(n + 1) * np]));
        let nlm = lm_count(self.angular.l_max);
        let coeffs: Vec<Vec<f64>> = (0..nlm)
            .map(|f| {
                let b = DVector::from_fn(self.n_radial, |k, _| {
                    self.radial.integrate(|n| self.basis[k][n] * moments[n][f])
                });
                self.gram.solve(&b).iter().copied().collect()
            })
            .collect();
        let back = self.synthesize(&coeffs)?;
        let norm = |v: &dyn Fn(usize) -> f64| {
            (0..self.radial.len())
                .map(|n| self.radial.w[n] * self.angular.integrate(|p| v(n * np + p).powi(2)))
                .sum::<f64>()
        };
        let total = norm(&|i| field[i]);
        let miss = norm(&|i| field[i] - back[i]);
        let unresolved = if total > 0.0 { (miss / total).sqrt() } else { 0.0 };
        Ok(Analysis { coeffs, unresolved })
    }

    /// Vector field from per-(l, m), per-radial-mode `(A, Q, T)` factors.
    pub fn synthesize_vector(&self, coeffs: &[Vec<[f64; 3]>]) -> Result<Vec<[f64; 3]>> {
        let n = lm_count(self.angular.l_max);
        if coeffs.len() != n || coeffs.iter().any(|c| c.len() != self.n_radial) {
            return Err(Error::Shape("vector coefficient shape does not match resolution".into()));
        }
        let rows = par::map_range(self.radial.len(), |nd| {
            let rad: Vec<VecRad> = coeffs
                .iter()
                .map(|c| {
                    let mut v = VecRad::default();
                    for (k, ck) in c.iter().enumerate() {
                        let b = self.basis[k][nd];
                        v.a += ck[0] * b;
                        v.q += ck[1] * b;
                        v.t += ck[2] * b;
                    }
                    v
                })
                .collect();
            self.angular.synth_vector(&rad, self.radial.r[nd], false).v
        });
        Ok(rows.concat())
    }

    pub fn analyze_vector(&self, field: &[[f64; 3]]) -> Result<Vec<Vec<[f64; 3]>>> {
        let np = self.angular.n_points();
        if field.len() != np * self.radial.len() {
            return Err(Error::Shape("vector grid size does not match resolution".into()));
        }
        let moments = par::map_range(self.radial.len(), |n| self.angular.vector_moments(&field[n * np..(n + 1) * np]));
        let nlm = lm_count(self.angular.l_max);
        Ok((0..nlm)
            .map(|f| {
                let l = super::SphericalHarmonicIndex::from_flat(f).l as f64;
                let ll = l * (l + 1.0);
                let mut out = vec![[0.0; 3]; self.n_radial];
                if f == 0 {
                    return out;
                }
                for c in 0..3 {
                    let b = DVector::from_fn(self.n_radial, |k, _| {
                        self.radial.integrate(|n| self.basis[k][n] * moments[n][f][c])
                    });
                    let x = self.gram.solve(&b);
                    let scale = if c == 0 { 1.0 } else { 1.0 / ll };
                    for k in 0..self.n_radial {
                        out[k][c] = x[k] * scale;
                    }
                }
                out
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn setup(region: Region) -> ShellTransform {
        let res = SpectralResolution::new(5, 4, 6);
        ShellTransform::new(region, &res, &PhysicalParams::unit(), 5).unwrap()
    }

    #[test]
    fn constant_field_round_trip() {
        let t = setup(Region::Outer);
        let nlm = lm_count(5);
        let mut c = vec![vec![0.0; 5]; nlm];
        c[0][0] = 1.0;
        let f = t.synthesize(&c).unwrap();
        for v in &f {
            assert!((v - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-14);
        }
        let ones = vec![1.0; f.len()];
        let a = t.analyze(&ones).unwrap();
        assert!((a.coeffs[0][0] - (4.0 * PI).sqrt()).abs() < 1e-12);
        for (i, row) in a.coeffs.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                if i > 0 || k > 0 {
                    assert!(v.abs() < 1e-12);
                }
            }
        }
        assert!(a.unresolved < 1e-12);
    }

    #[test]
    fn zero_coefficients_give_zero_field() {
        let t = setup(Region::Inner);
        let c = vec![vec![0.0; 5]; lm_count(5)];
        assert!(t.synthesize(&c).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn random_round_trip_both_regions() {
        for region in [Region::Inner, Region::Outer] {
            let t = setup(region);
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let c: Vec<Vec<f64>> = (0..lm_count(5))
                .map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let a = t.analyze(&t.synthesize(&c).unwrap()).unwrap();
            for (x, y) in a.coeffs.iter().flatten().zip(c.iter().flatten()) {
                assert!((x - y).abs() < 1e-12);
            }
            let v: Vec<Vec<[f64; 3]>> = (0..lm_count(5))
                .map(|f| {
                    (0..5)
                        .map(|_| if f == 0 { [0.0; 3] } else { [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)] })
                        .collect()
                })
                .collect();
            let back = t.analyze_vector(&t.synthesize_vector(&v).unwrap()).unwrap();
            for (x, y) in back.iter().flatten().zip(v.iter().flatten()) {
                for c in 0..3 {
                    assert!((x[c] - y[c]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn super_band_field_is_reported() {
        let t = setup(Region::Outer);
        let np = t.angular.n_points();
        let idx = crate::spectral::SphericalHarmonicIndex::new(6, 3);
        let mut f = vec![0.0; np * t.radial.len()];
        for n in 0..t.radial.len() {
            for p in 0..np {
                let th = t.angular.theta[p / t.angular.n_phi];
                let ph = t.angular.phi[p % t.angular.n_phi];
                f[n * np + p] = crate::spectral::eval_real_harmonic(idx, th, ph);
            }
        }
        let a = t.analyze(&f).unwrap();
        let worst = a.coeffs.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(worst < 1e-12, "aliasing into resolved band {worst}");
        assert!((a.unresolved - 1.0).abs() < 1e-10);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let t = setup(Region::Outer);
        assert!(t.synthesize(&vec![vec![0.0; 3]; lm_count(5)]).is_err());
        assert!(t.analyze(&[0.0; 3]).is_err());
    }
}
