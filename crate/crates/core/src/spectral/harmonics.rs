//! Orthonormal real spherical harmonics without the Condon-Shortley phase.
//!
//! `Y_l^m = Pbar_l^|m|(cos θ) t_m(φ)` with `∫ Pbar² dx = 1` on [-1, 1] and
//! `t_0 = 1/√(2π)`, `t_m = cos(mφ)/√π`, `t_{-m} = sin(mφ)/√π`. In this
//! convention `Y_1^1 ∝ x/r` and `Y_1^{-1} ∝ y/r`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SphericalHarmonicIndex {
    pub l: usize,
    pub m: i64,
}

impl SphericalHarmonicIndex {
    pub fn new(l: usize, m: i64) -> Self {
        assert!(m.unsigned_abs() as usize <= l, "|m| must not exceed l");
        Self { l, m }
    }

    /// Position in the (l ascending, m ascending) enumeration.
    pub fn flat(&self) -> usize {
        self.l * self.l + (self.m + self.l as i64) as usize
    }

    pub fn from_flat(i: usize) -> Self {
        let l = (i as f64).sqrt() as usize;
        let l = if (l + 1) * (l + 1) <= i { l + 1 } else { l };
        let l = if l * l > i { l - 1 } else { l };
        Self {
            l,
            m: (i - l * l) as i64 - l as i64,
        }
    }

    pub fn ll1(&self) -> f64 {
        (self.l * (self.l + 1)) as f64
    }
}

/// Number of (l, m) pairs with l ≤ l_max.
pub fn lm_count(l_max: usize) -> usize {
    (l_max + 1) * (l_max + 1)
}

/// All indices up to `l_max` in canonical order.
pub fn lm_list(l_max: usize) -> Vec<SphericalHarmonicIndex> {
    (0..lm_count(l_max))
        .map(SphericalHarmonicIndex::from_flat)
        .collect()
}

/// Index into triangular (l, |m|) tables.
#[inline]
pub fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Normalization of the azimuthal factor `t_m`.
#[inline]
pub fn azimuthal_norm(m: usize) -> f64 {
    if m == 0 {
        1.0 / (2.0 * PI).sqrt()
    } else {
        1.0 / PI.sqrt()
    }
}

/// Normalized associated Legendre values and their first and second
/// θ-derivatives at colatitude θ, for all l ≤ l_max, 0 ≤ m ≤ l, in `tri` order.
#[derive(Clone, Debug)]
pub struct LegendreColumn {
    pub p: Vec<f64>,
    pub dp: Vec<f64>,
    pub d2p: Vec<f64>,
}

/// Pbar_l^m(cos θ) for l ≤ l_max (triangular layout).
pub fn legendre_values(l_max: usize, theta: f64) -> Vec<f64> {
    let x = theta.cos();
    let s = theta.sin();
    let mut p = vec![0.0; tri(l_max, l_max) + 1];
    let mut pmm = (0.5f64).sqrt();
    for m in 0..=l_max {
        if m > 0 {
            let mf = m as f64;
            pmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s;
        }
        p[tri(m, m)] = pmm;
        if m < l_max {
            p[tri(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * x * pmm;
        }
        for l in m + 2..=l_max {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            p[tri(l, m)] = a * (x * p[tri(l - 1, m)] - b * p[tri(l - 2, m)]);
        }
    }
    p
}

/// Values and θ-derivatives. Requires 0 < θ < π.
pub fn legendre_column(l_max: usize, theta: f64) -> LegendreColumn {
    let x = theta.cos();
    let s = theta.sin();
    let ext = legendre_values(l_max + 1, theta);
    let n = tri(l_max, l_max) + 1;
    let mut p = vec![0.0; n];
    let mut dp = vec![0.0; n];
    let mut d2p = vec![0.0; n];
    for l in 0..=l_max {
        for m in 0..=l {
            let lf = l as f64;
            let mf = m as f64;
            let v = ext[tri(l, m)];
            let ratio = ((2.0 * lf + 1.0) / (2.0 * lf + 3.0) * (lf + 1.0 + mf) / (lf + 1.0 - mf)).sqrt();
            let d = -((lf + 1.0) * x * v - (lf - mf + 1.0) * ratio * ext[tri(l + 1, m)]) / s;
            let dd = -x / s * d - (lf * (lf + 1.0) - mf * mf / (s * s)) * v;
            p[tri(l, m)] = v;
            dp[tri(l, m)] = d;
            d2p[tri(l, m)] = dd;
        }
    }
    LegendreColumn { p, dp, d2p }
}

fn azimuthal(m: i64, phi: f64) -> (f64, f64) {
    let ma = m.unsigned_abs() as usize;
    let n = azimuthal_norm(ma);
    let mf = ma as f64;
    if m >= 0 {
        (n * (mf * phi).cos(), -n * mf * (mf * phi).sin())
    } else {
        (n * (mf * phi).sin(), n * mf * (mf * phi).cos())
    }
}

/// Orthonormal real spherical harmonic value.
pub fn eval_real_harmonic(idx: SphericalHarmonicIndex, theta: f64, phi: f64) -> f64 {
    let p = legendre_values(idx.l, theta);
    let (t, _) = azimuthal(idx.m, phi);
    p[tri(idx.l, idx.m.unsigned_abs() as usize)] * t
}

/// `(Y, ∂_θ Y, ∂_φ Y / sin θ)`. Requires 0 < θ < π.
pub fn eval_real_harmonic_gradient(idx: SphericalHarmonicIndex, theta: f64, phi: f64) -> [f64; 3] {
    let col = legendre_column(idx.l, theta);
    let k = tri(idx.l, idx.m.unsigned_abs() as usize);
    let (t, dt) = azimuthal(idx.m, phi);
    [col.p[k] * t, col.dp[k] * t, col.p[k] * dt / theta.sin()]
}
