//! Value-and-derivative jets and the raw polynomial families used for radial
//! candidate functions.

use serde::{Deserialize, Serialize};

/// Truncated Taylor jet `[f, f', f'', f''']` of a function of one variable.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet(pub [f64; 4]);

impl Jet {
    pub const ZERO: Jet = Jet([0.0; 4]);

    pub fn constant(c: f64) -> Self {
        Jet([c, 0.0, 0.0, 0.0])
    }

    /// Jet of the affine map `a + b t`.
    pub fn affine(a: f64, b: f64, t: f64) -> Self {
        Jet([a + b * t, b, 0.0, 0.0])
    }

    pub fn v(&self) -> f64 {
        self.0[0]
    }

    pub fn d1(&self) -> f64 {
        self.0[1]
    }

    pub fn d2(&self) -> f64 {
        self.0[2]
    }

    pub fn d3(&self) -> f64 {
        self.0[3]
    }

    pub fn scale(self, s: f64) -> Self {
        Jet(self.0.map(|x| x * s))
    }

    pub fn add(self, o: Jet) -> Self {
        Jet([
            self.0[0] + o.0[0],
            self.0[1] + o.0[1],
            self.0[2] + o.0[2],
            self.0[3] + o.0[3],
        ])
    }

    pub fn axpy(&mut self, s: f64, o: &Jet) {
        for i in 0..4 {
            self.0[i] += s * o.0[i];
        }
    }

    /// Leibniz product.
    pub fn mul(self, o: Jet) -> Self {
        let [a0, a1, a2, a3] = self.0;
        let [b0, b1, b2, b3] = o.0;
        Jet([
            a0 * b0,
            a1 * b0 + a0 * b1,
            a2 * b0 + 2.0 * a1 * b1 + a0 * b2,
            a3 * b0 + 3.0 * a2 * b1 + 3.0 * a1 * b2 + a0 * b3,
        ])
    }

    /// Chain rule: `self` holds derivatives of g with respect to its argument,
    /// evaluated at y(t); `inner` is the jet of y in t.
    pub fn compose(self, inner: Jet) -> Self {
        let [g0, g1, g2, g3] = self.0;
        let [_, y1, y2, y3] = inner.0;
        Jet([
            g0,
            g1 * y1,
            g2 * y1 * y1 + g1 * y2,
            g3 * y1 * y1 * y1 + 3.0 * g2 * y1 * y2 + g1 * y3,
        ])
    }

    /// Jet of t^n at t.
    pub fn power(t: f64, n: usize) -> Self {
        let n_f = n as f64;
        let p = |k: i32| if k < 0 { 0.0 } else { t.powi(k) };
        let k = n as i32;
        Jet([
            p(k),
            n_f * p(k - 1),
            n_f * (n_f - 1.0) * p(k - 2),
            n_f * (n_f - 1.0) * (n_f - 2.0) * p(k - 3),
        ])
    }
}

/// Orthogonal polynomial family used to generate raw radial candidates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum PolyFamily {
    #[default]
    Chebyshev,
    Legendre,
}

impl PolyFamily {
    /// Jets (in x) of the first `n` polynomials at x.
    pub fn jets(self, x: f64, n: usize) -> Vec<Jet> {
        let mut out = Vec::with_capacity(n);
        if n == 0 {
            return out;
        }
        out.push(Jet([1.0, 0.0, 0.0, 0.0]));
        if n == 1 {
            return out;
        }
        out.push(Jet([x, 1.0, 0.0, 0.0]));
        for k in 1..n - 1 {
            let a = out[k].0;
            let b = out[k - 1].0;
            let next = match self {
                PolyFamily::Chebyshev => [
                    2.0 * x * a[0] - b[0],
                    2.0 * a[0] + 2.0 * x * a[1] - b[1],
                    4.0 * a[1] + 2.0 * x * a[2] - b[2],
                    6.0 * a[2] + 2.0 * x * a[3] - b[3],
                ],
                PolyFamily::Legendre => {
                    let kf = k as f64;
                    let c1 = (2.0 * kf + 1.0) / (kf + 1.0);
                    let c2 = kf / (kf + 1.0);
                    [
                        c1 * x * a[0] - c2 * b[0],
                        c1 * (a[0] + x * a[1]) - c2 * b[1],
                        c1 * (2.0 * a[1] + x * a[2]) - c2 * b[2],
                        c1 * (3.0 * a[2] + x * a[3]) - c2 * b[3],
                    ]
                }
            };
            out.push(Jet(next));
        }
        out
    }
}

/// Jets (in x) of the first `n` Jacobi polynomials `P_k^{(0,β)}`, scaled
/// by `√(2k+β+1)` so they are orthonormal against `(1+x)^β / 2^{β+1}`.
pub fn jacobi_jets(beta: f64, x: f64, n: usize) -> Vec<Jet> {
    let mut raw: Vec<[f64; 4]> = Vec::with_capacity(n);
    for k in 0..n {
        let next = match k {
            0 => [1.0, 0.0, 0.0, 0.0],
            1 => {
                let c = 0.5 * (beta + 2.0);
                [1.0 + c * (x - 1.0), c, 0.0, 0.0]
            }
            _ => {
                let m = (k - 1) as f64;
                let s = 2.0 * m + beta;
                let d = 2.0 * (m + 1.0) * (m + beta + 1.0) * s;
                let a = (s + 1.0) * (s + 2.0) * s / d;
                let b = -(s + 1.0) * beta * beta / d;
                let c = 2.0 * m * (m + beta) * (s + 2.0) / d;
                let (p, q) = (raw[k - 1], raw[k - 2]);
                let e = a * x + b;
                [
                    e * p[0] - c * q[0],
                    a * p[0] + e * p[1] - c * q[1],
                    2.0 * a * p[1] + e * p[2] - c * q[2],
                    3.0 * a * p[2] + e * p[3] - c * q[3],
                ]
            }
        };
        raw.push(next);
    }
    raw.into_iter()
        .enumerate()
        .map(|(k, j)| {
            let f = (2.0 * k as f64 + beta + 1.0).sqrt();
            Jet(j.map(|v| v * f))
        })
        .collect()
}

/// `Σ c_k J_k(x)` with `J_k` the scaled Jacobi polynomials of `jacobi_jets`.
pub fn jacobi_sum(beta: f64, x: f64, c: &[f64]) -> f64 {
    let (mut p0, mut p1) = (1.0, 1.0 + 0.5 * (beta + 2.0) * (x - 1.0));
    let mut s = 0.0;
    for (k, ck) in c.iter().enumerate() {
        let p = match k {
            0 => p0,
            1 => p1,
            _ => {
                let m = (k - 1) as f64;
                let t = 2.0 * m + beta;
                let d = 2.0 * (m + 1.0) * (m + beta + 1.0) * t;
                let next = ((t + 1.0) * (t + 2.0) * t * x - (t + 1.0) * beta * beta) / d * p1
                    - 2.0 * m * (m + beta) * (t + 2.0) / d * p0;
                p0 = p1;
                p1 = next;
                next
            }
        };
        s += ck * p * (2.0 * k as f64 + beta + 1.0).sqrt();
    }
    s
}
