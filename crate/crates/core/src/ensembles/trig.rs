//! Random trigonometric polynomials of degree `≤ n` in each variable.
//!
//! `f(x) = s [a_0 + √2 Σ_{ν∈H} (a_ν cos 2πν·x + b_ν sin 2πν·x)]` where `H`
//! is the half of `{-n..n}^m \ {0}` whose first nonzero coordinate is positive
//! and `s = (2n+1)^{-m/2}`; the covariance is the product of Dirichlet kernels.

use super::sample::FieldSample;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::rng::{stream, StreamRole};
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// Complex coefficients `C_ν` on `{-n..n}^m`, so that `f = Re Σ C_ν e^{2πiν·x}`.
#[derive(Clone, Debug)]
pub struct TrigCoefficients {
    pub degree: usize,
    pub dim: usize,
    /// Indexed row-major by `ν + n`.
    pub coef: Vec<(f64, f64)>,
}

pub fn draw_coefficients(degree: usize, dim: usize, seed: u64, index: u64) -> Result<TrigCoefficients> {
    if degree == 0 || dim == 0 {
        return Err(Error::InvalidParameter("degree and dimension must be at least 1".into()));
    }
    let side = 2 * degree + 1;
    let total = side.checked_pow(dim as u32).filter(|&t| t <= 50_000_000).ok_or_else(|| Error::Budget("too many trigonometric modes".into()))?;
    let s = (side as f64).powf(-0.5 * dim as f64);
    let mut rng = stream(seed, index, StreamRole::Coefficients);
    let mut coef = vec![(0.0, 0.0); total];
    let zero = (total - 1) / 2;
    coef[zero] = (s * rng.sample::<f64, _>(StandardNormal), 0.0);
    // lexicographic order over ν puts exactly the half-set H after the origin
    for c in coef.iter_mut().skip(zero + 1) {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        *c = (s * 2f64.sqrt() * a, -s * 2f64.sqrt() * b);
    }
    Ok(TrigCoefficients { degree, dim, coef })
}

impl TrigCoefficients {
    /// Value and gradient at a torus point.
    pub fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (n, m) = (self.degree as i64, self.dim);
        let side = (2 * n + 1) as usize;
        let mut v = 0.0;
        let mut g = vec![0.0; m];
        for (idx, &(cr, ci)) in self.coef.iter().enumerate() {
            if cr == 0.0 && ci == 0.0 {
                continue;
            }
            let mut rest = idx;
            let mut nu = vec![0i64; m];
            for d in (0..m).rev() {
                nu[d] = (rest % side) as i64 - n;
                rest /= side;
            }
            let th = 2.0 * PI * nu.iter().zip(x).map(|(a, b)| *a as f64 * b).sum::<f64>();
            let (s, c) = th.sin_cos();
            v += cr * c - ci * s;
            let zi = cr * s + ci * c;
            for d in 0..m {
                g[d] -= 2.0 * PI * nu[d] as f64 * zi;
            }
        }
        (v, g)
    }
}

/// Evaluate `g(u) = f(base + u/scale)` and `∇_u g` on a grid (planar grid in
/// local coordinates, or a periodic grid when `scale = 1`, `base = 0`).
pub fn evaluate_on_grid(tc: &TrigCoefficients, grid: &Grid, base: &[f64], scale: f64) -> Result<FieldSample> {
    let (n, m) = (tc.degree, tc.dim);
    if grid.dim() != m {
        return Err(Error::InvalidParameter("grid dimension does not match the ensemble".into()));
    }
    let side = 2 * n + 1;
    // per-axis tables e^{2πiν x_k} for ν = -n..n
    let tables: Vec<Vec<(f64, f64)>> = (0..m)
        .map(|d| {
            let nk = grid.shape[d];
            let mut t = vec![(0.0, 0.0); side * nk];
            for k in 0..nk {
                let x = base[d] + grid.coord(d, k) / scale;
                for (ni, nu) in (-(n as i64)..=n as i64).enumerate() {
                    let (s, c) = (2.0 * PI * nu as f64 * x).sin_cos();
                    t[ni * nk + k] = (c, s);
                }
            }
            t
        })
        .collect();
    let freq = |ni: usize| 2.0 * PI * (ni as f64 - n as f64) / scale;
    let npts = grid.len();
    let mut values = vec![0.0; npts];
    let mut grads = vec![0.0; npts * m];
    match m {
        1 => {
            let nk = grid.shape[0];
            for (ni, &(cr, ci)) in tc.coef.iter().enumerate() {
                for k in 0..nk {
                    let (c, s) = tables[0][ni * nk + k];
                    values[k] += cr * c - ci * s;
                    grads[k] -= freq(ni) * (cr * s + ci * c);
                }
            }
        }
        2 => {
            let (nx, ny) = (grid.shape[0], grid.shape[1]);
            // T[ν1][l] = Σ_ν2 C[ν1][ν2] e2[ν2][l], and its y-derivative.
            for n1 in 0..side {
                let mut t = vec![(0.0, 0.0); ny];
                let mut ty = vec![(0.0, 0.0); ny];
                for n2 in 0..side {
                    let (cr, ci) = tc.coef[n1 * side + n2];
                    if cr == 0.0 && ci == 0.0 {
                        continue;
                    }
                    let w = freq(n2);
                    for l in 0..ny {
                        let (c, s) = tables[1][n2 * ny + l];
                        let (zr, zi) = (cr * c - ci * s, cr * s + ci * c);
                        t[l].0 += zr;
                        t[l].1 += zi;
                        ty[l].0 -= w * zi;
                        ty[l].1 += w * zr;
                    }
                }
                let w1 = freq(n1);
                for k in 0..nx {
                    let (c, s) = tables[0][n1 * nx + k];
                    let row = k * ny;
                    for l in 0..ny {
                        let (tr, ti) = t[l];
                        let re = c * tr - s * ti;
                        let imv = c * ti + s * tr;
                        values[row + l] += re;
                        grads[2 * (row + l)] -= w1 * imv;
                        grads[2 * (row + l) + 1] += c * ty[l].0 - s * ty[l].1;
                    }
                }
            }
        }
        _ => {
            for i in 0..npts {
                let u = grid.point(i);
                let x: Vec<f64> = u.iter().zip(base).map(|(u, b)| b + u / scale).collect();
                let (v, g) = tc.eval(&x);
                values[i] = v;
                for d in 0..m {
                    grads[i * m + d] = g[d] / scale;
                }
            }
        }
    }
    Ok(FieldSample { grid: grid.clone(), values, gradients: Some(grads), meta: None })
}

/// `sin(π(2n+1)t) / ((2n+1) sin(πt))`, the normalized Dirichlet kernel.
pub fn dirichlet(n: usize, t: f64) -> f64 {
    let d = t - t.round();
    let k = (2 * n + 1) as f64;
    if d.abs() < 1e-7 {
        let nn = n as f64;
        return 1.0 - (2.0 * PI * d).powi(2) * nn * (nn + 1.0) / 6.0;
    }
    (PI * k * d).sin() / (k * (PI * d).sin())
}
