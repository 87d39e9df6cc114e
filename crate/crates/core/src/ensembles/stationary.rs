//! Random-wave sampler for translation-invariant fields.
//!
//! `F(x) = Σ_j Re(c_j e^{2πi λ_j·x})` with `c_j = a_j (ξ_j − iη_j)`, which is
//! `Σ a_j (ξ_j cos 2πλ_j·x + η_j sin 2πλ_j·x)`. For continuous measures the
//! `λ_j` are i.i.d. from the normalized measure and `a_j = n_modes^{-1/2}`;
//! atomic measures use one term per `±` pair with `a_j² = weight`.

use super::sample::FieldSample;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::rng::{stream, StreamRole};
use crate::spectral::{check_rho3, SpectralMeasure};
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// The drawn random series of one sample.
#[derive(Clone, Debug)]
pub struct Modes {
    pub dim: usize,
    /// `n × dim`, row-major.
    pub freqs: Vec<f64>,
    pub coef: Vec<(f64, f64)>,
}

impl Modes {
    pub fn len(&self) -> usize {
        self.coef.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coef.is_empty()
    }

    /// Field value and gradient at one point.
    pub fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let m = self.dim;
        let mut v = 0.0;
        let mut g = vec![0.0; m];
        for (j, &(cr, ci)) in self.coef.iter().enumerate() {
            let lam = &self.freqs[j * m..(j + 1) * m];
            let th = 2.0 * PI * lam.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
            let (s, c) = th.sin_cos();
            let (zr, zi) = (cr * c - ci * s, cr * s + ci * c);
            v += zr;
            for d in 0..m {
                g[d] -= 2.0 * PI * lam[d] * zi;
            }
        }
        (v, g)
    }
}

/// Draw the series for sample `index` of stream `seed`.
pub fn draw_modes(rho: &SpectralMeasure, n_modes: usize, seed: u64, index: u64) -> Result<Modes> {
    if n_modes == 0 {
        return Err(Error::InvalidParameter("n_modes must be at least 1".into()));
    }
    let mm = check_rho3(rho)?;
    if !mm.pass {
        return Err(Error::ConditionFailed {
            condition: "rho3",
            reason: format!("moment matrix is singular (min eigenvalue {:e}); gradient law degenerates", mm.min_eigenvalue),
        });
    }
    let m = rho.dim();
    let mut amp = stream(seed, index, StreamRole::Amplitudes);
    let mut gauss = || amp.sample::<f64, _>(StandardNormal);
    if let Some(pairs) = rho.atom_pairs() {
        let mass = rho.total_mass();
        let mut freqs = Vec::with_capacity(pairs.len() * m);
        let mut coef = Vec::with_capacity(pairs.len());
        for (p, w) in pairs {
            let a = (w / mass).sqrt();
            freqs.extend_from_slice(&p);
            let (xi, eta) = (gauss(), gauss());
            coef.push((a * xi, -a * eta));
        }
        return Ok(Modes { dim: m, freqs, coef });
    }
    let mut fr = stream(seed, index, StreamRole::Frequencies);
    let mut freqs = vec![0.0; n_modes * m];
    for j in 0..n_modes {
        rho.sample_frequency(&mut fr, &mut freqs[j * m..(j + 1) * m]);
    }
    let a = 1.0 / (n_modes as f64).sqrt();
    let coef = (0..n_modes)
        .map(|_| {
            let (xi, eta) = (gauss(), gauss());
            (a * xi, -a * eta)
        })
        .collect();
    Ok(Modes { dim: m, freqs, coef })
}

/// `e^{2πi λ (o + k h)}` for `k < n` by a rotation recurrence re-anchored
/// every 64 steps.
fn phasors(lambda: f64, o: f64, h: f64, n: usize, re: &mut [f64], im: &mut [f64]) {
    let (ws, wc) = (2.0 * PI * lambda * h).sin_cos();
    let mut k = 0;
    while k < n {
        let (mut s, mut c) = (2.0 * PI * lambda * (o + k as f64 * h)).sin_cos();
        for kk in k..(k + 64).min(n) {
            re[kk] = c;
            im[kk] = s;
            let nc = c * wc - s * ws;
            s = s * wc + c * ws;
            c = nc;
        }
        k += 64;
    }
}

/// Evaluate `g(u) = F(shift + u/scale)` with gradient in `u` on a grid.
pub fn evaluate_on_grid(modes: &Modes, grid: &Grid, shift: &[f64], scale: f64) -> Result<FieldSample> {
    let m = modes.dim;
    if grid.dim() != m || grid.periodic {
        return Err(Error::InvalidParameter("stationary fields need a planar grid of matching dimension".into()));
    }
    let j_n = modes.len();
    // effective frequencies and phase-shifted coefficients in u
    let lam: Vec<f64> = modes.freqs.iter().map(|v| v / scale).collect();
    let coef: Vec<(f64, f64)> = (0..j_n)
        .map(|j| {
            let th = 2.0 * PI * (0..m).map(|d| modes.freqs[j * m + d] * shift[d]).sum::<f64>();
            let (s, c) = th.sin_cos();
            let (cr, ci) = modes.coef[j];
            (cr * c - ci * s, cr * s + ci * c)
        })
        .collect();
    let n = grid.len();
    let mut values = vec![0.0; n];
    let mut grads = vec![0.0; n * m];
    match m {
        1 => eval_1d(&lam, &coef, grid, &mut values, &mut grads),
        2 => eval_2d(&lam, &coef, grid, &mut values, &mut grads),
        _ => {
            for i in 0..n {
                let u = grid.point(i);
                for j in 0..j_n {
                    let th = 2.0 * PI * (0..m).map(|d| lam[j * m + d] * u[d]).sum::<f64>();
                    let (s, c) = th.sin_cos();
                    let (cr, ci) = coef[j];
                    values[i] += cr * c - ci * s;
                    let zi = cr * s + ci * c;
                    for d in 0..m {
                        grads[i * m + d] -= 2.0 * PI * lam[j * m + d] * zi;
                    }
                }
            }
        }
    }
    Ok(FieldSample { grid: grid.clone(), values, gradients: Some(grads), meta: None })
}

/// One dimension, folded into a `⌈n/64⌉ × 64` block so that
/// `x = o + (64a + b)h` separates and [`eval_2d`]'s products apply.
fn eval_1d(lam: &[f64], coef: &[(f64, f64)], grid: &Grid, values: &mut [f64], grads: &mut [f64]) {
    const W: usize = 64;
    let nx = grid.shape[0];
    let rows = nx.div_ceil(W);
    let jn = coef.len();
    let k2 = 2 * jn;
    let mut a = vec![0.0; rows * k2];
    let mut ad = vec![0.0; rows * k2];
    let mut b = vec![0.0; k2 * W];
    let (mut re, mut im) = (vec![0.0; rows.max(W)], vec![0.0; rows.max(W)]);
    for j in 0..jn {
        let (cr, ci) = coef[j];
        phasors(lam[j], grid.origin[0], W as f64 * grid.spacing, rows, &mut re, &mut im);
        let w = 2.0 * PI * lam[j];
        for k in 0..rows {
            let (pr, pi) = (cr * re[k] - ci * im[k], cr * im[k] + ci * re[k]);
            a[k * k2 + j] = pr;
            a[k * k2 + jn + j] = -pi;
            ad[k * k2 + j] = -w * pi;
            ad[k * k2 + jn + j] = -w * pr;
        }
        phasors(lam[j], 0.0, grid.spacing, W, &mut re, &mut im);
        for l in 0..W {
            b[j * W + l] = re[l];
            b[(jn + j) * W + l] = im[l];
        }
    }
    let mut out = vec![0.0; rows * W];
    let mut gemm = |x: &[f64], dst: &mut [f64]| {
        unsafe {
            matrixmultiply::dgemm(rows, k2, W, 1.0, x.as_ptr(), k2 as isize, 1, b.as_ptr(), W as isize, 1, 0.0, out.as_mut_ptr(), W as isize, 1);
        }
        dst.copy_from_slice(&out[..nx]);
    };
    gemm(&a, values);
    gemm(&ad, grads);
}

/// Separable evaluation as three real matrix products:
/// `f = A B`, `∂₁f = A' B`, `∂₂f = A B'` with `A = [Re P | −Im P]`,
/// `B = [Re Q ; Im Q]`, `P_{kj} = c_j e^{2πiλ_{j1}x_k}`, `Q_{jl} = e^{2πiλ_{j2}y_l}`.
fn eval_2d(lam: &[f64], coef: &[(f64, f64)], grid: &Grid, values: &mut [f64], grads: &mut [f64]) {
    let (nx, ny) = (grid.shape[0], grid.shape[1]);
    let jn = coef.len();
    let k2 = 2 * jn;
    let mut a = vec![0.0; nx * k2];
    let mut ad = vec![0.0; nx * k2];
    let mut b = vec![0.0; k2 * ny];
    let mut bd = vec![0.0; k2 * ny];
    let (mut re, mut im) = (vec![0.0; nx.max(ny)], vec![0.0; nx.max(ny)]);
    for j in 0..jn {
        let (l1, l2) = (lam[2 * j], lam[2 * j + 1]);
        let (cr, ci) = coef[j];
        phasors(l1, grid.origin[0], grid.spacing, nx, &mut re, &mut im);
        let w1 = 2.0 * PI * l1;
        for k in 0..nx {
            let (pr, pi) = (cr * re[k] - ci * im[k], cr * im[k] + ci * re[k]);
            a[k * k2 + j] = pr;
            a[k * k2 + jn + j] = -pi;
            // P' = 2πiλ₁ P
            ad[k * k2 + j] = -w1 * pi;
            ad[k * k2 + jn + j] = -w1 * pr;
        }
        phasors(l2, grid.origin[1], grid.spacing, ny, &mut re, &mut im);
        let w2 = 2.0 * PI * l2;
        for l in 0..ny {
            b[j * ny + l] = re[l];
            b[(jn + j) * ny + l] = im[l];
            bd[j * ny + l] = -w2 * im[l];
            bd[(jn + j) * ny + l] = w2 * re[l];
        }
    }
    let gemm = |x: &[f64], y: &[f64], out: &mut [f64]| unsafe {
        matrixmultiply::dgemm(nx, k2, ny, 1.0, x.as_ptr(), k2 as isize, 1, y.as_ptr(), ny as isize, 1, 0.0, out.as_mut_ptr(), ny as isize, 1);
    };
    gemm(&a, &b, values);
    let mut tmp = vec![0.0; nx * ny];
    gemm(&ad, &b, &mut tmp);
    for (i, v) in tmp.iter().enumerate() {
        grads[2 * i] = *v;
    }
    gemm(&a, &bd, &mut tmp);
    for (i, v) in tmp.iter().enumerate() {
        grads[2 * i + 1] = *v;
    }
}
