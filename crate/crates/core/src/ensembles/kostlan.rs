//! Kostlan's ensemble of homogeneous polynomials of degree `n` on `S^m`:
//! `f(X) = Σ_{|J|=n} √binom(n,J) ξ_J X^J`, with covariance `(X·Y)^n`.
//!
//! Multi-indices `J = (j_0, …, j_m)` are enumerated in graded-lex order
//! (`j_0` descending, then `j_1`, …); the coefficient vector is shared by the
//! chart evaluator and the full-sphere evaluator, so both see the same field.

use super::sample::{FieldSample, SphereSample};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::mesh::SphereMesh;
use crate::rng::{stream, StreamRole};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Guards on the size of Kostlan evaluations.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct KostlanBudget {
    pub max_degree: usize,
    /// Maximum multiply-adds per sample.
    pub max_work: f64,
}

impl Default for KostlanBudget {
    fn default() -> Self {
        KostlanBudget { max_degree: 512, max_work: 2e9 }
    }
}

#[derive(Clone, Debug)]
pub struct KostlanCoefficients {
    pub degree: usize,
    /// Number of ambient coordinates, `m + 1`.
    pub ambient: usize,
    pub exponents: Vec<Vec<u32>>,
    /// `√binom(n, J) ξ_J`.
    pub coef: Vec<f64>,
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n + 1];
    for k in 1..=n {
        t[k] = t[k - 1] + (k as f64).ln();
    }
    t
}

fn for_each_exponent(n: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if parts == 1 {
        prefix.push(n);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for j in (0..=n).rev() {
        prefix.push(j);
        for_each_exponent(n - j, parts - 1, prefix, out);
        prefix.pop();
    }
}

/// All `J` with `|J| = n` in `ambient` variables, graded-lex.
pub fn exponents(n: usize, ambient: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for_each_exponent(n as u32, ambient, &mut Vec::new(), &mut out);
    out
}

/// Number of monomials `binom(n + m, m)`, or `None` on overflow.
pub fn monomial_count(n: usize, ambient: usize) -> Option<usize> {
    let m = ambient - 1;
    let mut c: u128 = 1;
    for k in 1..=m {
        c = c.checked_mul((n + k) as u128)? / k as u128;
    }
    usize::try_from(c).ok()
}

pub fn draw_coefficients(degree: usize, dim: usize, seed: u64, index: u64, budget: &KostlanBudget) -> Result<KostlanCoefficients> {
    if degree == 0 || dim == 0 {
        return Err(Error::InvalidParameter("degree and dimension must be at least 1".into()));
    }
    if degree > budget.max_degree {
        return Err(Error::Budget(format!("degree {degree} exceeds the configured maximum {}", budget.max_degree)));
    }
    let ambient = dim + 1;
    let count = monomial_count(degree, ambient).filter(|&c| (c as f64) <= budget.max_work).ok_or_else(|| {
        Error::Budget(format!("too many monomials for degree {degree} in {ambient} variables"))
    })?;
    let exps = exponents(degree, ambient);
    debug_assert_eq!(exps.len(), count);
    let lf = ln_factorials(degree);
    let mut rng = stream(seed, index, StreamRole::Coefficients);
    let coef = exps
        .iter()
        .map(|j| {
            let lb = lf[degree] - j.iter().map(|&e| lf[e as usize]).sum::<f64>();
            (0.5 * lb).exp() * rng.sample::<f64, _>(StandardNormal)
        })
        .collect();
    Ok(KostlanCoefficients { degree, ambient, exponents: exps, coef })
}

impl KostlanCoefficients {
    /// `f(X)` and the ambient gradient `∇f(X)`.
    pub fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (n, a) = (self.degree, self.ambient);
        // power tables p[k][e] = x_k^e
        let pw: Vec<Vec<f64>> = x
            .iter()
            .map(|&v| {
                let mut t = vec![1.0; n + 1];
                for e in 1..=n {
                    t[e] = t[e - 1] * v;
                }
                t
            })
            .collect();
        let mut val = 0.0;
        let mut g = vec![0.0; a];
        let mut parts = vec![0.0; a];
        for (j, &c) in self.exponents.iter().zip(&self.coef) {
            let mut prod = c;
            for k in 0..a {
                parts[k] = pw[k][j[k] as usize];
                prod *= parts[k];
            }
            val += prod;
            for k in 0..a {
                let e = j[k] as usize;
                if e == 0 {
                    continue;
                }
                let mut d = c * e as f64 * pw[k][e - 1];
                for (q, p) in parts.iter().enumerate() {
                    if q != k {
                        d *= p;
                    }
                }
                g[k] += d;
            }
        }
        (val, g)
    }
}

/// The chart `π(w) = (w, √(1 − |w|²))` around the north pole.
pub fn chart(w: &[f64]) -> Result<Vec<f64>> {
    let r2: f64 = w.iter().map(|v| v * v).sum();
    if r2 >= 1.0 {
        return Err(Error::Domain(format!("chart point has |w| = {:.4} ≥ 1", r2.sqrt())));
    }
    let mut x = w.to_vec();
    x.push((1.0 - r2).sqrt());
    Ok(x)
}

/// `g(u) = f(π(base + u/scale))` and `∇_u g` on a planar grid.
pub fn evaluate_chart(kc: &KostlanCoefficients, grid: &Grid, base: &[f64], scale: f64, budget: &KostlanBudget) -> Result<FieldSample> {
    let m = kc.ambient - 1;
    if grid.dim() != m || grid.periodic {
        return Err(Error::InvalidParameter("Kostlan charts need a planar grid of dimension m".into()));
    }
    let work = kc.coef.len() as f64 * grid.len() as f64 * (kc.ambient as f64 + 1.0);
    if work > budget.max_work {
        return Err(Error::Budget(format!("{work:.3e} monomial-point products exceed {:.3e}", budget.max_work)));
    }
    let mut values = vec![0.0; grid.len()];
    let mut grads = vec![0.0; grid.len() * m];
    for i in 0..grid.len() {
        let w: Vec<f64> = grid.point(i).iter().zip(base).map(|(u, b)| b + u / scale).collect();
        let x = chart(&w)?;
        let (v, g) = kc.eval(&x);
        values[i] = v;
        let h = x[m];
        for d in 0..m {
            // ∂/∂w_d of f(w, √(1-|w|²)) = f_d − f_m w_d / h
            grads[i * m + d] = (g[d] - g[m] * w[d] / h) / scale;
        }
    }
    Ok(FieldSample { grid: grid.clone(), values, gradients: Some(grads), meta: None })
}

/// Quadrature-free separable evaluation on a latitude–longitude mesh of `S^2`:
/// `f(θ, φ) = Σ_c W_c(θ) Q_c(φ)` with `W_c = √binom(n,c) cos^cθ sin^{n-c}θ` and
/// `Q_c = Σ_{a+b=n-c} √binom(n-c,a) ξ_{a,b,c} cos^aφ sin^bφ`.
pub fn evaluate_sphere(kc: &KostlanCoefficients, mesh: &SphereMesh, budget: &KostlanBudget) -> Result<SphereSample> {
    if kc.ambient != 3 {
        return Err(Error::InvalidParameter("full-sphere evaluation is implemented for S^2".into()));
    }
    let Some((nt, np)) = mesh.lat_long else {
        return evaluate_sphere_direct(kc, mesh, budget);
    };
    let n = kc.degree;
    let work = (kc.coef.len() * np * 3 + (n + 1) * (nt - 1) * np * 3) as f64;
    if work > budget.max_work {
        return Err(Error::Budget(format!("{work:.3e} multiply-adds exceed {:.3e}", budget.max_work)));
    }
    let lf = ln_factorials(n);
    let sqrt_binom = |top: usize, k: usize| (0.5 * (lf[top] - lf[k] - lf[top - k])).exp();
    // ξ_J = coef / √binom(n, J): rebuild the factored weights
    let mut q = vec![0.0; (n + 1) * np];
    let mut qd = vec![0.0; (n + 1) * np];
    let powers = |v: f64| {
        let mut t = vec![1.0; n + 2];
        for e in 1..=n + 1 {
            t[e] = t[e - 1] * v;
        }
        t
    };
    let phis: Vec<(Vec<f64>, Vec<f64>)> = (0..np)
        .map(|k| {
            let (s, c) = (2.0 * std::f64::consts::PI * k as f64 / np as f64).sin_cos();
            (powers(c), powers(s))
        })
        .collect();
    for (j, &cj) in kc.exponents.iter().zip(&kc.coef) {
        let (a, b, c) = (j[0] as usize, j[1] as usize, j[2] as usize);
        // coef = √binom(n,c) √binom(n-c,a) ξ  ⇒  weight in Q_c is coef / √binom(n,c)
        let w = cj / sqrt_binom(n, c);
        for (k, (pc, ps)) in phis.iter().enumerate() {
            q[c * np + k] += w * pc[a] * ps[b];
            let mut d = 0.0;
            if a > 0 {
                d -= a as f64 * pc[a - 1] * ps[b + 1];
            }
            if b > 0 {
                d += b as f64 * pc[a + 1] * ps[b - 1];
            }
            qd[c * np + k] += w * d;
        }
    }
    let rows = nt - 1;
    let mut wt = vec![0.0; rows * (n + 1)];
    let mut wtd = vec![0.0; rows * (n + 1)];
    for i in 0..rows {
        let (st, ct) = (std::f64::consts::PI * (i + 1) as f64 / nt as f64).sin_cos();
        let (pc, ps) = (powers(ct), powers(st));
        for c in 0..=n {
            let sb = sqrt_binom(n, c);
            wt[i * (n + 1) + c] = sb * pc[c] * ps[n - c];
            let mut d = 0.0;
            if c > 0 {
                d -= c as f64 * pc[c - 1] * ps[n - c + 1];
            }
            if n > c {
                d += (n - c) as f64 * pc[c + 1] * ps[n - c - 1];
            }
            wtd[i * (n + 1) + c] = sb * d;
        }
    }
    let gemm = |x: &[f64], y: &[f64]| {
        let mut out = vec![0.0; rows * np];
        unsafe {
            matrixmultiply::dgemm(rows, n + 1, np, 1.0, x.as_ptr(), (n + 1) as isize, 1, y.as_ptr(), np as isize, 1, 0.0, out.as_mut_ptr(), np as isize, 1);
        }
        out
    };
    let f = gemm(&wt, &q);
    let ft = gemm(&wtd, &q);
    let fp = gemm(&wt, &qd);
    let nv = mesh.vertices.len();
    let mut values = vec![0.0; nv];
    let mut gradients = vec![[0.0; 3]; nv];
    for (idx, pole) in [(0usize, [0.0, 0.0, 1.0]), (nv - 1, [0.0, 0.0, -1.0])] {
        let (v, g) = kc.eval(&pole);
        values[idx] = v;
        gradients[idx] = tangent(pole, [g[0], g[1], g[2]]);
    }
    for i in 0..rows {
        let (st, ct) = (std::f64::consts::PI * (i + 1) as f64 / nt as f64).sin_cos();
        for k in 0..np {
            let (sp, cp) = (2.0 * std::f64::consts::PI * k as f64 / np as f64).sin_cos();
            let vi = 1 + i * np + k;
            values[vi] = f[i * np + k];
            let (gt, gp) = (ft[i * np + k], fp[i * np + k] / st);
            let et = [ct * cp, ct * sp, -st];
            let ep = [-sp, cp, 0.0];
            gradients[vi] = [gt * et[0] + gp * ep[0], gt * et[1] + gp * ep[1], gt * et[2]];
        }
    }
    Ok(SphereSample { mesh: mesh.clone(), values, gradients, meta: None })
}

fn tangent(x: [f64; 3], g: [f64; 3]) -> [f64; 3] {
    let d = x[0] * g[0] + x[1] * g[1] + x[2] * g[2];
    [g[0] - d * x[0], g[1] - d * x[1], g[2] - d * x[2]]
}

fn evaluate_sphere_direct(kc: &KostlanCoefficients, mesh: &SphereMesh, budget: &KostlanBudget) -> Result<SphereSample> {
    let work = kc.coef.len() as f64 * mesh.vertices.len() as f64 * 4.0;
    if work > budget.max_work {
        return Err(Error::Budget(format!("{work:.3e} monomial-point products exceed {:.3e}", budget.max_work)));
    }
    let mut values = Vec::with_capacity(mesh.vertices.len());
    let mut gradients = Vec::with_capacity(mesh.vertices.len());
    for v in &mesh.vertices {
        let (f, g) = kc.eval(v);
        values.push(f);
        gradients.push(tangent(*v, [g[0], g[1], g[2]]));
    }
    Ok(SphereSample { mesh: mesh.clone(), values, gradients, meta: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomials_counted() {
        assert_eq!(exponents(4, 3).len(), 15);
        assert_eq!(monomial_count(512, 3), Some(131_841));
        assert_eq!(exponents(2, 3)[0], vec![2, 0, 0]);
    }

    #[test]
    fn separable_matches_direct() {
        let b = KostlanBudget::default();
        let kc = draw_coefficients(9, 2, 3, 1, &b).unwrap();
        let mut mesh = SphereMesh::lat_long(7, 11).unwrap();
        let s = evaluate_sphere(&kc, &mesh, &b).unwrap();
        mesh.lat_long = None;
        let d = evaluate_sphere(&kc, &mesh, &b).unwrap();
        for i in 0..s.values.len() {
            assert!((s.values[i] - d.values[i]).abs() < 1e-10);
            for k in 0..3 {
                assert!((s.gradients[i][k] - d.gradients[i][k]).abs() < 1e-9, "vertex {i}");
            }
        }
    }

    #[test]
    fn chart_gradient_is_consistent() {
        let b = KostlanBudget::default();
        let kc = draw_coefficients(6, 2, 3, 1, &b).unwrap();
        let grid = Grid::new(vec![-0.5, -0.5], 1e-5, vec![3, 3]).unwrap();
        let s = evaluate_chart(&kc, &grid, &[0.1, 0.2], 2.0, &b).unwrap();
        let c = grid.ravel(&[1, 1]);
        let fx = (s.values[grid.ravel(&[2, 1])] - s.values[grid.ravel(&[0, 1])]) / 2e-5;
        let fy = (s.values[grid.ravel(&[1, 2])] - s.values[grid.ravel(&[1, 0])]) / 2e-5;
        let g = s.gradient(c).unwrap();
        assert!((fx - g[0]).abs() < 1e-5 * (1.0 + g[0].abs()));
        assert!((fy - g[1]).abs() < 1e-5 * (1.0 + g[1].abs()));
    }

    #[test]
    fn budget_is_enforced() {
        let b = KostlanBudget { max_degree: 512, max_work: 1e3 };
        assert!(matches!(draw_coefficients(100, 2, 0, 0, &b), Err(Error::Budget(_))));
        assert!(draw_coefficients(600, 2, 0, 0, &KostlanBudget::default()).is_err());
    }
}
