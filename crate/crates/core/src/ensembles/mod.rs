//! Gaussian ensembles sampled on grids with exact gradients, and their
//! scaled covariance kernels `K_{x,L}(u, v) = K_L(x + u/L, x + v/L)`.
//!
//! Every ensemble is a family `f_L`: stationary fields use `f_L(x) = F(Lx)`,
//! trigonometric polynomials of degree `n` use `L = n`, Kostlan polynomials of
//! degree `n` use `L = √n` in the chart `π(w) = (w, √(1−|w|²))`.

pub mod kostlan;
pub mod sample;
pub mod stationary;
pub mod trig;

pub use kostlan::KostlanBudget;
pub use sample::{read_field_sample, write_field_sample, FieldSample, SampleMeta, SphereSample};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::jet::Jet;
use crate::mesh::SphereMesh;
use crate::spectral::SpectralMeasure;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

fn default_modes() -> usize {
    4096
}

/// A normalized parametric Gaussian ensemble.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleSpec {
    Stationary {
        measure: SpectralMeasure,
        #[serde(default = "default_modes")]
        n_modes: usize,
    },
    Trigonometric { degree: usize, dim: usize },
    /// Homogeneous polynomials on `S^dim ⊂ R^{dim+1}`.
    Kostlan { degree: usize, dim: usize },
}

/// Where a sample lives: `g(u) = f_L(base + u/scale)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Frame {
    pub base: Vec<f64>,
    pub scale: f64,
}

impl Frame {
    pub fn identity(m: usize) -> Self {
        Frame { base: vec![0.0; m], scale: 1.0 }
    }
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            EnsembleSpec::Stationary { n_modes, .. } if *n_modes == 0 => Err(Error::InvalidParameter("n_modes must be ≥ 1".into())),
            EnsembleSpec::Trigonometric { degree, dim } | EnsembleSpec::Kostlan { degree, dim } if *degree == 0 || *dim == 0 => {
                Err(Error::InvalidParameter("degree and dimension must be ≥ 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Dimension of the local coordinates `u`.
    pub fn dim(&self) -> usize {
        match self {
            EnsembleSpec::Stationary { measure, .. } => measure.dim(),
            EnsembleSpec::Trigonometric { dim, .. } | EnsembleSpec::Kostlan { dim, .. } => *dim,
        }
    }

    /// The natural scaling parameter `L`.
    pub fn natural_scale(&self) -> f64 {
        match self {
            EnsembleSpec::Stationary { .. } => 1.0,
            EnsembleSpec::Trigonometric { degree, .. } => *degree as f64,
            EnsembleSpec::Kostlan { degree, .. } => (*degree as f64).sqrt(),
        }
    }

    /// The member of the family with scaling parameter `L`: degree `L` for
    /// the trigonometric ensemble, `L²` for Kostlan; stationary fields are
    /// unchanged.
    pub fn at_scale(&self, l: f64) -> Result<EnsembleSpec> {
        let degree = |d: f64| -> Result<usize> {
            let n = d.round();
            if n < 1.0 || (d - n).abs() > 1e-9 * d.max(1.0) {
                return Err(Error::InvalidParameter(format!("scale {l} does not correspond to an integer degree")));
            }
            Ok(n as usize)
        };
        Ok(match self {
            EnsembleSpec::Stationary { .. } => self.clone(),
            EnsembleSpec::Trigonometric { dim, .. } => EnsembleSpec::Trigonometric { degree: degree(l)?, dim: *dim },
            EnsembleSpec::Kostlan { dim, .. } => EnsembleSpec::Kostlan { degree: degree(l * l)?, dim: *dim },
        })
    }

    /// Draw sample `index` of stream `seed` and evaluate it on `grid` in the
    /// local coordinates of `frame`.
    pub fn sample(&self, grid: &Grid, frame: &Frame, seed: u64, index: u64) -> Result<FieldSample> {
        self.sample_with_budget(grid, frame, seed, index, &KostlanBudget::default())
    }

    pub fn sample_with_budget(&self, grid: &Grid, frame: &Frame, seed: u64, index: u64, budget: &KostlanBudget) -> Result<FieldSample> {
        self.validate()?;
        let m = self.dim();
        if grid.dim() != m || frame.base.len() != m {
            return Err(Error::InvalidParameter(format!("grid/frame dimension must be {m}")));
        }
        if !(frame.scale > 0.0) {
            return Err(Error::InvalidParameter("frame scale must be positive".into()));
        }
        let mut s = match self {
            EnsembleSpec::Stationary { measure, n_modes } => {
                let modes = stationary::draw_modes(measure, *n_modes, seed, index)?;
                // f_L(base + u/L) = F(L base + u)
                let shift: Vec<f64> = frame.base.iter().map(|b| b * frame.scale).collect();
                stationary::evaluate_on_grid(&modes, grid, &shift, 1.0)?
            }
            EnsembleSpec::Trigonometric { degree, dim } => {
                if grid.periodic && (frame.scale != 1.0 || (grid.spacing * grid.shape[0] as f64 - 1.0).abs() > 1e-12) {
                    return Err(Error::InvalidParameter("periodic trigonometric grids must cover the unit torus with scale 1".into()));
                }
                let tc = trig::draw_coefficients(*degree, *dim, seed, index)?;
                trig::evaluate_on_grid(&tc, grid, &frame.base, frame.scale)?
            }
            EnsembleSpec::Kostlan { degree, dim } => {
                let kc = kostlan::draw_coefficients(*degree, *dim, seed, index, budget)?;
                kostlan::evaluate_chart(&kc, grid, &frame.base, frame.scale, budget)?
            }
        };
        s.meta = Some(SampleMeta { spec: self.clone(), scale: frame.scale, base: frame.base.clone(), seed, sample_index: index });
        Ok(s)
    }

    /// A Kostlan sample on the whole of `S^2`.
    pub fn sample_sphere(&self, mesh: &SphereMesh, seed: u64, index: u64, budget: &KostlanBudget) -> Result<SphereSample> {
        let EnsembleSpec::Kostlan { degree, dim } = self else {
            return Err(Error::InvalidParameter("full-sphere sampling requires the Kostlan ensemble".into()));
        };
        let kc = kostlan::draw_coefficients(*degree, *dim, seed, index, budget)?;
        let mut s = kostlan::evaluate_sphere(&kc, mesh, budget)?;
        s.meta = Some(SampleMeta { spec: self.clone(), scale: 1.0, base: vec![0.0; *dim], seed, sample_index: index });
        Ok(s)
    }
}

fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    }
}

/// `K_{x,L}(u, v)` from the exact closed-form kernel.
pub fn scaled_kernel(spec: &EnsembleSpec, x: &[f64], u: &[f64], v: &[f64], l: f64) -> Result<f64> {
    match spec {
        EnsembleSpec::Stationary { measure, .. } => {
            let d: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
            measure.kernel(&d)
        }
        EnsembleSpec::Trigonometric { degree, .. } => {
            Ok(u.iter().zip(v).map(|(a, b)| trig::dirichlet(*degree, (a - b) / l)).product())
        }
        EnsembleSpec::Kostlan { degree, .. } => {
            let p: Vec<f64> = x.iter().zip(u).map(|(x, u)| x + u / l).collect();
            let q: Vec<f64> = x.iter().zip(v).map(|(x, v)| x + v / l).collect();
            let (pp, qq) = (kostlan::chart(&p)?, kostlan::chart(&q)?);
            let dot: f64 = pp.iter().zip(&qq).map(|(a, b)| a * b).sum();
            Ok(dot.powi(*degree as i32))
        }
    }
}

/// The translation-invariant limit `k_x(u − v)`.
pub fn limit_kernel(spec: &EnsembleSpec, d: &[f64]) -> Result<f64> {
    match spec {
        EnsembleSpec::Stationary { measure, .. } => measure.kernel(d),
        EnsembleSpec::Trigonometric { .. } => Ok(d.iter().map(|t| sinc(2.0 * PI * t)).product()),
        EnsembleSpec::Kostlan { .. } => Ok((-0.5 * d.iter().map(|t| t * t).sum::<f64>()).exp()),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScaledKernelReport {
    pub l_sequence: Vec<f64>,
    pub sup_errors: Vec<f64>,
    pub probe_points_per_axis: usize,
}

impl ScaledKernelReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.sup_errors.windows(2).all(|w| w[1] < w[0])
    }
}

/// `sup |K_{x,L}(u,v) − k_x(u−v)|` over `u, v` on the lattice of spacing 0.5
/// (plus endpoints) in `[-extent, extent]^m`, for each family member `L`
/// (see [`EnsembleSpec::at_scale`]).
pub fn kernel_convergence_report(spec: &EnsembleSpec, x: &[f64], extent: f64, l_sequence: &[f64]) -> Result<ScaledKernelReport> {
    let m = spec.dim();
    let per_axis = ((2.0 * extent / 0.5).round() as usize + 1).max(2);
    let axis: Vec<f64> = (0..per_axis).map(|i| -extent + 2.0 * extent * i as f64 / (per_axis - 1) as f64).collect();
    let total = per_axis.pow(2 * m as u32);
    let mut sup_errors = Vec::with_capacity(l_sequence.len());
    for &l in l_sequence {
        let spec = &spec.at_scale(l)?;
        let mut worst = 0.0f64;
        let mut u = vec![0.0; m];
        let mut v = vec![0.0; m];
        for mut idx in 0..total {
            for d in 0..m {
                u[d] = axis[idx % per_axis];
                idx /= per_axis;
                v[d] = axis[idx % per_axis];
                idx /= per_axis;
            }
            let diff: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - b).collect();
            let e = (scaled_kernel(spec, x, &u, &v, l)? - limit_kernel(spec, &diff)?).abs();
            worst = worst.max(e);
        }
        sup_errors.push(worst);
    }
    Ok(ScaledKernelReport { l_sequence: l_sequence.to_vec(), sup_errors, probe_points_per_axis: per_axis })
}

/// Jet of `K_{x,L}(u0 + ε_u, v0 + ε_v)` with variables `[ε_u(0..m), ε_v(0..m)]`.
fn kernel_jet(spec: &EnsembleSpec, x: &[f64], u0: &[f64], v0: &[f64], l: f64, orders: &[usize]) -> Result<Jet> {
    let m = spec.dim();
    let uj: Vec<Jet> = (0..m).map(|d| Jet::variable(orders, d, x[d] + u0[d] / l)).collect();
    let vj: Vec<Jet> = (0..m).map(|d| Jet::variable(orders, m + d, x[d] + v0[d] / l)).collect();
    // rescale the perturbation: w = x + (u0 + ε)/L
    let uj: Vec<Jet> = uj.iter().enumerate().map(|(d, j)| rescale(j, orders, d, l)).collect();
    let vj: Vec<Jet> = vj.iter().enumerate().map(|(d, j)| rescale(j, orders, m + d, l)).collect();
    match spec {
        EnsembleSpec::Trigonometric { degree, .. } => {
            let n = *degree;
            let mut prod = Jet::constant(orders, 1.0);
            for d in 0..m {
                let t = uj[d].sub(&vj[d]);
                let mut s = Jet::constant(orders, 1.0);
                for k in 1..=n {
                    s = s.add(&t.scale(2.0 * PI * k as f64).cos().scale(2.0));
                }
                prod = prod.mul(&s.scale(1.0 / (2 * n + 1) as f64));
            }
            Ok(prod)
        }
        EnsembleSpec::Kostlan { degree, .. } => {
            let mut dot = Jet::constant(orders, 0.0);
            let mut ru = Jet::constant(orders, 1.0);
            let mut rv = Jet::constant(orders, 1.0);
            for d in 0..m {
                dot = dot.add(&uj[d].mul(&vj[d]));
                ru = ru.sub(&uj[d].mul(&uj[d]));
                rv = rv.sub(&vj[d].mul(&vj[d]));
            }
            if ru.value() <= 0.0 || rv.value() <= 0.0 {
                return Err(Error::Domain("chart leaves the hemisphere".into()));
            }
            Ok(dot.add(&ru.sqrt().mul(&rv.sqrt())).powf(*degree as f64))
        }
        EnsembleSpec::Stationary { .. } => unreachable!("stationary kernels use spectral moments"),
    }
}

/// Turn `c + ε_i` into `c + ε_i / L`.
fn rescale(j: &Jet, orders: &[usize], i: usize, l: f64) -> Jet {
    let mut r = Jet::constant(orders, j.value());
    if orders[i] > 0 {
        r = r.add(&Jet::variable(orders, i, 0.0).scale(1.0 / l));
    }
    r
}

/// `∂_u^α ∂_v^α K_{x,L}(u, v)` at `u = v = u0`.
pub fn diagonal_derivative(spec: &EnsembleSpec, x: &[f64], u0: &[f64], l: f64, alpha: &[usize]) -> Result<f64> {
    let m = spec.dim();
    if let EnsembleSpec::Stationary { measure, .. } = spec {
        // (2π)^{2|α|} E[λ^{2α}]
        let order: usize = alpha.iter().sum();
        return match order {
            0 => Ok(1.0),
            1 => {
                let i = alpha.iter().position(|&a| a == 1).unwrap();
                Ok((2.0 * PI).powi(2) * measure.second_moments()?[i * m + i])
            }
            2 => {
                let idx: Vec<usize> = alpha.iter().enumerate().flat_map(|(i, &a)| std::iter::repeat(i).take(a)).collect();
                let (i, j) = (idx[0], idx[1]);
                Ok((2.0 * PI).powi(4) * measure.fourth_moments()?[((i * m + i) * m + j) * m + j])
            }
            k => Err(Error::UnsupportedOrder(k)),
        };
    }
    let mut orders = vec![0; 2 * m];
    orders[..m].copy_from_slice(alpha);
    orders[m..].copy_from_slice(alpha);
    let jet = kernel_jet(spec, x, u0, u0, l, &orders)?;
    Ok(jet.derivative(&orders))
}

/// `‖K_L‖_{L,Q,k}`: the maximum over `|α| ≤ k` and a 5-point-per-axis
/// lattice in the box `Q = [lo, hi]` of `|∂_u^α ∂_v^α K_{x,L}|` on the diagonal.
pub fn controllability_probe(spec: &EnsembleSpec, x: &[f64], lo: &[f64], hi: &[f64], l: f64, order: usize) -> Result<f64> {
    if order > 2 {
        return Err(Error::UnsupportedOrder(order));
    }
    let m = spec.dim();
    let mut alphas: Vec<Vec<usize>> = vec![vec![0; m]];
    for i in 0..m {
        let mut a = vec![0; m];
        a[i] = 1;
        if order >= 1 {
            alphas.push(a.clone());
        }
        if order >= 2 {
            for j in i..m {
                let mut b = a.clone();
                b[j] += 1;
                alphas.push(b);
            }
        }
    }
    let per = 5usize;
    let mut best = 0.0f64;
    for mut idx in 0..per.pow(m as u32) {
        let u: Vec<f64> = (0..m)
            .map(|d| {
                let k = idx % per;
                idx /= per;
                lo[d] + (hi[d] - lo[d]) * k as f64 / (per - 1) as f64
            })
            .collect();
        for a in &alphas {
            best = best.max(diagonal_derivative(spec, x, &u, l, a)?.abs());
        }
    }
    Ok(best)
}

/// `C_{x,L} = [∂_{u_i} ∂_{v_j} K_{x,L}(u, v)]_{u=v=0}`, row-major.
pub fn gradient_covariance(spec: &EnsembleSpec, x: &[f64], l: f64) -> Result<Vec<f64>> {
    let m = spec.dim();
    if let EnsembleSpec::Stationary { measure, .. } = spec {
        return Ok(measure.second_moments()?.iter().map(|v| 4.0 * PI * PI * v).collect());
    }
    let orders = vec![1; 2 * m];
    let jet = kernel_jet(spec, x, &vec![0.0; m], &vec![0.0; m], l, &orders)?;
    let mut c = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let mut e = vec![0; 2 * m];
            e[i] = 1;
            e[m + j] = 1;
            c[i * m + j] = jet.derivative(&e);
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_kernel_examples() {
        let t = EnsembleSpec::Trigonometric { degree: 50, dim: 1 };
        assert!(scaled_kernel(&t, &[0.0], &[0.7], &[0.2], 50.0).unwrap().abs() < 0.02);
        assert_eq!(scaled_kernel(&t, &[0.3], &[0.4], &[0.4], 50.0).unwrap(), 1.0);
        let k = EnsembleSpec::Kostlan { degree: 400, dim: 2 };
        let v = scaled_kernel(&k, &[0.0, 0.0], &[0.0, 0.0], &[1.0, 0.0], 20.0).unwrap();
        assert!((v - (-0.5f64).exp()).abs() < 0.01);
        assert!(matches!(scaled_kernel(&k, &[0.0, 0.0], &[20.0, 0.0], &[0.0, 0.0], 20.0), Err(Error::Domain(_))));
    }

    #[test]
    fn jet_derivatives_match_finite_differences() {
        let t = EnsembleSpec::Trigonometric { degree: 6, dim: 2 };
        let x = [0.1, 0.2];
        let u = [0.3, -0.2];
        let l = 6.0;
        let a = diagonal_derivative(&t, &x, &u, l, &[1, 0]).unwrap();
        let h = 1e-4;
        let k = |du: f64, dv: f64| scaled_kernel(&t, &x, &[u[0] + du, u[1]], &[u[0] + dv, u[1]], l).unwrap();
        let fd = (k(h, h) - k(h, -h) - k(-h, h) + k(-h, -h)) / (4.0 * h * h);
        assert!((a - fd).abs() < 1e-5, "{a} vs {fd}");
    }
}
