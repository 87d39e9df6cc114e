use super::bessel;
use crate::error::{Error, Result};
use crate::quadrature;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// JSON description of a spectral measure.
///
/// * `sphere`: normalized surface measure of the sphere of `radius` in `R^dim`
/// * `cube`: Lebesgue measure on `[-halfwidth, halfwidth]^dim`
/// * `gaussian`: Gaussian spectral density whose covariance kernel is
///   `exp(-|x|^2 / (2 scale^2))`
/// * `atoms`: point masses; the measure is symmetrized under `λ ↦ -λ`
/// * `tabulated`: radial density, piecewise linear in `|λ|` on `radii`
/// * `transformed`: the push-forward `λ ↦ Mᵀλ` of `base`, whose kernel is
///   `k_base(M x)`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureConfig {
    Sphere { radius: f64, dim: usize },
    Cube { halfwidth: f64, dim: usize },
    Gaussian { scale: f64, dim: usize },
    Atoms { points: Vec<Vec<f64>>, weights: Vec<f64> },
    #[serde(alias = "table")]
    Tabulated { dim: usize, radii: Vec<f64>, density: Vec<f64> },
    Transformed { base: Box<MeasureConfig>, matrix: Vec<Vec<f64>> },
}

#[derive(Clone, Debug)]
enum Kind {
    Sphere { radius: f64 },
    Cube { halfwidth: f64 },
    Gaussian { scale: f64 },
    /// One representative per `±` pair with the pair's total weight.
    Atoms { pairs: Vec<(Vec<f64>, f64)> },
    Tabulated { radii: Vec<f64>, density: Vec<f64>, cdf: Vec<(f64, f64)> },
    Transformed { base: Box<SpectralMeasure>, matrix: Vec<f64> },
}

/// A finite, symmetric, nonnegative Borel measure on `R^m`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "MeasureConfig", into = "MeasureConfig")]
pub struct SpectralMeasure {
    config: MeasureConfig,
    kind: Kind,
    dim: usize,
    total_mass: f64,
}

impl From<SpectralMeasure> for MeasureConfig {
    fn from(m: SpectralMeasure) -> Self {
        m.config
    }
}

impl TryFrom<MeasureConfig> for SpectralMeasure {
    type Error = Error;
    fn try_from(c: MeasureConfig) -> Result<Self> {
        SpectralMeasure::new(c)
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidMeasure(msg.into())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(bad(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Surface area of the unit sphere `S^{m-1}` (2 for m = 1).
pub fn sphere_area(m: usize) -> f64 {
    2.0 * PI.powf(m as f64 / 2.0) / gamma_half(m)
}

/// Volume of the unit ball in `R^m`.
pub fn ball_volume(m: usize) -> f64 {
    PI.powf(m as f64 / 2.0) / gamma_half(m + 2)
}

/// `Γ(n/2)` for positive integers `n`.
fn gamma_half(n: usize) -> f64 {
    let mut g = if n % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut k = if n % 2 == 0 { 2 } else { 1 };
    while k < n {
        g *= k as f64 / 2.0;
        k += 2;
    }
    g
}

fn sinc_derivs(t: f64) -> (f64, f64, f64) {
    if t.abs() < 0.05 {
        let t2 = t * t;
        let f = 1.0 - t2 / 6.0 + t2 * t2 / 120.0 - t2 * t2 * t2 / 5040.0 + t2 * t2 * t2 * t2 / 362_880.0;
        let d1 = t * (-1.0 / 3.0 + t2 / 30.0 - t2 * t2 / 840.0 + t2 * t2 * t2 / 45_360.0);
        let d2 = -1.0 / 3.0 + t2 / 10.0 - t2 * t2 / 168.0 + t2 * t2 * t2 / 6480.0;
        return (f, d1, d2);
    }
    let (s, c) = t.sin_cos();
    let f = s / t;
    let d1 = (t * c - s) / (t * t);
    let d2 = -f - 2.0 * d1 / t;
    (f, d1, d2)
}

/// Value, `h`, `q` of a radial profile `Λ_ν(c r)`: gradient `h x`, Hessian `h I + q x xᵀ`.
fn radial_terms(twice_nu: i32, c: f64, r: f64) -> (f64, f64, f64) {
    let nu = 0.5 * twice_nu as f64;
    let t = c * r;
    let v = bessel::lambda(twice_nu, t);
    let h = -c * c / (2.0 * (nu + 1.0)) * bessel::lambda(twice_nu + 2, t);
    let q = c.powi(4) / (4.0 * (nu + 1.0) * (nu + 2.0)) * bessel::lambda(twice_nu + 4, t);
    (v, h, q)
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn det(mut a: Vec<f64>, n: usize) -> f64 {
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i * n + c].abs().total_cmp(&a[j * n + c].abs())).unwrap();
        if a[p * n + c] == 0.0 {
            return 0.0;
        }
        if p != c {
            for k in 0..n {
                a.swap(p * n + k, c * n + k);
            }
            d = -d;
        }
        d *= a[c * n + c];
        for r in c + 1..n {
            let f = a[r * n + c] / a[c * n + c];
            for k in c..n {
                a[r * n + k] -= f * a[c * n + k];
            }
        }
    }
    d
}

impl SpectralMeasure {
    pub fn new(config: MeasureConfig) -> Result<Self> {
        let (kind, dim, total_mass) = match &config {
            MeasureConfig::Sphere { radius, dim } => {
                positive("radius", *radius)?;
                check_dim(*dim)?;
                (Kind::Sphere { radius: *radius }, *dim, 1.0)
            }
            MeasureConfig::Cube { halfwidth, dim } => {
                positive("halfwidth", *halfwidth)?;
                check_dim(*dim)?;
                (Kind::Cube { halfwidth: *halfwidth }, *dim, (2.0 * halfwidth).powi(*dim as i32))
            }
            MeasureConfig::Gaussian { scale, dim } => {
                positive("scale", *scale)?;
                check_dim(*dim)?;
                (Kind::Gaussian { scale: *scale }, *dim, 1.0)
            }
            MeasureConfig::Atoms { points, weights } => {
                let (pairs, dim) = symmetrize(points, weights)?;
                let mass = pairs.iter().map(|p| p.1).sum();
                (Kind::Atoms { pairs }, dim, mass)
            }
            MeasureConfig::Tabulated { dim, radii, density } => {
                check_dim(*dim)?;
                let (cdf, mass) = tabulate(*dim, radii, density)?;
                (Kind::Tabulated { radii: radii.clone(), density: density.clone(), cdf }, *dim, mass)
            }
            MeasureConfig::Transformed { base, matrix } => {
                let base = SpectralMeasure::new((**base).clone())?;
                let m = base.dim;
                if matrix.len() != m || matrix.iter().any(|r| r.len() != m) {
                    return Err(bad(format!("transform must be {m}x{m}")));
                }
                let flat: Vec<f64> = matrix.iter().flatten().copied().collect();
                if flat.iter().any(|v| !v.is_finite()) {
                    return Err(bad("transform entries must be finite"));
                }
                let d = det(flat.clone(), m);
                if d.abs() < 1e-12 {
                    return Err(Error::SingularTransform(d));
                }
                let mass = base.total_mass;
                (Kind::Transformed { base: Box::new(base), matrix: flat }, m, mass)
            }
        };
        Ok(SpectralMeasure { config, kind, dim, total_mass })
    }

    pub fn sphere(radius: f64, dim: usize) -> Result<Self> {
        Self::new(MeasureConfig::Sphere { radius, dim })
    }

    pub fn cube(halfwidth: f64, dim: usize) -> Result<Self> {
        Self::new(MeasureConfig::Cube { halfwidth, dim })
    }

    pub fn gaussian(scale: f64, dim: usize) -> Result<Self> {
        Self::new(MeasureConfig::Gaussian { scale, dim })
    }

    pub fn atoms(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        Self::new(MeasureConfig::Atoms { points, weights })
    }

    pub fn tabulated(dim: usize, radii: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        Self::new(MeasureConfig::Tabulated { dim, radii, density })
    }

    /// Push-forward under `λ ↦ Mᵀλ`; the covariance becomes `k(M x)`.
    pub fn transformed(base: &SpectralMeasure, matrix: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(MeasureConfig::Transformed { base: Box::new(base.config.clone()), matrix })
    }

    pub fn config(&self) -> &MeasureConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// All atoms, both members of each `±` pair, with their weights.
    pub fn declared_atoms(&self) -> Vec<(Vec<f64>, f64)> {
        match self.atom_pairs() {
            None => Vec::new(),
            Some(pairs) => {
                let mut out = Vec::new();
                for (p, w) in pairs {
                    if p.iter().all(|&v| v == 0.0) {
                        out.push((p, w));
                    } else {
                        out.push((p.iter().map(|v| -v).collect(), 0.5 * w));
                        out.push((p, 0.5 * w));
                    }
                }
                out
            }
        }
    }

    /// Representative points of the `±` atom pairs with pair weights, when
    /// the measure is purely atomic.
    pub fn atom_pairs(&self) -> Option<Vec<(Vec<f64>, f64)>> {
        match &self.kind {
            Kind::Atoms { pairs } => Some(pairs.clone()),
            Kind::Transformed { base, matrix } => base
                .atom_pairs()
                .map(|pairs| pairs.into_iter().map(|(p, w)| (apply_transpose(matrix, self.dim, &p), w)).collect()),
            _ => None,
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.kind, Kind::Sphere { .. } | Kind::Gaussian { .. } | Kind::Tabulated { .. })
    }

    /// Radius of a ball containing the support, when the support is compact.
    pub fn support_radius(&self) -> Option<f64> {
        match &self.kind {
            Kind::Sphere { radius } => Some(*radius),
            Kind::Cube { halfwidth } => Some(halfwidth * (self.dim as f64).sqrt()),
            Kind::Gaussian { .. } => None,
            Kind::Atoms { pairs } => Some(pairs.iter().map(|(p, _)| norm(p)).fold(0.0, f64::max)),
            Kind::Tabulated { radii, .. } => radii.last().copied(),
            Kind::Transformed { base, matrix } => {
                let op: f64 = matrix.iter().map(|v| v * v).sum::<f64>().sqrt();
                base.support_radius().map(|r| r * op)
            }
        }
    }

    /// Normalized covariance kernel `k(x) = ρ̂(x)/ρ(R^m)`.
    pub fn kernel(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let m = self.dim;
        Ok(match &self.kind {
            Kind::Sphere { radius } => bessel::lambda(m as i32 - 2, 2.0 * PI * radius * norm(x)),
            Kind::Cube { halfwidth } => x.iter().map(|&xi| sinc_derivs(2.0 * PI * halfwidth * xi).0).product(),
            Kind::Gaussian { scale } => (-0.5 * x.iter().map(|v| v * v).sum::<f64>() / (scale * scale)).exp(),
            Kind::Atoms { pairs } => {
                pairs.iter().map(|(p, w)| w * (2.0 * PI * dot(p, x)).cos()).sum::<f64>() / self.total_mass
            }
            Kind::Tabulated { .. } => self.tabulated_terms(x, false)?.0,
            Kind::Transformed { base, matrix } => base.kernel(&apply(matrix, m, x))?,
        })
    }

    /// `(k(x), ∇k(x), D²k(x))`, the Hessian row-major `m×m`.
    pub fn kernel_derivatives(&self, x: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        self.check_point(x)?;
        let m = self.dim;
        let mut g = vec![0.0; m];
        let mut h = vec![0.0; m * m];
        let value = match &self.kind {
            Kind::Sphere { radius } => {
                let (v, hh, q) = radial_terms(m as i32 - 2, 2.0 * PI * radius, norm(x));
                fill_radial(x, hh, q, &mut g, &mut h);
                v
            }
            Kind::Tabulated { .. } => {
                let (v, hh, q) = self.tabulated_terms(x, true)?;
                fill_radial(x, hh, q, &mut g, &mut h);
                v
            }
            Kind::Cube { halfwidth } => {
                let c = 2.0 * PI * halfwidth;
                let d: Vec<(f64, f64, f64)> = x.iter().map(|&xi| sinc_derivs(c * xi)).collect();
                let prod_except = |skip: &[usize]| -> f64 {
                    (0..m).filter(|k| !skip.contains(k)).map(|k| d[k].0).product()
                };
                for i in 0..m {
                    g[i] = c * d[i].1 * prod_except(&[i]);
                    for j in 0..m {
                        h[i * m + j] = if i == j {
                            c * c * d[i].2 * prod_except(&[i])
                        } else {
                            c * c * d[i].1 * d[j].1 * prod_except(&[i, j])
                        };
                    }
                }
                d.iter().map(|t| t.0).product()
            }
            Kind::Gaussian { scale } => {
                let s2 = scale * scale;
                let v = (-0.5 * x.iter().map(|v| v * v).sum::<f64>() / s2).exp();
                for i in 0..m {
                    g[i] = -x[i] / s2 * v;
                    for j in 0..m {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        h[i * m + j] = (x[i] * x[j] / (s2 * s2) - delta / s2) * v;
                    }
                }
                v
            }
            Kind::Atoms { pairs } => {
                let mut v = 0.0;
                for (p, w) in pairs {
                    let w = w / self.total_mass;
                    let (s, c) = (2.0 * PI * dot(p, x)).sin_cos();
                    v += w * c;
                    for i in 0..m {
                        g[i] -= w * 2.0 * PI * p[i] * s;
                        for j in 0..m {
                            h[i * m + j] -= w * 4.0 * PI * PI * p[i] * p[j] * c;
                        }
                    }
                }
                v
            }
            Kind::Transformed { base, matrix } => {
                let (v, bg, bh) = base.kernel_derivatives(&apply(matrix, m, x))?;
                // ∇(k∘M) = Mᵀ ∇k, D²(k∘M) = Mᵀ D²k M
                for i in 0..m {
                    g[i] = (0..m).map(|a| matrix[a * m + i] * bg[a]).sum();
                    for j in 0..m {
                        let mut s = 0.0;
                        for a in 0..m {
                            for b in 0..m {
                                s += matrix[a * m + i] * bh[a * m + b] * matrix[b * m + j];
                            }
                        }
                        h[i * m + j] = s;
                    }
                }
                v
            }
        };
        Ok((value, g, h))
    }

    fn tabulated_terms(&self, x: &[f64], derivs: bool) -> Result<(f64, f64, f64)> {
        let Kind::Tabulated { radii, density, .. } = &self.kind else { unreachable!() };
        let m = self.dim;
        let r = norm(x);
        let w = sphere_area(m) / self.total_mass;
        let dens = |s: f64| interp(radii, density, s) * s.powi(m as i32 - 1);
        let mut acc = (0.0, 0.0, 0.0);
        for i in 0..radii.len() - 1 {
            let (a, b) = (radii[i], radii[i + 1]);
            acc.0 += quadrature::integrate(|s| dens(s) * bessel::lambda(m as i32 - 2, 2.0 * PI * s * r), a, b)?;
            if derivs {
                acc.1 += quadrature::integrate(|s| dens(s) * radial_terms(m as i32 - 2, 2.0 * PI * s, r).1, a, b)?;
                acc.2 += quadrature::integrate(|s| dens(s) * radial_terms(m as i32 - 2, 2.0 * PI * s, r).2, a, b)?;
            }
        }
        Ok((w * acc.0, w * acc.1, w * acc.2))
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::InvalidParameter(format!("point has dimension {}, measure {}", x.len(), self.dim)));
        }
        Ok(())
    }

    /// Normalized second moments `∫ λ_i λ_j dρ / ρ(R^m)`, row-major.
    pub fn second_moments(&self) -> Result<Vec<f64>> {
        let m = self.dim;
        let iso = |s: f64| {
            let mut v = vec![0.0; m * m];
            (0..m).for_each(|i| v[i * m + i] = s);
            v
        };
        Ok(match &self.kind {
            Kind::Sphere { radius } => iso(radius * radius / m as f64),
            Kind::Cube { halfwidth } => iso(halfwidth * halfwidth / 3.0),
            Kind::Gaussian { scale } => iso(spectral_sigma(*scale).powi(2)),
            Kind::Atoms { pairs } => {
                let mut v = vec![0.0; m * m];
                for (p, w) in pairs {
                    for i in 0..m {
                        for j in 0..m {
                            v[i * m + j] += w * p[i] * p[j] / self.total_mass;
                        }
                    }
                }
                v
            }
            Kind::Tabulated { .. } => iso(self.radial_moment(2)? / m as f64),
            Kind::Transformed { base, matrix } => {
                let b = base.second_moments()?;
                let mut v = vec![0.0; m * m];
                for i in 0..m {
                    for j in 0..m {
                        let mut s = 0.0;
                        for a in 0..m {
                            for c in 0..m {
                                s += matrix[a * m + i] * b[a * m + c] * matrix[c * m + j];
                            }
                        }
                        v[i * m + j] = s;
                    }
                }
                v
            }
        })
    }

    /// Normalized fourth-moment tensor `∫ λ_i λ_j λ_k λ_l dρ / ρ(R^m)`,
    /// flattened with index `((i m + j) m + k) m + l`.
    pub fn fourth_moments(&self) -> Result<Vec<f64>> {
        let m = self.dim;
        let idx = |i: usize, j: usize, k: usize, l: usize| ((i * m + j) * m + k) * m + l;
        let mut t = vec![0.0; m * m * m * m];
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let isotropic = |t: &mut Vec<f64>, c: f64| {
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        for l in 0..m {
                            t[idx(i, j, k, l)] =
                                c * (delta(i, j) * delta(k, l) + delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k));
                        }
                    }
                }
            }
        };
        let mf = m as f64;
        match &self.kind {
            Kind::Sphere { radius } => isotropic(&mut t, radius.powi(4) / (mf * (mf + 2.0))),
            Kind::Gaussian { scale } => isotropic(&mut t, spectral_sigma(*scale).powi(4)),
            Kind::Tabulated { .. } => isotropic(&mut t, self.radial_moment(4)? / (mf * (mf + 2.0))),
            Kind::Cube { halfwidth } => {
                let a4 = halfwidth.powi(4);
                for i in 0..m {
                    for j in 0..m {
                        t[idx(i, i, j, j)] = if i == j { a4 / 5.0 } else { a4 / 9.0 };
                        t[idx(i, j, i, j)] = t[idx(i, i, j, j)];
                        t[idx(i, j, j, i)] = t[idx(i, i, j, j)];
                    }
                }
            }
            Kind::Atoms { pairs } => {
                for (p, w) in pairs {
                    let w = w / self.total_mass;
                    for (n, v) in t.iter_mut().enumerate() {
                        let (i, j, k, l) = (n / (m * m * m), (n / (m * m)) % m, (n / m) % m, n % m);
                        *v += w * p[i] * p[j] * p[k] * p[l];
                    }
                }
            }
            Kind::Transformed { base, matrix } => {
                let b = base.fourth_moments()?;
                // contract one index at a time with A = Mᵀ: λ'_a = Σ_i M_ia λ_i
                let mut cur = b;
                for axis in 0..4 {
                    let mut next = vec![0.0; cur.len()];
                    for (n, v) in next.iter_mut().enumerate() {
                        let mut digits = [n / (m * m * m), (n / (m * m)) % m, (n / m) % m, n % m];
                        let a = digits[axis];
                        let mut s = 0.0;
                        for i in 0..m {
                            digits[axis] = i;
                            s += matrix[i * m + a] * cur[idx(digits[0], digits[1], digits[2], digits[3])];
                        }
                        *v = s;
                    }
                    cur = next;
                }
                t = cur;
            }
        }
        Ok(t)
    }

    /// `∫ |λ|^p dρ / ρ(R^m)` for a tabulated radial density.
    fn radial_moment(&self, p: i32) -> Result<f64> {
        let Kind::Tabulated { radii, density, .. } = &self.kind else { unreachable!() };
        let m = self.dim as i32;
        let mut s = 0.0;
        for i in 0..radii.len() - 1 {
            s += quadrature::integrate(|r| interp(radii, density, r) * r.powi(m - 1 + p), radii[i], radii[i + 1])?;
        }
        Ok(s * sphere_area(self.dim) / self.total_mass)
    }

    /// Draw one frequency from the normalized measure.
    pub fn sample_frequency<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        let m = self.dim;
        match &self.kind {
            Kind::Sphere { radius } => {
                random_direction(rng, out);
                out.iter_mut().for_each(|v| *v *= radius);
            }
            Kind::Cube { halfwidth } => out.iter_mut().for_each(|v| *v = rng.gen_range(-halfwidth..*halfwidth)),
            Kind::Gaussian { scale } => {
                let s = spectral_sigma(*scale);
                out.iter_mut().for_each(|v| *v = s * rng.sample::<f64, _>(StandardNormal));
            }
            Kind::Atoms { pairs } => {
                let mut u = rng.gen::<f64>() * self.total_mass;
                let mut k = pairs.len() - 1;
                for (i, (_, w)) in pairs.iter().enumerate() {
                    if u < *w {
                        k = i;
                        break;
                    }
                    u -= w;
                }
                let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                out.iter_mut().zip(&pairs[k].0).for_each(|(o, p)| *o = sign * p);
            }
            Kind::Tabulated { cdf, .. } => {
                let u: f64 = rng.gen();
                let k = cdf.partition_point(|&(_, f)| f < u).clamp(1, cdf.len() - 1);
                let ((r0, f0), (r1, f1)) = (cdf[k - 1], cdf[k]);
                let r = if f1 > f0 { r0 + (r1 - r0) * (u - f0) / (f1 - f0) } else { r0 };
                random_direction(rng, out);
                out.iter_mut().for_each(|v| *v *= r);
            }
            Kind::Transformed { base, matrix } => {
                let mut b = vec![0.0; m];
                base.sample_frequency(rng, &mut b);
                out.copy_from_slice(&apply_transpose(matrix, m, &b));
            }
        }
    }

    /// A deterministic finite point set inside the support, of roughly `n`
    /// points. Lattice-based samples have an odd count per axis so they
    /// contain the origin.
    pub fn support_sample(&self, n: usize) -> Vec<Vec<f64>> {
        let m = self.dim;
        match &self.kind {
            Kind::Sphere { radius } => sphere_points(m, n).into_iter().map(|p| p.iter().map(|v| v * radius).collect()).collect(),
            Kind::Cube { halfwidth } => lattice(m, n, *halfwidth),
            Kind::Gaussian { scale } => lattice(m, n, 3.0 * spectral_sigma(*scale)),
            Kind::Atoms { .. } => self.declared_atoms().into_iter().map(|a| a.0).collect(),
            Kind::Tabulated { radii, density, .. } => {
                let dirs = sphere_points(m, (n / radii.len()).max(2 * m));
                let mut pts = Vec::new();
                for (r, p) in radii.iter().zip(density) {
                    if *p <= 0.0 {
                        continue;
                    }
                    if *r == 0.0 {
                        pts.push(vec![0.0; m]);
                        continue;
                    }
                    pts.extend(dirs.iter().map(|d| d.iter().map(|v| v * r).collect::<Vec<f64>>()));
                }
                pts
            }
            Kind::Transformed { base, matrix } => {
                base.support_sample(n).into_iter().map(|p| apply_transpose(matrix, m, &p)).collect()
            }
        }
    }
}

/// Standard deviation of each spectral coordinate of the Gaussian measure
/// whose kernel is `exp(-|x|²/(2 scale²))`.
pub fn spectral_sigma(scale: f64) -> f64 {
    1.0 / (2.0 * PI * scale)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(bad("dimension must be at least 1"));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `M x` for row-major `M`.
fn apply(matrix: &[f64], m: usize, x: &[f64]) -> Vec<f64> {
    (0..m).map(|i| (0..m).map(|j| matrix[i * m + j] * x[j]).sum()).collect()
}

/// `Mᵀ x` for row-major `M`.
fn apply_transpose(matrix: &[f64], m: usize, x: &[f64]) -> Vec<f64> {
    (0..m).map(|i| (0..m).map(|j| matrix[j * m + i] * x[j]).sum()).collect()
}

fn fill_radial(x: &[f64], h: f64, q: f64, g: &mut [f64], hess: &mut [f64]) {
    let m = x.len();
    for i in 0..m {
        g[i] = h * x[i];
        for j in 0..m {
            hess[i * m + j] = q * x[i] * x[j] + if i == j { h } else { 0.0 };
        }
    }
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let k = xs.partition_point(|&v| v < x).clamp(1, xs.len() - 1);
    let t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    ys[k - 1] + t * (ys[k] - ys[k - 1])
}

fn symmetrize(points: &[Vec<f64>], weights: &[f64]) -> Result<(Vec<(Vec<f64>, f64)>, usize)> {
    if points.is_empty() || points.len() != weights.len() {
        return Err(bad("atoms need matching, non-empty point and weight lists"));
    }
    let dim = points[0].len();
    check_dim(dim)?;
    let mut pairs: Vec<(Vec<f64>, f64)> = Vec::new();
    for (p, &w) in points.iter().zip(weights) {
        if p.len() != dim || p.iter().any(|v| !v.is_finite()) {
            return Err(bad("atom points must be finite with a common dimension"));
        }
        positive("atom weight", w)?;
        let close = |q: &Vec<f64>, s: f64| q.iter().zip(p).all(|(a, b)| (a - s * b).abs() <= 1e-12 * (1.0 + b.abs()));
        match pairs.iter_mut().find(|(q, _)| close(q, 1.0) || close(q, -1.0)) {
            Some(pair) => pair.1 += w,
            None => pairs.push((p.clone(), w)),
        }
    }
    Ok((pairs, dim))
}

fn tabulate(dim: usize, radii: &[f64], density: &[f64]) -> Result<(Vec<(f64, f64)>, f64)> {
    if radii.len() < 2 || radii.len() != density.len() {
        return Err(bad("tabulated density needs at least two nodes and matching lists"));
    }
    if radii[0] < 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) || radii.iter().any(|r| !r.is_finite()) {
        return Err(bad("radii must be finite, non-negative and strictly increasing"));
    }
    if density.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(bad("density must be finite and non-negative"));
    }
    let f = |s: f64| interp(radii, density, s) * s.powi(dim as i32 - 1);
    let mut cdf = vec![(radii[0], 0.0)];
    let mut acc = 0.0;
    const SUB: usize = 64;
    for w in radii.windows(2) {
        let h = (w[1] - w[0]) / SUB as f64;
        for k in 0..SUB {
            let (a, b) = (w[0] + k as f64 * h, w[0] + (k + 1) as f64 * h);
            acc += quadrature::integrate(f, a, b)?;
            cdf.push((b, acc));
        }
    }
    if !(acc > 0.0) {
        return Err(bad("tabulated density has zero mass"));
    }
    cdf.iter_mut().for_each(|c| c.1 /= acc);
    Ok((cdf, acc * sphere_area(dim)))
}

fn random_direction<R: Rng>(rng: &mut R, out: &mut [f64]) {
    if out.len() == 1 {
        out[0] = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        return;
    }
    loop {
        out.iter_mut().for_each(|v| *v = rng.sample::<f64, _>(StandardNormal));
        let n = norm(out);
        if n > 1e-12 {
            out.iter_mut().for_each(|v| *v /= n);
            return;
        }
    }
}

/// Deterministic, roughly uniform points on the unit sphere `S^{m-1}`.
fn sphere_points(m: usize, n: usize) -> Vec<Vec<f64>> {
    let n = n.max(2);
    match m {
        1 => vec![vec![-1.0], vec![1.0]],
        2 => (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * k as f64;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = crate::rng::stream(0x5EED, m as u64, crate::rng::StreamRole::Auxiliary);
            (0..n)
                .map(|_| {
                    let mut v = vec![0.0; m];
                    random_direction(&mut rng, &mut v);
                    v
                })
                .collect()
        }
    }
}

fn lattice(m: usize, n: usize, half: f64) -> Vec<Vec<f64>> {
    let mut k = (n as f64).powf(1.0 / m as f64).ceil() as usize;
    if k % 2 == 0 {
        k += 1;
    }
    let k = k.max(3);
    let step = 2.0 * half / (k - 1) as f64;
    let total = k.pow(m as u32);
    (0..total)
        .map(|mut idx| {
            let mut p = vec![0.0; m];
            for d in (0..m).rev() {
                p[d] = -half + step * (idx % k) as f64;
                idx /= k;
            }
            p
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_kernel_in_plane_is_j0() {
        let s = SpectralMeasure::sphere(1.0, 2).unwrap();
        assert!((s.kernel(&[0.5, 0.0]).unwrap() + 0.304_242_177_644_094).abs() < 1e-13);
        assert!(s.kernel(&[0.382_739_874_781_006, 0.0]).unwrap().abs() < 1e-9);
    }

    #[test]
    fn atoms_are_symmetrized() {
        let a = SpectralMeasure::atoms(vec![vec![1.0, 0.0]], vec![1.0]).unwrap();
        let b = SpectralMeasure::atoms(vec![vec![1.0, 0.0], vec![-1.0, 0.0]], vec![0.5, 0.5]).unwrap();
        for x in [[0.1, 0.3], [0.37, -2.0]] {
            assert!((a.kernel(&x).unwrap() - b.kernel(&x).unwrap()).abs() < 1e-15);
        }
        assert_eq!(a.declared_atoms().len(), 2);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(SpectralMeasure::sphere(-1.0, 2).is_err());
        assert!(SpectralMeasure::cube(1.0, 0).is_err());
        assert!(SpectralMeasure::atoms(vec![vec![1.0]], vec![-0.5]).is_err());
        assert!(SpectralMeasure::tabulated(1, vec![0.0, 1.0], vec![0.0, 0.0]).is_err());
        let s = SpectralMeasure::sphere(1.0, 2).unwrap();
        assert!(matches!(
            SpectralMeasure::transformed(&s, vec![vec![1.0, 2.0], vec![2.0, 4.0]]),
            Err(Error::SingularTransform(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let s = SpectralMeasure::transformed(&SpectralMeasure::sphere(1.0, 2).unwrap(), vec![vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        let back: SpectralMeasure = serde_json::from_str(&j).unwrap();
        assert_eq!(back.config(), s.config());
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((ball_volume(2) - PI).abs() < 1e-15);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
    }
}
