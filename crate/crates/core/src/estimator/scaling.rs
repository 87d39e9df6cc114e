use super::nu::window_grid;
use super::{admissibility, MeanSe};
use crate::ensembles::{EnsembleSpec, Frame, KostlanBudget};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::mesh::SphereMesh;
use crate::spectral::{ball_volume, SpectralMeasure};
use crate::topology::{count_in_ball, count_in_window, default_certificate, sign_grid, sphere_components, zero_components, ConvexWindow};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DoubleScalingConfig {
    /// The family; its degree is replaced for every `L`.
    pub ensemble: EnsembleSpec,
    pub x: Vec<f64>,
    pub radii: Vec<f64>,
    pub scales: Vec<f64>,
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    pub spacing: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DoubleScalingCell {
    #[serde(rename = "R")]
    pub big_r: f64,
    #[serde(rename = "L")]
    pub l: f64,
    /// Mean of `N(x, R/L; f_L)/vol B(R)`.
    pub mean: f64,
    pub stderr: f64,
    pub certified_fraction: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DoubleScalingEstimate {
    pub x: Vec<f64>,
    pub table: Vec<DoubleScalingCell>,
    /// The cell with the largest `R` and `L`.
    pub nu_bar: f64,
    pub seed: u64,
}

/// The `(R, L)` table of `N(x, R/L; f_L)/vol B(R)`. In local coordinates
/// `u = L(y − x)` the ball `B(x, R/L)` becomes `B(0, R)`; one census per
/// sample and `L` serves every `R`.
pub fn double_scaling(cfg: &DoubleScalingConfig) -> Result<DoubleScalingEstimate> {
    let m = cfg.ensemble.dim();
    if cfg.x.len() != m || cfg.radii.iter().any(|r| !(*r >= 0.0)) || cfg.scales.iter().any(|l| !(*l > 0.0)) || cfg.radii.is_empty() || cfg.scales.is_empty() {
        return Err(Error::InvalidParameter("need x of the ensemble dimension, radii ≥ 0 and scales > 0".into()));
    }
    if cfg.samples == 0 || !(cfg.spacing > 0.0) {
        return Err(Error::InvalidParameter("samples and spacing must be positive".into()));
    }
    let big = cfg.radii.iter().cloned().fold(0.0, f64::max);
    let grid = Grid::centered(big + 3.0 * cfg.spacing, cfg.spacing, m)?;
    let origin = vec![0.0; m];
    let mut table = Vec::new();
    for &l in &cfg.scales {
        let spec = cfg.ensemble.at_scale(l)?;
        admissibility(&spec)?;
        let frame = Frame { base: cfg.x.clone(), scale: l };
        let rows: Vec<(Vec<f64>, bool)> = (0..cfg.samples as u64)
            .into_par_iter()
            .map(|i| -> Result<(Vec<f64>, bool)> {
                let field = spec.sample(&grid, &frame, cfg.seed, i)?;
                let certified = default_certificate(&field)?.certified;
                let census = zero_components(&sign_grid(&field, 0.0)?);
                let vals = cfg
                    .radii
                    .iter()
                    .map(|&r| if r == 0.0 { Ok(0.0) } else { count_in_ball(&census, &origin, r).map(|(n, _)| n as f64 / (ball_volume(m) * r.powi(m as i32))) })
                    .collect::<Result<Vec<_>>>()?;
                Ok((vals, certified))
            })
            .collect::<Result<_>>()?;
        let cf = rows.iter().filter(|r| r.1).count() as f64 / rows.len() as f64;
        for (k, &r) in cfg.radii.iter().enumerate() {
            let st = MeanSe::of(&rows.iter().map(|x| x.0[k]).collect::<Vec<_>>());
            table.push(DoubleScalingCell { big_r: r, l, mean: st.mean, stderr: st.stderr, certified_fraction: cf });
        }
    }
    let lmax = cfg.scales.iter().cloned().fold(0.0, f64::max);
    let nu_bar = table.iter().find(|c| c.big_r == big && c.l == lmax).map(|c| c.mean).unwrap();
    Ok(DoubleScalingEstimate { x: cfg.x.clone(), table, nu_bar, seed: cfg.seed })
}

fn default_mesh_spacing() -> f64 {
    0.25
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KostlanTotalConfig {
    pub degrees: Vec<usize>,
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Mesh spacing in units of `1/√n`.
    #[serde(default = "default_mesh_spacing")]
    pub spacing: f64,
    #[serde(default)]
    pub budget: KostlanBudget,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KostlanTotalRow {
    pub degree: usize,
    pub mean: f64,
    pub stderr: f64,
    /// `mean / n` (`n^{m/2}` with `m = 2`).
    pub normalized: f64,
    pub normalized_stderr: f64,
    pub min: usize,
    pub max: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KostlanTotals {
    pub rows: Vec<KostlanTotalRow>,
    /// `|t_{k+1} − t_k|` for the normalized sequence.
    pub cauchy_differences: Vec<f64>,
    /// Ratios of successive Cauchy differences.
    pub shrink_ratios: Vec<f64>,
    pub seed: u64,
    pub warnings: Vec<String>,
}

/// Total number of zero-set components of Kostlan polynomials on `S²`,
/// counted on a latitude–longitude mesh.
pub fn total_count_kostlan(cfg: &KostlanTotalConfig) -> Result<KostlanTotals> {
    if cfg.degrees.is_empty() || cfg.degrees.contains(&0) || cfg.samples == 0 || !(cfg.spacing > 0.0) {
        return Err(Error::InvalidParameter("need positive degrees, samples and spacing".into()));
    }
    let mut warnings = Vec::new();
    if cfg.spacing > 0.25 {
        warnings.push(format!("mesh spacing {}/√n is coarser than the certified 0.25/√n", cfg.spacing));
    }
    let mut rows = Vec::new();
    for &n in &cfg.degrees {
        let spec = EnsembleSpec::Kostlan { degree: n, dim: 2 };
        let mesh = SphereMesh::lat_long_with_spacing(cfg.spacing / (n as f64).sqrt())?;
        let counts: Vec<usize> = (0..cfg.samples as u64)
            .into_par_iter()
            .map(|i| -> Result<usize> {
                let s = spec.sample_sphere(&mesh, cfg.seed, i, &cfg.budget)?;
                Ok(sphere_components(&s)?.zero_components)
            })
            .collect::<Result<_>>()?;
        let st = MeanSe::of(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>());
        rows.push(KostlanTotalRow {
            degree: n,
            mean: st.mean,
            stderr: st.stderr,
            normalized: st.mean / n as f64,
            normalized_stderr: st.stderr / n as f64,
            min: *counts.iter().min().unwrap(),
            max: *counts.iter().max().unwrap(),
        });
    }
    let cauchy_differences: Vec<f64> = rows.windows(2).map(|w| (w[1].normalized - w[0].normalized).abs()).collect();
    let shrink_ratios = cauchy_differences.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(KostlanTotals { rows, cauchy_differences, shrink_ratios, seed: cfg.seed, warnings })
}

fn default_modes() -> usize {
    512
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DetScalingConfig {
    pub measure: SpectralMeasure,
    pub matrix: Vec<Vec<f64>>,
    pub radius: f64,
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    pub spacing: f64,
    #[serde(default = "default_modes")]
    pub n_modes: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DetScalingResult {
    pub determinant: f64,
    pub nu_base: f64,
    pub nu_base_stderr: f64,
    pub nu_transformed: f64,
    pub nu_transformed_stderr: f64,
    pub ratio: f64,
    pub ratio_stderr: f64,
    /// 95% interval from the paired delta method.
    pub ci_low: f64,
    pub ci_high: f64,
    pub certified_fraction: f64,
    pub seed: u64,
}

/// `ν̂(F∘T)/ν̂(F)` with common random numbers: sample `i` of `F∘T` is
/// built from exactly the draws of sample `i` of `F`.
pub fn det_scaling_test(cfg: &DetScalingConfig) -> Result<DetScalingResult> {
    let m = cfg.measure.dim();
    if cfg.matrix.len() != m || cfg.matrix.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidParameter(format!("matrix must be {m}×{m}")));
    }
    let t = DMatrix::from_fn(m, m, |i, j| cfg.matrix[i][j]);
    let det = t.determinant();
    let norm = t.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if !(det.abs() > 1e-12 * norm.powi(m as i32)) {
        return Err(Error::SingularTransform(det));
    }
    if cfg.samples < 2 || !(cfg.radius > 0.0) || !(cfg.spacing > 0.0) {
        return Err(Error::InvalidParameter("need at least two samples and positive radius and spacing".into()));
    }
    let transformed = SpectralMeasure::transformed(&cfg.measure, cfg.matrix.clone())?;
    let base_spec = EnsembleSpec::Stationary { measure: cfg.measure.clone(), n_modes: cfg.n_modes };
    let t_spec = EnsembleSpec::Stationary { measure: transformed, n_modes: cfg.n_modes };
    admissibility(&base_spec)?;
    admissibility(&t_spec)?;
    let s = ConvexWindow::unit_ball(m);
    let grid = window_grid(&s, cfg.radius, cfg.spacing)?;
    let frame = Frame::identity(m);
    let vol = s.volume(cfg.radius)?;
    let pairs: Vec<(f64, f64, bool)> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64, bool)> {
            let mut out = [0.0; 2];
            let mut cert = true;
            for (k, spec) in [&base_spec, &t_spec].into_iter().enumerate() {
                let field = spec.sample(&grid, &frame, cfg.seed, i)?;
                cert &= default_certificate(&field)?.certified;
                out[k] = count_in_window(&zero_components(&sign_grid(&field, 0.0)?), &s, cfg.radius)? as f64 / vol;
            }
            Ok((out[0], out[1], cert))
        })
        .collect::<Result<_>>()?;
    let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (bx, by) = (MeanSe::of(&x), MeanSe::of(&y));
    let ratio = by.mean / bx.mean;
    // var(ȳ − ratio·x̄) / x̄²
    let n = x.len() as f64;
    let resid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| b - ratio * a).collect();
    let rm = resid.iter().sum::<f64>() / n;
    let var = resid.iter().map(|r| (r - rm).powi(2)).sum::<f64>() / (n - 1.0) / n;
    let ratio_stderr = var.sqrt() / bx.mean;
    Ok(DetScalingResult {
        determinant: det,
        nu_base: bx.mean,
        nu_base_stderr: bx.stderr,
        nu_transformed: by.mean,
        nu_transformed_stderr: by.stderr,
        ratio,
        ratio_stderr,
        ci_low: ratio - 1.96 * ratio_stderr,
        ci_high: ratio + 1.96 * ratio_stderr,
        certified_fraction: pairs.iter().filter(|p| p.2).count() as f64 / n,
        seed: cfg.seed,
    })
}
