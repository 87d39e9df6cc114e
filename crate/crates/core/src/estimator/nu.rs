use super::{admissibility, MeanSe};
use crate::ensembles::{EnsembleSpec, FieldSample, Frame};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::spectral::ball_volume;
use crate::topology::{
    ball_count_field, count_in_window, default_certificate, shell_count, sign_grid, zero_components, ConvexWindow, NodalCensus, SignGrid,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

fn default_center_step() -> f64 {
    0.5
}

fn yes() -> bool {
    true
}

/// Parameters of a fixed-window Monte Carlo estimate of `ν`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NuConfig {
    pub ensemble: EnsembleSpec,
    /// The convex body `S`; the unit ball when absent.
    #[serde(default)]
    pub window: Option<ConvexWindow>,
    /// Values of `R`; every value is read off one census at the largest.
    pub radii: Vec<f64>,
    /// Ball radii `r` for the `Φ_r`, `Ψ_r` bracket.
    #[serde(default)]
    pub ball_radii: Vec<f64>,
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Grid spacing in local coordinates.
    pub spacing: f64,
    #[serde(default)]
    pub base: Option<Vec<f64>>,
    /// Scaling parameter `L`; the ensemble's natural one when absent.
    #[serde(default)]
    pub scale: Option<f64>,
    #[serde(default = "yes")]
    pub certify: bool,
    /// Ball centers for `Φ_r`, `Ψ_r` sit on a lattice of spacing
    /// `center_step × r`.
    #[serde(default = "default_center_step")]
    pub center_step: f64,
}

impl NuConfig {
    pub fn new(ensemble: EnsembleSpec, radii: Vec<f64>, samples: usize, spacing: f64) -> Self {
        NuConfig {
            ensemble,
            window: None,
            radii,
            ball_radii: Vec::new(),
            samples,
            seed: 0,
            spacing,
            base: None,
            scale: None,
            certify: true,
            center_step: default_center_step(),
        }
    }

    pub fn window(&self) -> ConvexWindow {
        self.window.clone().unwrap_or_else(|| ConvexWindow::unit_ball(self.ensemble.dim()))
    }

    pub fn frame(&self) -> Frame {
        let m = self.ensemble.dim();
        Frame { base: self.base.clone().unwrap_or_else(|| vec![0.0; m]), scale: self.scale.unwrap_or_else(|| self.ensemble.natural_scale()) }
    }

    pub fn validate(&self) -> Result<()> {
        self.ensemble.validate()?;
        let m = self.ensemble.dim();
        let s = self.window();
        s.validate()?;
        if s.dim() != m {
            return Err(Error::InvalidParameter("window dimension differs from the ensemble".into()));
        }
        if !s.contains_origin() {
            return Err(Error::Window("the window must contain the origin".into()));
        }
        if self.radii.is_empty() || self.radii.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::InvalidParameter("radii must be a nonempty list of positive values".into()));
        }
        let big = self.max_radius();
        if self.ball_radii.iter().any(|r| !(*r > 0.0 && *r < big)) {
            return Err(Error::InvalidParameter("ball radii must lie in (0, max R)".into()));
        }
        if self.samples == 0 || !(self.spacing > 0.0) || !(self.center_step > 0.0) {
            return Err(Error::InvalidParameter("samples, spacing and center_step must be positive".into()));
        }
        Ok(())
    }

    fn max_radius(&self) -> f64 {
        self.radii.iter().cloned().fold(0.0, f64::max)
    }
}

/// The sampling grid: a centered cube covering `S(R)` with three spare cells.
pub(crate) fn window_grid(s: &ConvexWindow, big_r: f64, h: f64) -> Result<Grid> {
    let (lo, hi) = s.bounds(big_r)?;
    let half = lo.iter().chain(&hi).map(|v| v.abs()).fold(0.0, f64::max) + 3.0 * h;
    Grid::centered(half, h, s.dim())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CensusStatistics {
    pub r: f64,
    /// Sample mean of `Φ_r`, the spatial mean of `N(u, r)/vol B(r)`.
    pub phi_r: f64,
    pub phi_stderr: f64,
    /// Sample mean of `Ψ_r`, the spatial mean of `𝔑(∂B(u, r))/vol B(r)`.
    pub psi_r: f64,
    pub psi_stderr: f64,
    pub bracket_low: f64,
    pub bracket_high: f64,
    pub samples: usize,
    pub centers: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TracePoint {
    #[serde(rename = "R")]
    pub big_r: f64,
    pub nu_hat: f64,
    pub stderr: f64,
    pub nu_hat_certified: Option<f64>,
    pub stderr_certified: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleSummary {
    pub index: u64,
    /// `N_S(R)` at the largest `R`.
    pub count: usize,
    pub certified: bool,
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NuEstimate {
    /// `N_S(R)/vol S(R)` at the largest `R`, over all samples.
    pub nu_hat: f64,
    pub stderr: f64,
    /// The same over certified samples only.
    pub nu_hat_certified: Option<f64>,
    pub stderr_certified: Option<f64>,
    pub certified_fraction: f64,
    pub r_trace: Vec<TracePoint>,
    pub statistics: Vec<CensusStatistics>,
    pub samples: usize,
    pub seed: u64,
    pub warnings: Vec<String>,
    pub per_sample: Vec<SampleSummary>,
}

impl NuEstimate {
    /// The bracket with the smallest width, if any.
    pub fn tightest_bracket(&self) -> Option<&CensusStatistics> {
        self.statistics.iter().min_by(|a, b| (a.bracket_high - a.bracket_low).total_cmp(&(b.bracket_high - b.bracket_low)))
    }
}

struct SampleResult {
    counts: Vec<usize>,
    certified: bool,
    margin: f64,
    phi: Vec<f64>,
    psi: Vec<f64>,
    centers: Vec<usize>,
}

/// `(Φ_r, Ψ_r, centers)`: mean of `N(u, r)` and of the shell count over
/// ball centers `u ∈ S(R − r)`, divided by `vol B(r)`.
pub(crate) fn local_functionals(census: &NodalCensus, sg: &SignGrid, s: &ConvexWindow, big_r: f64, r: f64, step: f64) -> Result<(f64, f64, usize)> {
    let h = census.grid.spacing;
    let stride = ((step * r / h).round() as usize).max(1);
    let field = ball_count_field(census, r, stride, false)?;
    let vb = ball_volume(census.grid.dim()) * r.powi(census.grid.dim() as i32);
    let (mut n_sum, mut psi_sum, mut centers) = (0.0, 0.0, 0usize);
    for i in 0..field.len() {
        let u = field.point(i);
        if !s.contains(&u, big_r - r) {
            continue;
        }
        centers += 1;
        n_sum += field.n[i] as f64;
        psi_sum += shell_count(sg, &u, r)?.count as f64;
    }
    if centers == 0 {
        return Err(Error::Window(format!("no ball centers of radius {r} fit in S({big_r})")));
    }
    Ok((n_sum / centers as f64 / vb, psi_sum / centers as f64 / vb, centers))
}

fn run_sample(cfg: &NuConfig, grid: &Grid, s: &ConvexWindow, index: u64) -> Result<SampleResult> {
    let frame = cfg.frame();
    let field: FieldSample = cfg.ensemble.sample(grid, &frame, cfg.seed, index)?;
    let (certified, margin) = if cfg.certify {
        let c = default_certificate(&field)?;
        (c.certified, c.margin)
    } else {
        (false, f64::NAN)
    };
    let sg = sign_grid(&field, 0.0)?;
    let census = zero_components(&sg);
    let counts = cfg.radii.iter().map(|&r| count_in_window(&census, s, r)).collect::<Result<Vec<_>>>()?;
    let big = cfg.max_radius();
    let (mut phi, mut psi, mut centers) = (Vec::new(), Vec::new(), Vec::new());
    for &r in &cfg.ball_radii {
        let (p, q, c) = local_functionals(&census, &sg, s, big, r, cfg.center_step)?;
        phi.push(p);
        psi.push(q);
        centers.push(c);
    }
    Ok(SampleResult { counts, certified, margin, phi, psi, centers })
}

/// Fixed-window Monte Carlo estimate of `ν` with the `Φ_r`/`Ψ_r` bracket.
pub fn estimate_nu(cfg: &NuConfig) -> Result<NuEstimate> {
    cfg.validate()?;
    let mut warnings = admissibility(&cfg.ensemble)?;
    let s = cfg.window();
    let big = cfg.max_radius();
    let grid = window_grid(&s, big, cfg.spacing)?;
    let results: Vec<SampleResult> = (0..cfg.samples as u64).into_par_iter().map(|i| run_sample(cfg, &grid, &s, i)).collect::<Result<_>>()?;

    let certified: Vec<bool> = results.iter().map(|r| r.certified).collect();
    let n_cert = certified.iter().filter(|&&c| c).count();
    let certified_fraction = n_cert as f64 / results.len() as f64;
    if cfg.certify && n_cert < results.len() {
        warnings.push(format!("{} of {} samples are not certified at spacing {}", results.len() - n_cert, results.len(), cfg.spacing));
    }
    let mut r_trace = Vec::new();
    for (k, &r) in cfg.radii.iter().enumerate() {
        let vol = s.volume(r)?;
        let all: Vec<f64> = results.iter().map(|x| x.counts[k] as f64 / vol).collect();
        let cert: Vec<f64> = results.iter().filter(|x| x.certified).map(|x| x.counts[k] as f64 / vol).collect();
        let a = MeanSe::of(&all);
        let c = (!cert.is_empty()).then(|| MeanSe::of(&cert));
        r_trace.push(TracePoint { big_r: r, nu_hat: a.mean, stderr: a.stderr, nu_hat_certified: c.map(|c| c.mean), stderr_certified: c.map(|c| c.stderr) });
    }
    let statistics = cfg
        .ball_radii
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let phi = MeanSe::of(&results.iter().map(|x| x.phi[k]).collect::<Vec<_>>());
            let psi = MeanSe::of(&results.iter().map(|x| x.psi[k]).collect::<Vec<_>>());
            CensusStatistics {
                r,
                phi_r: phi.mean,
                phi_stderr: phi.stderr,
                psi_r: psi.mean,
                psi_stderr: psi.stderr,
                bracket_low: phi.mean,
                bracket_high: phi.mean + psi.mean,
                samples: results.len(),
                centers: results[0].centers[k],
            }
        })
        .collect();
    let kmax = cfg.radii.iter().position(|&r| r == big).unwrap();
    let top = r_trace[kmax].clone();
    Ok(NuEstimate {
        nu_hat: top.nu_hat,
        stderr: top.stderr,
        nu_hat_certified: top.nu_hat_certified,
        stderr_certified: top.stderr_certified,
        certified_fraction,
        r_trace,
        statistics,
        samples: results.len(),
        seed: cfg.seed,
        warnings,
        per_sample: results
            .iter()
            .enumerate()
            .map(|(i, x)| SampleSummary { index: i as u64, count: x.counts[kmax], certified: x.certified, margin: x.margin })
            .collect(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErgodicAverage {
    /// Spatial mean over translations `v ∈ S(R)` of `N(v, r)/vol B(r)`.
    pub phi: f64,
    /// The same for the shell count on `∂B(v, r)`.
    pub psi: f64,
    pub translations: usize,
}

/// Ergodic averages `A_R^S Φ_r`, `A_R^S Ψ_r` of a single field over the
/// translations on the lattice of cell centers in `S(R)` (every `stride`-th).
pub fn ergodic_average(field: &FieldSample, s: &ConvexWindow, big_r: f64, r: f64, stride: usize) -> Result<ErgodicAverage> {
    if !(r > 0.0 && big_r > 0.0) {
        return Err(Error::InvalidParameter("need positive R and r".into()));
    }
    let sg = sign_grid(field, 0.0)?;
    let census = zero_components(&sg);
    census_check_padded(&census, s, big_r, r)?;
    let h = field.grid.spacing;
    let (phi, psi, translations) = local_functionals(&census, &sg, s, big_r + r, r, stride as f64 * h / r)?;
    Ok(ErgodicAverage { phi, psi, translations })
}

fn census_check_padded(census: &NodalCensus, s: &ConvexWindow, big_r: f64, r: f64) -> Result<()> {
    let (lo, hi) = s.bounds(big_r)?;
    let (glo, ghi) = census.grid.bounds();
    let w = crate::topology::shell_halfwidth(census.grid.dim(), census.grid.spacing);
    if (0..lo.len()).any(|d| lo[d] - r - w <= glo[d] || hi[d] + r + w >= ghi[d]) {
        return Err(Error::Window(format!("field window must contain S({big_r}) padded by {r}")));
    }
    Ok(())
}
