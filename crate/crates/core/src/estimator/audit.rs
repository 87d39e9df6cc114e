//! Per-sample verification runs: the sandwich bounds and the stability of
//! the census under grid refinement.

use super::nu::window_grid;
use crate::ensembles::{EnsembleSpec, Frame};
use crate::error::{Error, Result};
use crate::topology::{default_certificate, refinement_check, sandwich_check, sign_grid, zero_components, ConvexWindow, RefinementReport, SandwichReport};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SandwichAuditConfig {
    pub ensemble: EnsembleSpec,
    #[serde(default)]
    pub window: Option<ConvexWindow>,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub ball_radii: Vec<f64>,
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    pub spacing: f64,
    #[serde(default)]
    pub base: Option<Vec<f64>>,
    #[serde(default)]
    pub scale: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichAuditRow {
    pub r: f64,
    pub violations: usize,
    /// Smallest `min(mid + lhs_slack − lhs, rhs + rhs_slack − mid)` seen.
    pub worst_gap: f64,
    pub reports: Vec<SandwichReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichAudit {
    #[serde(rename = "R")]
    pub big_r: f64,
    pub rows: Vec<SandwichAuditRow>,
    pub violations: usize,
    pub seed: u64,
}

fn frame(ensemble: &EnsembleSpec, base: &Option<Vec<f64>>, scale: Option<f64>) -> Frame {
    let m = ensemble.dim();
    Frame { base: base.clone().unwrap_or_else(|| vec![0.0; m]), scale: scale.unwrap_or_else(|| ensemble.natural_scale()) }
}

fn check_window(ensemble: &EnsembleSpec, s: &ConvexWindow) -> Result<()> {
    s.validate()?;
    if s.dim() != ensemble.dim() {
        return Err(Error::InvalidParameter("window dimension differs from the ensemble".into()));
    }
    Ok(())
}

impl SandwichAuditConfig {
    pub fn validate(&self) -> Result<()> {
        self.ensemble.validate()?;
        check_window(&self.ensemble, &self.window())?;
        if self.ball_radii.is_empty() || self.ball_radii.iter().any(|r| !(*r > 0.0 && *r < self.big_r)) {
            return Err(Error::InvalidParameter("ball radii must lie in (0, R)".into()));
        }
        if self.samples == 0 || !(self.spacing > 0.0) {
            return Err(Error::InvalidParameter("samples and spacing must be positive".into()));
        }
        Ok(())
    }

    pub fn window(&self) -> ConvexWindow {
        self.window.clone().unwrap_or_else(|| ConvexWindow::unit_ball(self.ensemble.dim()))
    }
}

/// Sample each field on a grid covering `S(R + r)` padded by `r` for the
/// largest `r`, and evaluate the sandwich for every `r`.
pub fn sandwich_audit(cfg: &SandwichAuditConfig) -> Result<SandwichAudit> {
    cfg.validate()?;
    let s = cfg.window();
    let rmax = cfg.ball_radii.iter().cloned().fold(0.0, f64::max);
    let grid = window_grid(&s, cfg.big_r + 2.0 * rmax, cfg.spacing)?;
    let fr = frame(&cfg.ensemble, &cfg.base, cfg.scale);
    let per_sample: Vec<Vec<SandwichReport>> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let field = cfg.ensemble.sample(&grid, &fr, cfg.seed, i)?;
            let census = zero_components(&sign_grid(&field, 0.0)?);
            cfg.ball_radii.iter().map(|&r| sandwich_check(&census, &s, cfg.big_r, r)).collect()
        })
        .collect::<Result<_>>()?;
    let rows: Vec<SandwichAuditRow> = cfg
        .ball_radii
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let reports: Vec<SandwichReport> = per_sample.iter().map(|p| p[k].clone()).collect();
            let worst_gap = reports
                .iter()
                .map(|x| (x.mid as f64 + x.lhs_slack - x.lhs).min(x.rhs + x.rhs_slack - x.mid as f64))
                .fold(f64::INFINITY, f64::min);
            SandwichAuditRow { r, violations: reports.iter().filter(|x| !x.holds).count(), worst_gap, reports }
        })
        .collect();
    let violations = rows.iter().map(|r| r.violations).sum();
    Ok(SandwichAudit { big_r: cfg.big_r, rows, violations, seed: cfg.seed })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RefinementAuditConfig {
    pub ensemble: EnsembleSpec,
    #[serde(default)]
    pub window: Option<ConvexWindow>,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Coarse spacing; the fine grid has half of it.
    pub spacing: f64,
    /// Depth below which components are ignored, in coarse cells.
    #[serde(default = "two")]
    pub margin_cells: f64,
    #[serde(default)]
    pub base: Option<Vec<f64>>,
    #[serde(default)]
    pub scale: Option<f64>,
}

fn two() -> f64 {
    2.0
}

#[derive(Clone, Debug, Serialize)]
pub struct RefinementSample {
    pub index: u64,
    pub certified: bool,
    pub report: RefinementReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct RefinementAudit {
    pub samples: Vec<RefinementSample>,
    pub certified: usize,
    /// Certified samples whose census changed under refinement.
    pub violations: usize,
    /// Uncertified samples whose census changed, for information.
    pub uncertified_changes: usize,
    pub seed: u64,
}

/// Census each sample at spacing `h` and `h/2` and compare the components
/// deeper than `margin_cells × h` inside `S(R)`.
pub fn refinement_audit(cfg: &RefinementAuditConfig) -> Result<RefinementAudit> {
    cfg.ensemble.validate()?;
    let s = cfg.window.clone().unwrap_or_else(|| ConvexWindow::unit_ball(cfg.ensemble.dim()));
    check_window(&cfg.ensemble, &s)?;
    if cfg.samples == 0 || !(cfg.spacing > 0.0) || !(cfg.big_r > 0.0) || !(cfg.margin_cells >= 0.0) {
        return Err(Error::InvalidParameter("samples, spacing and R must be positive".into()));
    }
    let coarse = window_grid(&s, cfg.big_r, cfg.spacing)?;
    let fine = coarse.refined();
    let fr = frame(&cfg.ensemble, &cfg.base, cfg.scale);
    let margin = cfg.margin_cells * cfg.spacing;
    let samples: Vec<RefinementSample> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let fc = cfg.ensemble.sample(&coarse, &fr, cfg.seed, i)?;
            let certified = default_certificate(&fc)?.certified;
            let cc = zero_components(&sign_grid(&fc, 0.0)?);
            let ff = cfg.ensemble.sample(&fine, &fr, cfg.seed, i)?;
            let cf = zero_components(&sign_grid(&ff, 0.0)?);
            Ok(RefinementSample { index: i, certified, report: refinement_check(&cc, &cf, &s, cfg.big_r, margin)? })
        })
        .collect::<Result<_>>()?;
    let certified = samples.iter().filter(|x| x.certified).count();
    let violations = samples.iter().filter(|x| x.certified && !x.report.consistent).count();
    let uncertified_changes = samples.iter().filter(|x| !x.certified && !x.report.consistent).count();
    Ok(RefinementAudit { samples, certified, violations, uncertified_changes, seed: cfg.seed })
}
