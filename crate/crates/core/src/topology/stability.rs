//! Resolution certificates for grid censuses.
//!
//! The certificate is second order: with `G₂` a bound on `|∇²f|` (estimated
//! from gradient differences along grid edges, with a safety factor), the
//! multilinear interpolant of the vertex values differs from `f` by at most
//! `(m/8) h² G₂` inside every cell. The dichotomy `|f| > α` or `|∇f| > β` is
//! checked at vertices with allowances for the half-diagonal `h√m/2`, using
//! derivative bounds local to each vertex, so it holds throughout the
//! window. Mixed cells sharing a face must also carry pairwise acute vertex
//! gradients, which rules out two zero-set sheets or a saddle crossing being
//! resolved by one cell.

use super::signs::{CellCorners, Lattice};
use crate::ensembles::FieldSample;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Multiplier applied to the edge estimate of `|∇²f|`.
pub const HESSIAN_SAFETY: f64 = 1.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityCertificate {
    pub alpha: f64,
    pub beta: f64,
    /// `min` over vertices of `max(|f|, |∇f| α/β)`.
    pub margin: f64,
    /// Bound on `|f − f_grid|` inside cells.
    pub grid_perturbation_bound: f64,
    pub hessian_bound: f64,
    pub dichotomy_failures: usize,
    pub incoherent_pairs: usize,
    pub certified: bool,
}

fn require_gradients(field: &FieldSample) -> Result<&[f64]> {
    field.gradients.as_deref().ok_or(Error::MissingGradients)
}

fn norm(g: &[f64]) -> f64 {
    g.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Per vertex, the largest `|Δ∇f|/h` over incident grid edges.
fn edge_hessian(field: &FieldSample, grads: &[f64]) -> Vec<f64> {
    let grid = &field.grid;
    let m = grid.dim();
    let lat = Lattice::new(grid.shape.clone(), grid.periodic);
    let mut c = vec![0; m];
    let mut e = vec![0.0f64; lat.len()];
    let h = grid.spacing;
    for i in 0..lat.len() {
        lat.unravel(i, &mut c);
        let gi = &grads[i * m..(i + 1) * m];
        lat.forward_neighbors(i, &c, |j| {
            let gj = &grads[j * m..(j + 1) * m];
            let d = gi.iter().zip(gj).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() / h;
            e[i] = e[i].max(d);
            e[j] = e[j].max(d);
        });
    }
    e
}

/// `(G₂, (m/8) h² G₂)` with `G₂` the largest edge estimate of `|∇²f|`
/// times [`HESSIAN_SAFETY`].
pub fn perturbation_bound(field: &FieldSample) -> Result<(f64, f64)> {
    let grads = require_gradients(field)?;
    let g2 = edge_hessian(field, grads).into_iter().fold(0.0, f64::max) * HESSIAN_SAFETY;
    let h = field.grid.spacing;
    Ok((g2, field.grid.dim() as f64 / 8.0 * h * h * g2))
}

/// Check the dichotomy `|f| > α` or `|∇f| > β` over the sampled window.
///
/// A vertex passes when `|f| > α + ρ(G₁ + ρG₂)` or `|∇f| > β + ρG₂`, where
/// `ρ = h√m/2` and `G₁`, `G₂` bound `|∇f|`, `|∇²f|` on the cells around it;
/// then the dichotomy holds at every point within `ρ` of the vertex.
pub fn stability_certificate(field: &FieldSample, alpha: f64, beta: f64) -> Result<StabilityCertificate> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::InvalidParameter("alpha and beta must be positive".into()));
    }
    let grads = require_gradients(field)?;
    let (g2, bound) = perturbation_bound(field)?;
    let grid = &field.grid;
    let m = grid.dim();
    let h = grid.spacing;
    let reach = 0.5 * h * (m as f64).sqrt();
    let lat = Lattice::new(grid.shape.clone(), grid.periodic);
    let gn: Vec<f64> = (0..lat.len()).map(|i| norm(&grads[i * m..(i + 1) * m])).collect();
    let edge = edge_hessian(field, grads);
    let ratio = alpha / beta;
    let mut margin = f64::INFINITY;
    let mut failures = 0;
    let mut c = vec![0; m];
    for i in 0..lat.len() {
        let f = field.values[i].abs();
        margin = margin.min(f.max(gn[i] * ratio));
        lat.unravel(i, &mut c);
        let (mut g1, mut g2l) = (gn[i], edge[i]);
        lat.neighbors(i, &c, |j| {
            g1 = g1.max(gn[j]);
            g2l = g2l.max(edge[j]);
        });
        let g2l = g2l * HESSIAN_SAFETY;
        let ok = f > alpha + reach * (g1 + reach * g2l) || gn[i] > beta + reach * g2l;
        failures += !ok as usize;
    }
    let incoherent = incoherent_pairs(field, grads);
    Ok(StabilityCertificate {
        alpha,
        beta,
        margin,
        grid_perturbation_bound: bound,
        hessian_bound: g2,
        dichotomy_failures: failures,
        incoherent_pairs: incoherent,
        certified: bound < alpha && failures == 0 && incoherent == 0,
    })
}

/// The certificate with `α = 2 × bound` and `α/β = 2h`.
pub fn default_certificate(field: &FieldSample) -> Result<StabilityCertificate> {
    let (_, bound) = perturbation_bound(field)?;
    let alpha = (2.0 * bound).max(1e-12);
    stability_certificate(field, alpha, alpha / (2.0 * field.grid.spacing))
}

/// Face-adjacent mixed-cell pairs with a non-acute pair of vertex gradients.
fn incoherent_pairs(field: &FieldSample, grads: &[f64]) -> usize {
    let grid = &field.grid;
    let m = grid.dim();
    let sg = match super::sign_grid(field, 0.0) {
        Ok(s) => s,
        Err(_) => return usize::MAX,
    };
    let cells = Lattice::new(grid.cell_shape(), grid.periodic);
    let corners = CellCorners::new(grid);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    let mut c = vec![0; m];
    let mut c2 = vec![0; m];
    let mut bad = 0;
    for i in 0..cells.len() {
        if !sg.mixed[i] {
            continue;
        }
        cells.unravel(i, &mut c);
        corners.fill(&c, &mut a);
        cells.forward_neighbors(i, &c, |j| {
            if !sg.mixed[j] {
                return;
            }
            cells.unravel(j, &mut c2);
            corners.fill(&c2, &mut b);
            let mut verts: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
            verts.sort_unstable();
            verts.dedup();
            let ok = verts.iter().enumerate().all(|(k, &p)| {
                verts[k + 1..].iter().all(|&q| {
                    let d: f64 = (0..m).map(|e| grads[p * m + e] * grads[q * m + e]).sum();
                    d > 0.0
                })
            });
            bad += !ok as usize;
        });
    }
    bad
}

/// `τ̂ = min` over vertices of `max(|f|, |∇f|)`.
pub fn bulinskaya_statistic(field: &FieldSample) -> Result<f64> {
    let grads = require_gradients(field)?;
    let m = field.grid.dim();
    Ok(field
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| v.abs().max(norm(&grads[i * m..(i + 1) * m])))
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn paraboloid(h: f64) -> FieldSample {
        FieldSample::from_fn(Grid::centered(2.0, h, 2).unwrap(), |x| (x[0] * x[0] + x[1] * x[1] - 1.0, vec![2.0 * x[0], 2.0 * x[1]]))
    }

    #[test]
    fn paraboloid_margin() {
        // min over r of max(|r² − 1|, 2r) is attained at r = √2 − 1
        let want = 2.0 * (2f64.sqrt() - 1.0);
        let cert = stability_certificate(&paraboloid(0.01), 1.0, 1.0).unwrap();
        assert!((cert.margin - want).abs() < 0.01, "{}", cert.margin);
        assert!((bulinskaya_statistic(&paraboloid(0.01)).unwrap() - want).abs() < 0.01);
    }

    #[test]
    fn constant_and_degenerate() {
        let g = Grid::centered(1.0, 0.1, 2).unwrap();
        let one = FieldSample::from_fn(g.clone(), |_| (1.0, vec![0.0, 0.0]));
        let cert = stability_certificate(&one, 0.5, 0.5).unwrap();
        assert!(cert.certified);
        assert_eq!(cert.margin, 1.0);
        assert_eq!(bulinskaya_statistic(&one).unwrap(), 1.0);
        let crit = FieldSample::from_fn(g, |x| (x[0] * x[0] + x[1] * x[1], vec![2.0 * x[0], 2.0 * x[1]]));
        assert!(!default_certificate(&crit).unwrap().certified);
        let mut bare = one.clone();
        bare.gradients = None;
        assert!(matches!(default_certificate(&bare), Err(Error::MissingGradients)));
    }

    #[test]
    fn resolved_circle_is_certified() {
        let cert = default_certificate(&paraboloid(0.01)).unwrap();
        assert!(cert.certified, "{cert:?}");
        assert!((cert.hessian_bound - 3.0).abs() < 0.01);
        // two parallel zero lines one cell apart share faces and are rejected
        let g = Grid::centered(1.0, 0.1, 2).unwrap();
        let close = FieldSample::from_fn(g, |x| (x[0] * x[0] - 0.0036, vec![2.0 * x[0], 0.0]));
        let cert = default_certificate(&close).unwrap();
        assert!(cert.incoherent_pairs > 0 && !cert.certified);
    }
}
