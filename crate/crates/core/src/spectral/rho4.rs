//! Sufficient criteria for the barrier condition.

use super::conditions::{pivoted_rank, RANK_TOL};
use super::SpectralMeasure;
use crate::error::Result;
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Strict-slack tolerance of the interior-point linear program.
pub const LP_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rho4Verdict {
    SatisfiedByInteriorPoint,
    SatisfiedByQuadraticSpan,
    SatisfiedByBarrier,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Rho4Witness {
    /// A support point inside the hull and the LP slack achieved for it.
    InteriorPoint { point: Vec<f64>, slack: f64 },
    QuadraticSpan { rank: usize },
    /// Coefficients `(c, a_ij for i ≤ j)` of a quadric `c + Σ a_ij λ_i λ_j = 0`
    /// containing every sample point.
    Variety { coefficients: Vec<f64> },
    Barrier {
        domain: BarrierDomain,
        /// `min(center value, -max boundary value)`.
        margin: f64,
        boundary_max: f64,
        center_value: f64,
    },
    /// Range of the transform over the searched region.
    Profile { min: f64, max: f64 },
    None { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum BarrierDomain {
    Ball { radius: f64 },
    /// Component of `{𝓕μ > -level}` containing the origin, on a grid.
    LevelSet { level: f64, grid_step: f64, points: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rho4Certificate {
    pub verdict: Rho4Verdict,
    pub witness: Rho4Witness,
}

impl Rho4Certificate {
    pub fn satisfied(&self) -> bool {
        self.verdict != Rho4Verdict::Inconclusive
    }

    fn inconclusive(witness: Rho4Witness) -> Self {
        Rho4Certificate { verdict: Rho4Verdict::Inconclusive, witness }
    }
}

fn affine_rank(points: &[Vec<f64>]) -> usize {
    let m = points[0].len();
    let p0 = &points[0];
    let rows: Vec<f64> = points[1..].iter().flat_map(|p| p.iter().zip(p0).map(|(a, b)| a - b)).collect();
    pivoted_rank(rows, points.len() - 1, m)
}

/// A support point strictly inside the convex hull of the sample.
pub fn check_rho4_interior_point(points: &[Vec<f64>]) -> Rho4Certificate {
    let none = |r: &str| Rho4Certificate::inconclusive(Rho4Witness::None { reason: r.into() });
    if points.is_empty() {
        return none("empty support sample");
    }
    let m = points[0].len();
    if let Some(z) = points.iter().find(|p| p.iter().all(|&v| v == 0.0)) {
        return Rho4Certificate {
            verdict: Rho4Verdict::SatisfiedByInteriorPoint,
            witness: Rho4Witness::InteriorPoint { point: z.clone(), slack: f64::INFINITY },
        };
    }
    if points.len() < m + 1 || affine_rank(points) < m {
        return none("fewer than m+1 affinely independent points");
    }
    for cand in points {
        let slack = hull_slack(points, cand);
        if slack > LP_SLACK {
            return Rho4Certificate {
                verdict: Rho4Verdict::SatisfiedByInteriorPoint,
                witness: Rho4Witness::InteriorPoint { point: cand.clone(), slack },
            };
        }
    }
    none("every sample point is extreme in the hull")
}

/// `max t` such that `p = Σ w_i q_i`, `Σ w_i = 1`, `w_i ≥ t`. Positive iff `p`
/// is in the relative interior of the hull.
fn hull_slack(points: &[Vec<f64>], p: &[f64]) -> f64 {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let t = lp.add_var(1.0, (-1.0, 1.0));
    let w: Vec<_> = points.iter().map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    for d in 0..p.len() {
        let row: Vec<_> = w.iter().zip(points).map(|(&v, q)| (v, q[d])).collect();
        lp.add_constraint(&row, ComparisonOp::Eq, p[d]);
    }
    let ones: Vec<_> = w.iter().map(|&v| (v, 1.0)).collect();
    lp.add_constraint(&ones, ComparisonOp::Eq, 1.0);
    for &v in &w {
        lp.add_constraint(&[(v, 1.0), (t, -1.0)], ComparisonOp::Ge, 0.0);
    }
    match lp.solve() {
        Ok(sol) => sol[t],
        Err(_) => f64::NEG_INFINITY,
    }
}

fn quadratic_features(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut v = vec![1.0];
    for i in 0..m {
        for j in i..m {
            v.push(p[i] * p[j]);
        }
    }
    v
}

/// The sample is not contained in any quadric `Aλ·λ = b`.
pub fn check_rho4_quadratic(points: &[Vec<f64>]) -> Rho4Certificate {
    if points.is_empty() {
        return Rho4Certificate::inconclusive(Rho4Witness::None { reason: "empty support sample".into() });
    }
    let m = points[0].len();
    let d = 1 + m * (m + 1) / 2;
    let rows: Vec<f64> = points.iter().flat_map(|p| quadratic_features(p)).collect();
    let rank = pivoted_rank(rows.clone(), points.len(), d);
    if rank == d {
        return Rho4Certificate { verdict: Rho4Verdict::SatisfiedByQuadraticSpan, witness: Rho4Witness::QuadraticSpan { rank } };
    }
    // null vector: right singular vector of the smallest singular value
    let n = points.len().max(d);
    let mut a = DMatrix::<f64>::zeros(n, d);
    for (r, p) in points.iter().enumerate() {
        for (c, v) in quadratic_features(p).into_iter().enumerate() {
            a[(r, c)] = v;
        }
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let k = (0..d).min_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j])).unwrap();
    let mut coef: Vec<f64> = vt.row(k).iter().copied().collect();
    let big = coef.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let lead = coef[1..].iter().copied().find(|v| v.abs() > RANK_TOL * big).unwrap_or(coef[0]);
    let s = lead.abs() * lead.signum();
    coef.iter_mut().for_each(|v| {
        *v /= s;
        if v.abs() < 1e-12 {
            *v = 0.0;
        }
    });
    Rho4Certificate::inconclusive(Rho4Witness::Variety { coefficients: coef })
}

fn directions(m: usize) -> Vec<Vec<f64>> {
    let probe = SpectralMeasure::sphere(1.0, m).expect("unit sphere");
    probe.support_sample(256)
}

/// Search for a domain `D ∋ 0` with `𝓕μ < 0` on `∂D` and `𝓕μ(0) > 0`:
/// first over balls, then over super-level sets on a Cartesian grid.
pub fn barrier_search(mu: &SpectralMeasure, max_radius: f64, grid_step: f64) -> Result<Rho4Certificate> {
    let m = mu.dim();
    let center = mu.kernel(&vec![0.0; m])?;
    let (mut lo, mut hi) = (center, center);
    let dirs = directions(m);
    let mut best: Option<(f64, f64)> = None;
    let steps = (max_radius / grid_step + 1e-9).floor() as usize;
    for k in 1..=steps {
        let r = k as f64 * grid_step;
        let mut bmax = f64::NEG_INFINITY;
        for d in &dirs {
            let x: Vec<f64> = d.iter().map(|v| v * r).collect();
            let v = mu.kernel(&x)?;
            bmax = bmax.max(v);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let margin = center.min(-bmax);
        if margin > 0.0 && best.map_or(true, |(_, bm)| margin > center.min(-bm)) {
            best = Some((r, bmax));
        }
    }
    if let Some((radius, boundary_max)) = best {
        return Ok(Rho4Certificate {
            verdict: Rho4Verdict::SatisfiedByBarrier,
            witness: Rho4Witness::Barrier {
                domain: BarrierDomain::Ball { radius },
                margin: center.min(-boundary_max),
                boundary_max,
                center_value: center,
            },
        });
    }
    if m <= 3 && center > 0.0 {
        if let Some(c) = level_set_barrier(mu, max_radius, grid_step, center)? {
            return Ok(c);
        }
    }
    Ok(Rho4Certificate::inconclusive(Rho4Witness::Profile { min: lo, max: hi }))
}

fn level_set_barrier(mu: &SpectralMeasure, max_radius: f64, step: f64, center: f64) -> Result<Option<Rho4Certificate>> {
    let m = mu.dim();
    let k = (max_radius / step).floor() as usize;
    let side = 2 * k + 1;
    let total = side.pow(m as u32);
    let mut vals = vec![0.0; total];
    let unravel = |mut i: usize| {
        let mut c = vec![0usize; m];
        for d in (0..m).rev() {
            c[d] = i % side;
            i /= side;
        }
        c
    };
    for (i, v) in vals.iter_mut().enumerate() {
        let x: Vec<f64> = unravel(i).iter().map(|&c| (c as f64 - k as f64) * step).collect();
        *v = mu.kernel(&x)?;
    }
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if min >= 0.0 {
        return Ok(None);
    }
    let origin = (0..m).fold(0, |acc, _| acc * side + k);
    let mut best: Option<Rho4Certificate> = None;
    for q in 1..=20 {
        let level = -min * q as f64 / 21.0;
        // flood fill {v > -level} from the origin; fail if it reaches the edge
        let mut seen = vec![false; total];
        let mut queue = VecDeque::from([origin]);
        seen[origin] = true;
        let (mut count, mut bmax, mut escaped) = (0usize, f64::NEG_INFINITY, false);
        while let Some(i) = queue.pop_front() {
            count += 1;
            let c = unravel(i);
            for d in 0..m {
                for s in [-1i64, 1] {
                    let nc = c[d] as i64 + s;
                    if nc < 0 || nc >= side as i64 {
                        escaped = true;
                        continue;
                    }
                    let stride = side.pow((m - 1 - d) as u32);
                    let j = if s > 0 { i + stride } else { i - stride };
                    if seen[j] {
                        continue;
                    }
                    if vals[j] > -level {
                        seen[j] = true;
                        queue.push_back(j);
                    } else {
                        bmax = bmax.max(vals[j]);
                    }
                }
            }
        }
        if escaped || bmax >= 0.0 {
            continue;
        }
        let margin = center.min(-bmax);
        let better = match &best {
            Some(Rho4Certificate { witness: Rho4Witness::Barrier { margin: bm, .. }, .. }) => margin > *bm,
            _ => true,
        };
        if better {
            best = Some(Rho4Certificate {
                verdict: Rho4Verdict::SatisfiedByBarrier,
                witness: Rho4Witness::Barrier {
                    domain: BarrierDomain::LevelSet { level, grid_step: step, points: count },
                    margin,
                    boundary_max: bmax,
                    center_value: center,
                },
            });
        }
    }
    Ok(best)
}
