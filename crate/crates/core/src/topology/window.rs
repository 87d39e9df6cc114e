use crate::error::{Error, Result};
use crate::spectral::ball_volume;
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};

/// A convex body `S`; its dilate is `S(R) = {x : x/R ∈ S}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexWindow {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// `{x : normals[i]·x ≤ offsets[i]}`, which must be bounded.
    Polytope { normals: Vec<Vec<f64>>, offsets: Vec<f64> },
}

impl ConvexWindow {
    pub fn unit_ball(m: usize) -> Self {
        ConvexWindow::Ball { center: vec![0.0; m], radius: 1.0 }
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let w = ConvexWindow::Ball { center, radius };
        w.validate()?;
        Ok(w)
    }

    pub fn cube(halfwidth: f64, m: usize) -> Self {
        ConvexWindow::Box { lo: vec![-halfwidth; m], hi: vec![halfwidth; m] }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexWindow::Ball { center, .. } => center.len(),
            ConvexWindow::Box { lo, .. } => lo.len(),
            ConvexWindow::Polytope { normals, .. } => normals.first().map_or(0, |n| n.len()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: &str| Err(Error::Window(s.to_string()));
        if self.dim() == 0 {
            return bad("window dimension must be positive");
        }
        match self {
            ConvexWindow::Ball { radius, .. } if !(*radius > 0.0 && radius.is_finite()) => bad("ball radius must be positive"),
            ConvexWindow::Box { lo, hi } if lo.len() != hi.len() || lo.iter().zip(hi).any(|(a, b)| !(a < b)) => {
                bad("box needs lo < hi on every axis")
            }
            ConvexWindow::Polytope { normals, offsets } => {
                let m = self.dim();
                if normals.len() != offsets.len() || normals.iter().any(|n| n.len() != m || n.iter().all(|v| *v == 0.0)) {
                    return bad("polytope needs one nonzero m-vector normal per offset");
                }
                self.polytope_bounds().map(|_| ())
            }
            _ => Ok(()),
        }
    }

    /// Signed distance to the boundary of `S`, positive inside.
    pub fn depth(&self, y: &[f64]) -> f64 {
        match self {
            ConvexWindow::Ball { center, radius } => radius - dist(y, center),
            ConvexWindow::Box { lo, hi } => (0..lo.len()).map(|d| (y[d] - lo[d]).min(hi[d] - y[d])).fold(f64::INFINITY, f64::min),
            ConvexWindow::Polytope { normals, offsets } => normals
                .iter()
                .zip(offsets)
                .map(|(a, b)| (b - dot(a, y)) / dot(a, a).sqrt())
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Depth of `x` inside `S(R)`.
    pub fn depth_scaled(&self, x: &[f64], r: f64) -> f64 {
        let y: Vec<f64> = x.iter().map(|v| v / r).collect();
        r * self.depth(&y)
    }

    pub fn contains(&self, x: &[f64], r: f64) -> bool {
        self.depth_scaled(x, r) > 0.0
    }

    pub fn contains_with_margin(&self, x: &[f64], r: f64, margin: f64) -> bool {
        self.depth_scaled(x, r) > margin
    }

    pub fn contains_origin(&self) -> bool {
        self.depth(&vec![0.0; self.dim()]) > 0.0
    }

    /// True when `B(1) ⊆ S`.
    pub fn contains_unit_ball(&self) -> bool {
        self.depth(&vec![0.0; self.dim()]) >= 1.0 - 1e-12
    }

    /// Bounding box of `S(R)`.
    pub fn bounds(&self, r: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let (lo, hi) = match self {
            ConvexWindow::Ball { center, radius } => {
                (center.iter().map(|c| c - radius).collect(), center.iter().map(|c| c + radius).collect())
            }
            ConvexWindow::Box { lo, hi } => (lo.clone(), hi.clone()),
            ConvexWindow::Polytope { .. } => self.polytope_bounds()?,
        };
        Ok((lo.iter().map(|v| v * r).collect(), hi.iter().map(|v| v * r).collect()))
    }

    fn polytope_bounds(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let ConvexWindow::Polytope { normals, offsets } = self else { unreachable!() };
        let m = self.dim();
        let mut lo = vec![0.0; m];
        let mut hi = vec![0.0; m];
        for d in 0..m {
            for (dir, out) in [(OptimizationDirection::Minimize, &mut lo), (OptimizationDirection::Maximize, &mut hi)] {
                let mut p = Problem::new(dir);
                let vars: Vec<_> = (0..m).map(|k| p.add_var(if k == d { 1.0 } else { 0.0 }, (f64::NEG_INFINITY, f64::INFINITY))).collect();
                for (a, b) in normals.iter().zip(offsets) {
                    let terms: Vec<_> = vars.iter().zip(a).map(|(v, c)| (*v, *c)).collect();
                    p.add_constraint(&terms[..], ComparisonOp::Le, *b);
                }
                match p.solve() {
                    Ok(sol) => out[d] = sol.objective(),
                    Err(minilp::Error::Unbounded) => return Err(Error::Window("polytope is unbounded".into())),
                    Err(minilp::Error::Infeasible) => return Err(Error::Window("polytope is empty".into())),
                }
            }
        }
        Ok((lo, hi))
    }

    /// `vol S(R)`. Polytopes are exact in one and two dimensions and use a
    /// `2^21`-point midpoint lattice otherwise.
    pub fn volume(&self, r: f64) -> Result<f64> {
        let m = self.dim();
        let base = match self {
            ConvexWindow::Ball { radius, .. } => ball_volume(m) * radius.powi(m as i32),
            ConvexWindow::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| b - a).product(),
            ConvexWindow::Polytope { normals, offsets } => {
                let (lo, hi) = self.polytope_bounds()?;
                match m {
                    1 => hi[0] - lo[0],
                    2 => {
                        let mut poly = vec![[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]];
                        for (a, b) in normals.iter().zip(offsets) {
                            poly = clip(&poly, a, *b);
                        }
                        let n = poly.len();
                        (0..n).map(|i| poly[i][0] * poly[(i + 1) % n][1] - poly[(i + 1) % n][0] * poly[i][1]).sum::<f64>().abs() / 2.0
                    }
                    _ => {
                        let per = (2f64.powi(21).powf(1.0 / m as f64)).round() as usize;
                        let cell: f64 = lo.iter().zip(&hi).map(|(a, b)| (b - a) / per as f64).product();
                        let mut y = vec![0.0; m];
                        let mut inside = 0usize;
                        for mut k in 0..per.pow(m as u32) {
                            for d in 0..m {
                                y[d] = lo[d] + (hi[d] - lo[d]) * ((k % per) as f64 + 0.5) / per as f64;
                                k /= per;
                            }
                            inside += (self.depth(&y) > 0.0) as usize;
                        }
                        inside as f64 * cell
                    }
                }
            }
        };
        Ok(base * r.powi(m as i32))
    }
}

/// Sutherland–Hodgman clip of a convex polygon by `a·x ≤ b`.
fn clip(poly: &[[f64; 2]], a: &[f64], b: f64) -> Vec<[f64; 2]> {
    let f = |p: &[f64; 2]| b - a[0] * p[0] - a[1] * p[1];
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        let (fp, fq) = (f(&p), f(&q));
        if fp >= 0.0 {
            out.push(p);
        }
        if (fp >= 0.0) != (fq >= 0.0) {
            let t = fp / (fp - fq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond() -> ConvexWindow {
        ConvexWindow::Polytope {
            normals: vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]],
            offsets: vec![1.0; 4],
        }
    }

    #[test]
    fn volumes() {
        assert!((ConvexWindow::unit_ball(2).volume(3.0).unwrap() - 9.0 * std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(ConvexWindow::cube(1.0, 3).volume(2.0).unwrap(), 64.0);
        assert!((diamond().volume(2.0).unwrap() - 8.0).abs() < 1e-12);
        let oct = ConvexWindow::Polytope {
            normals: (0..8).map(|s| vec![if s & 1 == 0 { 1.0 } else { -1.0 }, if s & 2 == 0 { 1.0 } else { -1.0 }, if s & 4 == 0 { 1.0 } else { -1.0 }]).collect(),
            offsets: vec![1.0; 8],
        };
        assert!((oct.volume(1.0).unwrap() - 4.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn membership_scales() {
        let s = ConvexWindow::cube(1.0, 2);
        assert!(s.contains(&[2.9, -2.9], 3.0));
        assert!(!s.contains(&[3.1, 0.0], 3.0));
        assert!(s.contains_with_margin(&[2.0, 0.0], 3.0, 0.9));
        assert!(!s.contains_with_margin(&[2.0, 0.0], 3.0, 1.1));
        assert!(diamond().contains_origin() && !diamond().contains_unit_ball());
        assert!(ConvexWindow::cube(1.0, 2).contains_unit_ball());
    }

    #[test]
    fn unbounded_polytope_rejected() {
        let p = ConvexWindow::Polytope { normals: vec![vec![1.0, 0.0]], offsets: vec![1.0] };
        assert!(matches!(p.validate(), Err(Error::Window(_))));
        assert_eq!(diamond().bounds(2.0).unwrap(), (vec![-2.0, -2.0], vec![2.0, 2.0]));
    }
}
