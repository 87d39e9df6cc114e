//! Uniform lattices in `R^m` (or on the flat torus).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A uniform lattice `origin + spacing · i`, `0 ≤ i_d < shape[d]`, stored
/// row-major with the first axis slowest. A periodic grid wraps each axis,
/// so it has as many cells as vertices per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub origin: Vec<f64>,
    pub spacing: f64,
    pub shape: Vec<usize>,
    #[serde(default)]
    pub periodic: bool,
}

impl Grid {
    pub fn new(origin: Vec<f64>, spacing: f64, shape: Vec<usize>) -> Result<Self> {
        Self::build(origin, spacing, shape, false)
    }

    fn build(origin: Vec<f64>, spacing: f64, shape: Vec<usize>, periodic: bool) -> Result<Self> {
        if origin.is_empty() || origin.len() != shape.len() {
            return Err(Error::InvalidParameter("grid origin and shape must have the same positive length".into()));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidParameter(format!("grid spacing must be positive, got {spacing}")));
        }
        if shape.iter().any(|&n| n < 2) {
            return Err(Error::InvalidParameter("each grid axis needs at least two points".into()));
        }
        Ok(Grid { origin, spacing, shape, periodic })
    }

    /// The torus `[0, period)^m` with `n` points per axis.
    pub fn torus(n: usize, m: usize, period: f64) -> Result<Self> {
        Self::build(vec![0.0; m], period / n as f64, vec![n; m], true)
    }

    /// Smallest grid with the origin as a vertex covering `[-halfwidth, halfwidth]^m`.
    pub fn centered(halfwidth: f64, spacing: f64, m: usize) -> Result<Self> {
        let k = (halfwidth / spacing - 1e-9).ceil().max(1.0) as usize;
        Self::build(vec![-(k as f64) * spacing; m], spacing, vec![2 * k + 1; m], false)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major strides of the vertex array.
    pub fn strides(&self) -> Vec<usize> {
        let m = self.dim();
        let mut s = vec![1; m];
        for d in (0..m - 1).rev() {
            s[d] = s[d + 1] * self.shape[d + 1];
        }
        s
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + self.spacing * i as f64
    }

    /// Coordinates along one axis.
    pub fn axis(&self, axis: usize) -> Vec<f64> {
        (0..self.shape[axis]).map(|i| self.coord(axis, i)).collect()
    }

    pub fn unravel(&self, mut idx: usize) -> Vec<usize> {
        let mut c = vec![0; self.dim()];
        for d in (0..self.dim()).rev() {
            c[d] = idx % self.shape[d];
            idx /= self.shape[d];
        }
        c
    }

    pub fn ravel(&self, c: &[usize]) -> usize {
        c.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.unravel(idx).iter().enumerate().map(|(d, &i)| self.coord(d, i)).collect()
    }

    /// Number of cells along each axis.
    pub fn cell_shape(&self) -> Vec<usize> {
        self.shape.iter().map(|&n| if self.periodic { n } else { n - 1 }).collect()
    }

    pub fn cell_count(&self) -> usize {
        self.cell_shape().iter().product()
    }

    /// Center of the cell with lower corner at lattice index `c`.
    pub fn cell_center(&self, c: &[usize]) -> Vec<f64> {
        c.iter().enumerate().map(|(d, &i)| self.origin[d] + self.spacing * (i as f64 + 0.5)).collect()
    }

    /// Lower and upper corners of the covered box.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let hi = (0..self.dim())
            .map(|d| {
                let n = if self.periodic { self.shape[d] } else { self.shape[d] - 1 };
                self.origin[d] + self.spacing * n as f64
            })
            .collect();
        (self.origin.clone(), hi)
    }

    /// The nested grid with half the spacing: vertex `i` becomes vertex `2i`.
    pub fn refined(&self) -> Grid {
        let shape = self.shape.iter().map(|&n| if self.periodic { 2 * n } else { 2 * n - 1 }).collect();
        Grid { origin: self.origin.clone(), spacing: 0.5 * self.spacing, shape, periodic: self.periodic }
    }

    /// True when the closed ball `B̄(x, r)` lies in the interior of the box.
    pub fn contains_ball(&self, x: &[f64], r: f64) -> bool {
        let (lo, hi) = self.bounds();
        x.iter().enumerate().all(|(d, &v)| v - r > lo[d] && v + r < hi[d])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ravel_round_trip() {
        let g = Grid::new(vec![0.0, 1.0, -1.0], 0.5, vec![3, 4, 5]).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.ravel(&g.unravel(i)), i);
        }
        assert_eq!(g.strides(), vec![20, 5, 1]);
        assert_eq!(g.point(g.ravel(&[1, 2, 3])), vec![0.5, 2.0, 0.5]);
    }

    #[test]
    fn centered_grid_contains_origin() {
        let g = Grid::centered(1.0, 0.3, 2).unwrap();
        assert_eq!(g.shape, vec![9, 9]);
        let p = g.point(g.ravel(&[4, 4]));
        assert!(p.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn refinement_nests() {
        let g = Grid::new(vec![0.0, 0.0], 1.0, vec![3, 5]).unwrap();
        let f = g.refined();
        assert_eq!(f.shape, vec![5, 9]);
        assert_eq!(f.point(f.ravel(&[4, 6])), g.point(g.ravel(&[2, 3])));
        let t = Grid::torus(8, 2, 1.0).unwrap();
        assert_eq!(t.refined().shape, vec![16, 16]);
        assert_eq!(t.cell_count(), 64);
    }
}
