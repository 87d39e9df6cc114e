use crate::ensembles::FieldSample;
use crate::error::{Error, Result};
use crate::grid::Grid;
use serde::{Deserialize, Serialize};

/// A row-major index space with optional wrap-around on every axis.
#[derive(Clone, Debug)]
pub(crate) struct Lattice {
    pub shape: Vec<usize>,
    pub strides: Vec<usize>,
    pub periodic: bool,
}

impl Lattice {
    pub fn new(shape: Vec<usize>, periodic: bool) -> Self {
        let m = shape.len();
        let mut strides = vec![1; m];
        for d in (0..m.saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * shape[d + 1];
        }
        Lattice { shape, strides, periodic }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn unravel(&self, mut idx: usize, out: &mut [usize]) {
        for d in (0..self.shape.len()).rev() {
            out[d] = idx % self.shape[d];
            idx /= self.shape[d];
        }
    }

    /// Neighbours one step forward along each axis.
    pub fn forward_neighbors(&self, idx: usize, c: &[usize], mut f: impl FnMut(usize)) {
        for d in 0..self.shape.len() {
            if c[d] + 1 < self.shape[d] {
                f(idx + self.strides[d]);
            } else if self.periodic {
                f(idx + self.strides[d] - self.shape[d] * self.strides[d]);
            }
        }
    }

    /// All face neighbours.
    pub fn neighbors(&self, idx: usize, c: &[usize], mut f: impl FnMut(usize)) {
        for d in 0..self.shape.len() {
            let (n, s) = (self.shape[d], self.strides[d]);
            if c[d] + 1 < n {
                f(idx + s);
            } else if self.periodic {
                f(idx + s - n * s);
            }
            if c[d] > 0 {
                f(idx - s);
            } else if self.periodic {
                f(idx + (n - 1) * s);
            }
        }
    }

    pub fn on_boundary(&self, c: &[usize]) -> bool {
        !self.periodic && c.iter().zip(&self.shape).any(|(&i, &n)| i == 0 || i + 1 == n)
    }
}

/// Vertex signs of a sampled field and the cells they make mixed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SignGrid {
    pub grid: Grid,
    /// `+1`, `-1`, or `0` for `|f| ≤ zero_tolerance`.
    pub signs: Vec<i8>,
    /// Per cell (indexed by [`Grid::cell_shape`]): has a `+` and a `−`
    /// vertex, with zeros counting as both.
    pub mixed: Vec<bool>,
    pub zero_tolerance: f64,
}

pub fn sign_grid(field: &FieldSample, zero_tolerance: f64) -> Result<SignGrid> {
    if field.values.len() != field.grid.len() {
        return Err(Error::InvalidParameter("value count does not match the grid".into()));
    }
    if let Some(bad) = field.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite field value at vertex {bad}")));
    }
    let signs: Vec<i8> = field
        .values
        .iter()
        .map(|&v| if v.abs() <= zero_tolerance { 0 } else if v > 0.0 { 1 } else { -1 })
        .collect();
    let grid = field.grid.clone();
    let cells = Lattice::new(grid.cell_shape(), grid.periodic);
    let corners = CellCorners::new(&grid);
    let mut mixed = vec![false; cells.len()];
    let mut c = vec![0; grid.dim()];
    let mut buf = Vec::with_capacity(1 << grid.dim());
    for (ci, slot) in mixed.iter_mut().enumerate() {
        cells.unravel(ci, &mut c);
        corners.fill(&c, &mut buf);
        let (mut pos, mut neg) = (false, false);
        for &v in &buf {
            match signs[v] {
                1 => pos = true,
                -1 => neg = true,
                _ => {
                    pos = true;
                    neg = true;
                }
            }
        }
        *slot = pos && neg;
    }
    Ok(SignGrid { grid, signs, mixed, zero_tolerance })
}

impl SignGrid {
    pub fn mixed_cells(&self) -> Vec<usize> {
        self.mixed.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }

    pub fn mixed_fraction(&self) -> f64 {
        self.mixed.iter().filter(|&&b| b).count() as f64 / self.mixed.len() as f64
    }
}

/// Vertex indices of the `2^m` corners of a cell.
#[derive(Clone, Debug)]
pub(crate) struct CellCorners {
    shape: Vec<usize>,
    strides: Vec<usize>,
    periodic: bool,
}

impl CellCorners {
    pub fn new(grid: &Grid) -> Self {
        CellCorners { shape: grid.shape.clone(), strides: grid.strides(), periodic: grid.periodic }
    }

    pub fn fill(&self, cell: &[usize], out: &mut Vec<usize>) {
        let m = self.shape.len();
        out.clear();
        for bits in 0..1usize << m {
            let mut idx = 0;
            for d in 0..m {
                let mut i = cell[d] + ((bits >> (m - 1 - d)) & 1);
                if self.periodic && i == self.shape[d] {
                    i = 0;
                }
                idx += i * self.strides[d];
            }
            out.push(idx);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_has_no_mixed_cells() {
        let g = Grid::new(vec![0.0, 0.0], 0.1, vec![5, 5]).unwrap();
        let s = sign_grid(&FieldSample::from_fn(g, |_| (1.0, vec![0.0, 0.0])), 0.0).unwrap();
        assert!(s.mixed_cells().is_empty());
    }

    #[test]
    fn linear_field_mixed_around_zero() {
        let g = Grid::new(vec![-1.0], 0.25, vec![9]).unwrap();
        let s = sign_grid(&FieldSample::from_fn(g.clone(), |x| (x[0], vec![1.0])), 0.0).unwrap();
        assert_eq!(s.signs[4], 0);
        assert_eq!(s.mixed_cells(), vec![3, 4]);
        let shifted = sign_grid(&FieldSample::from_fn(g, |x| (x[0] - 0.1, vec![1.0])), 0.0).unwrap();
        assert_eq!(shifted.mixed_cells(), vec![4]);
    }

    #[test]
    fn periodic_cells_wrap() {
        let g = Grid::torus(4, 1, 1.0).unwrap();
        let s = sign_grid(&FieldSample::from_fn(g, |x| (if x[0] < 0.6 { 1.0 } else { -1.0 }, vec![0.0])), 0.0).unwrap();
        // vertices + + + −: cells [2,3] and the wrapping [3,0] change sign
        assert_eq!(s.mixed_cells(), vec![2, 3]);
    }
}
