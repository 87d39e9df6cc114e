//! Triangulated meshes of the unit sphere `S^2`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A closed triangulated surface with vertices on the unit sphere.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SphereMesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
    /// Set when built by [`SphereMesh::lat_long`]: `(n_theta, n_phi)`.
    #[serde(default)]
    pub lat_long: Option<(usize, usize)>,
}

impl SphereMesh {
    /// Validate an arbitrary mesh: indices in range, distinct corners, no
    /// zero-area faces, every vertex on the unit sphere.
    pub fn new(vertices: Vec<[f64; 3]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let m = SphereMesh { vertices, triangles, lat_long: None };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for v in &self.vertices {
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if (r - 1.0).abs() > 1e-9 {
                return Err(Error::DegenerateMesh(format!("vertex {v:?} is not on the unit sphere")));
            }
        }
        for t in &self.triangles {
            if t.iter().any(|&i| i >= self.vertices.len()) || t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::DegenerateMesh(format!("bad triangle {t:?}")));
            }
            let [a, b, c] = t.map(|i| self.vertices[i]);
            let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            let w = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
            let cr = [u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]];
            if (cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]).sqrt() < 1e-14 {
                return Err(Error::DegenerateMesh(format!("zero-area triangle {t:?}")));
            }
        }
        Ok(())
    }

    /// Latitude–longitude mesh: poles plus `n_theta - 1` rings of `n_phi`
    /// vertices at `θ_i = iπ/n_theta`, `φ_k = 2πk/n_phi`. Vertex 0 is the
    /// north pole, the last vertex the south pole; ring `i` vertex `k` has
    /// index `1 + (i-1) n_phi + k`.
    pub fn lat_long(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 2 || n_phi < 3 {
            return Err(Error::DegenerateMesh("lat-long mesh needs n_theta ≥ 2 and n_phi ≥ 3".into()));
        }
        let mut vertices = vec![[0.0, 0.0, 1.0]];
        for i in 1..n_theta {
            let (st, ct) = (PI * i as f64 / n_theta as f64).sin_cos();
            for k in 0..n_phi {
                let (sp, cp) = (2.0 * PI * k as f64 / n_phi as f64).sin_cos();
                vertices.push([st * cp, st * sp, ct]);
            }
        }
        vertices.push([0.0, 0.0, -1.0]);
        let south = vertices.len() - 1;
        let ring = |i: usize, k: usize| 1 + (i - 1) * n_phi + k % n_phi;
        let mut triangles = Vec::new();
        for k in 0..n_phi {
            triangles.push([0, ring(1, k), ring(1, k + 1)]);
            triangles.push([south, ring(n_theta - 1, k + 1), ring(n_theta - 1, k)]);
        }
        for i in 1..n_theta - 1 {
            for k in 0..n_phi {
                let (a, b, c, d) = (ring(i, k), ring(i, k + 1), ring(i + 1, k), ring(i + 1, k + 1));
                triangles.push([a, c, d]);
                triangles.push([a, d, b]);
            }
        }
        Ok(SphereMesh { vertices, triangles, lat_long: Some((n_theta, n_phi)) })
    }

    /// Resolution `n_theta = ⌈π / spacing⌉`, `n_phi = 2 n_theta`, so that
    /// ring spacing and equatorial spacing are at most `spacing`.
    pub fn lat_long_with_spacing(spacing: f64) -> Result<Self> {
        let n_theta = (PI / spacing).ceil().max(2.0) as usize;
        Self::lat_long(n_theta, 2 * n_theta)
    }

    /// Undirected edges of the triangulation, each listed once.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    /// Longest chord length over all edges.
    pub fn max_edge_length(&self) -> f64 {
        self.edges()
            .iter()
            .map(|&(a, b)| {
                let (p, q) = (self.vertices[a], self.vertices[b]);
                ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lat_long_is_a_sphere_triangulation() {
        let m = SphereMesh::lat_long(6, 12).unwrap();
        m.validate().unwrap();
        let (v, e, f) = (m.vertices.len() as i64, m.edges().len() as i64, m.triangles.len() as i64);
        assert_eq!(v - e + f, 2, "Euler characteristic");
    }

    #[test]
    fn degenerate_faces_rejected() {
        let v = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(SphereMesh::new(v.clone(), vec![[0, 1, 1]]).is_err());
        assert!(SphereMesh::new(v.clone(), vec![[0, 1, 7]]).is_err());
        assert!(SphereMesh::new(v, vec![[0, 1, 2]]).is_ok());
    }
}
