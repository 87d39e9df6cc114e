use super::SpectralMeasure;
use crate::error::Result;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

/// Relative tolerance for eigenvalue and rank decisions.
pub const RANK_TOL: f64 = 1e-9;

/// Outcome of the moment condition: the normalized fourth moment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Rho1Report {
    pub fourth_moment: f64,
    pub pass: bool,
}

/// `∫ |λ|^4 dρ / ρ(R^m)`; fails only when the quadrature does.
pub fn check_rho1(rho: &SpectralMeasure) -> Result<Rho1Report> {
    let m = rho.dim();
    let t = rho.fourth_moments()?;
    let s: f64 = (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| t[((i * m + i) * m + j) * m + j]).sum();
    Ok(Rho1Report { fourth_moment: s, pass: s.is_finite() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Rho2Verdict {
    NoAtoms,
    HasAtoms { atoms: Vec<Vec<f64>> },
}

/// Atoms are declared by the measure kind, not detected statistically.
pub fn check_rho2(rho: &SpectralMeasure) -> Rho2Verdict {
    let atoms = rho.declared_atoms();
    if atoms.is_empty() {
        Rho2Verdict::NoAtoms
    } else {
        Rho2Verdict::HasAtoms { atoms: atoms.into_iter().map(|a| a.0).collect() }
    }
}

/// Normalized second-moment matrix and its smallest eigenvalue.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentMatrix {
    pub dim: usize,
    /// Row-major entries `∫ λ_i λ_j dρ / ρ(R^m)`.
    pub entries: Vec<f64>,
    pub min_eigenvalue: f64,
    pub pass: bool,
}

impl MomentMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }
}

pub fn check_rho3(rho: &SpectralMeasure) -> Result<MomentMatrix> {
    let m = rho.dim();
    let entries = rho.second_moments()?;
    let eig = SymmetricEigen::new(DMatrix::from_row_slice(m, m, &entries));
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = entries.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(MomentMatrix { dim: m, pass: min_eigenvalue > RANK_TOL * scale, min_eigenvalue, entries })
}

/// Rank of a row-major `rows×cols` matrix by full-pivot elimination with
/// tolerance relative to the largest entry.
pub fn pivoted_rank(mut a: Vec<f64>, rows: usize, cols: usize) -> usize {
    let scale = a.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let tol = RANK_TOL * scale;
    let mut rank = 0;
    let mut col_perm: Vec<usize> = (0..cols).collect();
    for k in 0..rows.min(cols) {
        let (mut pr, mut pc, mut best) = (k, k, 0.0);
        for r in k..rows {
            for c in k..cols {
                let v = a[r * cols + col_perm[c]].abs();
                if v > best {
                    best = v;
                    pr = r;
                    pc = c;
                }
            }
        }
        if best <= tol {
            break;
        }
        for c in 0..cols {
            a.swap(k * cols + c, pr * cols + c);
        }
        col_perm.swap(k, pc);
        let piv = a[k * cols + col_perm[k]];
        for r in k + 1..rows {
            let f = a[r * cols + col_perm[k]] / piv;
            if f != 0.0 {
                for c in k..cols {
                    let v = a[k * cols + col_perm[c]];
                    a[r * cols + col_perm[c]] -= f * v;
                }
            }
        }
        rank += 1;
    }
    rank
}
