//! Spectral measures, their covariance kernels, and the four spectral
//! conditions under which translation-invariant fields have a positive
//! nodal-component intensity.
//!
//! Kernels follow the convention `k(x) = ∫ e^{2πi x·λ} dρ(λ) / ρ(R^m)`.

pub mod bessel;
mod conditions;
mod measure;
mod rho4;

pub use conditions::{check_rho1, check_rho2, check_rho3, pivoted_rank, MomentMatrix, Rho1Report, Rho2Verdict, RANK_TOL};
pub use measure::{ball_volume, spectral_sigma, sphere_area, MeasureConfig, SpectralMeasure};
pub use rho4::{
    barrier_search, check_rho4_interior_point, check_rho4_quadratic, BarrierDomain, Rho4Certificate, Rho4Verdict,
    Rho4Witness, LP_SLACK,
};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Normalized covariance `k(x)`.
pub fn covariance_from_spectrum(rho: &SpectralMeasure, x: &[f64]) -> Result<f64> {
    rho.kernel(x)
}

/// `∂^α k(x)` for `|α| ≤ 2`, given as a multi-index of length `m`.
pub fn kernel_derivative(rho: &SpectralMeasure, x: &[f64], alpha: &[usize]) -> Result<f64> {
    let m = rho.dim();
    if alpha.len() != m {
        return Err(Error::InvalidParameter(format!("multi-index has length {}, expected {m}", alpha.len())));
    }
    let order: usize = alpha.iter().sum();
    if order > 2 {
        return Err(Error::UnsupportedOrder(order));
    }
    if order == 0 {
        return rho.kernel(x);
    }
    let (_, g, h) = rho.kernel_derivatives(x)?;
    let idx: Vec<usize> = alpha.iter().enumerate().flat_map(|(i, &a)| std::iter::repeat(i).take(a)).collect();
    Ok(match idx.as_slice() {
        [i] => g[*i],
        [i, j] => h[i * m + j],
        _ => unreachable!(),
    })
}

/// Search parameters for the barrier fallback of [`check_spectrum`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BarrierParams {
    pub max_radius: f64,
    pub grid_step: f64,
}

impl BarrierParams {
    /// Two "wavelengths" `1/sqrt(E|λ|²)` with 40 steps per radius.
    pub fn natural(rho: &SpectralMeasure) -> Result<Self> {
        let m = rho.dim();
        let mm = rho.second_moments()?;
        let tr: f64 = (0..m).map(|i| mm[i * m + i]).sum();
        let max_radius = if tr > 0.0 { 2.0 / tr.sqrt() } else { 1.0 };
        Ok(BarrierParams { max_radius, grid_step: max_radius / 40.0 })
    }
}

/// All four conditions for one measure.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub rho1: Rho1Report,
    pub rho2: Rho2Verdict,
    pub rho3: MomentMatrix,
    pub rho4: Rho4Certificate,
}

impl SpectrumReport {
    /// Conditions (ρ1)–(ρ3) all hold; (ρ4) is informational.
    pub fn required_pass(&self) -> bool {
        self.rho1.pass && self.rho2 == Rho2Verdict::NoAtoms && self.rho3.pass
    }
}

/// Run the moment, atom and hyperplane checks, then the barrier criteria in
/// order: interior point, quadratic span, barrier search with `μ = ρ`.
pub fn check_spectrum(rho: &SpectralMeasure, sample_size: Option<usize>, barrier: Option<BarrierParams>) -> Result<SpectrumReport> {
    let rho1 = check_rho1(rho)?;
    let rho2 = check_rho2(rho);
    let rho3 = check_rho3(rho)?;
    let pts = rho.support_sample(sample_size.unwrap_or(64 * rho.dim()));
    let mut rho4 = check_rho4_interior_point(&pts);
    if !rho4.satisfied() {
        rho4 = check_rho4_quadratic(&pts);
    }
    if !rho4.satisfied() {
        let b = match barrier {
            Some(b) => b,
            None => BarrierParams::natural(rho)?,
        };
        rho4 = barrier_search(rho, b.max_radius, b.grid_step)?;
    }
    Ok(SpectrumReport { rho1, rho2, rho3, rho4 })
}
