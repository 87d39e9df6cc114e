//! Monte Carlo estimation of the component intensity `ν` and the scaling
//! experiments built on it.
//!
//! Every sample `i` of a run with master seed `s` is drawn from the streams
//! keyed by `(s, i)`, so results do not depend on scheduling; samples are
//! processed in parallel on the current rayon pool and reduced in order.

mod audit;
mod nu;
mod scaling;

pub use audit::{
    refinement_audit, sandwich_audit, RefinementAudit, RefinementAuditConfig, RefinementSample, SandwichAudit, SandwichAuditConfig,
    SandwichAuditRow,
};

pub use nu::{ergodic_average, estimate_nu, CensusStatistics, ErgodicAverage, NuConfig, NuEstimate, SampleSummary, TracePoint};
pub use scaling::{
    det_scaling_test, double_scaling, total_count_kostlan, DetScalingConfig, DetScalingResult, DoubleScalingCell,
    DoubleScalingConfig, DoubleScalingEstimate, KostlanTotalConfig, KostlanTotalRow, KostlanTotals,
};

use crate::ensembles::EnsembleSpec;
use crate::error::{Error, Result};
use crate::spectral::{check_rho1, check_rho2, check_rho3, Rho2Verdict};
use serde::{Deserialize, Serialize};

/// Sample mean and its standard error.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl MeanSe {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return MeanSe { mean: f64::NAN, stderr: f64::NAN, n };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 / n as f64).sqrt()
        } else {
            f64::NAN
        };
        MeanSe { mean, stderr, n }
    }
}

/// Refuse stationary ensembles failing the moment or hyperplane conditions;
/// atoms only produce a warning.
pub(crate) fn admissibility(spec: &EnsembleSpec) -> Result<Vec<String>> {
    spec.validate()?;
    let mut warnings = Vec::new();
    if let EnsembleSpec::Stationary { measure, .. } = spec {
        let r1 = check_rho1(measure)?;
        if !r1.pass {
            return Err(Error::ConditionFailed { condition: "rho1", reason: format!("fourth moment {} is not finite", r1.fourth_moment) });
        }
        let r3 = check_rho3(measure)?;
        if !r3.pass {
            return Err(Error::ConditionFailed {
                condition: "rho3",
                reason: format!("spectral measure lies on a hyperplane (min eigenvalue {:e})", r3.min_eigenvalue),
            });
        }
        if let Rho2Verdict::HasAtoms { atoms } = check_rho2(measure) {
            warnings.push(format!(
                "spectral measure has {} atoms: the field is not ergodic and spatial averages may stay random",
                atoms.len()
            ));
        }
    }
    Ok(warnings)
}
