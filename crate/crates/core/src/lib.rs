//! Gaussian random fields, nodal-set censuses and estimation of the
//! nodal-component intensity `ν`.
//!
//! * [`spectral`] — spectral measures, covariance kernels, spectral conditions
//! * [`ensembles`] — translation-invariant, trigonometric and Kostlan fields
//! * [`topology`] — zero-set components, nodal domains, stability certificates
//! * [`estimator`] — Monte-Carlo estimators of `ν` and scaling experiments

pub mod error;
pub mod grid;
pub mod jet;
pub mod quadrature;
pub mod rng;
pub mod ensembles;
pub mod estimator;
pub mod mesh;
pub mod spectral;
pub mod topology;

pub use error::{Error, Result};
