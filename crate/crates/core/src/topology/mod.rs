//! Zero-set components, nodal domains and local counts on sampled grids.
//!
//! Zero-set components are face-connected clusters of mixed cells (cells
//! whose vertices carry both signs); nodal domains are face-connected
//! clusters of equal-sign vertices. Containment and distances use cell
//! centers.

mod census;
mod refine;
mod sandwich;
mod shell;
mod signs;
mod sphere;
mod stability;
mod unionfind;
mod window;

pub use census::{ball_count_field, count_in_ball, count_in_window, nodal_domains, zero_components, BallCountField, Component, Domain, NodalCensus, NodalDomains};
pub use refine::{refinement_check, RefinementReport};
pub use sandwich::{sandwich_check, SandwichReport};
pub use shell::{shell_count, shell_halfwidth, ShellCount};
pub use signs::{sign_grid, SignGrid};
pub use sphere::{sphere_components, SphereCensus};
pub use stability::{bulinskaya_statistic, default_certificate, perturbation_bound, stability_certificate, StabilityCertificate, HESSIAN_SAFETY};
pub use unionfind::UnionFind;
pub use window::ConvexWindow;
