//! One large plane-wave field against independent replicas: spatial averages
//! over growing windows must be consistent with the ensemble estimate.

use nodal::ensembles::{EnsembleSpec, Frame};
use nodal::estimator::{ergodic_average, estimate_nu, MeanSe, NuConfig};
use nodal::grid::Grid;
use nodal::spectral::SpectralMeasure;
use nodal::topology::ConvexWindow;

#[test]
fn ergodic_averages_match_the_ensemble() {
    let spec = EnsembleSpec::Stationary { measure: SpectralMeasure::sphere(1.0, 2).unwrap(), n_modes: 512 };
    let s = ConvexWindow::unit_ball(2);
    let (h, r) = (0.05, 4.0);
    let mut cfg = NuConfig::new(spec.clone(), vec![12.0], 40, h);
    cfg.certify = false;
    cfg.seed = 21;
    let nu = estimate_nu(&cfg).unwrap();

    // replicas give the spread of a spatial average over S(8)
    let small = Grid::centered(8.0 + r + 1.0, h, 2).unwrap();
    let phis: Vec<f64> = (0..12)
        .map(|i| ergodic_average(&spec.sample(&small, &Frame::identity(2), 22, i).unwrap(), &s, 8.0, r, 10).unwrap().phi)
        .collect();
    let replica = MeanSe::of(&phis);
    let sd_small = replica.stderr * (phis.len() as f64).sqrt();

    let big = spec.sample(&Grid::centered(26.0 + r + 1.0, h, 2).unwrap(), &Frame::identity(2), 23, 0).unwrap();
    for big_r in [10.0, 18.0, 26.0] {
        let a = ergodic_average(&big, &s, big_r, r, 10).unwrap();
        // fluctuations of a spatial mean shrink like 1/√area
        let se = sd_small * 8.0 / big_r;
        let tol = 3.0 * (se * se + replica.stderr.powi(2)).sqrt();
        assert!((a.phi - replica.mean).abs() <= tol, "R = {big_r}: {} vs {} ± {tol}", a.phi, replica.mean);
        let tol = 3.0 * (se * se + nu.stderr.powi(2)).sqrt();
        assert!(a.phi - tol <= nu.nu_hat && nu.nu_hat <= a.phi + a.psi + tol, "R = {big_r}: {a:?} vs {}", nu.nu_hat);
    }
}
