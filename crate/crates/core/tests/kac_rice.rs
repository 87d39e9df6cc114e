//! One-dimensional zero counts against the Kac–Rice density evaluated by
//! finite differences of closed-form kernels.

use nodal::ensembles::{EnsembleSpec, Frame};
use nodal::estimator::{det_scaling_test, estimate_nu, DetScalingConfig, NuConfig};
use nodal::grid::Grid;
use nodal::spectral::SpectralMeasure;
use nodal::topology::{sign_grid, zero_components};
use std::f64::consts::PI;

/// Expected zeros per unit length, `(1/π)√(−k''(0))`.
fn kac_rice(k: impl Fn(f64) -> f64) -> f64 {
    let e = 1e-4;
    let k2 = (k(e) - 2.0 * k(0.0) + k(-e)) / (e * e);
    (-k2).sqrt() / PI
}

fn dirichlet(n: usize) -> impl Fn(f64) -> f64 {
    let w = (2 * n + 1) as f64;
    move |t: f64| if t == 0.0 { 1.0 } else { (PI * w * t).sin() / (w * (PI * t).sin()) }
}

#[test]
fn dirichlet_oracle_is_the_closed_form() {
    for n in [1, 5, 50] {
        let exact = 2.0 * ((n * (n + 1)) as f64 / 3.0).sqrt();
        assert!((kac_rice(dirichlet(n)) - exact).abs() < 1e-3 * exact, "n = {n}");
    }
}

#[test]
fn trigonometric_zeros_on_the_circle() {
    let n = 50;
    let oracle = kac_rice(dirichlet(n));
    let spec = EnsembleSpec::Trigonometric { degree: n, dim: 1 };
    let grid = Grid::torus(8192, 1, 1.0).unwrap();
    let samples = 150;
    let total: usize = (0..samples)
        .map(|i| {
            let f = spec.sample(&grid, &Frame::identity(1), 2024, i).unwrap();
            zero_components(&sign_grid(&f, 0.0).unwrap()).len()
        })
        .sum();
    let mean = total as f64 / samples as f64;
    assert!((mean - oracle).abs() < 0.02 * oracle, "{mean} vs {oracle}");
}

#[test]
fn gaussian_kernel_zero_density() {
    // Gaussian(1) has kernel exp(−x²/2)
    let oracle = kac_rice(|x| (-x * x / 2.0).exp());
    assert!((oracle - 1.0 / PI).abs() < 1e-6);
    let spec = EnsembleSpec::Stationary { measure: SpectralMeasure::gaussian(1.0, 1).unwrap(), n_modes: 1024 };
    let mut cfg = NuConfig::new(spec, vec![40.0], 100, 0.05);
    cfg.seed = 9;
    let e = estimate_nu(&cfg).unwrap();
    assert!((e.nu_hat - oracle).abs() < 0.05 * oracle, "{} vs {oracle}", e.nu_hat);
}

#[test]
fn dilation_doubles_the_zero_density() {
    let cfg = DetScalingConfig {
        measure: SpectralMeasure::cube(1.0, 1).unwrap(),
        matrix: vec![vec![2.0]],
        radius: 25.0,
        samples: 60,
        seed: 4,
        spacing: 0.01,
        n_modes: 2048,
    };
    let r = det_scaling_test(&cfg).unwrap();
    assert_eq!(r.determinant, 2.0);
    assert!((r.ratio - 2.0).abs() < 0.2, "ratio {}", r.ratio);
}
