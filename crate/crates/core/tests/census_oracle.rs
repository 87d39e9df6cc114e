mod oracles;

use nodal::ensembles::{EnsembleSpec, FieldSample, Frame, KostlanBudget};
use nodal::grid::Grid;
use nodal::mesh::SphereMesh;
use nodal::topology::{default_certificate, sign_grid, sphere_components, zero_components};
use oracles::{marching, sphere_bfs};

fn torus_sample(degree: usize, points: usize, seed: u64, index: u64) -> FieldSample {
    let spec = EnsembleSpec::Trigonometric { degree, dim: 2 };
    spec.sample(&Grid::torus(points, 2, 1.0).unwrap(), &Frame::identity(2), seed, index).unwrap()
}

#[test]
fn loop_tracer_on_circle_and_stripes() {
    let n = 64;
    let circle: Vec<f64> = (0..n * n)
        .map(|k| {
            let (x, y) = ((k / n) as f64 / n as f64 - 0.5, (k % n) as f64 / n as f64 - 0.5);
            x * x + y * y - 0.1
        })
        .collect();
    assert_eq!(marching::count_loops(&circle, n, n), 1);
    // cos 2πx has two zero lines, each a loop around the torus
    let stripes: Vec<f64> = (0..n * n).map(|k| (2.0 * std::f64::consts::PI * ((k / n) as f64 + 0.3) / n as f64).cos()).collect();
    assert_eq!(marching::count_loops(&stripes, n, n), 2);
}

#[test]
fn census_matches_loop_tracing_on_certified_tori() {
    let mut certified = 0;
    for i in 0..50 {
        let f = torus_sample(4 + (i % 2) as usize, 512, 77, i);
        let census = zero_components(&sign_grid(&f, 0.0).unwrap()).len();
        let loops = marching::count_loops(&f.values, 512, 512);
        if default_certificate(&f).unwrap().certified {
            certified += 1;
            assert_eq!(census, loops, "sample {i}");
        }
    }
    // the comparison must not be vacuous
    assert!(certified >= 20, "only {certified}/50 certified");
}

#[test]
fn census_of_separable_products() {
    // sin 2πax · sin 2πby on the torus has 4ab nodal cells but its zero set
    // is one connected grid of lines
    let n = 256;
    let g = Grid::torus(n, 2, 1.0).unwrap();
    let tau = 2.0 * std::f64::consts::PI;
    // offsets keep every grid vertex off the zero lines
    let f = FieldSample::from_fn(g, |x| {
        let (u, v) = (tau * (2.0 * x[0] + 0.01), tau * (3.0 * x[1] + 0.013));
        (u.sin() * v.sin(), vec![2.0 * tau * u.cos() * v.sin(), 3.0 * tau * u.sin() * v.cos()])
    });
    assert_eq!(zero_components(&sign_grid(&f, 0.0).unwrap()).len(), 1);
    // a perturbed cos 2πx + cos 2πy − 1.2 level: four ovals around the maxima
    let g = Grid::torus(n, 2, 1.0).unwrap();
    let f = FieldSample::from_fn(g, |x| {
        let (u, v) = (tau * 2.0 * x[0], tau * 2.0 * x[1]);
        (u.cos() + v.cos() - 1.2, vec![-2.0 * tau * u.sin(), -2.0 * tau * v.sin()])
    });
    let census = zero_components(&sign_grid(&f, 0.0).unwrap()).len();
    assert_eq!(census, 4);
    assert_eq!(marching::count_loops(&f.values, n, n), 4);
    assert!(default_certificate(&f).unwrap().certified);
}

#[test]
fn sphere_census_matches_breadth_first_search() {
    let mesh = SphereMesh::lat_long(60, 120).unwrap();
    let budget = KostlanBudget::default();
    for (degree, index) in [(3, 0), (5, 1), (8, 2), (8, 3)] {
        let s = EnsembleSpec::Kostlan { degree, dim: 2 }.sample_sphere(&mesh, 5, index, &budget).unwrap();
        let c = sphere_components(&s).unwrap();
        assert_eq!(c.domains, sphere_bfs::domains(&s.values, &mesh.triangles), "degree {degree}");
        assert_eq!(c.zero_components + 1, c.domains);
        assert_eq!(c.positive + c.negative, c.domains);
    }
}
