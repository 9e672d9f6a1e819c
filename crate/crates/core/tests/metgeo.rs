use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wsdlab_core::ambient::AmbientPoint;
use wsdlab_core::metgeo::*;
use wsdlab_core::reduction::{sample_reduced_points, LevelSetSpec};

/// Covering radius by a grid over the fundamental cell; each grid local
/// maximum is snapped to the circumcentre of its three nearest lattice
/// points, whose distance to the lattice is then found by naive enumeration.
fn brute_covering_radius(basis: &DMatrix<f64>) -> f64 {
    let mut lattice = Vec::new();
    for a in -24..=24 {
        for b in -24..=24 {
            lattice.push(basis * DVector::from_vec(vec![a as f64, b as f64]));
        }
    }
    let nearest = |y: &DVector<f64>| {
        let mut d: Vec<(f64, usize)> = lattice.iter().enumerate().map(|(i, v)| ((y - v).norm(), i)).collect();
        d.sort_by(|p, q| p.0.total_cmp(&q.0));
        d
    };
    let steps = 60i32;
    let reach = 0.25 * basis.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let point = |i: i32, j: i32| {
        basis * DVector::from_vec(vec![i.rem_euclid(steps) as f64 / steps as f64, j.rem_euclid(steps) as f64 / steps as f64])
    };
    let grid: Vec<Vec<f64>> = (0..steps).map(|i| (0..steps).map(|j| nearest(&point(i, j))[0].0).collect()).collect();
    let g = |i: i32, j: i32| grid[i.rem_euclid(steps) as usize][j.rem_euclid(steps) as usize];
    let mut best = 0.0f64;
    for i in 0..steps {
        for j in 0..steps {
            let v = g(i, j);
            best = best.max(v);
            if (-1..=1).any(|di| (-1..=1).any(|dj| g(i + di, j + dj) > v)) {
                continue;
            }
            let near = nearest(&point(i, j));
            let (p, q, r) = (&lattice[near[0].1], &lattice[near[1].1], &lattice[near[2].1]);
            let a = DMatrix::from_rows(&[(q - p).transpose(), (r - p).transpose()]);
            let h = DVector::from_vec(vec![0.5 * (q.norm_squared() - p.norm_squared()), 0.5 * (r.norm_squared() - p.norm_squared())]);
            let y = point(i, j);
            if let Some(x) = a.lu().solve(&h) {
                if (&x - &y).norm() < reach {
                    best = best.max(nearest(&x)[0].0);
                }
            }
        }
    }
    best
}

fn euclidean_torus(basis: DMatrix<f64>) -> FlatTorusSpec<f64> {
    let d = basis.nrows();
    FlatTorusSpec { lattice_basis: basis, metric_diag: DVector::repeat(d, 1.0), collapsed: None }
}

#[test]
fn covering_radius_matches_brute_force() {
    let sq = DMatrix::identity(2, 2);
    let exact = flat_torus_diameter(&euclidean_torus(sq.clone()), DiameterMode::Exact).unwrap().value;
    assert!((exact - brute_covering_radius(&sq)).abs() < 1e-6);
    assert!((exact - 0.5f64.sqrt()).abs() < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..5 {
        let b = DMatrix::<f64>::from_fn(2, 2, |_, _| rng.random_range(-1.5..1.5));
        if b.determinant().abs() < 0.2 {
            continue;
        }
        let exact = flat_torus_diameter(&euclidean_torus(b.clone()), DiameterMode::Exact).unwrap().value;
        let brute = brute_covering_radius(&b);
        assert!((exact - brute).abs() < 1e-6, "{exact} vs {brute} for {b}");
    }
}

#[test]
fn fiber_diameters_respect_the_displayed_bound() {
    for n in [2usize, 3] {
        for rho2 in [0.5, 0.7] {
            for rho1 in [1.0, 10.0, 100.0, 1000.0] {
                let spec = LevelSetSpec::<f64>::from_rho(n, rho1, rho2).unwrap();
                let bound = paper_fiber_bound(n, rho1, rho2);
                for p in sample_reduced_points(&spec, 30, 9).unwrap() {
                    let torus = pi1_fiber_torus(&p);
                    let exact = flat_torus_diameter(&torus, DiameterMode::Exact).unwrap().value;
                    assert!(exact / bound <= 1.0 + 1e-6);
                    let upper = flat_torus_diameter(&torus, DiameterMode::UpperBound).unwrap().value;
                    let mc = flat_torus_diameter(&torus, DiameterMode::MonteCarlo { samples: 200, seed: 1 }).unwrap();
                    assert!(upper >= exact * (1.0 - 1e-12));
                    assert!(mc.value <= exact * (1.0 + 1e-9));
                }
            }
        }
    }
}

#[test]
fn fiber_diameter_scales_inversely_with_rho1() {
    let base = LevelSetSpec::<f64>::from_rho(2, 3.0, 0.6).unwrap();
    let twice = LevelSetSpec::<f64>::from_rho(2, 6.0, 0.6).unwrap();
    let a = sample_reduced_points(&base, 20, 4).unwrap();
    let b = sample_reduced_points(&twice, 20, 4).unwrap();
    for (p, q) in a.iter().zip(&b) {
        let dp = flat_torus_diameter(&pi1_fiber_torus(p), DiameterMode::Exact).unwrap().value;
        let dq = flat_torus_diameter(&pi1_fiber_torus(q), DiameterMode::Exact).unwrap().value;
        assert!((dp / dq - 2.0).abs() < 1e-9);
        let ep = flat_torus_diameter(&pi2_fiber_torus(p), DiameterMode::Exact).unwrap().value;
        let eq = flat_torus_diameter(&pi2_fiber_torus(q), DiameterMode::Exact).unwrap().value;
        assert!((eq / ep - 2.0).abs() < 1e-9);
    }
}

#[test]
fn cy_sampler_matches_closed_form_for_n1() {
    let rho2 = 0.3f64;
    let eps = (-4.0 * std::f64::consts::PI.powi(2) * rho2 * rho2).exp();
    let disc = (1.0 - 4.0 * eps * eps).sqrt();
    let roots = [(1.0 + disc) / (2.0 * eps), (1.0 - disc) / (2.0 * eps)];
    for z in cy_hypersurface_points::<f64>(1, 2.0, rho2, 40, 3).unwrap() {
        let w = z[0] / z[1];
        assert!(roots.iter().any(|r| (w - r).norm() < 1e-9 * r.abs()), "{w}");
        assert!(cy_residual(&z, rho2) < 1e-9);
    }
}

#[test]
fn cy_samples_approach_the_divisor() {
    let n = 2;
    let mut last = f64::INFINITY;
    for rho2 in [0.3, 0.45, 0.6, 0.75] {
        let pts = cy_hypersurface_points::<f64>(n, 1.0, rho2, 150, 8).unwrap();
        // FS distance from z to {z_j = 0} is asin(|z_j| / ‖z‖)
        let worst = pts
            .iter()
            .map(|z| {
                let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                z.iter().map(|c| (c.norm() / norm).asin()).fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        assert!(worst < last, "rho2 = {rho2}: {worst} !< {last}");
        last = worst;
        for z in &pts {
            assert!(cy_residual(z, rho2) < 1e-9);
        }
    }
    let cy = cy_hypersurface_sample::<f64>(n, 1.0, 0.75, 60, 1).unwrap();
    let anti = anticanonical_sample::<f64>(n, SampleTarget::Projective { lambda: 1.0 }, 60, 2).unwrap();
    assert!(hausdorff_distance(&cy, &anti).unwrap() < std::f64::consts::FRAC_PI_2);
}

#[test]
fn anticanonical_n1_is_two_points() {
    let s = anticanonical_sample::<f64>(1, SampleTarget::Projective { lambda: 1.0 }, 6, 0).unwrap();
    for (i, z) in s.points.iter().enumerate() {
        assert_eq!(z[i % 2].norm(), 0.0);
    }
    assert!((s.diameter().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
}

#[test]
fn cp1_diameter_converges() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pts: Vec<Vec<Complex<f64>>> = (0..400)
        .map(|_| (0..2).map(|_| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect())
        .collect();
    let s = FiniteMetricSample::from_points(Chart::Projective { n: 1, lambda: 1.0 }, pts).unwrap();
    let d = s.diameter().unwrap();
    assert!(d <= std::f64::consts::FRAC_PI_2 + 1e-12 && d > 1.5);
    assert!(s.triangle_violation(20_000, 1) < 1e-9);
}

#[test]
fn parallel_circles_in_cp1() {
    // circles |z0|/‖z‖ = sin(a) in CP^1 are FS-parallel at distance |a - b|
    let circle = |a: f64| -> Vec<Vec<Complex<f64>>> {
        (0..200)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 200.0;
                vec![Complex::from_polar(a.sin(), t), Complex::new(a.cos(), 0.0)]
            })
            .collect()
    };
    let chart = Chart::Projective { n: 1, lambda: 1.0 };
    let a = FiniteMetricSample::from_points(chart.clone(), circle(0.4)).unwrap();
    let b = FiniteMetricSample::from_points(chart, circle(0.55)).unwrap();
    assert!((hausdorff_distance(&a, &b).unwrap() - 0.15).abs() < 1e-9);
}

#[test]
fn knn_geodesics_on_a_circle() {
    let pts: Vec<_> = (0..40)
        .map(|k| AmbientPoint::from_slices(&[k as f64 / 40.0, 0.0], &[0.8, 1.0], &[0.0, 0.0]).unwrap())
        .collect();
    let d = knn_geodesic_distances(&pts, 4).unwrap();
    let circumference = std::f64::consts::TAU * 0.8;
    assert!((d[(0, 20)] - circumference / 2.0).abs() < 1e-9);
    assert!((d[(3, 7)] - circumference / 10.0).abs() < 1e-9);
}

#[test]
fn hn_chart_distances_factor_the_group() {
    let s = anticanonical_sample::<f64>(2, SampleTarget::Quotient { lambda: 0.5 }, 30, 4).unwrap();
    let c = anticanonical_sample::<f64>(2, SampleTarget::Projective { lambda: 0.5 }, 30, 4).unwrap();
    for i in 0..30 {
        for j in 0..30 {
            assert!(s.dist[(i, j)] <= c.dist[(i, j)] + 1e-12);
        }
    }
}

fn euclid(points: &[(f64, f64)]) -> FiniteMetricSample<f64> {
    let pts = points.iter().map(|&(x, y)| vec![Complex::new(x, 0.0), Complex::new(y, 0.0)]).collect();
    FiniteMetricSample::from_points(Chart::Euclidean { dim: 2 }, pts).unwrap()
}

proptest! {
    #[test]
    fn ngh_is_scale_invariant(
        a in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..12),
        b in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..12),
        k in -6i32..6,
        t in 0.1f64..10.0,
    ) {
        let (a, b) = (euclid(&a), euclid(&b));
        let base = ngh_distance(&a, &b).unwrap();
        let pow2 = 2f64.powi(k);
        prop_assert_eq!(ngh_distance(&a.scaled(pow2), &b.scaled(pow2)).unwrap(), base.clone());
        let scaled = ngh_distance(&a.scaled(t), &b.scaled(t)).unwrap();
        prop_assert!((scaled.lower - base.lower).abs() < 1e-12);
        prop_assert!((scaled.upper - base.upper).abs() < 1e-12);
    }

    #[test]
    fn gh_bounds_are_ordered(
        a in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..15),
        b in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..15),
    ) {
        let g = gh_bounds(&euclid(&a), &euclid(&b)).unwrap();
        prop_assert!(g.lower <= g.upper + 1e-12);
    }

    #[test]
    fn scaled_copy_lower_bound(
        a in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..10),
        t in 1.0f64..4.0,
    ) {
        let a = euclid(&a);
        let g = gh_bounds(&a.scaled(t), &a).unwrap();
        prop_assert!((g.lower - 0.5 * (t - 1.0) * a.diameter().unwrap()).abs() < 1e-12);
    }
}
