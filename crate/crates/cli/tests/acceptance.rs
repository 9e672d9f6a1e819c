//! Acceptance run: one PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wsdlab::complex::cmd_limit_complex;
use wsdlab::kahler::{cmd_limit_kahler, kahler_row};
use wsdlab::{cmd_boundary, cmd_verify, relative_spread, strictly_decreasing, ExperimentConfig};
use wsdlab_core::ambient::{
    exterior_derivative_residual, fd_exterior_derivative, leaf_volume, r_index, theta_index, verify_ambient_frame,
    AmbientPoint, FormId,
};
use wsdlab_core::maps::{
    act_first, act_second, alpha_deform, cpn_distance, hn_distance, phi_pullback_check, pi1_image_residual,
    pi2_image_residual, project_pi1, project_pi2, psi_pullback_residual, HnQuotient,
};
use wsdlab_core::metgeo::{
    flat_torus_diameter, gh_bounds, ngh_distance, Chart, DiameterMode, FiniteMetricSample, FlatTorusSpec,
};
use wsdlab_core::polytope::verify_duality_identities;
use wsdlab_core::reduction::{sample_reduced_points, LevelSetSpec};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn c1_lattice() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;
    for n in 1..=6usize {
        match verify_duality_identities::<i64>(n) {
            Ok(r) => {
                let expected = ((n + 1) as i64).pow(n as u32);
                ok &= r.kernel_order == expected;
                notes.push(format!("n={n}:{}", r.kernel_order));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("n={n}: {e}"));
            }
        }
    }
    let t = start.elapsed();
    outcome(ok && within(t, 1.0), format!("kernel orders {} in {:.3}s", notes.join(" "), t.as_secs_f64()))
}

fn c2_ambient() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut leaf, mut frame, mut closed) = (0.0f64, 0.0f64, 0.0f64);
    for n in 1..=3usize {
        for i in 0..1000 {
            let k = n + 1;
            let theta: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
            let r: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..3.0)).collect();
            let eta: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
            let p = AmbientPoint::from_slices(&theta, &r, &eta).unwrap();
            leaf = leaf.max((leaf_volume(&p) - 1.0).abs());
            frame = frame.max(match verify_ambient_frame(&p, 1e-10) {
                Ok(rep) => rep.max_residual(),
                Err(_) => f64::INFINITY,
            });
            if i % 20 == 0 {
                for f in [FormId::Omega1, FormId::Omega2, FormId::OmegaD] {
                    closed = closed.max(exterior_derivative_residual(f, &p, 1e-5).unwrap().residual);
                }
            }
        }
    }
    // The stencil itself, on the non-closed form e^{r0 r1} dθ0∧dr0 whose
    // exterior derivative has the single component r0 e^{r0 r1}.
    let n = 1;
    let (a, b) = (theta_index(n, 0), r_index(n, 0));
    let c = r_index(n, 1);
    let form = |x: &DVector<f64>| {
        let mut m = DMatrix::zeros(x.len(), x.len());
        let v = (x[b] * x[c]).exp();
        m[(a, b)] = v;
        m[(b, a)] = -v;
        m
    };
    let x = DVector::<f64>::from_vec(vec![0.3, 0.1, 0.7, 1.1, 0.2, 0.4]);
    let exact = x[b] * (x[b] * x[c]).exp();
    let err = |h: f64| (fd_exterior_derivative(form, &x, h) - exact).abs();
    let order_ratio = err(1e-2) / err(5e-3);
    let t = start.elapsed();
    let ok = leaf < 1e-10 && frame < 1e-10 && closed < 1e-6 && (3.5..4.5).contains(&order_ratio) && within(t, 10.0);
    outcome(
        ok,
        format!(
            "|V-1| {leaf:.1e}, frame {frame:.1e}, dω {closed:.1e} at h=1e-5, halving ratio {order_ratio:.3}, {:.2}s",
            t.as_secs_f64()
        ),
    )
}

fn c3_reduced() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();
    for n in [2usize, 3] {
        let cfg = ExperimentConfig { n, rho1: 1.0, rho2: 0.5, samples: 100, seed: 3, ..Default::default() };
        let report = match cmd_verify(&cfg) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("n={n}: {e}")),
        };
        for (name, tol) in [
            ("wsd_axioms", 1e-8),
            ("degenerate_pairing_formula", 1e-9),
            ("remark_norm_formula", 1e-9),
            ("a_ij_closed_vs_linear", 1e-10),
        ] {
            let c = report.check(name).expect("check present");
            let pass = c.max_residual < tol;
            ok &= pass;
            if !pass {
                notes.push(format!("n={n} {name} {:.3e}", c.max_residual));
            }
        }
        let corrected = report.check("degenerate_pairing_corrected").unwrap();
        notes.push(format!("n={n} corrected pairing {:.1e}", corrected.max_residual));
    }
    let t = start.elapsed();
    outcome(ok && within(t, 60.0), format!("{} ({:.2}s)", notes.join("; "), t.as_secs_f64()))
}

fn c4_projections() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut r1, mut r2, mut collapse) = (0.0f64, 0.0f64, 0.0f64);
    for n in 1..=3usize {
        let spec = LevelSetSpec::from_rho(n, 1.0, 0.5).unwrap();
        let group = HnQuotient::<f64>::new(n).unwrap();
        for p in sample_reduced_points(&spec, 100, 4).unwrap() {
            let z1 = project_pi1(&p);
            let z2 = project_pi2(&p).unwrap();
            r1 = r1.max(pi1_image_residual(&z1.z, 0.5));
            r2 = r2.max(pi2_image_residual(&z2.z));
            let s = DVector::from_fn(n + 1, |_, _| rng.random::<f64>());
            collapse = collapse.max(cpn_distance(&project_pi1(&act_second(&p, &s)), &z1, 1.0));
            collapse = collapse.max(hn_distance(&project_pi2(&act_first(&p, &s)).unwrap(), &z2, &group, 1.0));
        }
    }
    outcome(
        r1 < 1e-10 && r2 < 1e-9 && collapse < 1e-6,
        format!("π1 {r1:.1e}, π2 {r2:.1e}, fiber collapse {collapse:.1e}"),
    )
}

fn c5_phi_alpha() -> Outcome {
    let start = Instant::now();
    let (mut worst, mut worst_name) = (0.0f64, "");
    let (mut alpha, mut psi) = (0.0f64, 0.0f64);
    for n in 1..=3usize {
        let spec = LevelSetSpec::from_rho(n, 1.0, 0.5).unwrap();
        for p in sample_reduced_points(&spec, 50, 5).unwrap() {
            let rep = phi_pullback_check(&p.embed(), 1.0, 0.5);
            for (name, v) in rep.entries() {
                if v > worst {
                    worst = v;
                    worst_name = name;
                }
            }
            for t in [0.01, 0.3, 2.0, 50.0] {
                psi = psi.max(psi_pullback_residual(&p.embed(), t).unwrap());
            }
        }
        for t in [1e-3, 0.25, 4.0, 1e3] {
            let d = alpha_deform(&spec, t).unwrap();
            alpha = alpha.max(((d.rho1() - t * spec.rho1()) / (t * spec.rho1())).abs());
            alpha = alpha.max(((d.rho2_sq() - spec.rho2_sq()) / spec.rho2_sq()).abs());
        }
    }
    let t = start.elapsed();
    outcome(
        worst < 1e-9 && alpha < 1e-12 && psi < 1e-9 && within(t, 30.0),
        format!("worst pullback {worst_name} {worst:.3e}, α_t {alpha:.1e}, ψ_t {psi:.1e}"),
    )
}

fn c6_fiber_bound() -> Outcome {
    let mut worst = 0.0f64;
    for n in [2usize, 3] {
        for rho1 in [1.0, 10.0, 100.0, 1000.0] {
            match kahler_row(n, rho1, 0.5, 100, 6) {
                Ok(row) => worst = worst.max(row.bound_ratio),
                Err(e) => return outcome(false, format!("n={n} ρ1={rho1}: {e}")),
            }
        }
    }
    outcome(worst <= 1.0 + 1e-6, format!("max fiber/bound ratio {worst:.3e}"))
}

fn c7_trends() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut kahler_ok = true;
    for rho2 in [0.5, 0.6] {
        let cfg = ExperimentConfig { n: 2, rho2, grid: vec![1.0, 10.0, 100.0, 1000.0], ..Default::default() };
        let rows = cmd_limit_kahler(&cfg).unwrap();
        let col: Vec<f64> = rows.iter().map(|r| r.hausdorff_normalized).collect();
        let ngh: Vec<f64> = rows.iter().map(|r| r.ngh_estimate).collect();
        let dec = strictly_decreasing(&col, 1e-12);
        kahler_ok &= dec;
        notes.push(format!(
            "ρ2={rho2}: normalized H {:.6}..{:.6} decreasing={dec}, ngh estimate decreasing={}",
            col[0],
            col[col.len() - 1],
            strictly_decreasing(&ngh, 1e-12)
        ));
    }
    let cfg = ExperimentConfig { n: 2, rho1: 1.0, grid: vec![0.4, 0.5, 0.6, 0.7], ..Default::default() };
    let rows = cmd_limit_complex(&cfg).unwrap();
    let c: Vec<f64> = rows.iter().map(|r| r.fiber_over_rho1).collect();
    let spread = relative_spread(&c);
    let complex_ok = spread < 0.2;
    notes.push(format!("fitted C spread {spread:.3}"));

    let cfg = ExperimentConfig { n: 2, samples: 100, ..Default::default() };
    let rows = cmd_boundary(&cfg).unwrap();
    let diam: Vec<f64> =
        rows.iter().filter(|r| r.quantity == "base_diameter_over_rho1").map(|r| r.value).collect();
    let exponent = rows.iter().find(|r| r.quantity == "pinch_exponent").map(|r| r.value).unwrap_or(f64::NAN);
    let pinch_ok = strictly_decreasing(&diam, 1e-12) && (exponent - 0.5).abs() <= 0.1;
    notes.push(format!("pinch exponent {exponent:.3}"));

    let t = start.elapsed();
    outcome(
        kahler_ok && complex_ok && pinch_ok && within(t, 600.0),
        format!("kähler={kahler_ok} complex={complex_ok} pinch={pinch_ok}; {}", notes.join("; ")),
    )
}

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

fn euclid(rng: &mut ChaCha8Rng, k: usize) -> FiniteMetricSample<f64> {
    let pts = (0..k)
        .map(|_| vec![Complex::new(rng.random_range(-5.0..5.0), 0.0), Complex::new(rng.random_range(-5.0..5.0), 0.0)])
        .collect();
    FiniteMetricSample::from_points(Chart::Euclidean { dim: 2 }, pts).unwrap()
}

fn c8_metric_layer() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut scale_exact = true;
    let mut ordered = true;
    for _ in 0..200 {
        let (ka, kb) = (rng.random_range(2..12), rng.random_range(2..12));
        let (a, b) = (euclid(&mut rng, ka), euclid(&mut rng, kb));
        let base = ngh_distance(&a, &b).unwrap();
        for k in [-3, 1, 5] {
            let s = 2f64.powi(k);
            scale_exact &= ngh_distance(&a.scaled(s), &b.scaled(s)).unwrap() == base;
        }
        let g = gh_bounds(&a, &b).unwrap();
        ordered &= g.lower <= g.upper;
    }
    let torus = |b: DMatrix<f64>| FlatTorusSpec { lattice_basis: b, metric_diag: DVector::repeat(2, 1.0), collapsed: None };
    let mut cover = 0.0f64;
    let mut bases = vec![DMatrix::identity(2, 2)];
    while bases.len() < 4 {
        let b = DMatrix::<f64>::from_fn(2, 2, |_, _| rng.random_range(-1.5..1.5));
        if b.determinant().abs() > 0.2 {
            bases.push(b);
        }
    }
    for b in bases {
        let exact = flat_torus_diameter(&torus(b.clone()), DiameterMode::Exact).unwrap().value;
        cover = cover.max((exact - brute_covering_radius(&b)).abs());
    }
    outcome(
        scale_exact && ordered && cover < 1e-6,
        format!("NGH scale-exact={scale_exact}, GH ordered={ordered}, covering radius error {cover:.1e}"),
    )
}

type Criterion = (usize, &'static str, fn() -> Outcome);

/// Criteria that fail on the stated formulas themselves: the displayed
/// degenerate pairing constant (3), the sign of the first pulled-back form
/// (5), and a normalized column that is exactly independent of `ρ1` (7).
/// They are still evaluated at full tolerance and reported as FAIL; only
/// failures outside this list make the run exit non-zero.
const KNOWN_FAILURES: [usize; 3] = [3, 5, 7];

fn main() {
    let criteria: [Criterion; 8] = [
        (1, "lattice identities", c1_lattice),
        (2, "ambient self-duality", c2_ambient),
        (3, "reduced WSD axioms", c3_reduced),
        (4, "projection images", c4_projections),
        (5, "φ and α_t identities", c5_phi_alpha),
        (6, "fiber bound", c6_fiber_bound),
        (7, "limit trends", c7_trends),
        (8, "metric layer", c8_metric_layer),
    ];
    let mut passed = 0;
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        let o = run();
        let known = KNOWN_FAILURES.contains(&id);
        passed += usize::from(o.pass);
        if o.pass == known {
            unexpected.push(id);
        }
        let verdict = match (o.pass, known) {
            (true, false) => "PASS",
            (true, true) => "PASS (listed as a known failure)",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("criterion {id} {name}: {verdict} ({})", o.detail);
    }
    println!("{passed} of 8 criteria pass; known failures {KNOWN_FAILURES:?}");
    if !unexpected.is_empty() {
        println!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
