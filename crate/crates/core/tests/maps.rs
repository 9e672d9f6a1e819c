use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wsdlab_core::maps::*;
use wsdlab_core::reduction::{sample_reduced_points, LevelSetSpec, ReducedPoint};

fn spec(n: usize) -> LevelSetSpec<f64> {
    LevelSetSpec::from_rho(n, 1.7, 0.55).unwrap()
}

fn random_lift(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n + 1, |_, _| rng.random::<f64>())
}

#[test]
fn images_lie_on_their_equations() {
    for n in 1..=4 {
        let sp = spec(n);
        let rho2 = sp.rho2_sq().sqrt();
        for p in sample_reduced_points(&sp, 60, 7).unwrap() {
            let z1 = project_pi1(&p);
            assert!(pi1_image_residual(&z1.z, rho2) < 1e-10);
            let sum: f64 = z1.z.iter().map(|c| c.norm_sqr()).sum();
            assert!((sum - z1.lambda).abs() < 1e-10 * z1.lambda);
            let z2 = project_pi2(&p).unwrap();
            assert!(pi2_image_residual(&z2.z) < 1e-10);
            let sum2: f64 = z2.z.iter().map(|c| c.norm_sqr()).sum();
            assert!((sum2 - sp.rho2_sq()).abs() < 1e-10);
        }
    }
}

#[test]
fn equivariance_and_fiber_collapse() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..=3 {
        let sp = spec(n);
        let rho1 = sp.rho1();
        let group = HnQuotient::<f64>::new(n).unwrap();
        for p in sample_reduced_points(&sp, 25, 11).unwrap() {
            let s1 = random_lift(n, &mut rng);
            let s2 = random_lift(n, &mut rng);
            let moved1 = act_first(&p, &s1);
            assert!(cpn_distance(&project_pi1(&moved1), &project_pi1(&p).act(&s1), rho1) < 1e-8);
            let moved2 = act_second(&p, &s2);
            let lhs = project_pi2(&moved2).unwrap();
            let rhs = project_pi2(&p).unwrap().act(&s2);
            assert!(hn_distance(&lhs, &rhs, &group, 1.0) < 1e-8);
            // π1 ignores the second factor, π2 the first
            assert!(cpn_distance(&project_pi1(&moved2), &project_pi1(&p), rho1) < 1e-12);
            let a = project_pi2(&moved1).unwrap();
            assert!(hn_distance(&a, &project_pi2(&p).unwrap(), &group, 1.0) < 1e-12);
        }
    }
}

#[test]
fn hn_distance_is_a_quotient_pseudometric() {
    let n = 2;
    let group = HnQuotient::<f64>::new(n).unwrap();
    let pts: Vec<_> =
        sample_reduced_points(&spec(n), 12, 5).unwrap().iter().map(|p| project_pi2(p).unwrap()).collect();
    for a in &pts {
        for b in &pts {
            let d = hn_distance(a, b, &group, 1.0);
            assert!((d - hn_distance(b, a, &group, 1.0)).abs() < 1e-12);
            assert!(d <= wsdlab_core::maps::fubini_study_distance(&a.z, &b.z, 1.0) + 1e-15);
            for c in &pts {
                assert!(d <= hn_distance(a, c, &group, 1.0) + hn_distance(c, b, &group, 1.0) + 1e-10);
            }
        }
        for g in &group.cosets {
            assert!(hn_distance(a, &a.act(&(-g)), &group, 1.0) < 1e-12);
        }
    }
}

#[test]
fn phi_identities_on_reduced_points() {
    for n in 1..=3 {
        let sp = spec(n);
        let (rho1, rho2) = (sp.rho1(), sp.rho2_sq().sqrt());
        for p in sample_reduced_points(&sp, 20, 13).unwrap() {
            let amb = p.embed();
            let rep = phi_pullback_check(&amb, rho1, rho2);
            assert!(rep.omega2 < 1e-9 && rep.metric < 1e-9 && rep.mu1 < 1e-9 && rep.mu2 < 1e-9 && rep.j2 < 1e-9);
            assert!(rep.omega1_sign_flipped < 1e-9);
            assert!(rep.omega1 > 0.1);
            assert!(rep.j2_square < 1e-9);
        }
    }
}

#[test]
fn deformation_flow_commutes_with_reduction() {
    let sp = spec(2);
    for p in sample_reduced_points(&sp, 10, 17).unwrap() {
        for t in [0.01, 0.5, 3.0, 100.0] {
            let q: ReducedPoint<f64> = psi_scale_reduced(&p, t).unwrap();
            assert!(q.moment_residual() < 1e-9);
            assert!(psi_pullback_residual(&p.embed(), t).unwrap() < 1e-12);
        }
    }
}
