use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use risopt_conic::Exec;
use risopt_core::em::*;
use risopt_core::verification::*;
use risopt_core::{go_profile, go_ri_profile, CoreError, ProblemKind, ToleranceSet};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn reference() -> SurfaceGrid {
    build_grid(&Scenario::reference()).unwrap()
}

fn rand_vec(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<Complex64> {
    (0..n).map(|_| c(rng.random_range(-r..r), rng.random_range(-r..r))).collect()
}

#[test]
fn go_ri_passes_the_reactive_band_but_not_the_mask() {
    let g = reference();
    let p = go_ri_profile(&g).unwrap();
    let tol = ToleranceSet::default();
    let r = audit(&p, None, ProblemKind::SRi, &tol, &g, &AuditTolerances::default());
    assert!(r.family(Family::ReactiveBand).unwrap().pass);
    let mask = r.family(Family::Mask).unwrap();
    assert!(!mask.pass);
    assert!(!r.pass);
    assert_eq!(r.first_failure().unwrap().family, Family::Mask);
    // independent oracle: peak mask flux 2.909647e-7 W/m² at +0.2°
    assert!((mask.extreme_value - 2.909647e-7).abs() < 1e-12, "{:e}", mask.extreme_value);
    assert!((mask.worst_violation - (2.909647e-7 - tol.eps_rm)).abs() < 1e-12);
    let th = tol.mask_angles_rad[mask.worst_index.unwrap()].to_degrees();
    assert!((th - 0.2).abs() < 1e-9, "{th}");
}

#[test]
fn go_flux_oracle_values() {
    let g = reference();
    let r = g.scenario.theta_r_rad;
    let go = power_flux(&go_profile(&g).unwrap(), &g, r);
    let ri = power_flux(&go_ri_profile(&g).unwrap(), &g, r);
    assert!((go - 6.539313e-6).abs() < 1e-11, "{go:e}");
    assert!((ri - 6.691446e-6).abs() < 1e-11, "{ri:e}");
}

#[test]
fn go_reactive_band_reports_the_worst_resistance() {
    let g = reference();
    let r = audit(&go_profile(&g).unwrap(), None, ProblemKind::SRi, &ToleranceSet::default(), &g, &AuditTolerances::default());
    let band = r.family(Family::ReactiveBand).unwrap();
    assert!(!band.pass);
    // oracle: Re z spans −91.47296 Ω to 1384.52654 Ω (element 2); the upper side dominates
    assert!((band.extreme_value - 1384.52654).abs() < 1e-4, "{}", band.extreme_value);
    assert_eq!(band.worst_index, Some(2));
    assert!((band.worst_violation - (1384.52654 - 1e-2)).abs() < 1e-4);
}

#[test]
fn go_satisfies_the_helmholtz_band() {
    let g = reference();
    let r = audit(&go_profile(&g).unwrap(), None, ProblemKind::SHc, &ToleranceSet::default(), &g, &AuditTolerances::default());
    assert!(r.pass, "{r}");
    let tight = ToleranceSet { eps_hc_l: 0.5, ..Default::default() };
    let r = audit(&go_profile(&g).unwrap(), None, ProblemKind::SHc, &tight, &g, &AuditTolerances::default());
    assert!(!r.pass);
    assert!((r.checks[0].worst_violation - 0.5).abs() < 1e-9);
}

#[test]
fn rank_one_gap_of_an_outer_product_is_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = rand_vec(&mut rng, 12, 1.0);
    let m = DMatrix::from_fn(12, 12, |r, k| g[r] * g[k].conj());
    assert_eq!(rank_one_gap(&g, &m), 0.0);
    let mut off = m.clone();
    off[(2, 2)] += c(0.25, 0.0);
    assert!((rank_one_gap(&g, &off) - 0.25).abs() < 1e-15);
}

#[test]
fn lifted_audit_needs_the_matrix() {
    let g = build_grid(&Scenario::reference().with_samples(6)).unwrap();
    let p = ReflectionProfile::new(vec![c(0.1, 0.2); 6]).unwrap();
    let tol = ToleranceSet { mask_angles_rad: vec![], eps_sp: 1.0, ..Default::default() };
    let r = audit(&p, None, ProblemKind::PRm, &tol, &g, &AuditTolerances::default());
    assert!(!r.family(Family::RankOne).unwrap().pass);
    let m = DMatrix::from_fn(6, 6, |a, b| p.gamma[a] * p.gamma[b].conj());
    let r = audit(&p, Some(&m), ProblemKind::PRm, &tol, &g, &AuditTolerances::default());
    assert!(r.pass, "{r}");
}

#[test]
fn gradient_check_examples() {
    let g = reference();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let v = rand_vec(&mut rng, 60, 1.0);
    assert!(fd_gradient_check(GradientTarget::NormSq, &Point::Vector(v.clone()), &g, 1e-6).unwrap() <= 1e-8);
    let one = vec![c(1.0, 0.0); 60];
    assert!(fd_gradient_check(GradientTarget::AbsGamma(7), &Point::Vector(one), &g, 1e-6).unwrap() <= 1e-9);
    let m = DMatrix::from_fn(8, 8, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let h = &m + m.adjoint();
    assert!(fd_gradient_check(GradientTarget::Frobenius, &Point::Matrix(h), &g, 1e-6).unwrap() <= 1e-5);
}

#[test]
fn gradient_check_refuses_nonsmooth_points() {
    let g = reference();
    let mut v = vec![c(1.0, 0.0); 60];
    v[3] = c(1e-5, 0.0);
    assert!(matches!(
        fd_gradient_check(GradientTarget::AbsGamma(3), &Point::Vector(v), &g, 1e-6),
        Err(CoreError::Nonsmooth(_))
    ));
    let go = go_profile(&g).unwrap().gamma;
    assert!(matches!(
        fd_gradient_check(GradientTarget::AbsG(10), &Point::Vector(go), &g, 1e-6),
        Err(CoreError::Nonsmooth(_))
    ));
    assert!(fd_gradient_check(GradientTarget::Frobenius, &Point::Matrix(DMatrix::zeros(4, 4)), &g, 1e-6).is_err());
}

#[test]
fn gradients_agree_at_one_hundred_random_points() {
    let g = reference();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let v = rand_vec(&mut rng, 60, 1.0);
        let n = rng.random_range(0..58);
        for t in [GradientTarget::AbsGamma(n), GradientTarget::NormSq, GradientTarget::AbsG(n)] {
            match fd_gradient_check(t, &Point::Vector(v.clone()), &g, 1e-6) {
                Ok(e) => worst = worst.max(e),
                Err(CoreError::Nonsmooth(_)) => {}
                Err(e) => panic!("{e}"),
            }
        }
        let a = DMatrix::from_fn(6, 6, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        worst = worst.max(fd_gradient_check(GradientTarget::Frobenius, &Point::Matrix(&a + a.adjoint()), &g, 1e-6).unwrap());
    }
    assert!(worst <= 1e-5, "worst relative error {worst:e}");
}

#[test]
fn tangent_sampling_respects_every_bound() {
    let g = reference();
    for fam in TangentFamily::ALL {
        let r = sample_tangent_bounds(fam, &g, 10_000, 5, Exec::Parallel);
        assert_eq!(r.samples, 10_000);
        assert!(r.max_bound_excess <= 1e-9, "{fam:?}: excess {:e}", r.max_bound_excess);
        assert!(r.max_expansion_error <= 1e-9, "{fam:?}: expansion {:e}", r.max_expansion_error);
    }
}

#[test]
fn tangent_sampling_is_independent_of_execution_mode() {
    let g = reference();
    for fam in TangentFamily::ALL {
        let a = sample_tangent_bounds(fam, &g, 500, 9, Exec::Sequential);
        let b = sample_tangent_bounds(fam, &g, 500, 9, Exec::Parallel);
        assert_eq!(a, b);
    }
}
