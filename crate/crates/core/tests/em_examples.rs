use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use risopt_conic::Exec;
use risopt_core::em::*;
use risopt_core::CoreError;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn reference() -> SurfaceGrid {
    build_grid(&Scenario::reference()).unwrap()
}

fn specular(theta_deg: f64) -> SurfaceGrid {
    let mut s = Scenario::reference();
    s.theta_i_rad = theta_deg.to_radians();
    s.theta_r_rad = theta_deg.to_radians();
    build_grid(&s).unwrap()
}

fn random_profile(n: usize, seed: u64) -> ReflectionProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ReflectionProfile::new((0..n).map(|_| c(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5))).collect()).unwrap()
}

#[test]
fn reference_grid_has_sixty_samples() {
    let g = reference();
    assert_eq!(g.n(), 60);
}

#[test]
fn grid_endpoints_and_symmetry() {
    let g = reference();
    let (ly, dy) = (g.scenario.ly_m, g.delta_y_m);
    assert!((g.y_m[0] - (-ly + dy / 2.0)).abs() < 1e-15);
    assert!((g.y_m[59] - (ly - dy / 2.0)).abs() < 1e-15);
    for k in 0..60 {
        assert!((g.y_m[k] + g.y_m[59 - k]).abs() < 1e-15);
    }
}

#[test]
fn normal_incidence_constant() {
    assert_eq!(reference().c_i, -60.0);
}

#[test]
fn non_integer_sample_count_is_rejected() {
    let mut s = Scenario::reference();
    s.ly_m *= 1.01;
    assert!(matches!(build_grid(&s), Err(CoreError::InvalidScenario(_))));
}

#[test]
fn grazing_or_backward_angles_are_rejected() {
    let mut s = Scenario::reference();
    s.theta_r_rad = std::f64::consts::FRAC_PI_2;
    assert!(build_grid(&s).is_err());
}

#[test]
fn pec_and_matched_impedances() {
    let g = reference();
    let z = gamma_to_impedance(&ReflectionProfile::new(vec![c(-1.0, 0.0); 60]).unwrap(), &g).unwrap();
    assert!(z.z_ohm.iter().all(|z| z.norm() == 0.0));

    let sp = specular(0.0);
    let z = gamma_to_impedance(&ReflectionProfile::zeros(60), &sp).unwrap();
    assert!(z.z_ohm.iter().all(|z| (z - c(377.0, 0.0)).norm() < 1e-12));

    let back = impedance_to_gamma(&ImpedanceProfile::new(vec![c(0.0, 0.0); 60]).unwrap(), &g).unwrap();
    assert!(back.gamma.iter().all(|v| (v - c(-1.0, 0.0)).norm() < 1e-15));
    let back = impedance_to_gamma(&ImpedanceProfile::new(vec![c(377.0, 0.0); 60]).unwrap(), &sp).unwrap();
    assert!(back.gamma.iter().all(|v| v.norm() < 1e-15));
}

#[test]
fn reactive_impedance_roundtrip() {
    let g = reference();
    let z = ImpedanceProfile::new(vec![c(0.0, 377.0); 60]).unwrap();
    let gamma = impedance_to_gamma(&z, &g).unwrap();
    let z2 = gamma_to_impedance(&gamma, &g).unwrap();
    for v in &z2.z_ohm {
        assert!((v - c(0.0, 377.0)).norm() <= 1e-12 * 377.0);
    }
}

#[test]
fn singular_denominator_names_the_index() {
    let g = reference();
    // cosθ_i − γ cosθ_r = 0 at γ = 2
    let mut gamma = vec![c(0.5, 0.0); 60];
    gamma[17] = c(2.0, 0.0);
    match gamma_to_impedance(&ReflectionProfile::new(gamma).unwrap(), &g) {
        Err(CoreError::Singular { index, .. }) => assert_eq!(index, 17),
        other => panic!("expected singular error, got {other:?}"),
    }
}

#[test]
fn linear_phase_profile_annihilates_the_residual() {
    let g = reference();
    for a in [c(1.0, 0.0), c(-0.3, 2.0)] {
        let gamma = g.u_r().iter().map(|u| a * u.conj()).collect();
        let h = helmholtz_residual(&ReflectionProfile::new(gamma).unwrap(), &g).unwrap();
        assert_eq!(h.len(), 58);
        assert!(h.iter().all(|v| v.abs() < 1e-10), "max {:e}", h.iter().cloned().fold(0.0, f64::max));
    }
    let sp = specular(20.0);
    let h = helmholtz_residual(&ReflectionProfile::new(vec![c(0.7, -0.2); 60]).unwrap(), &sp).unwrap();
    assert!(h.iter().all(|v| v.abs() < 1e-10));
}

#[test]
fn residual_refuses_zero_entries() {
    let g = reference();
    let mut gamma = vec![c(1.0, 0.0); 60];
    gamma[4] = c(0.0, 0.0);
    assert!(matches!(
        helmholtz_residual(&ReflectionProfile::new(gamma).unwrap(), &g),
        Err(CoreError::Degenerate { index: 4 })
    ));
}

/// Second-difference path evaluated here from the definition of `f_n`.
fn residual_by_differences(p: &ReflectionProfile, g: &SurfaceGrid) -> Vec<Complex64> {
    let k = g.kappa_rad_per_m;
    let (si, sr) = (g.scenario.theta_i_rad.sin(), g.scenario.theta_r_rad.sin());
    let dy = g.delta_y_m;
    let f: Vec<Complex64> =
        p.gamma.iter().zip(&g.y_m).map(|(v, &y)| v * Complex64::from_polar(1.0, k * (sr - si) * y)).collect();
    let d1: Vec<Complex64> = f.windows(2).map(|w| (w[1] - w[0]) / dy).collect();
    let d2: Vec<Complex64> = d1.windows(2).map(|w| (w[1] - w[0]) / dy).collect();
    (0..g.n() - 2).map(|n| dy * dy * (d2[n] - c(0.0, 2.0 * k * sr) * d1[n])).collect()
}

#[test]
fn residual_matches_the_three_term_form() {
    let g = reference();
    let k2dy2 = (g.kappa_rad_per_m * g.delta_y_m).powi(2);
    for seed in 0..20 {
        let p = random_profile(60, seed);
        let h = helmholtz_residual(&p, &g).unwrap();
        let oracle = residual_by_differences(&p, &g);
        for n in 0..58 {
            let gn = g_n(&p, &g, n).unwrap();
            assert!((gn - oracle[n]).norm() <= 1e-12 * oracle[n].norm().max(1e-300) + 1e-15);
            let via_g = gn.norm() / (k2dy2 * p.gamma[n].norm());
            assert!((h[n] - via_g).abs() <= 1e-12 * h[n].abs());
        }
    }
}

#[test]
fn g_n_vanishes_on_go_and_reduces_at_broadside() {
    let g = reference();
    let go: Vec<Complex64> = g.u_r().iter().map(|u| u.conj() * 2f64.sqrt()).collect();
    let p = ReflectionProfile::new(go).unwrap();
    for n in 0..58 {
        assert!(g_n(&p, &g, n).unwrap().norm() < 1e-12);
    }
    let b = specular(0.0).betas();
    assert_eq!(b, (c(1.0, 0.0), c(-2.0, 0.0)));
    assert!(matches!(g_n(&p, &g, 58), Err(CoreError::Index { index: 58, len: 58 })));
}

#[test]
fn net_power_of_the_zero_profile() {
    let g = reference();
    let ps = surface_net_power_flow(&ReflectionProfile::zeros(60), &g).unwrap();
    // −(E0² Lx/η0)·2Ly·cosθ_i
    let oracle = -(0.5 / 377.0) * (9.9304 * SPEED_OF_LIGHT / 28e9);
    assert!((ps - oracle).abs() <= 1e-12 * oracle.abs());
    assert!((ps - (-1.410e-4)).abs() < 5e-8);
}

#[test]
fn lossless_specular_profile_has_zero_net_power() {
    let g = specular(25.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let gamma = (0..60).map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..6.3))).collect();
    let ps = surface_net_power_flow(&ReflectionProfile::new(gamma).unwrap(), &g).unwrap();
    assert!(ps.abs() < 1e-18);
}

#[test]
fn go_amplitude_leaves_only_the_linear_term() {
    let g = reference();
    let go: Vec<Complex64> = g.u_r().iter().map(|u| u.conj() * (g.alpha_i / g.alpha_r).sqrt()).collect();
    let sum: Complex64 = go.iter().sum();
    let linear = g.power_scale() * 0.5 * g.alpha_ir * (sum + sum.conj()).re;
    let ps = surface_net_power_flow(&ReflectionProfile::new(go).unwrap(), &g).unwrap();
    assert!((ps - linear).abs() <= 1e-12 * g.power_scale());
    assert!(ps.abs() <= linear.abs() * (1.0 + 1e-12) + 1e-18);
}

#[test]
fn net_power_imaginary_part_is_negligible() {
    let g = reference();
    for seed in 0..50 {
        let v = surface_net_power_flow_complex(&random_profile(60, seed), &g).unwrap();
        assert!(v.im.abs() <= 1e-12 * v.re.abs().max(g.power_scale()));
    }
}

#[test]
fn phase_matched_flux_and_obliquity() {
    let g = reference();
    for th in [-30f64, 0.0, 60.0, 75.0] {
        let t = th.to_radians();
        let gamma: Vec<Complex64> = g.steering(t).iter().map(|u| u.conj()).collect();
        let flux = power_flux(&ReflectionProfile::new(gamma).unwrap(), &g, t);
        let oracle = g.a_k * g.delta_y_m.powi(2) * g.chi(t) * 3600.0;
        assert!((flux - oracle).abs() <= 1e-12 * oracle);
    }
    assert_eq!(power_flux(&ReflectionProfile::zeros(60), &g, 1.0), 0.0);
    let r = g.scenario.theta_r_rad;
    assert!((g.chi(r) - 4.0 * r.cos().powi(2)).abs() < 1e-15);
    assert!((g.chi_ir - g.chi(r)).abs() < 1e-15);
}

#[test]
fn pattern_matches_pointwise_flux_and_peaks_at_the_steered_angle() {
    let g = reference();
    let gamma: Vec<Complex64> = g.u_r().iter().map(|u| u.conj()).collect();
    let p = ReflectionProfile::new(gamma).unwrap();
    let r = g.scenario.theta_r_rad;
    let one = reradiation_pattern(&p, &g, &[r], Exec::Sequential);
    assert_eq!(one[0], power_flux(&p, &g, r));

    let th = angle_grid_deg(-90.0, 90.0, 0.1);
    assert_eq!(th.len(), 1801);
    let seq = reradiation_pattern(&p, &g, &th, Exec::Sequential);
    let par = reradiation_pattern(&p, &g, &th, Exec::Parallel);
    assert_eq!(seq, par);
    assert!(seq.iter().all(|v| *v >= 0.0));
    // |γᵀu_k|² alone peaks at θ_r; the obliquity factor favours smaller angles,
    // so compare the array factor and the flux separately.
    let af: Vec<f64> = th.iter().map(|&t| power_flux(&p, &g, t) / g.flux_scale(t)).collect();
    let imax = (0..af.len()).max_by(|&a, &b| af[a].total_cmp(&af[b])).unwrap();
    assert!((th[imax].to_degrees() - 60.0).abs() < 0.05);
}

#[test]
fn flux_is_quadratic_in_the_profile() {
    let g = reference();
    let p = random_profile(60, 11);
    let s = c(0.3, -1.7);
    let q = ReflectionProfile::new(p.gamma.iter().map(|v| v * s).collect()).unwrap();
    for th in [-0.5, 0.2, 1.0] {
        let (a, b) = (power_flux(&p, &g, th), power_flux(&q, &g, th));
        assert!((b - s.norm_sqr() * a).abs() <= 1e-12 * b);
    }
}
