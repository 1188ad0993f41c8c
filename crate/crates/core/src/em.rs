//! Impedance-boundary model of a 1-D sampled surface: grid, γ↔z maps,
//! Helmholtz residual, net power flow and far-field power flux.
//!
//! Indices in this module are 0-based: sample `n` of the text's 1-based
//! numbering lives at `gamma[n - 1]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use risopt_conic::Exec;
use serde::{Deserialize, Serialize};

use crate::CoreError;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Relative tolerance used when deciding that `2·L_y/Δ_y` is an integer.
pub const GRID_INTEGER_RTOL: f64 = 1e-4;

const J: Complex64 = Complex64::new(0.0, 1.0);

/// Physical setup. Angles in radians, lengths in metres.
///
/// The sampling step along `x` plays no role in any formula used here and
/// is therefore not stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub frequency_hz: f64,
    pub theta_i_rad: f64,
    pub theta_r_rad: f64,
    pub eta0_ohm: f64,
    /// Incident field amplitude `E_0`, used as a bare number.
    pub e0_field_amplitude: f64,
    /// Half-length `L_x`.
    pub lx_m: f64,
    /// Half-length `L_y`.
    pub ly_m: f64,
    pub delta_y_m: f64,
    /// Observation distance `R_k`, shared by every direction.
    pub r_obs_m: f64,
}

impl Scenario {
    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }

    /// 28 GHz, θ_i = 0°, θ_r = 60°, L_y = 4.9652λ, Δ_y = λ/6.0420.
    pub fn reference() -> Self {
        let lambda = SPEED_OF_LIGHT / 28e9;
        Self {
            frequency_hz: 28e9,
            theta_i_rad: 0.0,
            theta_r_rad: 60f64.to_radians(),
            eta0_ohm: 377.0,
            e0_field_amplitude: 1.0,
            lx_m: 0.5,
            ly_m: 4.9652 * lambda,
            delta_y_m: lambda / 6.0420,
            r_obs_m: 100.0,
        }
    }

    /// Same geometry with `n` samples at the reference spacing.
    pub fn with_samples(&self, n: usize) -> Self {
        let mut s = self.clone();
        s.ly_m = 0.5 * n as f64 * self.delta_y_m;
        s
    }
}

/// Sample ordinates and the constants derived from a [`Scenario`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGrid {
    pub scenario: Scenario,
    pub n_samples: usize,
    pub y_m: Vec<f64>,
    /// `2·L_y/N`; equals the scenario's `Δ_y` up to the integer tolerance.
    pub delta_y_m: f64,
    pub lambda_m: f64,
    pub kappa_rad_per_m: f64,
    pub alpha_i: f64,
    pub alpha_r: f64,
    pub alpha_ir: f64,
    pub c_i: f64,
    pub a_x: f64,
    pub a_k: f64,
    pub chi_ir: f64,
}

pub fn build_grid(scenario: &Scenario) -> Result<SurfaceGrid, CoreError> {
    let s = scenario;
    let positive = [
        ("frequency_hz", s.frequency_hz),
        ("eta0_ohm", s.eta0_ohm),
        ("e0_field_amplitude", s.e0_field_amplitude),
        ("lx_m", s.lx_m),
        ("ly_m", s.ly_m),
        ("delta_y_m", s.delta_y_m),
        ("r_obs_m", s.r_obs_m),
    ];
    for (name, v) in positive {
        if !(v.is_finite() && v > 0.0) {
            return Err(CoreError::InvalidScenario(format!("{name} must be positive and finite, got {v}")));
        }
    }
    for (name, th) in [("theta_i_rad", s.theta_i_rad), ("theta_r_rad", s.theta_r_rad)] {
        if !(th.is_finite() && th.abs() < PI / 2.0) {
            return Err(CoreError::InvalidScenario(format!("{name} must lie in (-π/2, π/2), got {th}")));
        }
    }
    let raw = 2.0 * s.ly_m / s.delta_y_m;
    let n = raw.round();
    if n < 1.0 || (raw - n).abs() > GRID_INTEGER_RTOL * raw {
        return Err(CoreError::InvalidScenario(format!(
            "2·L_y/Δ_y = {raw:.9} is not an integer within relative tolerance {GRID_INTEGER_RTOL:e}"
        )));
    }
    let n = n as usize;
    let dy = 2.0 * s.ly_m / n as f64;
    let y_m = (1..=n).map(|k| -s.ly_m - 0.5 * dy + k as f64 * dy).collect();
    let lambda = s.wavelength_m();
    let kappa = 2.0 * PI / lambda;
    let alpha_i = s.theta_i_rad.cos();
    let alpha_r = s.theta_r_rad.cos();
    let e0sq = s.e0_field_amplitude * s.e0_field_amplitude;
    let a_x = e0sq * s.lx_m / s.eta0_ohm;
    let a_k = kappa * kappa / s.eta0_ohm * e0sq * s.lx_m * s.lx_m / (8.0 * PI * PI * s.r_obs_m * s.r_obs_m);
    Ok(SurfaceGrid {
        scenario: s.clone(),
        n_samples: n,
        y_m,
        delta_y_m: dy,
        lambda_m: lambda,
        kappa_rad_per_m: kappa,
        alpha_i,
        alpha_r,
        alpha_ir: alpha_r - alpha_i,
        c_i: -(n as f64) * alpha_i,
        a_x,
        a_k,
        chi_ir: 4.0 * alpha_r * alpha_r,
    })
}

impl SurfaceGrid {
    pub fn n(&self) -> usize {
        self.n_samples
    }

    pub fn sin_i(&self) -> f64 {
        self.scenario.theta_i_rad.sin()
    }

    pub fn sin_r(&self) -> f64 {
        self.scenario.theta_r_rad.sin()
    }

    pub fn eta0(&self) -> f64 {
        self.scenario.eta0_ohm
    }

    /// `u_n = e^{jκ(sinθ_r − sinθ_i)y_n}`.
    pub fn u_r(&self) -> Vec<Complex64> {
        self.steering(self.scenario.theta_r_rad)
    }

    /// `u_{ik,n} = e^{jκ(sinθ_k − sinθ_i)y_n}`.
    pub fn steering(&self, theta_k: f64) -> Vec<Complex64> {
        let k = self.kappa_rad_per_m * (theta_k.sin() - self.sin_i());
        self.y_m.iter().map(|y| Complex64::from_polar(1.0, k * y)).collect()
    }

    /// `χ_ik = (cosθ_r + cosθ_k)²`.
    pub fn chi(&self, theta_k: f64) -> f64 {
        (self.alpha_r + theta_k.cos()).powi(2)
    }

    /// `a_k Δ_y² χ_ik`, the flux prefactor towards `θ_k`.
    pub fn flux_scale(&self, theta_k: f64) -> f64 {
        self.a_k * self.delta_y_m * self.delta_y_m * self.chi(theta_k)
    }

    /// `a_X Δ_y`, the net-power prefactor.
    pub fn power_scale(&self) -> f64 {
        self.a_x * self.delta_y_m
    }

    /// `(β_1, β_2)` of the explicit residual.
    pub fn betas(&self) -> (Complex64, Complex64) {
        let b = 2.0 * J * self.kappa_rad_per_m * self.sin_r() * self.delta_y_m;
        (1.0 + b, -(2.0 + b))
    }

    fn check_len(&self, len: usize) -> Result<(), CoreError> {
        if len != self.n_samples {
            return Err(CoreError::Shape { expected: self.n_samples, found: len });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectionProfile {
    pub gamma: Vec<Complex64>,
}

impl ReflectionProfile {
    pub fn new(gamma: Vec<Complex64>) -> Result<Self, CoreError> {
        if let Some(i) = gamma.iter().position(|g| !(g.re.is_finite() && g.im.is_finite())) {
            return Err(CoreError::NonFinite { index: i });
        }
        Ok(Self { gamma })
    }

    pub fn zeros(n: usize) -> Self {
        Self { gamma: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.gamma.iter().map(|g| g.norm_sqr()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImpedanceProfile {
    pub z_ohm: Vec<Complex64>,
}

impl ImpedanceProfile {
    pub fn new(z_ohm: Vec<Complex64>) -> Result<Self, CoreError> {
        if let Some(i) = z_ohm.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(CoreError::NonFinite { index: i });
        }
        Ok(Self { z_ohm })
    }
}

/// `z_n = η_0(1 + γ_n)/(cosθ_i − γ_n cosθ_r)`.
pub fn gamma_to_impedance(g: &ReflectionProfile, grid: &SurfaceGrid) -> Result<ImpedanceProfile, CoreError> {
    grid.check_len(g.len())?;
    let eta0 = grid.eta0();
    let z = g
        .gamma
        .iter()
        .enumerate()
        .map(|(i, &gn)| {
            let den = grid.alpha_i - gn * grid.alpha_r;
            if den.norm() < 1e-12 {
                Err(CoreError::Singular { index: i, what: "cosθ_i − γ_n cosθ_r" })
            } else {
                Ok(eta0 * (1.0 + gn) / den)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ImpedanceProfile { z_ohm: z })
}

/// `γ_n = (z_n cosθ_i − η_0)/(z_n cosθ_r + η_0)`.
pub fn impedance_to_gamma(z: &ImpedanceProfile, grid: &SurfaceGrid) -> Result<ReflectionProfile, CoreError> {
    grid.check_len(z.z_ohm.len())?;
    let eta0 = grid.eta0();
    let g = z
        .z_ohm
        .iter()
        .enumerate()
        .map(|(i, &zn)| {
            let den = zn * grid.alpha_r + eta0;
            if den.norm() < 1e-12 * eta0 {
                Err(CoreError::Singular { index: i, what: "z_n cosθ_r + η_0" })
            } else {
                Ok((zn * grid.alpha_i - eta0) / den)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ReflectionProfile { gamma: g })
}

/// `H_n = |f''_n − 2jκ f'_n sinθ_r| / (κ²|γ_n|)` from forward differences of
/// `f_n = γ_n u_n`; returns `N − 2` values.
pub fn helmholtz_residual(g: &ReflectionProfile, grid: &SurfaceGrid) -> Result<Vec<f64>, CoreError> {
    grid.check_len(g.len())?;
    let n = grid.n();
    if n < 3 {
        return Ok(Vec::new());
    }
    let u = grid.u_r();
    let dy = grid.delta_y_m;
    let kappa = grid.kappa_rad_per_m;
    let f: Vec<Complex64> = g.gamma.iter().zip(&u).map(|(a, b)| a * b).collect();
    let d1: Vec<Complex64> = (0..n - 1).map(|k| (f[k + 1] - f[k]) / dy).collect();
    (0..n - 2)
        .map(|k| {
            let mag = g.gamma[k].norm();
            if mag < 1e-300 {
                return Err(CoreError::Degenerate { index: k });
            }
            let d2 = (d1[k + 1] - d1[k]) / dy;
            Ok((d2 - 2.0 * J * kappa * d1[k] * grid.sin_r()).norm() / (kappa * kappa * mag))
        })
        .collect()
}

/// `g_n = u_{n+2}γ_{n+2} + β_2 u_{n+1}γ_{n+1} + β_1 u_nγ_n` for `n` in `0..N−2`.
pub fn g_n(g: &ReflectionProfile, grid: &SurfaceGrid, n: usize) -> Result<Complex64, CoreError> {
    grid.check_len(g.len())?;
    if n + 2 >= grid.n() {
        return Err(CoreError::Index { index: n, len: grid.n().saturating_sub(2) });
    }
    let c = g_coefficients(grid, n);
    Ok(c[0] * g.gamma[n] + c[1] * g.gamma[n + 1] + c[2] * g.gamma[n + 2])
}

/// `(β_1u_n, β_2u_{n+1}, u_{n+2})`, the linear weights of `g_n`.
pub fn g_coefficients(grid: &SurfaceGrid, n: usize) -> [Complex64; 3] {
    let (b1, b2) = grid.betas();
    let k = grid.kappa_rad_per_m * (grid.sin_r() - grid.sin_i());
    let u = |i: usize| Complex64::from_polar(1.0, k * grid.y_m[i]);
    [b1 * u(n), b2 * u(n + 1), u(n + 2)]
}

/// Net power flow with its imaginary rounding residue, before truncation.
pub fn surface_net_power_flow_complex(g: &ReflectionProfile, grid: &SurfaceGrid) -> Result<Complex64, CoreError> {
    grid.check_len(g.len())?;
    let quad: Complex64 = g.gamma.iter().map(|v| v.conj() * v).sum();
    let sum: Complex64 = g.gamma.iter().sum();
    let sum_h: Complex64 = g.gamma.iter().map(|v| v.conj()).sum();
    Ok(grid.power_scale() * (grid.c_i + grid.alpha_r * quad + 0.5 * grid.alpha_ir * (sum + sum_h)))
}

/// `P_S = a_XΔ_y(c_i + α_rγᴴγ + 0.5α_ir(1ᵀγ + γᴴ1))` in watts.
pub fn surface_net_power_flow(g: &ReflectionProfile, grid: &SurfaceGrid) -> Result<f64, CoreError> {
    let p = surface_net_power_flow_complex(g, grid)?;
    let scale = grid.power_scale() * (grid.c_i.abs() + grid.alpha_r * g.norm_sqr() + 1.0);
    debug_assert!(p.im.abs() <= 1e-12 * scale, "net power has imaginary part {}", p.im);
    Ok(p.re)
}

/// `P_θk = a_kΔ_y²χ_ik|γᵀu_ik|²` in W/m².
pub fn power_flux(g: &ReflectionProfile, grid: &SurfaceGrid, theta_k_rad: f64) -> f64 {
    let k = grid.kappa_rad_per_m * (theta_k_rad.sin() - grid.sin_i());
    let s: Complex64 = g.gamma.iter().zip(&grid.y_m).map(|(gn, y)| gn * Complex64::from_polar(1.0, k * y)).sum();
    grid.flux_scale(theta_k_rad) * s.norm_sqr()
}

/// [`power_flux`] over a sweep of angles.
pub fn reradiation_pattern(g: &ReflectionProfile, grid: &SurfaceGrid, thetas: &[f64], exec: Exec) -> Vec<f64> {
    exec.map_range(thetas.len(), |i| power_flux(g, grid, thetas[i]))
}

/// `[lo, lo + step, …]` up to `hi` inclusive, in radians from degrees.
pub fn angle_grid_deg(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| (lo + i as f64 * step).to_radians()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_grid_has_sixty_samples() {
        let g = build_grid(&Scenario::reference()).unwrap();
        assert_eq!(g.n(), 60);
        assert_eq!(g.c_i, -60.0);
    }

    #[test]
    fn non_integer_sample_count_is_rejected() {
        let mut s = Scenario::reference();
        s.ly_m *= 1.01;
        assert!(matches!(build_grid(&s), Err(CoreError::InvalidScenario(_))));
    }

    #[test]
    fn grazing_angles_are_rejected() {
        let mut s = Scenario::reference();
        s.theta_r_rad = PI / 2.0;
        assert!(build_grid(&s).is_err());
    }

    #[test]
    fn angle_grid_counts_endpoints() {
        assert_eq!(angle_grid_deg(-2.0, 2.0, 0.1).len(), 41);
        assert_eq!(angle_grid_deg(-90.0, 90.0, 0.1).len(), 1801);
    }
}
