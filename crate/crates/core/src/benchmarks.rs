//! Closed-form baseline profiles.
//!
//! GO is reconstructed as the constant-amplitude, linear-phase profile that
//! annihilates the Helmholtz residual, with amplitude `√(α_i/α_r)` so that
//! the constant and quadratic terms of the net power flow cancel. GO-RI
//! zeroes the resistive part of GO's impedance.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::em::{gamma_to_impedance, impedance_to_gamma, ImpedanceProfile, ReflectionProfile, SurfaceGrid};
use crate::CoreError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchmarkKind {
    Go,
    GoRi,
}

impl BenchmarkKind {
    pub const ALL: [BenchmarkKind; 2] = [BenchmarkKind::Go, BenchmarkKind::GoRi];

    pub fn tag(self) -> &'static str {
        match self {
            BenchmarkKind::Go => "go",
            BenchmarkKind::GoRi => "go_ri",
        }
    }

    pub fn profile(self, grid: &SurfaceGrid) -> Result<ReflectionProfile, CoreError> {
        match self {
            BenchmarkKind::Go => go_profile(grid),
            BenchmarkKind::GoRi => go_ri_profile(grid),
        }
    }
}

/// `γ_n = √(α_i/α_r)·e^{−jκ(sinθ_r − sinθ_i)y_n}`.
pub fn go_profile(grid: &SurfaceGrid) -> Result<ReflectionProfile, CoreError> {
    if grid.alpha_r <= 1e-15 {
        return Err(CoreError::InvalidScenario("GO needs cos θ_r > 0".into()));
    }
    let amp = (grid.alpha_i / grid.alpha_r).sqrt();
    Ok(ReflectionProfile { gamma: grid.u_r().iter().map(|u| amp * u.conj()).collect() })
}

/// GO with `Re(z_n)` set to zero.
pub fn go_ri_profile(grid: &SurfaceGrid) -> Result<ReflectionProfile, CoreError> {
    let z = gamma_to_impedance(&go_profile(grid)?, grid)?;
    let reactive = ImpedanceProfile { z_ohm: z.z_ohm.iter().map(|z| Complex64::new(0.0, z.im)).collect() };
    impedance_to_gamma(&reactive, grid)
}
