//! Affine under-estimators of the convex terms that appear with a negative
//! sign, plus the reactive-impedance constraint pair.
//!
//! A [`Tangent`] stores `L(γ) = c + Σ_k 2·Re(w_k·conj(γ_k))`, where `w_k` is
//! the Wirtinger derivative `∂f/∂γ̄_k` at the expansion point.

use nalgebra::DMatrix;
use num_complex::Complex64;
use risopt_conic::LinExpr;
use serde::{Deserialize, Serialize};

use crate::em::{g_coefficients, SurfaceGrid};
use crate::CoreError;

/// Expansion point of one convex subproblem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearizationPoint {
    pub gamma_bar: Vec<Complex64>,
    pub gamma_mat_bar: Option<DMatrix<Complex64>>,
}

impl LinearizationPoint {
    pub fn vector(gamma_bar: Vec<Complex64>) -> Self {
        Self { gamma_bar, gamma_mat_bar: None }
    }

    /// Vector point plus its rank-one lift `γ̄γ̄ᴴ`.
    pub fn lifted(gamma_bar: Vec<Complex64>) -> Self {
        let g = DMatrix::from_column_slice(gamma_bar.len(), 1, &gamma_bar);
        let m = &g * g.adjoint();
        Self { gamma_bar, gamma_mat_bar: Some(m) }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        let Some(m) = &self.gamma_mat_bar else { return Ok(()) };
        let n = self.gamma_bar.len();
        if m.nrows() != n || m.ncols() != n {
            return Err(CoreError::Shape { expected: n, found: m.nrows() });
        }
        let herm = (m - m.adjoint()).iter().fold(0.0f64, |a, v| a.max(v.norm()));
        let scale = m.iter().fold(1.0f64, |a, v| a.max(v.norm()));
        if herm > 1e-12 * scale {
            return Err(CoreError::InvalidPoint(format!("Γ̄ is not Hermitian (deviation {herm:e})")));
        }
        let trace: f64 = (0..n).map(|i| m[(i, i)].re).sum();
        let lmin = risopt_conic::embed_hermitian_matrix(m).symmetric_eigenvalues().min();
        if lmin < -1e-9 * trace.abs().max(1e-300) {
            return Err(CoreError::InvalidPoint(format!("Γ̄ is not PSD (λ_min = {lmin:e})")));
        }
        Ok(())
    }
}

/// Affine real functional of a complex vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Tangent {
    pub constant: f64,
    pub grad: Vec<(usize, Complex64)>,
}

impl Tangent {
    pub fn zero() -> Self {
        Self { constant: 0.0, grad: Vec::new() }
    }

    /// Tangent of a convex `f` at `x̄` from its value and Wirtinger gradient.
    fn at(value: f64, grad: Vec<(usize, Complex64)>, expansion: impl Fn(usize) -> Complex64) -> Self {
        let lin: f64 = grad.iter().map(|&(k, w)| 2.0 * (w * expansion(k).conj()).re).sum();
        Self { constant: value - lin, grad }
    }

    pub fn eval(&self, gamma: &[Complex64]) -> f64 {
        self.constant + self.grad.iter().map(|&(k, w)| 2.0 * (w * gamma[k].conj()).re).sum::<f64>()
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.constant *= s;
        for (_, w) in &mut self.grad {
            *w *= s;
        }
        self
    }

    /// Real linear form over `x` with `Re γ_k` at `re0 + k` and `Im γ_k` at `im0 + k`.
    pub fn to_lin_expr(&self, re0: usize, im0: usize) -> LinExpr {
        let mut e = LinExpr::constant(self.constant);
        for &(k, w) in &self.grad {
            e.add_term(re0 + k, 2.0 * w.re);
            e.add_term(im0 + k, 2.0 * w.im);
        }
        e
    }
}

/// Affine real functional of a Hermitian matrix: `c + Σ 2·Re(W_nm·conj(Γ_nm))`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixTangent {
    pub constant: f64,
    pub grad: DMatrix<Complex64>,
}

impl MatrixTangent {
    pub fn eval(&self, m: &DMatrix<Complex64>) -> f64 {
        self.constant + self.grad.iter().zip(m.iter()).map(|(w, g)| 2.0 * (w * g.conj()).re).sum::<f64>()
    }
}

/// Tangent of `|γ_n|` at `γ̄_n`, acting on slot `index`.
pub fn abs_tangent(gamma_bar_n: Complex64, index: usize) -> Tangent {
    let r = gamma_bar_n.norm();
    if r == 0.0 {
        return Tangent::zero();
    }
    Tangent::at(r, vec![(index, 0.5 * gamma_bar_n / r)], |_| gamma_bar_n)
}

/// Tangent of `|g_n|` over slots `n, n+1, n+2`; zero when `g_n` is at rounding level.
pub fn gn_abs_tangent(triplet: [Complex64; 3], grid: &SurfaceGrid, n: usize) -> Tangent {
    let c = g_coefficients(grid, n);
    let g: Complex64 = (0..3).map(|k| c[k] * triplet[k]).sum();
    let r = g.norm();
    let size: f64 = (0..3).map(|k| (c[k] * triplet[k]).norm()).sum();
    if r <= 1e-13 * size {
        return Tangent::zero();
    }
    let grad = (0..3).map(|k| (n + k, 0.5 * c[k].conj() * g / r)).collect();
    Tangent::at(r, grad, |k| triplet[k - n])
}

/// Tangent of `‖γ‖²` at `γ̄` (`f_V`).
pub fn norm_sq_tangent(gamma_bar: &[Complex64]) -> Tangent {
    let v: f64 = gamma_bar.iter().map(|g| g.norm_sqr()).sum();
    Tangent::at(v, gamma_bar.iter().copied().enumerate().collect(), |k| gamma_bar[k])
}

/// Tangent of `a_XΔ_yα_r‖γ‖²` at `γ̄` (`p_S`).
pub fn quadratic_tangent_ps(gamma_bar: &[Complex64], grid: &SurfaceGrid) -> Tangent {
    norm_sq_tangent(gamma_bar).scaled(grid.power_scale() * grid.alpha_r)
}

/// Tangent of `‖Γ‖_F` at `Γ̄` (`f_F`).
pub fn fro_tangent(gamma_mat_bar: &DMatrix<Complex64>) -> MatrixTangent {
    let f = gamma_mat_bar.norm();
    if f == 0.0 {
        let (r, c) = gamma_mat_bar.shape();
        return MatrixTangent { constant: 0.0, grad: DMatrix::zeros(r, c) };
    }
    let grad = gamma_mat_bar.map(|v| 0.5 * v / f);
    let lin: f64 = grad.iter().zip(gamma_mat_bar.iter()).map(|(w, g)| 2.0 * (w * g.conj()).re).sum();
    MatrixTangent { constant: f - lin, grad }
}

/// The convex constraint (12) and the linearized (13) for one element.
///
/// Both are written as `value ≤ 0` in terms of `(Re γ_n, Im γ_n)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReactivePair {
    pub alpha_i: f64,
    pub alpha_r: f64,
    /// `ε̃_RI = ε_RI/η_0`.
    pub eps: f64,
    pub gamma_bar: Complex64,
}

impl ReactivePair {
    /// `α_r|γ|² − (α_i − α_r)Re γ − α_i`.
    pub fn convex_value(&self, g: Complex64) -> f64 {
        self.alpha_r * g.norm_sqr() - (self.alpha_i - self.alpha_r) * g.re - self.alpha_i
    }

    /// `α̃_r = (1 + ε̃α_r)α_r`.
    pub fn alpha_r_tilde(&self) -> f64 {
        (1.0 + self.eps * self.alpha_r) * self.alpha_r
    }

    /// `ψ(γ) = α_i(1 − ε̃α_i) + (α_i − α_r + 2ε̃α_iα_r)Re γ`.
    pub fn psi(&self, g: Complex64) -> f64 {
        let (ai, ar, e) = (self.alpha_i, self.alpha_r, self.eps);
        ai * (1.0 - e * ai) + (ai - ar + 2.0 * e * ai * ar) * g.re
    }

    /// Concave constraint (13) before linearization: `ψ(γ) − α̃_r|γ|²`.
    pub fn concave_value(&self, g: Complex64) -> f64 {
        self.psi(g) - self.alpha_r_tilde() * g.norm_sqr()
    }

    /// `ψ(γ) − α̃_r(|γ̄|² + 2Re(γ̄*(γ − γ̄)))`.
    pub fn linearized_value(&self, g: Complex64) -> f64 {
        let gb = self.gamma_bar;
        self.psi(g) - self.alpha_r_tilde() * (gb.norm_sqr() + 2.0 * (gb.conj() * (g - gb)).re)
    }

    /// Linearized (13) as `c + a·Re γ + b·Im γ`.
    pub fn linearized_coefficients(&self) -> (f64, f64, f64) {
        let gb = self.gamma_bar;
        let (ai, ar, e) = (self.alpha_i, self.alpha_r, self.eps);
        let at = self.alpha_r_tilde();
        let c = ai * (1.0 - e * ai) + at * gb.norm_sqr();
        let a = (ai - ar + 2.0 * e * ai * ar) - 2.0 * at * gb.re;
        let b = -2.0 * at * gb.im;
        (c, a, b)
    }
}

pub fn reactive_constraints(gamma_bar_n: Complex64, grid: &SurfaceGrid, eps_ri_ohm: f64) -> ReactivePair {
    ReactivePair { alpha_i: grid.alpha_i, alpha_r: grid.alpha_r, eps: eps_ri_ohm / grid.eta0(), gamma_bar: gamma_bar_n }
}
