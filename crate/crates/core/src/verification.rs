//! Independent checks of the original (non-linearized) constraints, of the
//! Wirtinger gradients and of the tangent under-estimators.
//!
//! The formulas below are written out again on purpose instead of calling
//! into [`crate::em`], so that an error there cannot hide itself.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use risopt_conic::Exec;
use serde::{Deserialize, Serialize};

use crate::builders::ProblemKind;
use crate::builders::ToleranceSet;
use crate::convexify::{
    abs_tangent, fro_tangent, gn_abs_tangent, norm_sq_tangent, quadratic_tangent_ps, LinearizationPoint, Tangent,
};
use crate::em::{ReflectionProfile, SurfaceGrid};
use crate::CoreError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    HelmholtzBand,
    Mask,
    NetPower,
    ReactiveBand,
    RankOne,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::HelmholtzBand => "helmholtz_band",
            Family::Mask => "mask",
            Family::NetPower => "net_power",
            Family::ReactiveBand => "reactive_band",
            Family::RankOne => "rank_one",
        })
    }
}

/// Slack allowed on top of each family's own bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AuditTolerances {
    pub helmholtz_abs: f64,
    /// Relative to `ε_RM`.
    pub mask_rel: f64,
    /// Relative to `ε_SP`.
    pub net_power_rel: f64,
    /// Ω.
    pub reactive_ohm: f64,
    /// `‖Γ − γγᴴ‖_F ≤ rank_one_rel·‖γ‖²`.
    pub rank_one_rel: f64,
}

impl Default for AuditTolerances {
    fn default() -> Self {
        Self { helmholtz_abs: 1e-9, mask_rel: 1e-6, net_power_rel: 1e-6, reactive_ohm: 1e-6, rank_one_rel: 1e-5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyCheck {
    pub family: Family,
    /// `max(0, value − bound)` over the family.
    pub worst_violation: f64,
    pub tolerance: f64,
    pub worst_index: Option<usize>,
    /// Raw extreme value (`H_n`, flux, `|P_S|`, `Re z`, gap).
    pub extreme_value: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub kind: ProblemKind,
    pub checks: Vec<FamilyCheck>,
    pub pass: bool,
}

impl FeasibilityReport {
    pub fn family(&self, f: Family) -> Option<&FamilyCheck> {
        self.checks.iter().find(|c| c.family == f)
    }

    pub fn first_failure(&self) -> Option<&FamilyCheck> {
        self.checks.iter().find(|c| !c.pass)
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "audit {} -> {}", self.kind, if self.pass { "pass" } else { "FAIL" })?;
        for c in &self.checks {
            writeln!(
                f,
                "  {:<15} worst {:.3e} (tol {:.1e}) extreme {:.6e} at {:?} {}",
                c.family.to_string(),
                c.worst_violation,
                c.tolerance,
                c.extreme_value,
                c.worst_index,
                if c.pass { "ok" } else { "VIOLATED" }
            )?;
        }
        Ok(())
    }
}

struct Oracle<'a> {
    grid: &'a SurfaceGrid,
    kappa: f64,
    dy: f64,
}

impl<'a> Oracle<'a> {
    fn new(grid: &'a SurfaceGrid) -> Self {
        Self { grid, kappa: 2.0 * PI / grid.lambda_m, dy: grid.delta_y_m }
    }

    fn phase(&self, theta: f64, y: f64) -> Complex64 {
        Complex64::cis(self.kappa * (theta.sin() - self.grid.scenario.theta_i_rad.sin()) * y)
    }

    /// `H_n` through explicit first and second differences.
    fn helmholtz(&self, g: &[Complex64]) -> Vec<f64> {
        let th_r = self.grid.scenario.theta_r_rad;
        let f: Vec<Complex64> = g.iter().zip(&self.grid.y_m).map(|(v, &y)| v * self.phase(th_r, y)).collect();
        (0..g.len().saturating_sub(2))
            .map(|n| {
                let fp = (f[n + 1] - f[n]) / self.dy;
                let fp1 = (f[n + 2] - f[n + 1]) / self.dy;
                let fpp = (fp1 - fp) / self.dy;
                let r = fpp - Complex64::new(0.0, 2.0 * self.kappa * th_r.sin()) * fp;
                r.norm() / (self.kappa * self.kappa * g[n].norm())
            })
            .collect()
    }

    fn flux(&self, g: &[Complex64], theta: f64) -> f64 {
        let s = self.grid.scenario.clone();
        let sum: Complex64 = g.iter().zip(&self.grid.y_m).map(|(v, &y)| v * self.phase(theta, y)).sum();
        let chi = (s.theta_r_rad.cos() + theta.cos()).powi(2);
        let a_k = self.kappa.powi(2) / s.eta0_ohm * s.e0_field_amplitude.powi(2) * s.lx_m.powi(2)
            / (8.0 * PI * PI * s.r_obs_m.powi(2));
        a_k * self.dy * self.dy * chi * sum.norm_sqr()
    }

    fn net_power(&self, g: &[Complex64]) -> f64 {
        let s = &self.grid.scenario;
        let (ci, cr) = (s.theta_i_rad.cos(), s.theta_r_rad.cos());
        let a_x = s.e0_field_amplitude.powi(2) * s.lx_m / s.eta0_ohm;
        let c_i = -2.0 * s.ly_m * ci / self.dy;
        let q: f64 = g.iter().map(|v| v.re * v.re + v.im * v.im).sum();
        let lin: f64 = g.iter().map(|v| 2.0 * v.re).sum();
        a_x * self.dy * (c_i + cr * q + 0.5 * (cr - ci) * lin)
    }

    fn resistance(&self, g: Complex64) -> f64 {
        let s = &self.grid.scenario;
        let z = s.eta0_ohm * (1.0 + g) / (s.theta_i_rad.cos() - g * s.theta_r_rad.cos());
        z.re
    }
}

fn family(fam: Family, values: impl Iterator<Item = (usize, f64, f64)>, tolerance: f64) -> FamilyCheck {
    let mut top = f64::NEG_INFINITY;
    let mut idx = None;
    let mut extreme = f64::NAN;
    for (i, value, violation) in values {
        let v = if violation.is_nan() { f64::INFINITY } else { violation };
        if idx.is_none() || v > top {
            top = v;
            idx = Some(i);
            extreme = value;
        }
    }
    let worst = top.max(0.0);
    FamilyCheck { family: fam, worst_violation: worst, tolerance, worst_index: idx, extreme_value: extreme, pass: worst <= tolerance }
}

/// Evaluates the original constraints of `kind` at a profile.
pub fn audit(
    profile: &ReflectionProfile,
    gamma_mat: Option<&DMatrix<Complex64>>,
    kind: ProblemKind,
    tol: &ToleranceSet,
    grid: &SurfaceGrid,
    at: &AuditTolerances,
) -> FeasibilityReport {
    let o = Oracle::new(grid);
    let g = &profile.gamma;
    let mut checks = Vec::new();
    if kind == ProblemKind::SHc {
        checks.push(helmholtz_check(&o, g, tol, at));
    }
    if kind.has_mask() {
        checks.push(family(
            Family::Mask,
            tol.mask_angles_rad.iter().enumerate().map(|(i, &th)| {
                let f = o.flux(g, th);
                (i, f, f - tol.eps_rm)
            }),
            at.mask_rel * tol.eps_rm,
        ));
    }
    if kind.is_lifted() {
        let p = o.net_power(g);
        checks.push(family(Family::NetPower, std::iter::once((0, p, p.abs() - tol.eps_sp)), at.net_power_rel * tol.eps_sp));
    }
    if kind.is_reactive() {
        checks.push(reactive_check(&o, g, tol, at));
    }
    if kind.is_lifted() {
        let norm2: f64 = g.iter().map(|v| v.norm_sqr()).sum();
        let gap = match gamma_mat {
            Some(m) => rank_one_gap(g, m),
            None => f64::INFINITY,
        };
        checks.push(family(Family::RankOne, std::iter::once((0, gap, gap)), at.rank_one_rel * norm2));
    }
    let pass = checks.iter().all(|c| c.pass);
    FeasibilityReport { kind, checks, pass }
}

fn helmholtz_check(o: &Oracle, g: &[Complex64], tol: &ToleranceSet, at: &AuditTolerances) -> FamilyCheck {
    let h = o.helmholtz(g);
    family(
        Family::HelmholtzBand,
        h.into_iter().enumerate().map(|(i, v)| (i, v, (tol.eps_hc_l - v).max(v - tol.eps_hc_u))),
        at.helmholtz_abs,
    )
}

fn reactive_check(o: &Oracle, g: &[Complex64], tol: &ToleranceSet, at: &AuditTolerances) -> FamilyCheck {
    family(
        Family::ReactiveBand,
        g.iter().enumerate().map(|(i, &v)| {
            let r = o.resistance(v);
            (i, r, (-r).max(r - tol.eps_ri))
        }),
        at.reactive_ohm,
    )
}

/// Checks only the families whose subproblem constraints are
/// linearizations, which must hold at every accepted iterate.
pub fn midrun_audit(
    kind: ProblemKind,
    point: &LinearizationPoint,
    grid: &SurfaceGrid,
    tol: &ToleranceSet,
    at: &AuditTolerances,
) -> Option<FamilyCheck> {
    let o = Oracle::new(grid);
    let g = &point.gamma_bar;
    let check = match kind {
        ProblemKind::SHc => helmholtz_check(&o, g, tol, at),
        ProblemKind::SRi => reactive_check(&o, g, tol, at),
        ProblemKind::PRi => {
            let m = point.gamma_mat_bar.as_ref()?;
            let (ai, ar) = (grid.alpha_i, grid.alpha_r);
            let e = tol.eps_ri / grid.eta0();
            family(
                Family::ReactiveBand,
                g.iter().enumerate().map(|(i, v)| {
                    let d = m[(i, i)].re;
                    let lo = ar * d - (ai - ar) * v.re - ai;
                    let hi = -(1.0 + e * ar) * ar * d + ai * (1.0 - e * ai) + (ai - ar + 2.0 * e * ai * ar) * v.re;
                    (i, lo.max(hi), lo.max(hi))
                }),
                1e-9,
            )
        }
        _ => return None,
    };
    (!check.pass).then_some(check)
}

/// `‖Γ − γγᴴ‖_F`.
pub fn rank_one_gap(g: &[Complex64], m: &DMatrix<Complex64>) -> f64 {
    let mut s = 0.0;
    for r in 0..g.len() {
        for c in 0..g.len() {
            s += (m[(r, c)] - g[r] * g[c].conj()).norm_sqr();
        }
    }
    s.sqrt()
}

/// Functions whose Wirtinger gradients are checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientTarget {
    AbsGamma(usize),
    NormSq,
    AbsG(usize),
    Frobenius,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Vector(Vec<Complex64>),
    Matrix(DMatrix<Complex64>),
}

/// Max-norm relative error between the analytic gradient and central
/// differences over the real coordinates, or an error at nonsmooth points.
pub fn fd_gradient_check(target: GradientTarget, point: &Point, grid: &SurfaceGrid, h: f64) -> Result<f64, CoreError> {
    const GUARD: f64 = 1e-3;
    match (target, point) {
        (GradientTarget::Frobenius, Point::Matrix(m)) => {
            let f0 = m.norm();
            if f0 <= GUARD {
                return Err(CoreError::Nonsmooth(format!("‖Γ‖_F = {f0:e}")));
            }
            let t = fro_tangent(m);
            let n = m.nrows();
            let mut dirs = Vec::new();
            for r in 0..n {
                for c in r..n {
                    dirs.push(hermitian_dir(n, r, c, Complex64::new(1.0, 0.0)));
                    if r < c {
                        dirs.push(hermitian_dir(n, r, c, Complex64::new(0.0, 1.0)));
                    }
                }
            }
            let mut an = Vec::new();
            let mut fd = Vec::new();
            for d in &dirs {
                an.push(t.eval(d) - t.constant);
                fd.push(((m + d * Complex64::from(h)).norm() - (m - d * Complex64::from(h)).norm()) / (2.0 * h));
            }
            Ok(rel_err(&an, &fd))
        }
        (_, Point::Vector(g)) => {
            let (tan, f): (Tangent, Box<dyn Fn(&[Complex64]) -> f64>) = match target {
                GradientTarget::AbsGamma(n) => {
                    if g[n].norm() <= GUARD {
                        return Err(CoreError::Nonsmooth(format!("|γ_{n}| = {:e}", g[n].norm())));
                    }
                    (abs_tangent(g[n], n), Box::new(move |v: &[Complex64]| v[n].norm()))
                }
                GradientTarget::NormSq => {
                    (norm_sq_tangent(g), Box::new(|v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum()))
                }
                GradientTarget::AbsG(n) => {
                    let c = crate::em::g_coefficients(grid, n);
                    let gv = move |v: &[Complex64]| c[0] * v[n] + c[1] * v[n + 1] + c[2] * v[n + 2];
                    if gv(g).norm() <= GUARD {
                        return Err(CoreError::Nonsmooth(format!("|g_{n}| = {:e}", gv(g).norm())));
                    }
                    (gn_abs_tangent([g[n], g[n + 1], g[n + 2]], grid, n), Box::new(move |v: &[Complex64]| gv(v).norm()))
                }
                GradientTarget::Frobenius => return Err(CoreError::InvalidPoint("‖Γ‖_F needs a matrix point".into())),
            };
            let mut an = Vec::new();
            let mut fd = Vec::new();
            for k in 0..g.len() {
                for unit in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
                    let mut d = vec![Complex64::new(0.0, 0.0); g.len()];
                    d[k] = unit;
                    an.push(tan.eval(&d) - tan.constant);
                    let plus: Vec<Complex64> = g.iter().zip(&d).map(|(a, b)| a + b * h).collect();
                    let minus: Vec<Complex64> = g.iter().zip(&d).map(|(a, b)| a - b * h).collect();
                    fd.push((f(&plus) - f(&minus)) / (2.0 * h));
                }
            }
            Ok(rel_err(&an, &fd))
        }
        _ => Err(CoreError::InvalidPoint("point type does not match the target".into())),
    }
}

fn hermitian_dir(n: usize, r: usize, c: usize, v: Complex64) -> DMatrix<Complex64> {
    let mut d = DMatrix::zeros(n, n);
    d[(r, c)] = v;
    if r != c {
        d[(c, r)] = v.conj();
    }
    d
}

fn rel_err(an: &[f64], fd: &[f64]) -> f64 {
    let scale = an.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    an.iter().zip(fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
}

/// Convex functions with affine under-estimators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TangentFamily {
    AbsGamma,
    NetPowerQuadratic,
    AbsG,
    NormSq,
    Frobenius,
}

impl TangentFamily {
    pub const ALL: [TangentFamily; 5] =
        [Self::AbsGamma, Self::NetPowerQuadratic, Self::AbsG, Self::NormSq, Self::Frobenius];
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentSampleReport {
    pub family: TangentFamily,
    pub samples: usize,
    /// `max(T(x) − f(x))`, relative to `1 + |f(x)|`.
    pub max_bound_excess: f64,
    /// `max |T(x̄) − f(x̄)|`, relative to `1 + |f(x̄)|`.
    pub max_expansion_error: f64,
}

fn rand_c(rng: &mut ChaCha8Rng, scale: f64) -> Complex64 {
    Complex64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale))
}

fn rand_hermitian_psd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(n, n, |_, _| rand_c(rng, 1.0));
    &a * a.adjoint()
}

fn rand_hermitian(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(n, n, |_, _| rand_c(rng, 1.0));
    (&a + a.adjoint()) * Complex64::from(0.5)
}

/// Draws `samples` (expansion, probe) pairs per family and records the
/// largest bound excess and expansion-point error. Pairs are split across
/// `exec` by index, each with its own seeded stream.
pub fn sample_tangent_bounds(family: TangentFamily, grid: &SurfaceGrid, samples: usize, seed: u64, exec: Exec) -> TangentSampleReport {
    let n = grid.n();
    let one = |i: usize| -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let scale = if rng.random_bool(0.5) { 1.0 } else { 3.0 };
        let xb: Vec<Complex64> = (0..n).map(|_| rand_c(&mut rng, scale)).collect();
        let x: Vec<Complex64> = (0..n).map(|_| rand_c(&mut rng, scale)).collect();
        let rel = |t: f64, f: f64| (t - f) / (1.0 + f.abs());
        match family {
            TangentFamily::AbsGamma => {
                let k = rng.random_range(0..n);
                let t = abs_tangent(xb[k], k);
                (rel(t.eval(&x), x[k].norm()), rel(t.eval(&xb), xb[k].norm()).abs())
            }
            TangentFamily::NetPowerQuadratic => {
                let t = quadratic_tangent_ps(&xb, grid);
                let s = grid.power_scale() * grid.alpha_r;
                let f = |v: &[Complex64]| s * v.iter().map(|z| z.norm_sqr()).sum::<f64>();
                (rel(t.eval(&x), f(&x)), rel(t.eval(&xb), f(&xb)).abs())
            }
            TangentFamily::AbsG => {
                let k = rng.random_range(0..n - 2);
                let c = crate::em::g_coefficients(grid, k);
                let g = |v: &[Complex64]| (c[0] * v[k] + c[1] * v[k + 1] + c[2] * v[k + 2]).norm();
                let t = gn_abs_tangent([xb[k], xb[k + 1], xb[k + 2]], grid, k);
                (rel(t.eval(&x), g(&x)), rel(t.eval(&xb), g(&xb)).abs())
            }
            TangentFamily::NormSq => {
                let t = norm_sq_tangent(&xb);
                let f = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
                (rel(t.eval(&x), f(&x)), rel(t.eval(&xb), f(&xb)).abs())
            }
            TangentFamily::Frobenius => {
                let m = 8.min(n);
                let mb = if rng.random_bool(0.5) { rand_hermitian_psd(&mut rng, m) } else { rand_hermitian(&mut rng, m) };
                let mx = rand_hermitian(&mut rng, m);
                let t = fro_tangent(&mb);
                (rel(t.eval(&mx), mx.norm()), rel(t.eval(&mb), mb.norm()).abs())
            }
        }
    };
    let pairs = exec.map_range(samples, one);
    let excess = pairs.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let exp = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    TangentSampleReport { family, samples, max_bound_excess: excess, max_expansion_error: exp }
}
