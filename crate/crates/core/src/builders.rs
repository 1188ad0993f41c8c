//! Per-iteration convex subproblems as [`ConicProgram`]s.
//!
//! Every program minimizes the epigraph scalar `t` (variable 0). For the
//! flux-maximizing problems `t` bounds the negated lifted flux from above.
//! Constraints are divided by positive physical prefactors (`a_XΔ_y`,
//! `a_kΔ_y²χ_ik`) so that their coefficients are of order one; this changes
//! no feasible set.

use nalgebra::DMatrix;
use num_complex::Complex64;
use risopt_conic::{embed_hermitian_psd, Block, ConicProgram, HermitianAffine, LinExpr};
use serde::{Deserialize, Serialize};

use crate::convexify::{
    abs_tangent, fro_tangent, gn_abs_tangent, norm_sq_tangent, reactive_constraints, LinearizationPoint,
    MatrixTangent,
};
use crate::em::{g_coefficients, ReflectionProfile, SurfaceGrid};
use crate::CoreError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemKind {
    #[serde(rename = "s-hc")]
    SHc,
    #[serde(rename = "s-rm")]
    SRm,
    #[serde(rename = "s-ri")]
    SRi,
    #[serde(rename = "p-rm")]
    PRm,
    #[serde(rename = "p-ri")]
    PRi,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 5] = [Self::SHc, Self::SRm, Self::SRi, Self::PRm, Self::PRi];

    pub fn tag(self) -> &'static str {
        match self {
            Self::SHc => "s-hc",
            Self::SRm => "s-rm",
            Self::SRi => "s-ri",
            Self::PRm => "p-rm",
            Self::PRi => "p-ri",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag().eq_ignore_ascii_case(s) || k.tag().replace('-', "_").eq_ignore_ascii_case(s))
    }

    /// Uses the lifted matrix variable `Γ`.
    pub fn is_lifted(self) -> bool {
        matches!(self, Self::PRm | Self::PRi)
    }

    pub fn has_mask(self) -> bool {
        !matches!(self, Self::SHc)
    }

    pub fn is_reactive(self) -> bool {
        matches!(self, Self::SRi | Self::PRi)
    }

    /// `true` when the objective is maximized (flux), `false` when minimized (`|P_S|`).
    pub fn maximizes(self) -> bool {
        self.is_lifted()
    }
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Problem tolerances and the current trust radii / rank-one slacks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSet {
    pub eps_hc_l: f64,
    pub eps_hc_u: f64,
    /// W/m².
    pub eps_rm: f64,
    /// Ω.
    pub eps_ri: f64,
    /// W.
    pub eps_sp: f64,
    pub eps_tr: f64,
    pub eps_tr_gamma: f64,
    pub eps_tr_mat: f64,
    pub eps_rk1_b: f64,
    pub eps_rk1_c: f64,
    pub mask_angles_rad: Vec<f64>,
}

impl Default for ToleranceSet {
    fn default() -> Self {
        Self {
            eps_hc_l: 0.0,
            eps_hc_u: 10.0,
            eps_rm: 2e-8,
            eps_ri: 1e-2,
            eps_sp: 1e-9,
            eps_tr: 10.0,
            eps_tr_gamma: 10.0,
            eps_tr_mat: 100.0,
            eps_rk1_b: 1.0,
            eps_rk1_c: 1.0,
            mask_angles_rad: mask_angles_deg(&[(-2.0, 2.0), (-62.0, -58.0)], 0.1),
        }
    }
}

impl ToleranceSet {
    pub fn validate(&self) -> Result<(), CoreError> {
        let nonneg = [
            ("eps_hc_l", self.eps_hc_l),
            ("eps_hc_u", self.eps_hc_u),
            ("eps_rm", self.eps_rm),
            ("eps_ri", self.eps_ri),
            ("eps_sp", self.eps_sp),
            ("eps_rk1_b", self.eps_rk1_b),
            ("eps_rk1_c", self.eps_rk1_c),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(CoreError::InvalidTolerance(format!("{name} must be finite and ≥ 0, got {v}")));
            }
        }
        for (name, v) in [("eps_tr", self.eps_tr), ("eps_tr_gamma", self.eps_tr_gamma), ("eps_tr_mat", self.eps_tr_mat)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CoreError::InvalidTolerance(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if self.eps_hc_l > self.eps_hc_u {
            return Err(CoreError::InvalidTolerance("eps_hc_l must not exceed eps_hc_u".into()));
        }
        if let Some(a) = self.mask_angles_rad.iter().find(|a| !(a.is_finite() && a.abs() <= std::f64::consts::FRAC_PI_2)) {
            return Err(CoreError::InvalidTolerance(format!("mask angle {a} rad outside [-π/2, π/2]")));
        }
        Ok(())
    }
}

/// Angles on `[lo, hi]` at `resolution` degrees for each interval, in radians.
pub fn mask_angles_deg(intervals: &[(f64, f64)], resolution: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for &(a, b) in intervals {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let steps = ((hi - lo) / resolution + 1e-9).floor() as usize;
        out.extend((0..=steps).map(|i| (lo + i as f64 * resolution).to_radians()));
    }
    out
}

/// Index map of the real decision vector.
///
/// `t` at 0, `Re γ` at `1..1+N`, `Im γ` at `1+N..1+2N`; for lifted problems
/// then `Re Γ_nm` (`n ≤ m`), `Im Γ_nm` (`n < m`) and the spectral bound `s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VarLayout {
    pub n: usize,
    pub lifted: bool,
}

impl VarLayout {
    pub const T: usize = 0;

    pub fn new(n: usize, lifted: bool) -> Self {
        Self { n, lifted }
    }

    pub fn re(&self, k: usize) -> usize {
        1 + k
    }

    pub fn im(&self, k: usize) -> usize {
        1 + self.n + k
    }

    fn gre_base(&self) -> usize {
        1 + 2 * self.n
    }

    fn gim_base(&self) -> usize {
        self.gre_base() + self.n * (self.n + 1) / 2
    }

    /// `Re Γ_nm`, `n ≤ m`.
    pub fn gre(&self, n: usize, m: usize) -> usize {
        debug_assert!(self.lifted && n <= m && m < self.n);
        self.gre_base() + n * self.n - n * n.saturating_sub(1) / 2 + (m - n)
    }

    /// `Im Γ_nm`, `n < m`.
    pub fn gim(&self, n: usize, m: usize) -> usize {
        debug_assert!(self.lifted && n < m && m < self.n);
        self.gim_base() + n * (self.n - 1) - n * n.saturating_sub(1) / 2 + (m - n - 1)
    }

    pub fn s(&self) -> usize {
        debug_assert!(self.lifted);
        self.gim_base() + self.n * (self.n - 1) / 2
    }

    pub fn num_vars(&self) -> usize {
        if self.lifted {
            self.s() + 1
        } else {
            1 + 2 * self.n
        }
    }

    /// `(Re Γ_rc, Im Γ_rc)` for any `(r, c)` through Hermitian symmetry.
    pub fn gamma_entry(&self, r: usize, c: usize) -> (LinExpr, LinExpr) {
        use std::cmp::Ordering::*;
        match r.cmp(&c) {
            Equal => (LinExpr::var(self.gre(r, r)), LinExpr::zero()),
            Less => (LinExpr::var(self.gre(r, c)), LinExpr::var(self.gim(r, c))),
            Greater => (LinExpr::var(self.gre(c, r)), LinExpr::term(self.gim(c, r), -1.0)),
        }
    }

    /// Decision vector for `(t, γ [, Γ, s])`.
    pub fn pack(&self, t: f64, gamma: &[Complex64], mat: Option<&DMatrix<Complex64>>) -> Vec<f64> {
        let mut x = vec![0.0; self.num_vars()];
        x[Self::T] = t;
        for (k, g) in gamma.iter().enumerate() {
            x[self.re(k)] = g.re;
            x[self.im(k)] = g.im;
        }
        if let (true, Some(m)) = (self.lifted, mat) {
            for r in 0..self.n {
                for c in r..self.n {
                    x[self.gre(r, c)] = m[(r, c)].re;
                    if r < c {
                        x[self.gim(r, c)] = m[(r, c)].im;
                    }
                }
            }
            x[self.s()] = spectral_norm_psd(m);
        }
        x
    }

    pub fn unpack_gamma(&self, x: &[f64]) -> Vec<Complex64> {
        (0..self.n).map(|k| Complex64::new(x[self.re(k)], x[self.im(k)])).collect()
    }

    pub fn unpack_matrix(&self, x: &[f64]) -> Option<DMatrix<Complex64>> {
        if !self.lifted {
            return None;
        }
        Some(DMatrix::from_fn(self.n, self.n, |r, c| {
            use std::cmp::Ordering::*;
            match r.cmp(&c) {
                Equal => Complex64::new(x[self.gre(r, r)], 0.0),
                Less => Complex64::new(x[self.gre(r, c)], x[self.gim(r, c)]),
                Greater => Complex64::new(x[self.gre(c, r)], -x[self.gim(c, r)]),
            }
        }))
    }

    pub fn unpack_point(&self, x: &[f64]) -> LinearizationPoint {
        LinearizationPoint { gamma_bar: self.unpack_gamma(x), gamma_mat_bar: self.unpack_matrix(x) }
    }
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn spectral_norm_psd(m: &DMatrix<Complex64>) -> f64 {
    risopt_conic::embed_hermitian_matrix(m).symmetric_eigenvalues().max()
}

/// `Σ_nm Γ_nm u_n conj(u_m) = tr(ΓU*)` as a linear form in `Γ`.
fn lifted_quadratic(layout: &VarLayout, u: &[Complex64]) -> LinExpr {
    let mut e = LinExpr::zero();
    for n in 0..layout.n {
        e.add_term(layout.gre(n, n), u[n].norm_sqr());
        for m in n + 1..layout.n {
            let w = u[n] * u[m].conj();
            e.add_term(layout.gre(n, m), 2.0 * w.re);
            e.add_term(layout.gim(n, m), -2.0 * w.im);
        }
    }
    e
}

/// `tr Γ`.
fn trace_expr(layout: &VarLayout) -> LinExpr {
    let mut e = LinExpr::zero();
    for n in 0..layout.n {
        e.add_term(layout.gre(n, n), 1.0);
    }
    e
}

/// `c + Σ_nm 2Re(W_nm conj Γ_nm)` as a linear form in the stored entries.
fn matrix_tangent_expr(layout: &VarLayout, t: &MatrixTangent) -> LinExpr {
    let w = &t.grad;
    let mut e = LinExpr::constant(t.constant);
    for n in 0..layout.n {
        e.add_term(layout.gre(n, n), 2.0 * w[(n, n)].re);
        for m in n + 1..layout.n {
            let (a, b) = (w[(n, m)], w[(m, n)]);
            e.add_term(layout.gre(n, m), 2.0 * (a.re + b.re));
            e.add_term(layout.gim(n, m), 2.0 * (a.im - b.im));
        }
    }
    e
}

/// `(Re, Im)` of `Σ_k c_k γ_{first+k}`.
fn complex_linear(layout: &VarLayout, first: usize, coefs: &[Complex64]) -> (LinExpr, LinExpr) {
    let mut re = LinExpr::zero();
    let mut im = LinExpr::zero();
    for (k, c) in coefs.iter().enumerate() {
        let i = first + k;
        re.add_term(layout.re(i), c.re);
        re.add_term(layout.im(i), -c.im);
        im.add_term(layout.re(i), c.im);
        im.add_term(layout.im(i), c.re);
    }
    (re, im)
}

/// `c_i + α_ir·Σ Re γ_n`, i.e. `P_S` without its quadratic part, over `a_XΔ_y`.
fn ps_affine_part(layout: &VarLayout, grid: &SurfaceGrid) -> LinExpr {
    let mut e = LinExpr::constant(grid.c_i);
    for k in 0..layout.n {
        e.add_term(layout.re(k), grid.alpha_ir);
    }
    e
}

fn check_point(point: &LinearizationPoint, grid: &SurfaceGrid, lifted: bool) -> Result<(), CoreError> {
    if point.gamma_bar.len() != grid.n() {
        return Err(CoreError::Shape { expected: grid.n(), found: point.gamma_bar.len() });
    }
    if lifted && point.gamma_mat_bar.is_none() {
        return Err(CoreError::InvalidPoint("lifted problem needs Γ̄".into()));
    }
    point.validate()
}

/// Objective, epigraph pair and trust region shared by the vector problems.
fn vector_common(point: &LinearizationPoint, grid: &SurfaceGrid, tol: &ToleranceSet) -> (ConicProgram, VarLayout) {
    let n = grid.n();
    let lay = VarLayout::new(n, false);
    let mut p = ConicProgram::new(lay.num_vars());
    p.objective = LinExpr::var(VarLayout::T);
    let inv_ps = 1.0 / grid.power_scale();
    let sa = grid.alpha_r.sqrt();

    let quad: Vec<LinExpr> = (0..n)
        .flat_map(|k| [LinExpr::term(lay.re(k), sa), LinExpr::term(lay.im(k), sa)])
        .collect();
    let mut w = ps_affine_part(&lay, grid);
    w.add_term(VarLayout::T, -inv_ps);
    p.push_quadratic_le("ps_upper", &quad, &w);

    let mut lower = ps_affine_part(&lay, grid).negated();
    lower.add_scaled(&norm_sq_tangent(&point.gamma_bar).to_lin_expr(lay.re(0), lay.im(0)), -grid.alpha_r);
    lower.add_term(VarLayout::T, -inv_ps);
    p.push_affine_le("ps_lower", lower);

    push_vector_trust(&mut p, &lay, &point.gamma_bar, tol.eps_tr, "trust");
    (p, lay)
}

fn push_vector_trust(p: &mut ConicProgram, lay: &VarLayout, gamma_bar: &[Complex64], radius: f64, name: &str) {
    let rows = (0..lay.n)
        .flat_map(|k| {
            let mut re = LinExpr::var(lay.re(k));
            re.add_constant(-gamma_bar[k].re);
            let mut im = LinExpr::var(lay.im(k));
            im.add_constant(-gamma_bar[k].im);
            [re, im]
        })
        .collect();
    p.push_soc(name, rows, LinExpr::constant(radius));
}

fn push_vector_mask(p: &mut ConicProgram, lay: &VarLayout, grid: &SurfaceGrid, tol: &ToleranceSet) {
    for (i, &th) in tol.mask_angles_rad.iter().enumerate() {
        let scale = grid.flux_scale(th);
        if scale <= 0.0 {
            continue;
        }
        let (re, im) = complex_linear(lay, 0, &grid.steering(th));
        p.push_soc(format!("mask[{i}]"), vec![re, im], LinExpr::constant((tol.eps_rm / scale).sqrt()));
    }
}

fn push_vector_reactive(p: &mut ConicProgram, lay: &VarLayout, point: &LinearizationPoint, grid: &SurfaceGrid, tol: &ToleranceSet) {
    let sa = grid.alpha_r.sqrt();
    for k in 0..lay.n {
        let pair = reactive_constraints(point.gamma_bar[k], grid, tol.eps_ri);
        let quad = [LinExpr::term(lay.re(k), sa), LinExpr::term(lay.im(k), sa)];
        let mut w = LinExpr::constant(-pair.alpha_i);
        w.add_term(lay.re(k), -(pair.alpha_i - pair.alpha_r));
        p.push_quadratic_le(format!("ri_convex[{k}]"), &quad, &w);
        let (c, a, b) = pair.linearized_coefficients();
        let mut e = LinExpr::constant(c);
        e.add_term(lay.re(k), a);
        e.add_term(lay.im(k), b);
        p.push_affine_le(format!("ri_linear[{k}]"), e);
    }
}

/// S-HC-b.
pub fn build_s_hc(point: &LinearizationPoint, grid: &SurfaceGrid, tol: &ToleranceSet) -> Result<ConicProgram, CoreError> {
    check_point(point, grid, false)?;
    tol.validate()?;
    let (mut p, lay) = vector_common(point, grid, tol);
    let k2 = (grid.kappa_rad_per_m * grid.delta_y_m).powi(2);
    let (eu, el) = (tol.eps_hc_u * k2, tol.eps_hc_l * k2);
    let gb = &point.gamma_bar;
    for n in 0..grid.n().saturating_sub(2) {
        let (re, im) = complex_linear(&lay, n, &g_coefficients(grid, n));
        let bound = abs_tangent(gb[n], n).scaled(eu).to_lin_expr(lay.re(0), lay.im(0));
        p.push_soc(format!("hc_upper[{n}]"), vec![re, im], bound);
        if el > 0.0 {
            let lower = gn_abs_tangent([gb[n], gb[n + 1], gb[n + 2]], grid, n).to_lin_expr(lay.re(0), lay.im(0));
            let rows = vec![LinExpr::term(lay.re(n), el), LinExpr::term(lay.im(n), el)];
            p.push_soc(format!("hc_lower[{n}]"), rows, lower);
        }
    }
    Ok(p)
}

/// S-RM-a.
pub fn build_s_rm(point: &LinearizationPoint, grid: &SurfaceGrid, tol: &ToleranceSet) -> Result<ConicProgram, CoreError> {
    check_point(point, grid, false)?;
    tol.validate()?;
    let (mut p, lay) = vector_common(point, grid, tol);
    push_vector_mask(&mut p, &lay, grid, tol);
    Ok(p)
}

/// S-RI-a.
pub fn build_s_ri(point: &LinearizationPoint, grid: &SurfaceGrid, tol: &ToleranceSet) -> Result<ConicProgram, CoreError> {
    let mut p = build_s_rm(point, grid, tol)?;
    let lay = VarLayout::new(grid.n(), false);
    push_vector_reactive(&mut p, &lay, point, grid, tol);
    Ok(p)
}

/// Mask-excess minimization: `min t` with `|γᵀu_k| ≤ √ε̃_k (1 + t)` under the
/// trust region and, when `reactive`, the linearized reactive pair.
pub fn build_mask_restoration(
    point: &LinearizationPoint,
    grid: &SurfaceGrid,
    tol: &ToleranceSet,
    reactive: bool,
) -> Result<ConicProgram, CoreError> {
    check_point(point, grid, false)?;
    tol.validate()?;
    let lay = VarLayout::new(grid.n(), false);
    let mut p = ConicProgram::new(lay.num_vars());
    p.objective = LinExpr::var(VarLayout::T);
    for (i, &th) in tol.mask_angles_rad.iter().enumerate() {
        let scale = grid.flux_scale(th);
        if scale <= 0.0 {
            continue;
        }
        let r = (tol.eps_rm / scale).sqrt();
        let (re, im) = complex_linear(&lay, 0, &grid.steering(th));
        let mut bound = LinExpr::constant(r);
        bound.add_term(VarLayout::T, r);
        p.push_soc(format!("mask[{i}]"), vec![re, im], bound);
    }
    push_vector_trust(&mut p, &lay, &point.gamma_bar, tol.eps_tr, "trust");
    if reactive {
        push_vector_reactive(&mut p, &lay, point, grid, tol);
    }
    Ok(p)
}

/// P-RM-b.
pub fn build_p_rm(point: &LinearizationPoint, grid: &SurfaceGrid, tol: &ToleranceSet) -> Result<ConicProgram, CoreError> {
    check_point(point, grid, true)?;
    tol.validate()?;
    let n = grid.n();
    let lay = VarLayout::new(n, true);
    let gbar = point.gamma_mat_bar.as_ref().expect("checked above");
    let mut p = ConicProgram::new(lay.num_vars());
    p.objective = LinExpr::var(VarLayout::T);

    let th_r = grid.scenario.theta_r_rad;
    let mut obj = lifted_quadratic(&lay, &grid.steering(th_r)).negated();
    obj.add_term(VarLayout::T, -1.0 / grid.flux_scale(th_r));
    p.push_affine_le("flux_epigraph", obj);

    for (i, &th) in tol.mask_angles_rad.iter().enumerate() {
        let scale = grid.flux_scale(th);
        if scale <= 0.0 {
            continue;
        }
        let mut e = lifted_quadratic(&lay, &grid.steering(th));
        e.add_constant(-tol.eps_rm / scale);
        p.push_affine_le(format!("mask[{i}]"), e);
    }

    let mut ps = ps_affine_part(&lay, grid);
    ps.add_scaled(&trace_expr(&lay), grid.alpha_r);
    let band = tol.eps_sp / grid.power_scale();
    let mut hi = ps.clone();
    hi.add_constant(-band);
    p.push_affine_le("ps_upper", hi);
    let mut lo = ps.negated();
    lo.add_constant(-band);
    p.push_affine_le("ps_lower", lo);

    let mut schur = HermitianAffine::new(n + 1);
    for r in 0..n {
        for c in 0..=r {
            let (re, im) = lay.gamma_entry(r, c);
            schur.push(r, c, re, im);
        }
        schur.push(n, r, LinExpr::var(lay.re(r)), LinExpr::term(lay.im(r), -1.0));
    }
    schur.push(n, n, LinExpr::constant(1.0), LinExpr::zero());
    p.push("lift_psd", Block::Psd(embed_hermitian_psd(&schur)));

    let mut rk_b = trace_expr(&lay);
    rk_b.add_scaled(&matrix_tangent_expr(&lay, &fro_tangent(gbar)), -1.0);
    rk_b.add_constant(-tol.eps_rk1_b);
    p.push_affine_le("rank1_fro", rk_b);

    let mut rk_c = LinExpr::var(lay.s());
    rk_c.add_scaled(&norm_sq_tangent(&point.gamma_bar).to_lin_expr(lay.re(0), lay.im(0)), -1.0);
    rk_c.add_constant(-tol.eps_rk1_c);
    p.push_affine_le("rank1_spec", rk_c);

    let mut cap = HermitianAffine::new(n);
    for r in 0..n {
        for c in 0..=r {
            let (mut re, im) = lay.gamma_entry(r, c);
            re = re.negated();
            if r == c {
                re.add_term(lay.s(), 1.0);
            }
            cap.push(r, c, re, im.negated());
        }
    }
    p.push("spectral_psd", Block::Psd(embed_hermitian_psd(&cap)));

    push_vector_trust(&mut p, &lay, &point.gamma_bar, tol.eps_tr_gamma, "trust_gamma");
    let s2 = std::f64::consts::SQRT_2;
    let mut rows = Vec::with_capacity(n * n);
    for r in 0..n {
        let mut e = LinExpr::var(lay.gre(r, r));
        e.add_constant(-gbar[(r, r)].re);
        rows.push(e);
        for c in r + 1..n {
            let mut re = LinExpr::term(lay.gre(r, c), s2);
            re.add_constant(-s2 * gbar[(r, c)].re);
            let mut im = LinExpr::term(lay.gim(r, c), s2);
            im.add_constant(-s2 * gbar[(r, c)].im);
            rows.push(re);
            rows.push(im);
        }
    }
    p.push_soc("trust_mat", rows, LinExpr::constant(tol.eps_tr_mat));
    Ok(p)
}

/// P-RI.
pub fn build_p_ri(point: &LinearizationPoint, grid: &SurfaceGrid, tol: &ToleranceSet) -> Result<ConicProgram, CoreError> {
    let mut p = build_p_rm(point, grid, tol)?;
    let lay = VarLayout::new(grid.n(), true);
    let (ai, ar) = (grid.alpha_i, grid.alpha_r);
    let e = tol.eps_ri / grid.eta0();
    for k in 0..lay.n {
        let mut a = LinExpr::constant(-ai);
        a.add_term(lay.gre(k, k), ar);
        a.add_term(lay.re(k), -(ai - ar));
        p.push_affine_le(format!("ri_convex[{k}]"), a);
        let mut b = LinExpr::constant(ai * (1.0 - e * ai));
        b.add_term(lay.gre(k, k), -(1.0 + e * ar) * ar);
        b.add_term(lay.re(k), ai - ar + 2.0 * e * ai * ar);
        p.push_affine_le(format!("ri_linear[{k}]"), b);
    }
    Ok(p)
}

pub fn build(kind: ProblemKind, point: &LinearizationPoint, grid: &SurfaceGrid, tol: &ToleranceSet) -> Result<ConicProgram, CoreError> {
    match kind {
        ProblemKind::SHc => build_s_hc(point, grid, tol),
        ProblemKind::SRm => build_s_rm(point, grid, tol),
        ProblemKind::SRi => build_s_ri(point, grid, tol),
        ProblemKind::PRm => build_p_rm(point, grid, tol),
        ProblemKind::PRi => build_p_ri(point, grid, tol),
    }
}

/// Decision vector of the expansion point, with `t` at its tightest value.
pub fn expansion_vector(kind: ProblemKind, point: &LinearizationPoint, grid: &SurfaceGrid) -> Vec<f64> {
    let lay = VarLayout::new(grid.n(), kind.is_lifted());
    let prof = ReflectionProfile { gamma: point.gamma_bar.clone() };
    let t = if kind.is_lifted() {
        let m = point.gamma_mat_bar.as_ref().expect("lifted point");
        -lifted_objective(m, grid)
    } else {
        crate::em::surface_net_power_flow(&prof, grid).map(f64::abs).unwrap_or(f64::INFINITY)
    };
    lay.pack(t, &point.gamma_bar, point.gamma_mat_bar.as_ref())
}

/// `a_rΔ_y²χ_ir·tr(ΓU_ir*)`.
pub fn lifted_objective(m: &DMatrix<Complex64>, grid: &SurfaceGrid) -> f64 {
    lifted_flux(m, grid, grid.scenario.theta_r_rad)
}

/// `a_kΔ_y²χ_ik·tr(ΓU_ik*)`.
pub fn lifted_flux(m: &DMatrix<Complex64>, grid: &SurfaceGrid, theta: f64) -> f64 {
    let u = grid.steering(theta);
    let mut s = Complex64::new(0.0, 0.0);
    for r in 0..u.len() {
        for c in 0..u.len() {
            s += m[(r, c)] * u[r] * u[c].conj();
        }
    }
    grid.flux_scale(theta) * s.re
}

/// `P̂_S = a_XΔ_y(c_i + α_r tr Γ + α_ir ΣRe γ_n)`.
pub fn lifted_net_power(gamma: &[Complex64], m: &DMatrix<Complex64>, grid: &SurfaceGrid) -> f64 {
    let tr: f64 = (0..gamma.len()).map(|k| m[(k, k)].re).sum();
    let sre: f64 = gamma.iter().map(|g| g.re).sum();
    grid.power_scale() * (grid.c_i + grid.alpha_r * tr + grid.alpha_ir * sre)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_a_bijection() {
        for n in [1, 2, 4, 7] {
            let lay = VarLayout::new(n, true);
            let mut seen = vec![false; lay.num_vars()];
            let mut mark = |i: usize| {
                assert!(!seen[i], "index {i} reused");
                seen[i] = true;
            };
            mark(0);
            for k in 0..n {
                mark(lay.re(k));
                mark(lay.im(k));
            }
            for r in 0..n {
                for c in r..n {
                    mark(lay.gre(r, c));
                    if r < c {
                        mark(lay.gim(r, c));
                    }
                }
            }
            mark(lay.s());
            assert!(seen.iter().all(|&b| b));
        }
    }

    #[test]
    fn reference_lifted_layout_size() {
        assert_eq!(VarLayout::new(60, true).num_vars(), 3722);
        assert_eq!(VarLayout::new(60, false).num_vars(), 121);
    }

    #[test]
    fn mask_grid_has_82_angles() {
        assert_eq!(mask_angles_deg(&[(-2.0, 2.0), (-58.0, -62.0)], 0.1).len(), 82);
    }
}
