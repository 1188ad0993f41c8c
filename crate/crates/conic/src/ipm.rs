//! Homogeneous self-dual interior-point method for
//! `min cᵀx  s.t.  Gx + s = h,  s ∈ K` with `K` a product of nonnegative
//! orthants, second-order cones and PSD cones.
//!
//! Each iteration uses Nesterov–Todd scaling and a Mehrotra
//! predictor-corrector step. The Newton systems are reduced to the dense
//! normal matrix `M = Gᵀ(WᵀW)⁻¹G`, factored by Cholesky and polished by
//! iterative refinement on the full KKT residual.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cones::{self, Cone, Scaling, SQRT2};
use crate::dense::{syrk_lower_add, Cholesky};
use crate::exec::Exec;
use crate::program::{Block, ConicProgram};
use crate::ConicError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Settings {
    pub max_iter: usize,
    /// Primal and dual residual tolerance on the equilibrated problem.
    pub feastol: f64,
    pub abstol: f64,
    pub reltol: f64,
    pub equilibrate_iters: usize,
    pub refine_steps: usize,
    pub step_fraction: f64,
    pub static_reg: f64,
    /// Residual and gap thresholds under which a stalled run still reports its best iterate.
    pub reduced_feastol: f64,
    pub reduced_gaptol: f64,
    pub exec: Exec,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            max_iter: 100,
            feastol: 1e-9,
            abstol: 1e-9,
            reltol: 1e-9,
            equilibrate_iters: 15,
            refine_steps: 3,
            step_fraction: 0.99,
            static_reg: 1e-13,
            reduced_feastol: 1e-6,
            reduced_gaptol: 1e-6,
            exec: Exec::Auto,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    Infeasible,
    NumericalTrouble,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::NumericalTrouble => "numerical_trouble",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConicSolution {
    pub status: Status,
    /// Present iff `status == Optimal`.
    pub x: Option<Vec<f64>>,
    pub objective_value: f64,
    pub solver_tolerance: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub message: String,
    pub solve_seconds: f64,
}

impl ConicSolution {
    /// A solution without a point.
    pub fn failed(status: Status, iterations: usize, message: String, tol: f64) -> Self {
        Self {
            status,
            x: None,
            objective_value: f64::NAN,
            solver_tolerance: tol,
            iterations,
            primal_residual: f64::NAN,
            dual_residual: f64::NAN,
            gap: f64::NAN,
            message,
            solve_seconds: 0.0,
        }
    }
}

/// Any backend able to solve a [`ConicProgram`].
pub trait ConicSolver {
    fn solve(&self, program: &ConicProgram) -> Result<ConicSolution, ConicError>;
}

/// The built-in interior-point backend.
#[derive(Clone, Debug, Default)]
pub struct InteriorPoint {
    pub settings: Settings,
}

impl ConicSolver for InteriorPoint {
    fn solve(&self, program: &ConicProgram) -> Result<ConicSolution, ConicError> {
        solve(program, &self.settings)
    }
}

/// Solves `program`, then re-checks an optimal point against the original
/// blocks; a point failing that check is reported as numerical trouble.
pub fn solve(program: &ConicProgram, settings: &Settings) -> Result<ConicSolution, ConicError> {
    program.validate()?;
    let start = Instant::now();
    let std = StdForm::build(program);
    let mut sol = if std.m == 0 {
        ConicSolution::failed(
            Status::NumericalTrouble,
            0,
            "program has no constraints; objective is unbounded unless constant".into(),
            settings.feastol,
        )
    } else {
        Solver::new(std, settings).run(program)
    };
    if let (Status::Optimal, Some(x)) = (sol.status, sol.x.as_ref()) {
        let report = program.check(x);
        let worst = report.max_violation();
        if worst > 10.0 * settings.feastol.max(1e-12) {
            let name = report.worst().map(|b| b.name.clone()).unwrap_or_default();
            sol.message = format!("returned point violates block `{name}` by {worst:.3e}");
            sol.status = Status::NumericalTrouble;
            sol.x = None;
        }
    }
    sol.solve_seconds = start.elapsed().as_secs_f64();
    Ok(sol)
}

/// Compressed sparse rows.
#[derive(Clone, Debug, Default)]
struct Csr {
    ptr: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<f64>,
}

impl Csr {
    fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.ptr[r], self.ptr[r + 1]);
        (&self.idx[a..b], &self.val[a..b])
    }

    /// `out = G x`.
    fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let (idx, val) = self.row(r);
            *o = idx.iter().zip(val).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    /// `out = Gᵀ y`.
    fn tmul(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (r, &yr) in y.iter().enumerate() {
            if yr == 0.0 {
                continue;
            }
            let (idx, val) = self.row(r);
            for (&j, &v) in idx.iter().zip(val) {
                out[j] += v * yr;
            }
        }
    }
}

/// Standard form with cones laid out contiguously.
struct StdForm {
    n: usize,
    m: usize,
    cones: Vec<(Cone, usize)>,
    g: Csr,
    h: Vec<f64>,
    c: Vec<f64>,
}

impl StdForm {
    fn build(p: &ConicProgram) -> Self {
        let n = p.num_vars;
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
        let mut h = Vec::new();
        let mut cones = Vec::new();
        // s = h − Gx, so a row holding the affine form `e` of the slack
        // stores −e.terms in G and e.constant in h.
        let push_row = |rows: &mut Vec<Vec<(usize, f64)>>, h: &mut Vec<f64>, e: &crate::LinExpr, scale: f64| {
            let mut e = e.clone();
            e.compact();
            rows.push(e.terms.iter().map(|&(j, v)| (j, -v * scale)).collect());
            h.push(e.constant * scale);
        };
        let affine: Vec<&crate::LinExpr> = p
            .blocks
            .iter()
            .filter_map(|b| if let Block::Affine(e) = &b.block { Some(e) } else { None })
            .collect();
        if !affine.is_empty() {
            cones.push((Cone::Nonneg(affine.len()), 0));
            for e in affine {
                push_row(&mut rows, &mut h, &e.negated(), 1.0);
            }
        }
        for nb in &p.blocks {
            match &nb.block {
                Block::Affine(_) => {}
                Block::Soc { bound, rows: rs } => {
                    cones.push((Cone::Soc(rs.len() + 1), rows.len()));
                    push_row(&mut rows, &mut h, bound, 1.0);
                    for r in rs {
                        push_row(&mut rows, &mut h, r, 1.0);
                    }
                }
                Block::Psd(pb) => {
                    let order = pb.order;
                    let off = rows.len();
                    cones.push((Cone::Psd(order), off));
                    let dim = order * (order + 1) / 2;
                    let mut acc: Vec<crate::LinExpr> = vec![crate::LinExpr::zero(); dim];
                    for ((r, c), e) in &pb.entries {
                        acc[cones::svec_index(order, *r, *c)].add_scaled(e, 1.0);
                    }
                    let mut k = 0;
                    for c in 0..order {
                        for r in c..order {
                            let scale = if r == c { 1.0 } else { SQRT2 };
                            push_row(&mut rows, &mut h, &acc[k], scale);
                            k += 1;
                        }
                    }
                }
            }
        }
        let m = rows.len();
        let mut g = Csr { ptr: Vec::with_capacity(m + 1), idx: Vec::new(), val: Vec::new() };
        g.ptr.push(0);
        for r in rows {
            for (j, v) in r {
                g.idx.push(j);
                g.val.push(v);
            }
            g.ptr.push(g.idx.len());
        }
        let mut c = vec![0.0; n];
        for &(j, v) in &p.objective.terms {
            c[j] += v;
        }
        Self { n, m, cones, g, h, c }
    }
}

/// Row classification for Schur assembly.
struct SchurPlan {
    dense_lp_rows: Vec<usize>,
    sparse_lp_rows: Vec<usize>,
    /// Per PSD cone: for every touching variable, its full-matrix entries.
    psd_cols: Vec<Vec<(usize, Vec<(u32, u32, f64)>)>>,
}

struct Solver<'a> {
    std: StdForm,
    settings: &'a Settings,
    /// Column and row equilibration, and objective/rhs scalars.
    e: Vec<f64>,
    sigma_h: f64,
    nu: f64,
    plan: SchurPlan,
}

struct Scalings {
    per_cone: Vec<Scaling>,
    lambda: Vec<f64>,
}

struct Factored {
    chol: Cholesky,
}

impl<'a> Solver<'a> {
    fn new(mut std: StdForm, settings: &'a Settings) -> Self {
        let (e, _row_scale) = equilibrate(&mut std, settings.equilibrate_iters);
        let cmax = std.c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let sigma_c = if cmax > 0.0 { 1.0 / cmax } else { 1.0 };
        let hmax = std.h.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let sigma_h = if hmax > 0.0 { 1.0 / hmax } else { 1.0 };
        std.c.iter_mut().for_each(|v| *v *= sigma_c);
        std.h.iter_mut().for_each(|v| *v *= sigma_h);
        let nu = std.cones.iter().map(|(c, _)| c.degree()).sum::<usize>() as f64;
        let plan = plan_schur(&std);
        Self { std, settings, e, sigma_h, nu, plan }
    }

    fn compute_scalings(&self, s: &[f64], z: &[f64]) -> Option<Scalings> {
        let mut lambda = vec![0.0; self.std.m];
        let mut per_cone = Vec::with_capacity(self.std.cones.len());
        for &(cone, off) in &self.std.cones {
            let dim = cone.dim();
            let sc = Scaling::compute(cone, &s[off..off + dim], &z[off..off + dim], &mut lambda[off..off + dim]).ok()?;
            per_cone.push(sc);
        }
        Some(Scalings { per_cone, lambda })
    }

    fn for_cones(&self, mut f: impl FnMut(usize, Cone, std::ops::Range<usize>)) {
        for (k, &(cone, off)) in self.std.cones.iter().enumerate() {
            f(k, cone, off..off + cone.dim());
        }
    }

    fn apply_hinv(&self, sc: &Scalings, x: &[f64], out: &mut [f64]) {
        self.for_cones(|k, _, r| sc.per_cone[k].apply_hinv(&x[r.clone()], &mut out[r]));
    }

    fn apply_h(&self, sc: &Scalings, x: &[f64], out: &mut [f64]) {
        let mut tmp = vec![0.0; x.len()];
        self.for_cones(|k, _, r| sc.per_cone[k].apply_w(&x[r.clone()], &mut tmp[r.clone()]));
        self.for_cones(|k, _, r| sc.per_cone[k].apply_wt(&tmp[r.clone()], &mut out[r]));
    }

    /// Assembles and factors `M = Gᵀ(WᵀW)⁻¹G + δI`.
    fn factor(&self, sc: &Scalings) -> Option<Factored> {
        let n = self.std.n;
        let g = &self.std.g;
        let mut m = vec![0.0; n * n];
        // nonnegative rows
        if let Some(k) = self.std.cones.iter().position(|(c, _)| matches!(c, Cone::Nonneg(_))) {
            let Scaling::Nonneg { w } = &sc.per_cone[k] else { unreachable!() };
            let off = self.std.cones[k].1;
            let kd = self.plan.dense_lp_rows.len();
            if kd > 0 {
                let mut a = vec![0.0; kd * n];
                for (i, &r) in self.plan.dense_lp_rows.iter().enumerate() {
                    let (idx, val) = g.row(r);
                    let inv = 1.0 / w[r - off];
                    for (&j, &v) in idx.iter().zip(val) {
                        a[j * kd + i] = v * inv;
                    }
                }
                syrk_lower_add(&mut m, n, &a, kd);
            }
            for &r in &self.plan.sparse_lp_rows {
                let inv = 1.0 / (w[r - off] * w[r - off]);
                add_outer(&mut m, n, g.row(r), inv);
            }
        }
        // second-order cones: η⁻²(2uuᵀ − GᵀJG) with u = GᵀJw̄
        let mut u = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; n];
        for (k, &(cone, off)) in self.std.cones.iter().enumerate() {
            let Cone::Soc(dim) = cone else { continue };
            let Scaling::Soc { eta, wb } = &sc.per_cone[k] else { unreachable!() };
            let inv_eta2 = 1.0 / (eta * eta);
            for i in 0..dim {
                let vi = if i == 0 { wb[0] } else { -wb[i] };
                let (idx, val) = g.row(off + i);
                for (&j, &v) in idx.iter().zip(val) {
                    if !mark[j] {
                        mark[j] = true;
                        touched.push(j);
                    }
                    u[j] += v * vi;
                }
                let sign = if i == 0 { -1.0 } else { 1.0 };
                add_outer(&mut m, n, (idx, val), sign * inv_eta2);
            }
            touched.sort_unstable();
            let coef = 2.0 * inv_eta2;
            for (bi, &b) in touched.iter().enumerate() {
                let ub = u[b] * coef;
                if ub == 0.0 {
                    continue;
                }
                let col = &mut m[b * n..(b + 1) * n];
                for &a in &touched[bi..] {
                    col[a] += ub * u[a];
                }
            }
            for &j in &touched {
                u[j] = 0.0;
                mark[j] = false;
            }
            touched.clear();
        }
        // PSD cones: M_ij += ⟨A_i, Q A_j Q⟩
        for (pk, &(cone, _)) in self.std.cones.iter().enumerate().filter(|(_, c)| matches!(c.0, Cone::Psd(_))) {
            let Cone::Psd(order) = cone else { unreachable!() };
            let Scaling::Psd { q, .. } = &sc.per_cone[pk] else { unreachable!() };
            let psd_index = self.std.cones[..pk].iter().filter(|c| matches!(c.0, Cone::Psd(_))).count();
            let cols = &self.plan.psd_cols[psd_index];
            let qs = q.as_slice();
            let qv = |a: u32, b: u32| qs[a as usize + b as usize * order];
            let mut pos = vec![usize::MAX; n];
            for (p, (j, _)) in cols.iter().enumerate() {
                pos[*j] = p;
            }
            let settings_exec = self.settings.exec;
            settings_exec.for_each_chunk(&mut m, n, |i, col| {
                let p = pos[i];
                if p == usize::MAX {
                    return;
                }
                let ei = &cols[p].1;
                for (j, ej) in &cols[p..] {
                    let mut acc = 0.0;
                    for &(a, b, alpha) in ei {
                        let mut inner = 0.0;
                        for &(c, d, beta) in ej {
                            inner += beta * qv(a, c) * qv(b, d);
                        }
                        acc += alpha * inner;
                    }
                    col[*j] += acc;
                }
            });
        }
        let maxdiag = (0..n).map(|i| m[i * n + i]).fold(0.0f64, f64::max).max(1.0);
        let mut reg = self.settings.static_reg * maxdiag;
        for _ in 0..6 {
            let mut a = m.clone();
            for i in 0..n {
                a[i * n + i] += reg;
            }
            if let Ok(chol) = Cholesky::factor(a, n) {
                return Some(Factored { chol });
            }
            reg = (reg * 100.0).max(1e-12 * maxdiag);
        }
        None
    }

    /// Solves `[0 Gᵀ; G −WᵀW] [u; v] = [p; q]` with iterative refinement.
    fn kkt_solve(&self, f: &Factored, sc: &Scalings, p: &[f64], q: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (n, m) = (self.std.n, self.std.m);
        let g = &self.std.g;
        let raw = |p: &[f64], q: &[f64]| -> (Vec<f64>, Vec<f64>) {
            let mut hq = vec![0.0; m];
            self.apply_hinv(sc, q, &mut hq);
            let mut rhs = vec![0.0; n];
            g.tmul(&hq, &mut rhs);
            for i in 0..n {
                rhs[i] += p[i];
            }
            f.chol.solve(&mut rhs);
            let mut gu = vec![0.0; m];
            g.mul(&rhs, &mut gu);
            for i in 0..m {
                gu[i] -= q[i];
            }
            let mut v = vec![0.0; m];
            self.apply_hinv(sc, &gu, &mut v);
            (rhs, v)
        };
        let (mut u, mut v) = raw(p, q);
        let scale = 1.0 + cones::norm(p).max(cones::norm(q));
        for _ in 0..self.settings.refine_steps {
            let mut gtv = vec![0.0; n];
            g.tmul(&v, &mut gtv);
            let rp: Vec<f64> = (0..n).map(|i| p[i] - gtv[i]).collect();
            let mut gu = vec![0.0; m];
            g.mul(&u, &mut gu);
            let mut hv = vec![0.0; m];
            self.apply_h(sc, &v, &mut hv);
            let rq: Vec<f64> = (0..m).map(|i| q[i] - gu[i] + hv[i]).collect();
            let res = cones::norm(&rp).max(cones::norm(&rq));
            if res <= 1e-15 * scale {
                break;
            }
            let (du, dv) = raw(&rp, &rq);
            for i in 0..n {
                u[i] += du[i];
            }
            for i in 0..m {
                v[i] += dv[i];
            }
        }
        (u, v)
    }

    fn initial_point(&self) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let (n, m) = (self.std.n, self.std.m);
        let mut s = vec![1.0; m];
        let mut z = vec![1.0; m];
        // identity scaling: W = I
        let mut e = vec![0.0; m];
        self.for_cones(|_, cone, r| cones::identity(cone, &mut e[r]));
        let sc = self.compute_scalings(&e, &e)?;
        let f = self.factor(&sc)?;
        let zero_n = vec![0.0; n];
        let (x, v) = self.kkt_solve(&f, &sc, &zero_n, &self.std.h);
        // s = h − Gx = −v
        for i in 0..m {
            s[i] = -v[i];
        }
        let neg_c: Vec<f64> = self.std.c.iter().map(|v| -v).collect();
        let zero_m = vec![0.0; m];
        let (_, zv) = self.kkt_solve(&f, &sc, &neg_c, &zero_m);
        z.copy_from_slice(&zv);
        for vec in [&mut s, &mut z] {
            let mut worst = f64::NEG_INFINITY;
            let nrm = cones::norm(vec);
            self.for_cones(|_, cone, r| worst = worst.max(-cones::min_eig(cone, &vec[r])));
            if worst >= -1e-8 * nrm.max(1.0) {
                let shift = 1.0 + worst;
                self.for_cones(|_, cone, r| {
                    let mut id = vec![0.0; r.len()];
                    cones::identity(cone, &mut id);
                    for (t, v) in vec[r].iter_mut().zip(id) {
                        *t += shift * v;
                    }
                });
            }
        }
        Some((x, s, z))
    }

    fn run(&self, program: &ConicProgram) -> ConicSolution {
        let st = &self.std;
        let (n, m) = (st.n, st.m);
        let set = self.settings;
        let Some((mut x, mut s, mut z)) = self.initial_point() else {
            return ConicSolution::failed(Status::NumericalTrouble, 0, "initial factorisation failed".into(), set.feastol);
        };
        let (mut tau, mut kappa) = (1.0f64, 1.0f64);
        let hnorm = cones::norm(&st.h).max(1.0);
        let cnorm = cones::norm(&st.c).max(1.0);
        let mut last = (f64::NAN, f64::NAN, f64::NAN);
        let mut best: Option<Best> = None;
        let mut tight = 1.0f64;
        for iter in 0..set.max_iter {
            // residuals
            let mut gtz = vec![0.0; n];
            st.g.tmul(&z, &mut gtz);
            let rx: Vec<f64> = (0..n).map(|i| gtz[i] + st.c[i] * tau).collect();
            let mut gx = vec![0.0; m];
            st.g.mul(&x, &mut gx);
            let rz: Vec<f64> = (0..m).map(|i| s[i] + gx[i] - st.h[i] * tau).collect();
            let cx = cones::dot(&st.c, &x);
            let hz = cones::dot(&st.h, &z);
            let rt = kappa + cx + hz;
            let sz = cones::dot(&s, &z);
            let mu = (sz + tau * kappa) / (self.nu + 1.0);

            let pres = cones::norm(&rz) / tau / hnorm;
            let dres = cones::norm(&rx) / tau / cnorm;
            let pcost = cx / tau;
            let dcost = -hz / tau;
            let gap = sz / (tau * tau);
            let relgap = gap / pcost.abs().max(dcost.abs()).max(1e-300);
            last = (pres, dres, gap);
            log::trace!(
                "ipm {iter:3} pcost {pcost:+.6e} dcost {dcost:+.6e} gap {gap:.2e} pres {pres:.2e} dres {dres:.2e} tau {tau:.2e} kappa {kappa:.2e}"
            );
            if pres <= set.feastol * tight && dres <= set.feastol * tight && (gap <= set.abstol * tight || relgap <= set.reltol * tight) {
                let sol = self.optimal(program, &x, tau, iter, last);
                let worst = program.check(sol.x.as_ref().expect("optimal")).max_violation();
                if worst <= 10.0 * set.feastol.max(1e-12) || tight < 1e-3 {
                    return sol;
                }
                log::debug!("ipm: converged point violates a block by {worst:.2e}; tightening");
                tight *= 0.1;
            }
            let merit = pres.max(dres).max(gap.min(relgap));
            if merit.is_finite() && best.as_ref().is_none_or(|b| merit < b.merit) {
                best = Some(Best { merit, x: x.clone(), tau, iter, res: last, gap_ok: gap.min(relgap) });
            }
            // infeasibility certificates
            if hz < 0.0 {
                let mut gz = vec![0.0; n];
                st.g.tmul(&z, &mut gz);
                if cones::norm(&gz) / cnorm <= set.feastol * (-hz) {
                    return ConicSolution::failed(
                        Status::Infeasible,
                        iter,
                        "primal infeasible: certificate found".into(),
                        set.feastol,
                    );
                }
            }
            if cx < 0.0 {
                let gxs: Vec<f64> = (0..m).map(|i| gx[i] + s[i]).collect();
                if cones::norm(&gxs) / hnorm <= set.feastol * (-cx) {
                    return ConicSolution::failed(
                        Status::NumericalTrouble,
                        iter,
                        "dual infeasible: objective unbounded below".into(),
                        set.feastol,
                    );
                }
            }

            let Some(sc) = self.compute_scalings(&s, &z) else {
                return self.stalled(program, iter, "iterate left the cone interior", last, best);
            };
            let Some(fac) = self.factor(&sc) else {
                return self.stalled(program, iter, "normal matrix factorisation failed", last, best);
            };
            let neg_c: Vec<f64> = st.c.iter().map(|v| -v).collect();
            let (x1, z1) = self.kkt_solve(&fac, &sc, &neg_c, &st.h);
            let denom = cones::dot(&st.c, &x1) + cones::dot(&st.h, &z1) - kappa / tau;

            let lam = &sc.lambda;
            let mut lamsq = vec![0.0; m];
            self.for_cones(|_, cone, r| cones::jordan_product(cone, &lam[r.clone()], &lam[r.clone()], &mut lamsq[r]));

            let newton = |bx: &[f64], bz: &[f64], bt: f64, dsc: &[f64], dk: f64| {
                let mut y = vec![0.0; m];
                self.for_cones(|k, cone, r| sc.per_cone[k].lambda_solve(cone, &lam[r.clone()], &dsc[r.clone()], &mut y[r]));
                let mut wty = vec![0.0; m];
                self.for_cones(|k, _, r| sc.per_cone[k].apply_wt(&y[r.clone()], &mut wty[r]));
                let q: Vec<f64> = (0..m).map(|i| bz[i] - wty[i]).collect();
                let (x2, z2) = self.kkt_solve(&fac, &sc, bx, &q);
                let dtau = (bt - dk / tau - cones::dot(&st.c, &x2) - cones::dot(&st.h, &z2)) / denom;
                let dx: Vec<f64> = (0..n).map(|i| x2[i] + dtau * x1[i]).collect();
                let dz: Vec<f64> = (0..m).map(|i| z2[i] + dtau * z1[i]).collect();
                let mut dzt = vec![0.0; m];
                self.for_cones(|k, _, r| sc.per_cone[k].apply_w(&dz[r.clone()], &mut dzt[r]));
                // ds from the primal row keeps the linear residual exact
                let mut gdx = vec![0.0; m];
                st.g.mul(&dx, &mut gdx);
                let ds: Vec<f64> = (0..m).map(|i| bz[i] - gdx[i] + st.h[i] * dtau).collect();
                let mut dst = vec![0.0; m];
                self.for_cones(|k, _, r| sc.per_cone[k].apply_winv_t(&ds[r.clone()], &mut dst[r]));
                let dkappa = (dk - kappa * dtau) / tau;
                Dir { dx, dz, ds, dst, dzt, dtau, dkappa }
            };
            let step = |d: &Dir| -> f64 {
                let mut a = f64::INFINITY;
                self.for_cones(|k, cone, r| {
                    let l = &lam[r.clone()];
                    a = a.min(cones::max_step(cone, &sc.per_cone[k], l, &d.dst[r.clone()], f64::INFINITY));
                    a = a.min(cones::max_step(cone, &sc.per_cone[k], l, &d.dzt[r], f64::INFINITY));
                });
                if d.dtau < 0.0 {
                    a = a.min(-tau / d.dtau);
                }
                if d.dkappa < 0.0 {
                    a = a.min(-kappa / d.dkappa);
                }
                a
            };

            // predictor
            let bx: Vec<f64> = rx.iter().map(|v| -v).collect();
            let bz: Vec<f64> = rz.iter().map(|v| -v).collect();
            let dsc: Vec<f64> = lamsq.iter().map(|v| -v).collect();
            let aff = newton(&bx, &bz, -rt, &dsc, -tau * kappa);
            let alpha_aff = step(&aff).min(1.0);
            let sigma = (1.0 - alpha_aff).powi(3).clamp(0.0, 1.0);

            // corrector
            let mut cross = vec![0.0; m];
            self.for_cones(|_, cone, r| cones::jordan_product(cone, &aff.dst[r.clone()], &aff.dzt[r.clone()], &mut cross[r]));
            let mut e = vec![0.0; m];
            self.for_cones(|_, cone, r| cones::identity(cone, &mut e[r]));
            let dsc: Vec<f64> = (0..m).map(|i| -lamsq[i] - cross[i] + sigma * mu * e[i]).collect();
            let dk = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
            let f = 1.0 - sigma;
            let bx: Vec<f64> = rx.iter().map(|v| -f * v).collect();
            let bz: Vec<f64> = rz.iter().map(|v| -f * v).collect();
            let dir = newton(&bx, &bz, -f * rt, &dsc, dk);
            let alpha = (set.step_fraction * step(&dir)).min(1.0);
            if !(alpha > 1e-12) {
                return self.stalled(program, iter, "step length collapsed", last, best);
            }
            for i in 0..n {
                x[i] += alpha * dir.dx[i];
            }
            for i in 0..m {
                s[i] += alpha * dir.ds[i];
                z[i] += alpha * dir.dz[i];
            }
            tau += alpha * dir.dtau;
            kappa += alpha * dir.dkappa;
        }
        self.stalled(program, set.max_iter, "iteration limit reached", last, best)
    }

    fn stalled(
        &self,
        program: &ConicProgram,
        iter: usize,
        why: &str,
        last: (f64, f64, f64),
        best: Option<Best>,
    ) -> ConicSolution {
        let set = self.settings;
        if let Some(b) = best {
            let (pres, dres, _) = b.res;
            if pres <= set.reduced_feastol && dres <= set.reduced_feastol && b.gap_ok <= set.reduced_gaptol {
                let mut sol = self.optimal(program, &b.x, b.tau, b.iter, b.res);
                sol.message = format!("reduced accuracy: {why} at iteration {iter}");
                return sol;
            }
        }
        let mut sol = ConicSolution::failed(
            Status::NumericalTrouble,
            iter,
            format!("{why} (pres {:.2e}, dres {:.2e}, gap {:.2e})", last.0, last.1, last.2),
            self.settings.feastol,
        );
        sol.primal_residual = last.0;
        sol.dual_residual = last.1;
        sol.gap = last.2;
        sol
    }

    fn optimal(&self, program: &ConicProgram, xh: &[f64], tau: f64, iter: usize, last: (f64, f64, f64)) -> ConicSolution {
        let x: Vec<f64> = (0..self.std.n).map(|i| self.e[i] * xh[i] / (tau * self.sigma_h)).collect();
        ConicSolution {
            status: Status::Optimal,
            objective_value: program.objective_value(&x),
            x: Some(x),
            solver_tolerance: self.settings.feastol,
            iterations: iter,
            primal_residual: last.0,
            dual_residual: last.1,
            gap: last.2,
            message: String::new(),
            solve_seconds: 0.0,
        }
    }
}

struct Best {
    merit: f64,
    x: Vec<f64>,
    tau: f64,
    iter: usize,
    res: (f64, f64, f64),
    gap_ok: f64,
}

struct Dir {
    dx: Vec<f64>,
    dz: Vec<f64>,
    ds: Vec<f64>,
    dst: Vec<f64>,
    dzt: Vec<f64>,
    dtau: f64,
    dkappa: f64,
}

/// `M += coef·g gᵀ` on the lower triangle for a sparse row `g`.
fn add_outer(m: &mut [f64], n: usize, row: (&[usize], &[f64]), coef: f64) {
    let (idx, val) = row;
    for p in 0..idx.len() {
        let ca = coef * val[p];
        for q in 0..=p {
            let (a, b) = (idx[p], idx[q]);
            let (r, c) = if a >= b { (a, b) } else { (b, a) };
            m[c * n + r] += ca * val[q];
        }
    }
}

fn plan_schur(std: &StdForm) -> SchurPlan {
    let n = std.n;
    let mut dense_lp_rows = Vec::new();
    let mut sparse_lp_rows = Vec::new();
    let mut psd_cols = Vec::new();
    for &(cone, off) in &std.cones {
        match cone {
            Cone::Nonneg(d) => {
                for r in off..off + d {
                    let nnz = std.g.ptr[r + 1] - std.g.ptr[r];
                    if nnz * nnz > n.max(64) * 8 {
                        dense_lp_rows.push(r);
                    } else {
                        sparse_lp_rows.push(r);
                    }
                }
            }
            Cone::Soc(_) => {}
            Cone::Psd(order) => {
                let mut per_var: Vec<Vec<(u32, u32, f64)>> = vec![Vec::new(); n];
                let mut k = off;
                for c in 0..order {
                    for r in c..order {
                        let (idx, val) = std.g.row(k);
                        for (&j, &v) in idx.iter().zip(val) {
                            if r == c {
                                per_var[j].push((r as u32, r as u32, v));
                            } else {
                                let h = v / SQRT2;
                                per_var[j].push((r as u32, c as u32, h));
                                per_var[j].push((c as u32, r as u32, h));
                            }
                        }
                        k += 1;
                    }
                }
                let cols: Vec<(usize, Vec<(u32, u32, f64)>)> =
                    per_var.into_iter().enumerate().filter(|(_, e)| !e.is_empty()).collect();
                psd_cols.push(cols);
            }
        }
    }
    SchurPlan { dense_lp_rows, sparse_lp_rows, psd_cols }
}

/// Ruiz equilibration in place. Returns column scales `e` and row scales
/// `d`; rows of one SOC or PSD cone share a scale.
fn equilibrate(std: &mut StdForm, iters: usize) -> (Vec<f64>, Vec<f64>) {
    let (n, m) = (std.n, std.m);
    let mut e = vec![1.0; n];
    let mut d = vec![1.0; m];
    for _ in 0..iters {
        let mut colmax = vec![0.0f64; n];
        let mut rowmax = vec![0.0f64; m];
        for r in 0..m {
            let (idx, val) = std.g.row(r);
            for (&j, &v) in idx.iter().zip(val) {
                colmax[j] = colmax[j].max(v.abs());
                rowmax[r] = rowmax[r].max(v.abs());
            }
        }
        for &(cone, off) in &std.cones {
            if !matches!(cone, Cone::Nonneg(_)) {
                let dim = cone.dim();
                let mx = rowmax[off..off + dim].iter().cloned().fold(0.0, f64::max);
                rowmax[off..off + dim].iter_mut().for_each(|v| *v = mx);
            }
        }
        let cs: Vec<f64> = colmax.iter().map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 }).collect();
        let rs: Vec<f64> = rowmax.iter().map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 }).collect();
        let mut done = true;
        for r in 0..m {
            let (a, b) = (std.g.ptr[r], std.g.ptr[r + 1]);
            for k in a..b {
                let j = std.g.idx[k];
                std.g.val[k] *= rs[r] * cs[j];
            }
            if (rs[r] - 1.0).abs() > 1e-3 {
                done = false;
            }
        }
        for j in 0..n {
            e[j] *= cs[j];
            if (cs[j] - 1.0).abs() > 1e-3 {
                done = false;
            }
        }
        for r in 0..m {
            d[r] *= rs[r];
        }
        if done {
            break;
        }
    }
    for j in 0..n {
        std.c[j] *= e[j];
    }
    for r in 0..m {
        std.h[r] *= d[r];
    }
    (e, d)
}
