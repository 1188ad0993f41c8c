//! Outer sequential-convex loop with shrinking trust regions, shrinking
//! rank-one slacks and the three-back step-back rule.

use std::collections::VecDeque;

use log::{debug, info, warn};
use nalgebra::DMatrix;
use num_complex::Complex64;
use risopt_conic::{ConicSolver, Status};
use serde::{Deserialize, Serialize};

use crate::builders::{build, build_mask_restoration, expansion_vector, ProblemKind, ToleranceSet, VarLayout};
use crate::convexify::LinearizationPoint;
use crate::em::{power_flux, surface_net_power_flow, ReflectionProfile, SurfaceGrid};
use crate::verification::{audit, midrun_audit, AuditTolerances, FeasibilityReport};
use crate::CoreError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScpSchedule {
    pub initial_tr: f64,
    pub initial_tr_gamma: f64,
    pub initial_tr_mat: f64,
    pub initial_rk1_b: f64,
    pub initial_rk1_c: f64,
    pub trust_shrink: f64,
    pub rk1_shrink: f64,
    pub stepback_depth: usize,
    pub max_iters: usize,
    pub objective_tol: f64,
    /// Convergence needs the governing radius below this value.
    pub radius_floor: f64,
    /// Iteration budget of the mask restoration phase.
    pub restoration_iters: usize,
}

impl Default for ScpSchedule {
    fn default() -> Self {
        Self::for_kind(ProblemKind::SRi)
    }
}

impl ScpSchedule {
    pub fn for_kind(kind: ProblemKind) -> Self {
        let lifted = kind.is_lifted();
        Self {
            initial_tr: 10.0,
            initial_tr_gamma: 10.0,
            initial_tr_mat: 100.0,
            initial_rk1_b: 1.0,
            initial_rk1_c: 1.0,
            trust_shrink: if lifted { 1.1 } else { 1.2 },
            rk1_shrink: 5.0,
            stepback_depth: 3,
            max_iters: if lifted { 400 } else { 600 },
            objective_tol: if lifted { 1e-12 } else { 1e-9 },
            radius_floor: if lifted { 1e-4 } else { 1e-12 },
            restoration_iters: 300,
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        let bad = |m: String| Err(CoreError::InvalidSchedule(m));
        if !(self.trust_shrink > 1.0) || !(self.rk1_shrink > 1.0) {
            return bad("shrink factors must exceed 1".into());
        }
        if self.stepback_depth < 1 {
            return bad("stepback_depth must be at least 1".into());
        }
        for (name, v) in [
            ("initial_tr", self.initial_tr),
            ("initial_tr_gamma", self.initial_tr_gamma),
            ("initial_tr_mat", self.initial_tr_mat),
            ("objective_tol", self.objective_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [("initial_rk1_b", self.initial_rk1_b), ("initial_rk1_c", self.initial_rk1_c), ("radius_floor", self.radius_floor)] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be ≥ 0, got {v}"));
            }
        }
        Ok(())
    }

    pub fn initial_radii(&self) -> Radii {
        Radii {
            tr: self.initial_tr,
            tr_gamma: self.initial_tr_gamma,
            tr_mat: self.initial_tr_mat,
            rk1_b: self.initial_rk1_b,
            rk1_c: self.initial_rk1_c,
        }
    }
}

/// Trust radii and rank-one slacks in force for one subproblem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Radii {
    pub tr: f64,
    pub tr_gamma: f64,
    pub tr_mat: f64,
    pub rk1_b: f64,
    pub rk1_c: f64,
}

impl Radii {
    pub fn shrink_trust(&mut self, f: f64) {
        self.tr /= f;
        self.tr_gamma /= f;
        self.tr_mat /= f;
    }

    pub fn shrink_rk1(&mut self, f: f64) {
        self.rk1_b /= f;
        self.rk1_c /= f;
    }

    pub fn apply(&self, tol: &ToleranceSet) -> ToleranceSet {
        ToleranceSet {
            eps_tr: self.tr,
            eps_tr_gamma: self.tr_gamma,
            eps_tr_mat: self.tr_mat,
            eps_rk1_b: self.rk1_b,
            eps_rk1_c: self.rk1_c,
            ..tol.clone()
        }
    }

    /// The radius compared with the convergence floor.
    pub fn governing(&self, kind: ProblemKind) -> f64 {
        if kind.is_lifted() {
            self.tr_mat
        } else {
            self.tr
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub iteration: usize,
    pub point: LinearizationPoint,
    pub radii: Radii,
    pub objective: f64,
}

/// Mutable state of one run. Objectives are stored in the problem's own
/// direction; `maximize` selects how they are compared.
#[derive(Clone, Debug)]
pub struct ScpState {
    pub iterate: LinearizationPoint,
    pub radii: Radii,
    pub history: VecDeque<Snapshot>,
    pub best_objective: f64,
    pub best: Option<Snapshot>,
    pub maximize: bool,
    pub last_failed: bool,
    pub iteration: usize,
    depth: usize,
}

impl ScpState {
    pub fn new(iterate: LinearizationPoint, radii: Radii, maximize: bool, depth: usize) -> Self {
        let baseline = if maximize { f64::NEG_INFINITY } else { f64::INFINITY };
        let init = Snapshot { iteration: 0, point: iterate.clone(), radii, objective: baseline };
        Self {
            iterate,
            radii,
            history: VecDeque::from([init]),
            best_objective: baseline,
            best: None,
            maximize,
            last_failed: false,
            iteration: 0,
            depth,
        }
    }

    /// `a` is no worse than `b` up to `tol`.
    pub fn improves(&self, a: f64, b: f64, tol: f64) -> bool {
        if !b.is_finite() {
            return a.is_finite();
        }
        if self.maximize {
            a >= b - tol
        } else {
            a <= b + tol
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Candidate {
    Solved { point: LinearizationPoint, objective: f64 },
    Failed { reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    Init,
    Accept,
    Stepback,
}

/// Applies one outcome to the state.
///
/// Accept: push to history, shrink radii and rank-one slacks. Otherwise:
/// restore iterate and setup of the `stepback_depth`-th most recent entry
/// (the current iterate counts as the first; the oldest entry if the history
/// is shorter) and shrink the radii once; consecutive failures keep
/// shrinking from the current radii.
pub fn accept_or_stepback(state: &mut ScpState, candidate: Candidate, schedule: &ScpSchedule) -> (Event, Option<usize>) {
    state.iteration += 1;
    match candidate {
        Candidate::Solved { point, objective } if state.improves(objective, state.best_objective, schedule.objective_tol) => {
            state.iterate = point;
            state.radii.shrink_trust(schedule.trust_shrink);
            state.radii.shrink_rk1(schedule.rk1_shrink);
            let snap = Snapshot { iteration: state.iteration, point: state.iterate.clone(), radii: state.radii, objective };
            let better = if state.maximize { objective > state.best_objective } else { objective < state.best_objective };
            if better || state.best.is_none() {
                state.best_objective = objective;
                state.best = Some(snap.clone());
            }
            state.history.push_back(snap);
            while state.history.len() > state.depth {
                state.history.pop_front();
            }
            state.last_failed = false;
            (Event::Accept, None)
        }
        _ => {
            let idx = state.history.len().saturating_sub(state.depth);
            let snap = state.history[idx].clone();
            let mut radii = if state.last_failed { state.radii } else { snap.radii };
            radii.shrink_trust(schedule.trust_shrink);
            radii.rk1_b = snap.radii.rk1_b;
            radii.rk1_c = snap.radii.rk1_c;
            state.iterate = snap.point;
            state.radii = radii;
            state.last_failed = true;
            (Event::Stepback, Some(snap.iteration))
        }
    }
}

/// One line of the iteration log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub event: Event,
    pub status: String,
    /// Objective used for acceptance: `|P_S|`, or the flux of γ toward θ_r.
    pub candidate_objective: Option<f64>,
    /// The subproblem's own optimal value.
    pub model_objective: Option<f64>,
    /// `|P_S(γ*)|` or `P_θr(γ*)`.
    pub true_objective: Option<f64>,
    pub best_objective: Option<f64>,
    pub restored_iteration: Option<usize>,
    pub radii_used: Radii,
    pub radii_next: Radii,
    pub solver_iterations: usize,
    /// Worst relative constraint violation of the expansion point.
    pub expansion_violation: Option<f64>,
    pub note: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ScpOutcome {
    pub profile: ReflectionProfile,
    pub gamma_mat: Option<DMatrix<Complex64>>,
    pub trace: Vec<TraceRecord>,
    pub converged: bool,
    pub hit_max_iters: bool,
    pub accepted: usize,
    pub final_radii: Radii,
    pub objective: f64,
    pub warm_start_report: FeasibilityReport,
    /// Mask restoration log; empty when the warm start was usable directly.
    pub restoration: Vec<RestorationRecord>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// True objective of a point in the problem's direction.
pub fn true_objective(kind: ProblemKind, gamma: &[Complex64], grid: &SurfaceGrid) -> f64 {
    let prof = ReflectionProfile { gamma: gamma.to_vec() };
    if kind.maximizes() {
        power_flux(&prof, grid, grid.scenario.theta_r_rad)
    } else {
        surface_net_power_flow(&prof, grid).map(f64::abs).unwrap_or(f64::INFINITY)
    }
}

/// Three consecutive accepted objectives within `objective_tol` of their
/// predecessor, with the governing radius below the floor.
pub fn converged(trace: &[TraceRecord], kind: ProblemKind, schedule: &ScpSchedule) -> bool {
    let objs: Vec<(f64, &TraceRecord)> = trace
        .iter()
        .filter(|r| matches!(r.event, Event::Init | Event::Accept))
        .filter_map(|r| r.candidate_objective.map(|o| (o, r)))
        .collect();
    if objs.len() < 4 {
        return false;
    }
    let tail = &objs[objs.len() - 4..];
    let small = tail.windows(2).all(|w| (w[1].0 - w[0].0).abs() <= schedule.objective_tol);
    let last = trace.last().expect("nonempty");
    small && last.event == Event::Accept && last.radii_next.governing(kind) < schedule.radius_floor
}

/// Number of accepted objectives that move against the problem's direction
/// by more than `objective_tol`.
pub fn monotonicity_violations(trace: &[TraceRecord], maximize: bool, tol: f64) -> usize {
    let objs: Vec<f64> =
        trace.iter().filter(|r| r.event == Event::Accept).filter_map(|r| r.candidate_objective).collect();
    let mut best = objs.first().copied().unwrap_or(0.0);
    let mut bad = 0;
    for &o in objs.iter().skip(1) {
        let worse = if maximize { o < best - tol } else { o > best + tol };
        if worse {
            bad += 1;
        }
        best = if maximize { best.max(o) } else { best.min(o) };
    }
    bad
}

/// Re-derives every radius update and step-back target from the trace.
pub fn replay_check(trace: &[TraceRecord], schedule: &ScpSchedule) -> Result<(), String> {
    let first = trace.first().ok_or("empty trace")?;
    if first.event != Event::Init {
        return Err("trace does not start with init".into());
    }
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    let same = |a: &Radii, b: &Radii| {
        close(a.tr, b.tr) && close(a.tr_gamma, b.tr_gamma) && close(a.tr_mat, b.tr_mat) && close(a.rk1_b, b.rk1_b) && close(a.rk1_c, b.rk1_c)
    };
    let mut history: VecDeque<(usize, Radii)> = VecDeque::from([(0, first.radii_next)]);
    let mut current = first.radii_next;
    let mut last_failed = false;
    for r in &trace[1..] {
        if !same(&r.radii_used, &current) {
            return Err(format!("iteration {}: radii_used does not follow from the previous record", r.iteration));
        }
        let mut expect = current;
        match r.event {
            Event::Accept => {
                expect.shrink_trust(schedule.trust_shrink);
                expect.shrink_rk1(schedule.rk1_shrink);
                history.push_back((r.iteration, expect));
                while history.len() > schedule.stepback_depth {
                    history.pop_front();
                }
                last_failed = false;
            }
            Event::Stepback => {
                let idx = history.len().saturating_sub(schedule.stepback_depth);
                let (it, snap) = history[idx];
                if r.restored_iteration != Some(it) {
                    return Err(format!(
                        "iteration {}: restored {:?}, expected iteration {it}",
                        r.iteration, r.restored_iteration
                    ));
                }
                expect = if last_failed { current } else { snap };
                expect.shrink_trust(schedule.trust_shrink);
                expect.rk1_b = snap.rk1_b;
                expect.rk1_c = snap.rk1_c;
                last_failed = true;
            }
            Event::Init => return Err(format!("iteration {}: second init record", r.iteration)),
        }
        if !same(&r.radii_next, &expect) {
            return Err(format!("iteration {}: radii_next {:?} != expected {:?}", r.iteration, r.radii_next, expect));
        }
        current = expect;
    }
    Ok(())
}

#[derive(Clone, Debug, Default)]
pub struct ScpOptions {
    pub audit: AuditTolerances,
    /// Directory receiving a text dump of every subproblem that is not solved to optimality.
    pub dump_failed: Option<std::path::PathBuf>,
}

/// One iteration of the mask restoration phase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestorationRecord {
    pub iteration: usize,
    pub accepted: bool,
    pub status: String,
    /// Largest mask flux over `ε_RM` at the candidate.
    pub mask_ratio: Option<f64>,
    pub radius: f64,
}

/// Largest mask-direction flux divided by `ε_RM`.
pub fn mask_ratio(gamma: &[Complex64], grid: &SurfaceGrid, tol: &ToleranceSet) -> f64 {
    let prof = ReflectionProfile { gamma: gamma.to_vec() };
    tol.mask_angles_rad.iter().map(|&th| power_flux(&prof, grid, th) / tol.eps_rm).fold(0.0, f64::max)
}

/// Moves `start` into the mask set by repeatedly minimizing the relative
/// mask excess under the vector trust region (and the linearized reactive
/// pair when `kind` is reactive). Returns the first mask-feasible iterate.
pub fn restore_mask(
    kind: ProblemKind,
    grid: &SurfaceGrid,
    tol: &ToleranceSet,
    schedule: &ScpSchedule,
    start: &[Complex64],
    solver: &dyn ConicSolver,
    options: &ScpOptions,
) -> Result<(Vec<Complex64>, Vec<RestorationRecord>), CoreError> {
    let lay = VarLayout::new(grid.n(), false);
    let mut gamma = start.to_vec();
    let mut ratio = mask_ratio(&gamma, grid, tol);
    let mut radius = schedule.initial_tr;
    let mut log = Vec::new();
    let check_kind = if kind.is_reactive() { ProblemKind::SRi } else { ProblemKind::SRm };
    for it in 1..=schedule.restoration_iters {
        if ratio <= 1.0 {
            break;
        }
        let point = LinearizationPoint::vector(gamma.clone());
        let program = build_mask_restoration(&point, grid, &ToleranceSet { eps_tr: radius, ..tol.clone() }, kind.is_reactive())?;
        let sol = solver.solve(&program)?;
        let mut cand_ratio = None;
        let mut accepted = false;
        if let (Status::Optimal, Some(x)) = (sol.status, &sol.x) {
            let cand = lay.unpack_gamma(x);
            let r = mask_ratio(&cand, grid, tol);
            cand_ratio = finite(r);
            let ok = midrun_audit(check_kind, &LinearizationPoint::vector(cand.clone()), grid, tol, &options.audit).is_none();
            if ok && r < ratio {
                gamma = cand;
                ratio = r;
                accepted = true;
            }
        }
        if !accepted {
            radius /= schedule.trust_shrink;
        }
        debug!("restoration it {it:>4} ratio {ratio:.4e} radius {radius:.3e} ({})", sol.status);
        log.push(RestorationRecord { iteration: it, accepted, status: sol.status.to_string(), mask_ratio: cand_ratio, radius });
    }
    if ratio > 1.0 {
        return Err(CoreError::InfeasibleWarmStart { family: "mask (after restoration)".into(), violation: ratio - 1.0 });
    }
    info!("{kind}: mask restored after {} iterations", log.len());
    Ok((gamma, log))
}

/// Runs the loop from `warm_start` until convergence or `max_iters`.
///
/// If the first subproblem is infeasible and the warm start violates the
/// mask, the mask is restored first and the loop restarts from there.
pub fn run_scp(
    kind: ProblemKind,
    grid: &SurfaceGrid,
    tol: &ToleranceSet,
    schedule: &ScpSchedule,
    warm_start: &ReflectionProfile,
    solver: &dyn ConicSolver,
    options: &ScpOptions,
) -> Result<ScpOutcome, CoreError> {
    tol.validate()?;
    schedule.validate()?;
    if warm_start.len() != grid.n() {
        return Err(CoreError::Shape { expected: grid.n(), found: warm_start.len() });
    }
    let mask_bad = kind.has_mask() && mask_ratio(&warm_start.gamma, grid, tol) > 1.0 + options.audit.mask_rel;
    match run_from(kind, grid, tol, schedule, warm_start, solver, options) {
        Err(CoreError::FirstIterationInfeasible(msg)) if mask_bad => {
            warn!("{kind}: first subproblem infeasible ({msg}); restoring the mask");
            let (gamma, log) = restore_mask(kind, grid, tol, schedule, &warm_start.gamma, solver, options)?;
            let mut out = run_from(kind, grid, tol, schedule, &ReflectionProfile { gamma }, solver, options)?;
            out.warm_start_report = audit(
                warm_start,
                kind.is_lifted().then(|| LinearizationPoint::lifted(warm_start.gamma.clone()).gamma_mat_bar).flatten().as_ref(),
                kind,
                tol,
                grid,
                &options.audit,
            );
            out.restoration = log;
            Ok(out)
        }
        other => other,
    }
}

fn run_from(
    kind: ProblemKind,
    grid: &SurfaceGrid,
    tol: &ToleranceSet,
    schedule: &ScpSchedule,
    warm_start: &ReflectionProfile,
    solver: &dyn ConicSolver,
    options: &ScpOptions,
) -> Result<ScpOutcome, CoreError> {
    let audit_tol = &options.audit;
    let point0 = if kind.is_lifted() {
        LinearizationPoint::lifted(warm_start.gamma.clone())
    } else {
        LinearizationPoint::vector(warm_start.gamma.clone())
    };
    let warm_report = audit(warm_start, point0.gamma_mat_bar.as_ref(), kind, tol, grid, audit_tol);
    if let Some(f) = midrun_audit(kind, &point0, grid, tol, audit_tol) {
        return Err(CoreError::InfeasibleWarmStart { family: f.family.to_string(), violation: f.worst_violation });
    }
    for c in warm_report.checks.iter().filter(|c| !c.pass) {
        warn!("warm start violates {} by {:.3e} (not linearized; the first subproblem restores it)", c.family, c.worst_violation);
    }

    let lay = VarLayout::new(grid.n(), kind.is_lifted());
    let maximize = kind.maximizes();
    let mut state = ScpState::new(point0.clone(), schedule.initial_radii(), maximize, schedule.stepback_depth);
    let init_obj = true_objective(kind, &point0.gamma_bar, grid);
    let mut trace = vec![TraceRecord {
        iteration: 0,
        event: Event::Init,
        status: "warm_start".into(),
        candidate_objective: finite(init_obj),
        model_objective: None,
        true_objective: finite(init_obj),
        best_objective: None,
        restored_iteration: None,
        radii_used: state.radii,
        radii_next: state.radii,
        solver_iterations: 0,
        expansion_violation: None,
        note: None,
    }];

    let mut accepted = 0usize;
    let mut converged_flag = false;
    for _ in 0..schedule.max_iters {
        let radii_used = state.radii;
        let tol_i = radii_used.apply(tol);
        let program = build(kind, &state.iterate, grid, &tol_i)?;
        let xbar = expansion_vector(kind, &state.iterate, grid);
        let exp_viol = program
            .check(&xbar)
            .blocks
            .iter()
            .filter(|b| !(kind.is_lifted() && b.name.starts_with("rank1")))
            .map(|b| b.violation)
            .fold(0.0f64, f64::max);
        if accepted > 0 && exp_viol > 1e-8 {
            warn!("expansion point violates its own subproblem by {exp_viol:.3e}");
        }
        let sol = solver.solve(&program)?;
        if let (Some(dir), false) = (&options.dump_failed, sol.status == Status::Optimal) {
            let path = dir.join(format!("{kind}_it{:04}.conic", state.iteration + 1));
            if let Err(e) = std::fs::write(&path, risopt_conic::dump::write_program(&program)) {
                warn!("cannot write {}: {e}", path.display());
            }
        }
        let mut note = None;
        let mut model_obj = None;
        let mut true_obj = None;
        let candidate = match (sol.status, &sol.x) {
            (Status::Optimal, Some(x)) => {
                let point = lay.unpack_point(x);
                model_obj = Some(sol.objective_value);
                let obj = true_objective(kind, &point.gamma_bar, grid);
                true_obj = finite(obj);
                match midrun_audit(kind, &point, grid, tol, audit_tol) {
                    Some(f) => {
                        note = Some(format!("audit: {} violated by {:.3e}", f.family, f.worst_violation));
                        Candidate::Failed { reason: note.clone().unwrap_or_default() }
                    }
                    None => match point.validate() {
                        Ok(()) => Candidate::Solved { point, objective: obj },
                        Err(e) => {
                            note = Some(e.to_string());
                            Candidate::Failed { reason: e.to_string() }
                        }
                    },
                }
            }
            (Status::Infeasible, _) if accepted == 0 && !state.last_failed => {
                return Err(CoreError::FirstIterationInfeasible(sol.message.clone()));
            }
            (status, _) => {
                note = Some(format!("{status}: {}", sol.message));
                Candidate::Failed { reason: sol.message.clone() }
            }
        };
        let cand_obj = match &candidate {
            Candidate::Solved { objective, .. } => Some(*objective),
            Candidate::Failed { .. } => None,
        };
        let (event, restored) = accept_or_stepback(&mut state, candidate, schedule);
        if event == Event::Accept {
            accepted += 1;
        } else if note.is_none() {
            note = Some("no improvement".into());
        }
        trace.push(TraceRecord {
            iteration: state.iteration,
            event,
            status: sol.status.to_string(),
            candidate_objective: cand_obj,
            model_objective: model_obj,
            true_objective: true_obj,
            best_objective: finite(state.best_objective),
            restored_iteration: restored,
            radii_used,
            radii_next: state.radii,
            solver_iterations: sol.iterations,
            expansion_violation: Some(exp_viol),
            note,
        });
        let r = trace.last().expect("pushed");
        debug!(
            "{kind} it {:>4} {:?} obj {:?} true {:?} radius {:.3e} ({} ipm its, {:.2}s)",
            r.iteration,
            r.event,
            r.candidate_objective,
            r.true_objective,
            radii_used.governing(kind),
            sol.iterations,
            sol.solve_seconds
        );
        if event == Event::Accept && converged(&trace, kind, schedule) {
            converged_flag = true;
            break;
        }
    }
    let hit_max = !converged_flag;
    if hit_max {
        warn!("{kind}: max_iters = {} reached without convergence", schedule.max_iters);
    }
    let (point, objective) = match &state.best {
        Some(s) => (s.point.clone(), s.objective),
        None => (point0, init_obj),
    };
    info!("{kind}: {} iterations, {accepted} accepted, objective {objective:.6e}", state.iteration);
    Ok(ScpOutcome {
        profile: ReflectionProfile { gamma: point.gamma_bar },
        gamma_mat: point.gamma_mat_bar,
        trace,
        converged: converged_flag,
        hit_max_iters: hit_max,
        accepted,
        final_radii: state.radii,
        objective,
        warm_start_report: warm_report,
        restoration: Vec::new(),
    })
}
