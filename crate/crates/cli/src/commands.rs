use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use risopt_conic::InteriorPoint;
use risopt_core::em::{power_flux, reradiation_pattern, surface_net_power_flow};
use risopt_core::scp::{monotonicity_violations, replay_check, Radii, RestorationRecord};
use risopt_core::verification::rank_one_gap;
use risopt_core::{audit, go_profile, go_ri_profile, run_scp, CoreError, FeasibilityReport, ProblemKind, ReflectionProfile, ScpOptions};
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, Resolved, WarmStart};
use crate::output::{self, OutputError};
use crate::pattern::{summarize, PatternSummary};

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Infeasible = 1,
    Config = 2,
    Solver = 3,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("{0}")]
    Infeasible(String),
    #[error("solver failure: {0}")]
    Solver(String),
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            Self::Config(_) | Self::Output(OutputError::Malformed { .. }) => Exit::Config,
            Self::Output(OutputError::Io { .. }) => Exit::Config,
            Self::Infeasible(_) => Exit::Infeasible,
            Self::Solver(_) => Exit::Solver,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InfeasibleWarmStart { .. } | CoreError::FirstIterationInfeasible(_) => Self::Infeasible(e.to_string()),
            CoreError::Shape { .. } => Self::Config(ConfigError::Field { field: "profile".into(), reason: e.to_string() }),
            _ => Self::Solver(e.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MainBeam {
    pub theta_r_deg: f64,
    pub flux_at_theta_r: f64,
    pub go_flux_at_theta_r: f64,
    pub db_vs_go: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub config_sha256: String,
    pub problem: ProblemKind,
    pub n: usize,
    pub converged: bool,
    pub hit_max_iters: bool,
    pub iterations: usize,
    pub accepted: usize,
    pub objective: f64,
    pub final_radii: Radii,
    pub governing_radius: f64,
    pub net_power_w: f64,
    pub rank_one_gap: Option<f64>,
    pub rank_one_gap_rel: Option<f64>,
    pub monotonicity_violations: usize,
    pub replay_check: Result<(), String>,
    pub warm_start_audit: FeasibilityReport,
    pub restoration: Vec<RestorationRecord>,
    pub audit: FeasibilityReport,
    pub main_beam: MainBeam,
    pub pattern: PatternSummary,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchmarkEntry {
    pub name: String,
    pub audit: FeasibilityReport,
    pub main_beam: MainBeam,
    pub pattern: PatternSummary,
}

/// Main-beam window half-width and side-lobe threshold of the summary.
pub const MAIN_BEAM_HALF_WIDTH_DEG: f64 = 2.0;
pub const LOBE_THRESHOLD_DB: f64 = -20.0;

fn sweep(r: &Resolved, p: &ReflectionProfile) -> Vec<f64> {
    reradiation_pattern(p, &r.grid, &r.sweep_rad, r.settings.exec)
}

fn main_beam(r: &Resolved, p: &ReflectionProfile) -> Result<MainBeam, CliError> {
    let th = r.grid.scenario.theta_r_rad;
    let f = power_flux(p, &r.grid, th);
    let go = power_flux(&go_profile(&r.grid)?, &r.grid, th);
    Ok(MainBeam { theta_r_deg: th.to_degrees(), flux_at_theta_r: f, go_flux_at_theta_r: go, db_vs_go: 10.0 * (f / go).log10() })
}

fn summary(r: &Resolved, flux: &[f64]) -> PatternSummary {
    let t = r.grid.scenario.theta_r_rad.to_degrees();
    summarize(&r.sweep_rad, flux, [t - MAIN_BEAM_HALF_WIDTH_DEG, t + MAIN_BEAM_HALF_WIDTH_DEG], LOBE_THRESHOLD_DB)
}

fn out_dir(r: &Resolved) -> &Path {
    &r.config.output_dir
}

/// Writes `pattern_<label>.csv` and returns the flux column.
fn emit_pattern(r: &Resolved, label: &str, p: &ReflectionProfile, dir: &Path) -> Result<Vec<f64>, CliError> {
    let flux = sweep(r, p);
    output::write_pattern(&dir.join(format!("pattern_{label}.csv")), &r.sha256, label, &r.sweep_rad, &flux)?;
    Ok(flux)
}

fn benchmarks(r: &Resolved) -> Result<Vec<(String, ReflectionProfile)>, CliError> {
    let mut v = Vec::new();
    if r.config.benchmarks.go {
        v.push(("go".to_string(), go_profile(&r.grid)?));
    }
    if r.config.benchmarks.go_ri {
        v.push(("go_ri".to_string(), go_ri_profile(&r.grid)?));
    }
    Ok(v)
}

fn emit_benchmarks(r: &Resolved, dir: &Path) -> Result<Vec<BenchmarkEntry>, CliError> {
    let mut entries = Vec::new();
    for (name, p) in benchmarks(r)? {
        let flux = emit_pattern(r, &name, &p, dir)?;
        output::write_profile(&dir.join(format!("profile_{name}.csv")), &p, &r.grid)?;
        entries.push(BenchmarkEntry {
            audit: audit(&p, None, r.config.problem, &r.tol, &r.grid, &r.config.audit),
            main_beam: main_beam(r, &p)?,
            pattern: summary(r, &flux),
            name,
        });
    }
    Ok(entries)
}

fn load_warm_start(r: &Resolved) -> Result<ReflectionProfile, CliError> {
    let p = match &r.warm_start {
        WarmStart::GoRi => go_ri_profile(&r.grid)?,
        WarmStart::File(path) => output::read_profile(path)?,
    };
    if p.len() != r.grid.n() {
        return Err(CoreError::Shape { expected: r.grid.n(), found: p.len() }.into());
    }
    Ok(p)
}

/// Runs the SCP loop and writes every artifact. The report is returned even
/// when the run ends unconverged or infeasible.
pub fn solve(r: &Resolved) -> Result<(SolveReport, Exit), CliError> {
    let dir = out_dir(r).to_path_buf();
    let kind = r.config.problem;
    let warm = load_warm_start(r)?;
    let solver = InteriorPoint { settings: r.settings.clone() };
    let options = ScpOptions { audit: r.config.audit.clone(), dump_failed: None };
    let start = std::time::Instant::now();
    let out = run_scp(kind, &r.grid, &r.tol, &r.schedule, &warm, &solver, &options)?;
    log::info!("{kind}: finished in {:.1}s", start.elapsed().as_secs_f64());

    output::write_profile(&dir.join("profile.csv"), &out.profile, &r.grid)?;
    let exec = format!("{:?}", r.settings.exec).to_lowercase();
    output::write_trace(&dir.join("trace.jsonl"), &r.sha256, kind.tag(), &exec, &out.trace)?;
    if let Some(m) = &out.gamma_mat {
        output::write_matrix(&dir.join("gamma_matrix.csv"), m)?;
    }
    let flux = emit_pattern(r, "solution", &out.profile, &dir)?;
    let bench = emit_benchmarks(r, &dir)?;
    output::write_json(&dir.join("benchmarks.json"), &bench)?;

    let report = build_report(r, &out.profile, out.gamma_mat.as_ref(), &flux, ScpSummary {
        converged: out.converged,
        hit_max_iters: out.hit_max_iters,
        accepted: out.accepted,
        objective: out.objective,
        final_radii: out.final_radii,
        trace: &out.trace,
        warm_start_audit: out.warm_start_report.clone(),
        restoration: out.restoration.clone(),
    })?;
    output::write_json(&dir.join("report.json"), &report)?;
    let exit = if !report.audit.pass {
        Exit::Infeasible
    } else if !report.converged {
        Exit::Solver
    } else {
        Exit::Ok
    };
    Ok((report, exit))
}

struct ScpSummary<'a> {
    converged: bool,
    hit_max_iters: bool,
    accepted: usize,
    objective: f64,
    final_radii: Radii,
    trace: &'a [risopt_core::TraceRecord],
    warm_start_audit: FeasibilityReport,
    restoration: Vec<RestorationRecord>,
}

fn build_report(
    r: &Resolved,
    profile: &ReflectionProfile,
    gamma_mat: Option<&DMatrix<Complex64>>,
    flux: &[f64],
    s: ScpSummary,
) -> Result<SolveReport, CliError> {
    let kind = r.config.problem;
    let gap = gamma_mat.map(|m| rank_one_gap(&profile.gamma, m));
    Ok(SolveReport {
        config_sha256: r.sha256.clone(),
        problem: kind,
        n: r.grid.n(),
        converged: s.converged,
        hit_max_iters: s.hit_max_iters,
        iterations: s.trace.last().map_or(0, |t| t.iteration),
        accepted: s.accepted,
        objective: s.objective,
        final_radii: s.final_radii,
        governing_radius: s.final_radii.governing(kind),
        net_power_w: surface_net_power_flow(profile, &r.grid)?,
        rank_one_gap: gap,
        rank_one_gap_rel: gap.map(|g| g / profile.norm_sqr()),
        monotonicity_violations: monotonicity_violations(s.trace, kind.maximizes(), r.schedule.objective_tol),
        replay_check: replay_check(s.trace, &r.schedule),
        warm_start_audit: s.warm_start_audit,
        restoration: s.restoration,
        audit: audit(profile, gamma_mat, kind, &r.tol, &r.grid, &r.config.audit),
        main_beam: main_beam(r, profile)?,
        pattern: summary(r, flux),
    })
}

/// Pattern table of a profile file.
pub fn pattern(r: &Resolved, profile: &Path, label: &str) -> Result<(PatternSummary, PathBuf), CliError> {
    let p = output::read_profile(profile)?;
    if p.len() != r.grid.n() {
        return Err(CoreError::Shape { expected: r.grid.n(), found: p.len() }.into());
    }
    let dir = out_dir(r);
    let flux = emit_pattern(r, label, &p, dir)?;
    Ok((summary(r, &flux), dir.join(format!("pattern_{label}.csv"))))
}

/// Audits a profile file, with the lifted matrix when given.
pub fn validate(r: &Resolved, profile: &Path, matrix: Option<&Path>) -> Result<(FeasibilityReport, Exit), CliError> {
    let p = output::read_profile(profile)?;
    if p.len() != r.grid.n() {
        return Err(CoreError::Shape { expected: r.grid.n(), found: p.len() }.into());
    }
    let m = matrix.map(output::read_matrix).transpose()?;
    if let Some(m) = &m {
        if m.nrows() != p.len() {
            return Err(CoreError::Shape { expected: p.len(), found: m.nrows() }.into());
        }
    }
    let rep = audit(&p, m.as_ref(), r.config.problem, &r.tol, &r.grid, &r.config.audit);
    let exit = if rep.pass { Exit::Ok } else { Exit::Infeasible };
    Ok((rep, exit))
}

/// Benchmark-only run: profiles, patterns and audits of GO and GO-RI.
pub fn benchmark(r: &Resolved) -> Result<Vec<BenchmarkEntry>, CliError> {
    let dir = out_dir(r);
    let entries = emit_benchmarks(r, dir)?;
    output::write_json(&dir.join("benchmarks.json"), &entries)?;
    Ok(entries)
}
