//! TOML run configuration. Angles are in degrees here and nowhere else.

use std::path::{Path, PathBuf};

use risopt_conic::{Exec, Settings};
use risopt_core::builders::mask_angles_deg;
use risopt_core::em::SPEED_OF_LIGHT;
use risopt_core::{build_grid, AuditTolerances, ProblemKind, Scenario, ScpSchedule, SurfaceGrid, ToleranceSet};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("field `{field}`: {reason}")]
    Field { field: String, reason: String },
}

fn field(name: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Field { field: name.into(), reason: reason.into() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioBlock {
    pub frequency_hz: f64,
    pub theta_i_deg: f64,
    pub theta_r_deg: f64,
    pub eta0_ohm: f64,
    pub e0_field_amplitude: f64,
    pub lx_m: f64,
    /// Either `ly_m` or `ly_wavelengths`.
    pub ly_m: Option<f64>,
    pub ly_wavelengths: Option<f64>,
    /// Either `delta_y_m` or `samples_per_wavelength`.
    pub delta_y_m: Option<f64>,
    pub samples_per_wavelength: Option<f64>,
    pub r_obs_m: f64,
}

impl Default for ScenarioBlock {
    fn default() -> Self {
        Self {
            frequency_hz: 28e9,
            theta_i_deg: 0.0,
            theta_r_deg: 60.0,
            eta0_ohm: 377.0,
            e0_field_amplitude: 1.0,
            lx_m: 0.5,
            ly_m: None,
            ly_wavelengths: Some(4.9652),
            delta_y_m: None,
            samples_per_wavelength: Some(6.0420),
            r_obs_m: 100.0,
        }
    }
}

impl ScenarioBlock {
    pub fn to_scenario(&self) -> Result<Scenario, ConfigError> {
        let lambda = SPEED_OF_LIGHT / self.frequency_hz;
        let ly = match (self.ly_m, self.ly_wavelengths) {
            (Some(m), None) => m,
            (None, Some(w)) => w * lambda,
            _ => return Err(field("scenario.ly_m", "give exactly one of ly_m and ly_wavelengths")),
        };
        let dy = match (self.delta_y_m, self.samples_per_wavelength) {
            (Some(m), None) => m,
            (None, Some(s)) => lambda / s,
            _ => return Err(field("scenario.delta_y_m", "give exactly one of delta_y_m and samples_per_wavelength")),
        };
        Ok(Scenario {
            frequency_hz: self.frequency_hz,
            theta_i_rad: self.theta_i_deg.to_radians(),
            theta_r_rad: self.theta_r_deg.to_radians(),
            eta0_ohm: self.eta0_ohm,
            e0_field_amplitude: self.e0_field_amplitude,
            lx_m: self.lx_m,
            ly_m: ly,
            delta_y_m: dy,
            r_obs_m: self.r_obs_m,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceBlock {
    pub eps_hc_l: f64,
    pub eps_hc_u: f64,
    pub eps_rm: f64,
    pub eps_ri: f64,
    pub eps_sp: f64,
    pub eps_tr: f64,
    pub eps_tr_gamma: f64,
    pub eps_tr_mat: f64,
    pub eps_rk1_b: f64,
    pub eps_rk1_c: f64,
}

impl Default for ToleranceBlock {
    fn default() -> Self {
        let t = ToleranceSet::default();
        Self {
            eps_hc_l: t.eps_hc_l,
            eps_hc_u: t.eps_hc_u,
            eps_rm: t.eps_rm,
            eps_ri: t.eps_ri,
            eps_sp: t.eps_sp,
            eps_tr: t.eps_tr,
            eps_tr_gamma: t.eps_tr_gamma,
            eps_tr_mat: t.eps_tr_mat,
            eps_rk1_b: t.eps_rk1_b,
            eps_rk1_c: t.eps_rk1_c,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskBlock {
    pub intervals_deg: Vec<[f64; 2]>,
    pub resolution_deg: f64,
}

impl Default for MaskBlock {
    fn default() -> Self {
        Self { intervals_deg: vec![[-2.0, 2.0], [-62.0, -58.0]], resolution_deg: 0.1 }
    }
}

/// Overrides on top of the per-kind schedule defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleBlock {
    pub initial_tr: Option<f64>,
    pub initial_tr_gamma: Option<f64>,
    pub initial_tr_mat: Option<f64>,
    pub initial_rk1_b: Option<f64>,
    pub initial_rk1_c: Option<f64>,
    pub trust_shrink: Option<f64>,
    pub rk1_shrink: Option<f64>,
    pub stepback_depth: Option<usize>,
    pub max_iters: Option<usize>,
    pub objective_tol: Option<f64>,
    pub radius_floor: Option<f64>,
    pub restoration_iters: Option<usize>,
}

impl ScheduleBlock {
    pub fn resolve(&self, kind: ProblemKind) -> ScpSchedule {
        let d = ScpSchedule::for_kind(kind);
        ScpSchedule {
            initial_tr: self.initial_tr.unwrap_or(d.initial_tr),
            initial_tr_gamma: self.initial_tr_gamma.unwrap_or(d.initial_tr_gamma),
            initial_tr_mat: self.initial_tr_mat.unwrap_or(d.initial_tr_mat),
            initial_rk1_b: self.initial_rk1_b.unwrap_or(d.initial_rk1_b),
            initial_rk1_c: self.initial_rk1_c.unwrap_or(d.initial_rk1_c),
            trust_shrink: self.trust_shrink.unwrap_or(d.trust_shrink),
            rk1_shrink: self.rk1_shrink.unwrap_or(d.rk1_shrink),
            stepback_depth: self.stepback_depth.unwrap_or(d.stepback_depth),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            objective_tol: self.objective_tol.unwrap_or(d.objective_tol),
            radius_floor: self.radius_floor.unwrap_or(d.radius_floor),
            restoration_iters: self.restoration_iters.unwrap_or(d.restoration_iters),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatternBlock {
    pub start_deg: f64,
    pub stop_deg: f64,
    pub step_deg: f64,
}

impl Default for PatternBlock {
    fn default() -> Self {
        Self { start_deg: -90.0, stop_deg: 90.0, step_deg: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkBlock {
    pub go: bool,
    pub go_ri: bool,
}

impl Default for BenchmarkBlock {
    fn default() -> Self {
        Self { go: true, go_ri: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverBlock {
    pub max_iter: usize,
    pub feastol: f64,
    pub abstol: f64,
    pub reltol: f64,
    pub exec: Exec,
}

impl Default for SolverBlock {
    fn default() -> Self {
        let s = Settings::default();
        Self { max_iter: s.max_iter, feastol: s.feastol, abstol: s.abstol, reltol: s.reltol, exec: s.exec }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemKind,
    /// `go-ri` or `file:PATH`.
    pub warm_start: String,
    pub output_dir: PathBuf,
    pub scenario: ScenarioBlock,
    pub tolerances: ToleranceBlock,
    pub mask: MaskBlock,
    pub schedule: ScheduleBlock,
    pub pattern: PatternBlock,
    pub benchmarks: BenchmarkBlock,
    pub solver: SolverBlock,
    pub audit: AuditTolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::SRi,
            warm_start: "go-ri".into(),
            output_dir: PathBuf::from("out"),
            scenario: ScenarioBlock::default(),
            tolerances: ToleranceBlock::default(),
            mask: MaskBlock::default(),
            schedule: ScheduleBlock::default(),
            pattern: PatternBlock::default(),
            benchmarks: BenchmarkBlock::default(),
            solver: SolverBlock::default(),
            audit: AuditTolerances::default(),
        }
    }
}

/// Where the warm start comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum WarmStart {
    GoRi,
    File(PathBuf),
}

impl WarmStart {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        if s.eq_ignore_ascii_case("go-ri") {
            Ok(Self::GoRi)
        } else if let Some(p) = s.strip_prefix("file:") {
            Ok(Self::File(PathBuf::from(p)))
        } else {
            Err(field("warm_start", format!("expected `go-ri` or `file:PATH`, got `{s}`")))
        }
    }
}

/// Everything a command needs, checked.
pub struct Resolved {
    pub config: RunConfig,
    pub grid: SurfaceGrid,
    pub tol: ToleranceSet,
    pub schedule: ScpSchedule,
    pub settings: Settings,
    pub warm_start: WarmStart,
    pub sweep_rad: Vec<f64>,
    pub sha256: String,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn tolerance_set(&self) -> Result<ToleranceSet, ConfigError> {
        let t = &self.tolerances;
        if !(self.mask.resolution_deg.is_finite() && self.mask.resolution_deg > 0.0) {
            return Err(field("mask.resolution_deg", "must be positive"));
        }
        let intervals: Vec<(f64, f64)> = self.mask.intervals_deg.iter().map(|[a, b]| (*a, *b)).collect();
        if intervals.iter().any(|(a, b)| !a.is_finite() || !b.is_finite() || a.abs() >= 90.0 || b.abs() >= 90.0) {
            return Err(field("mask.intervals_deg", "endpoints must lie in (-90, 90)"));
        }
        let set = ToleranceSet {
            eps_hc_l: t.eps_hc_l,
            eps_hc_u: t.eps_hc_u,
            eps_rm: t.eps_rm,
            eps_ri: t.eps_ri,
            eps_sp: t.eps_sp,
            eps_tr: t.eps_tr,
            eps_tr_gamma: t.eps_tr_gamma,
            eps_tr_mat: t.eps_tr_mat,
            eps_rk1_b: t.eps_rk1_b,
            eps_rk1_c: t.eps_rk1_c,
            mask_angles_rad: mask_angles_deg(&intervals, self.mask.resolution_deg),
        };
        set.validate().map_err(|e| field("tolerances", e.to_string()))?;
        Ok(set)
    }

    pub fn sweep_rad(&self) -> Result<Vec<f64>, ConfigError> {
        let p = &self.pattern;
        if !(p.step_deg.is_finite() && p.step_deg > 0.0) {
            return Err(field("pattern.step_deg", "must be positive"));
        }
        if !(p.start_deg.is_finite() && p.stop_deg.is_finite() && p.start_deg <= p.stop_deg) {
            return Err(field("pattern.start_deg", "needs start_deg ≤ stop_deg"));
        }
        if p.start_deg < -90.0 || p.stop_deg > 90.0 {
            return Err(field("pattern", "sweep must stay within [-90, 90] degrees"));
        }
        Ok(risopt_core::em::angle_grid_deg(p.start_deg, p.stop_deg, p.step_deg))
    }

    /// SHA-256 of the canonical JSON form of the configuration, output
    /// directory excluded.
    pub fn sha256(&self) -> String {
        let mut canon = self.clone();
        canon.output_dir = PathBuf::new();
        let json = serde_json::to_vec(&canon).expect("config serialises");
        let digest = Sha256::digest(&json);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn resolve(self) -> Result<Resolved, ConfigError> {
        let scenario = self.scenario.to_scenario()?;
        let grid = build_grid(&scenario).map_err(|e| field("scenario", e.to_string()))?;
        let tol = self.tolerance_set()?;
        let schedule = self.schedule.resolve(self.problem);
        schedule.validate().map_err(|e| field("schedule", e.to_string()))?;
        let s = &self.solver;
        if s.max_iter == 0 || !(s.feastol > 0.0 && s.abstol > 0.0 && s.reltol > 0.0) {
            return Err(field("solver", "max_iter and tolerances must be positive"));
        }
        let settings =
            Settings { max_iter: s.max_iter, feastol: s.feastol, abstol: s.abstol, reltol: s.reltol, exec: s.exec, ..Settings::default() };
        let warm_start = WarmStart::parse(&self.warm_start)?;
        let sweep_rad = self.sweep_rad()?;
        let sha256 = self.sha256();
        Ok(Resolved { config: self, grid, tol, schedule, settings, warm_start, sweep_rad, sha256 })
    }
}
