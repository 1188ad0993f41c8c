use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use risopt_cli::commands::SolveReport;
use risopt_cli::output::read_trace;
use risopt_core::scp::replay_check;
use risopt_core::{ProblemKind, ScpSchedule};

fn risopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_risopt")).args(args).env("RUST_LOG", "warn").output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: &str = "[scenario]\nly_wavelengths = 1.0\nsamples_per_wavelength = 6.0\n";

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, body).unwrap();
    p
}

/// `(theta_deg, flux, db)` rows and the comment lines.
fn read_pattern(p: &Path) -> (Vec<String>, Vec<(f64, f64, f64)>) {
    let text = std::fs::read_to_string(p).unwrap();
    let comments = text.lines().filter(|l| l.starts_with('#')).map(String::from).collect();
    let mut rows = Vec::new();
    for l in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        rows.push((v[0], v[1], v[2]));
    }
    (comments, rows)
}

#[test]
fn benchmark_emits_go_and_go_ri_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = risopt(&["benchmark", "--out", s(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for name in ["go", "go_ri"] {
        let (comments, rows) = read_pattern(&dir.path().join(format!("pattern_{name}.csv")));
        assert!(comments[0].starts_with("# config_sha256 = ") && comments[0].len() == "# config_sha256 = ".len() + 64);
        assert_eq!(rows.len(), 1801);
        assert_eq!(rows[0].0, -90.0);
        assert_eq!(rows[1800].0, 90.0);
        assert_eq!(rows.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max), 0.0);
    }
    // GO-RI: secondary beams above −20 dB away from 60°, the largest at broadside
    let (_, rows) = read_pattern(&dir.path().join("pattern_go_ri.csv"));
    let broadside = rows.iter().find(|r| (r.0 - 0.2).abs() < 1e-9).unwrap();
    assert!(broadside.2 > -20.0, "{}", broadside.2);
    assert!((broadside.2 - (-13.66)).abs() < 0.01);
}

#[test]
fn go_mask_region_is_about_25_db_below_the_main_beam() {
    // GO sits 24.76 dB down over the mask, peaking at +0.6 deg.
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&risopt(&["benchmark", "--out", s(dir.path())])), 0);
    let (_, rows) = read_pattern(&dir.path().join("pattern_go.csv"));
    let in_mask = |t: f64| (-2.0..=2.0).contains(&t) || (-62.0..=-58.0).contains(&t);
    let worst = rows.iter().filter(|r| in_mask(r.0)).map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    assert!(worst < -24.0 && worst > -25.5, "mask region peaks at {worst} dB");
}

#[test]
fn zero_profile_pattern_is_all_zero() {
    let dir = tempfile::tempdir().unwrap();
    let prof = dir.path().join("zero.csv");
    let mut body = String::from("n,re_gamma,im_gamma\n");
    for k in 0..60 {
        body.push_str(&format!("{k},0,0\n"));
    }
    std::fs::write(&prof, body).unwrap();
    let o = risopt(&["pattern", "--profile", s(&prof), "--out", s(dir.path()), "--label", "zero"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (_, rows) = read_pattern(&dir.path().join("pattern_zero.csv"));
    assert!(rows.iter().all(|r| r.1 == 0.0 && r.2 == -300.0));
}

#[test]
fn pattern_rejects_a_length_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let prof = dir.path().join("short.csv");
    std::fs::write(&prof, "re_gamma,im_gamma\n1,0\n0,1\n").unwrap();
    let o = risopt(&["pattern", "--profile", s(&prof), "--out", s(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("expected 60"), "{}", stderr(&o));
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&risopt(&["benchmark", "--out", s(dir.path())])), 0);
    let go_ri = dir.path().join("profile_go_ri.csv");
    let go = dir.path().join("profile_go.csv");

    // GO-RI meets the reactive band but not the reference mask
    let o = risopt(&["validate", "--problem", "s-ri", "--profile", s(&go_ri)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("violated family: mask"), "{}", stderr(&o));
    let no_mask = write_config(dir.path(), "[mask]\nintervals_deg = []\n");
    let o = risopt(&["validate", "--config", s(&no_mask), "--problem", "s-ri", "--profile", s(&go_ri)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    // GO needs resistance outside the band
    let zero_band = write_config(dir.path(), "[mask]\nintervals_deg = []\n[tolerances]\neps_ri = 0.0\n");
    let o = risopt(&["validate", "--config", s(&zero_band), "--problem", "s-ri", "--profile", s(&go)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("violated family: reactive_band"));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["pass"], false);

    let junk = dir.path().join("junk.csv");
    std::fs::write(&junk, "hello\nworld\n").unwrap();
    assert_eq!(code(&risopt(&["validate", "--profile", s(&junk)])), 2);
    assert_eq!(code(&risopt(&["validate", "--profile", "/nonexistent/profile.csv"])), 2);
}

#[test]
fn config_errors_exit_with_two_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "[scenario]\nly_m = 0.05\n");
    let o = risopt(&["benchmark", "--config", s(&bad), "--out", s(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("scenario.ly_m"), "{}", stderr(&o));
    let typo = write_config(dir.path(), "[tolerances]\neps_mask = 1.0\n");
    let o = risopt(&["benchmark", "--config", s(&typo)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("eps_mask"));
    assert_eq!(code(&risopt(&["solve", "--problem", "q-xx"])), 2);
    assert_eq!(code(&risopt(&["solve", "--warm-start", "bogus"])), 2);
}

#[test]
fn infeasible_warm_start_names_the_family() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("problem = \"s-ri\"\n{SMALL}"));
    assert_eq!(code(&risopt(&["benchmark", "--config", s(&cfg), "--out", s(dir.path())])), 0);
    let ws = format!("file:{}", s(&dir.path().join("profile_go.csv")));
    let o = risopt(&["solve", "--config", s(&cfg), "--warm-start", &ws, "--out", s(&dir.path().join("run"))]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("reactive_band"), "{}", stderr(&o));
}

#[test]
fn small_solve_writes_every_artifact_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("problem = \"s-ri\"\n{SMALL}"));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = risopt(&["solve", "--config", s(&cfg), "--out", s(out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    for f in ["profile.csv", "trace.jsonl", "report.json", "pattern_solution.csv", "pattern_go.csv", "pattern_go_ri.csv"] {
        let (x, y) = (std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
        assert!(x == y, "{f} differs between identical runs");
    }
    let report: SolveReport = serde_json::from_slice(&std::fs::read(a.join("report.json")).unwrap()).unwrap();
    assert!(report.converged && report.audit.pass);
    assert_eq!(report.n, 12);
    assert_eq!(report.monotonicity_violations, 0);
    assert!(report.replay_check.is_ok());
    assert!(report.governing_radius <= 1e-10);
    let trace = read_trace(&a.join("trace.jsonl")).unwrap();
    assert_eq!(trace.len(), report.iterations + 1);
    replay_check(&trace, &ScpSchedule::for_kind(ProblemKind::SRi)).unwrap();

    let profile = std::fs::read_to_string(a.join("profile.csv")).unwrap();
    let mut lines = profile.lines();
    assert_eq!(lines.next(), Some("n,y_m,re_gamma,im_gamma,re_z_ohm,im_z_ohm"));
    assert_eq!(lines.count(), 12);

    let o = risopt(&["validate", "--config", s(&cfg), "--profile", s(&a.join("profile.csv"))]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn shipped_configs_parse_and_reference_matches_defaults() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let reference = risopt_cli::RunConfig::load(&root.join("reference.toml")).unwrap();
    assert_eq!(reference.sha256(), risopt_cli::RunConfig::default().sha256());
    let small = risopt_cli::RunConfig::load(&root.join("small.toml")).unwrap().resolve().unwrap();
    assert_eq!(small.grid.n(), 12);
}

#[test]
fn committed_p_ri_artifacts_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../results/p-ri");
    let (profile, matrix) = (dir.join("profile.csv"), dir.join("gamma_matrix.csv"));
    let o = risopt(&["validate", "--problem", "p-ri", "--profile", s(&profile), "--gamma-matrix", s(&matrix)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = risopt(&["validate", "--problem", "p-ri", "--profile", s(&profile)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("violated family: rank_one"));
}
