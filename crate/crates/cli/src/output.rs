//! Artifact files: profile and pattern CSVs, JSON-lines trace, JSON report.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use risopt_core::em::gamma_to_impedance;
use risopt_core::scp::TraceRecord;
use risopt_core::{ReflectionProfile, SurfaceGrid};
use serde::Serialize;

/// Floor of the dB column.
pub const DB_FLOOR: f64 = -300.0;

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {reason}")]
    Malformed { path: PathBuf, reason: String },
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io { path: path.into(), source }
}

fn create(path: &Path) -> Result<BufWriter<File>, OutputError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io(dir))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io(path))?))
}

/// `n, y_n, Re γ, Im γ, Re z, Im z`; z is NaN where the profile hits the pole.
pub fn write_profile(path: &Path, p: &ReflectionProfile, grid: &SurfaceGrid) -> Result<(), OutputError> {
    let z = gamma_to_impedance(p, grid).ok();
    let mut w = create(path)?;
    writeln!(w, "n,y_m,re_gamma,im_gamma,re_z_ohm,im_z_ohm").map_err(io(path))?;
    for (k, g) in p.gamma.iter().enumerate() {
        let zk = z.as_ref().map_or(Complex64::new(f64::NAN, f64::NAN), |z| z.z_ohm[k]);
        writeln!(w, "{},{},{},{},{},{}", k, grid.y_m[k], g.re, g.im, zk.re, zk.im).map_err(io(path))?;
    }
    w.flush().map_err(io(path))
}

/// Reads `re_gamma` and `im_gamma` columns by header name; `#` lines are comments.
pub fn read_profile(path: &Path) -> Result<ReflectionProfile, OutputError> {
    let bad = |reason: String| OutputError::Malformed { path: path.into(), reason };
    let file = File::open(path).map_err(io(path))?;
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(file);
    let headers = rd.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| bad(format!("missing column `{name}`")));
    let (re, im) = (col("re_gamma")?, col("im_gamma")?);
    let mut gamma = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| -> Result<f64, OutputError> {
            rec.get(i)
                .ok_or_else(|| bad(format!("row {line}: too few fields")))?
                .parse::<f64>()
                .map_err(|e| bad(format!("row {line}: {e}")))
        };
        gamma.push(Complex64::new(num(re)?, num(im)?));
    }
    if gamma.is_empty() {
        return Err(bad("no rows".into()));
    }
    ReflectionProfile::new(gamma).map_err(|e| bad(e.to_string()))
}

/// `10·log10(v/max)`, clamped at [`DB_FLOOR`].
pub fn db_rel_max(values: &[f64]) -> Vec<f64> {
    let max = values.iter().cloned().fold(0.0, f64::max);
    values
        .iter()
        .map(|&v| if max > 0.0 && v > 0.0 { (10.0 * (v / max).log10()).max(DB_FLOOR) } else { DB_FLOOR })
        .collect()
}

pub fn write_pattern(path: &Path, sha: &str, label: &str, theta_rad: &[f64], flux: &[f64]) -> Result<(), OutputError> {
    let mut w = create(path)?;
    writeln!(w, "# config_sha256 = {sha}").map_err(io(path))?;
    writeln!(w, "# profile = {label}").map_err(io(path))?;
    writeln!(w, "theta_deg,flux_W_per_m2,flux_dB_rel_max").map_err(io(path))?;
    for ((t, f), d) in theta_rad.iter().zip(flux).zip(db_rel_max(flux)) {
        writeln!(w, "{:.4},{:e},{}", t.to_degrees(), f, d).map_err(io(path))?;
    }
    w.flush().map_err(io(path))
}

#[derive(Serialize)]
struct TraceHeader<'a> {
    config_sha256: &'a str,
    problem: &'a str,
    backend: &'a str,
    exec: &'a str,
    determinism: &'a str,
}

pub fn write_trace(path: &Path, sha: &str, problem: &str, exec: &str, trace: &[TraceRecord]) -> Result<(), OutputError> {
    let mut w = create(path)?;
    let header = TraceHeader {
        config_sha256: sha,
        problem,
        backend: "risopt-conic homogeneous self-dual interior point",
        exec,
        determinism: "parallel loops write disjoint outputs in a fixed order; multithreaded BLAS may change the last bits",
    };
    let line = serde_json::json!({ "header": header });
    writeln!(w, "{line}").map_err(io(path))?;
    for r in trace {
        writeln!(w, "{}", serde_json::to_string(r).expect("trace serialises")).map_err(io(path))?;
    }
    w.flush().map_err(io(path))
}

/// Reads the records back, skipping the header line.
pub fn read_trace(path: &Path) -> Result<Vec<TraceRecord>, OutputError> {
    let text = std::fs::read_to_string(path).map_err(io(path))?;
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with("{\"header\""))
        .map(|l| serde_json::from_str(l).map_err(|e| OutputError::Malformed { path: path.into(), reason: e.to_string() }))
        .collect()
}

/// Lifted matrix as `row, col, re, im`.
pub fn write_matrix(path: &Path, m: &DMatrix<Complex64>) -> Result<(), OutputError> {
    let mut w = create(path)?;
    writeln!(w, "row,col,re,im").map_err(io(path))?;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            writeln!(w, "{},{},{},{}", r, c, m[(r, c)].re, m[(r, c)].im).map_err(io(path))?;
        }
    }
    w.flush().map_err(io(path))
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<Complex64>, OutputError> {
    let bad = |reason: String| OutputError::Malformed { path: path.into(), reason };
    let mut rd = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let mut entries = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let f = |i: usize| rec.get(i).unwrap_or("").to_string();
        let r: usize = f(0).parse().map_err(|e| bad(format!("{e}")))?;
        let c: usize = f(1).parse().map_err(|e| bad(format!("{e}")))?;
        let re: f64 = f(2).parse().map_err(|e| bad(format!("{e}")))?;
        let im: f64 = f(3).parse().map_err(|e| bad(format!("{e}")))?;
        entries.push((r, c, Complex64::new(re, im)));
    }
    let n = entries.iter().map(|e| e.0.max(e.1) + 1).max().ok_or_else(|| bad("empty matrix".into()))?;
    if entries.len() != n * n {
        return Err(bad(format!("expected {} entries, found {}", n * n, entries.len())));
    }
    let mut m = DMatrix::zeros(n, n);
    for (r, c, v) in entries {
        m[(r, c)] = v;
    }
    Ok(m)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), OutputError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).expect("report serialises");
    writeln!(w).map_err(io(path))?;
    w.flush().map_err(io(path))
}
