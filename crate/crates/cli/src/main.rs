use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use risopt_cli::commands::{self, Exit};
use risopt_cli::{CliError, RunConfig, WarmStart};
use risopt_core::ProblemKind;

#[derive(Parser)]
#[command(name = "risopt", version, about = "Reflection-profile design for impedance-boundary surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration; the reference scenario when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// s-hc, s-rm, s-ri, p-rm or p-ri.
    #[arg(long, value_parser = parse_kind)]
    problem: Option<ProblemKind>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sequential convex design and write every artifact.
    Solve {
        #[command(flatten)]
        common: Common,
        /// `go-ri` or `file:PATH`.
        #[arg(long)]
        warm_start: Option<String>,
    },
    /// Sweep the pattern of a profile file.
    Pattern {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        profile: PathBuf,
        /// Suffix of the output file name.
        #[arg(long, default_value = "profile")]
        label: String,
    },
    /// Audit a profile file against the problem's original constraints.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        profile: PathBuf,
        /// Lifted matrix (`row,col,re,im`) for p-rm and p-ri.
        #[arg(long)]
        gamma_matrix: Option<PathBuf>,
    },
    /// Benchmark profiles, patterns and audits without solving.
    Benchmark {
        #[command(flatten)]
        common: Common,
    },
}

fn parse_kind(s: &str) -> Result<ProblemKind, String> {
    ProblemKind::parse(s).ok_or_else(|| format!("unknown problem `{s}`"))
}

fn resolve(common: &Common, warm_start: Option<&str>) -> Result<risopt_cli::Resolved, CliError> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &common.out {
        cfg.output_dir = o.clone();
    }
    if let Some(k) = common.problem {
        cfg.problem = k;
    }
    if let Some(w) = warm_start {
        WarmStart::parse(w)?;
        cfg.warm_start = w.to_string();
    }
    Ok(cfg.resolve()?)
}

fn run(cli: Cli) -> Result<Exit, CliError> {
    match cli.command {
        Command::Solve { common, warm_start } => {
            let r = resolve(&common, warm_start.as_deref())?;
            let (rep, exit) = commands::solve(&r)?;
            eprintln!(
                "{}: converged {} after {} iterations ({} accepted), objective {:.6e}",
                rep.problem, rep.converged, rep.iterations, rep.accepted, rep.objective
            );
            eprint!("{}", rep.audit);
            if let Some(f) = rep.audit.first_failure() {
                eprintln!("violated family: {}", f.family);
            }
            eprintln!("artifacts in {}", r.config.output_dir.display());
            Ok(exit)
        }
        Command::Pattern { common, profile, label } => {
            let r = resolve(&common, None)?;
            let (s, path) = commands::pattern(&r, &profile, &label)?;
            eprintln!("argmax {:.1} deg, {} side lobes above {} dB -> {}", s.argmax_deg, s.lobes.len(), s.threshold_db, path.display());
            Ok(Exit::Ok)
        }
        Command::Validate { common, profile, gamma_matrix } => {
            let r = resolve(&common, None)?;
            let (rep, exit) = commands::validate(&r, &profile, gamma_matrix.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&rep).expect("report serialises"));
            if let Some(f) = rep.first_failure() {
                eprintln!("violated family: {}", f.family);
            }
            Ok(exit)
        }
        Command::Benchmark { common } => {
            let r = resolve(&common, None)?;
            for e in commands::benchmark(&r)? {
                eprintln!("{}: {:+.2} dB vs GO at θ_r, audit {}", e.name, e.main_beam.db_vs_go, if e.audit.pass { "pass" } else { "FAIL" });
            }
            Ok(Exit::Ok)
        }
    }
}

fn main() -> ExitCode {
    if let Some(code) = risopt_conic::dense::reexec_with_blas_coretype() {
        return ExitCode::from(code.clamp(0, 255) as u8);
    }
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let exit = match run(cli) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit()
        }
    };
    ExitCode::from(exit as u8)
}
