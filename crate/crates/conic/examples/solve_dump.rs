//! Solves a program stored in the text dump format and prints the outcome.
//!
//! `cargo run --release -p risopt-conic --example solve_dump -- FILE`
//! (`RUST_LOG=trace` prints every interior-point iteration)

use risopt_conic::{dump, solve, Settings};

fn main() {
    env_logger::init();
    if let Some(code) = risopt_conic::dense::reexec_with_blas_coretype() {
        std::process::exit(code);
    }
    let path = std::env::args().nth(1).expect("usage: solve_dump FILE");
    let text = std::fs::read_to_string(&path).expect("readable dump");
    let program = dump::read_program(&text).expect("valid dump");
    println!("{} vars, {} blocks", program.num_vars, program.num_blocks());
    let sol = solve(&program, &Settings::default()).expect("well-formed program");
    println!(
        "{} after {} iterations ({:.2}s): objective {:.9e}, pres {:.2e}, dres {:.2e}, gap {:.2e} {}",
        sol.status, sol.iterations, sol.solve_seconds, sol.objective_value, sol.primal_residual, sol.dual_residual, sol.gap, sol.message
    );
    if let Some(x) = &sol.x {
        let rep = program.check(x);
        if let Some(w) = rep.worst() {
            println!("worst block {} ({}) violation {:.3e}", w.name, w.kind, w.violation);
        }
    }
}
