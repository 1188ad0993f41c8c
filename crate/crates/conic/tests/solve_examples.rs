use risopt_conic::{solve, Block, ConicProgram, LinExpr, PsdBlock, Settings, Status};

fn settings() -> Settings {
    Settings::default()
}

#[test]
fn epigraph_of_constant() {
    // min t  s.t. −t ≤ 0, 5 − t ≤ 0
    let mut p = ConicProgram::new(1);
    p.objective = LinExpr::var(0);
    p.push_affine_le("nonneg", LinExpr::term(0, -1.0));
    let mut e = LinExpr::constant(5.0);
    e.add_term(0, -1.0);
    p.push_affine_le("floor", e);
    let sol = solve(&p, &settings()).unwrap();
    assert_eq!(sol.status, Status::Optimal, "{}", sol.message);
    assert!((sol.x.unwrap()[0] - 5.0).abs() < 1e-7);
    assert!((sol.objective_value - 5.0).abs() < 1e-7);
}

#[test]
fn soc_with_fixed_point() {
    // min t  s.t. ‖(3, 4)‖ ≤ t
    let mut p = ConicProgram::new(1);
    p.objective = LinExpr::var(0);
    p.push_soc("norm", vec![LinExpr::constant(3.0), LinExpr::constant(4.0)], LinExpr::var(0));
    let sol = solve(&p, &settings()).unwrap();
    assert_eq!(sol.status, Status::Optimal, "{}", sol.message);
    assert!((sol.objective_value - 5.0).abs() < 1e-7, "{}", sol.objective_value);
}

#[test]
fn trace_bound_over_psd() {
    // min tr X  s.t. X − I ⪰ 0, X symmetric 2×2 with vars (x00, x10, x11)
    let mut p = ConicProgram::new(3);
    p.objective = LinExpr { terms: vec![(0, 1.0), (2, 1.0)], constant: 0.0 };
    let mut pb = PsdBlock::new(2);
    pb.push(0, 0, LinExpr { terms: vec![(0, 1.0)], constant: -1.0 });
    pb.push(1, 0, LinExpr::var(1));
    pb.push(1, 1, LinExpr { terms: vec![(2, 1.0)], constant: -1.0 });
    p.push("lmi", Block::Psd(pb));
    let sol = solve(&p, &settings()).unwrap();
    assert_eq!(sol.status, Status::Optimal, "{}", sol.message);
    assert!((sol.objective_value - 2.0).abs() < 1e-7, "{}", sol.objective_value);
}

#[test]
fn infeasible_lp_is_reported() {
    // x ≤ −1 and x ≥ 1
    let mut p = ConicProgram::new(1);
    p.objective = LinExpr::var(0);
    p.push_affine_le("upper", LinExpr { terms: vec![(0, 1.0)], constant: 1.0 });
    p.push_affine_le("lower", LinExpr { terms: vec![(0, -1.0)], constant: 1.0 });
    let sol = solve(&p, &settings()).unwrap();
    assert_eq!(sol.status, Status::Infeasible, "{}", sol.message);
    assert!(sol.x.is_none());
}

#[test]
fn unbounded_is_not_optimal() {
    let mut p = ConicProgram::new(1);
    p.objective = LinExpr::var(0);
    p.push_affine_le("upper", LinExpr { terms: vec![(0, 1.0)], constant: -3.0 });
    let sol = solve(&p, &settings()).unwrap();
    assert_eq!(sol.status, Status::NumericalTrouble);
    assert!(sol.x.is_none());
}

#[test]
fn rotated_cone_quadratic() {
    // min x + y  s.t. x² + y² − 1 ≤ 0  → −√2
    let mut p = ConicProgram::new(2);
    p.objective = LinExpr { terms: vec![(0, 1.0), (1, 1.0)], constant: 0.0 };
    p.push_quadratic_le("disk", &[LinExpr::var(0), LinExpr::var(1)], &LinExpr::constant(-1.0));
    let sol = solve(&p, &settings()).unwrap();
    assert_eq!(sol.status, Status::Optimal, "{}", sol.message);
    assert!((sol.objective_value + 2f64.sqrt()).abs() < 1e-7);
}

#[test]
fn max_eigenvalue_sdp() {
    // min s  s.t. sI − A ⪰ 0 for A = [[2,1],[1,2]] → 3
    let mut p = ConicProgram::new(1);
    p.objective = LinExpr::var(0);
    let mut pb = PsdBlock::new(2);
    pb.push(0, 0, LinExpr { terms: vec![(0, 1.0)], constant: -2.0 });
    pb.push(1, 0, LinExpr::constant(-1.0));
    pb.push(1, 1, LinExpr { terms: vec![(0, 1.0)], constant: -2.0 });
    p.push("spec", Block::Psd(pb));
    let sol = solve(&p, &settings()).unwrap();
    assert_eq!(sol.status, Status::Optimal, "{}", sol.message);
    assert!((sol.objective_value - 3.0).abs() < 1e-7);
}

#[test]
fn malformed_index_is_rejected() {
    let mut p = ConicProgram::new(1);
    p.objective = LinExpr::var(3);
    assert!(solve(&p, &settings()).is_err());
}

#[test]
fn optimal_points_pass_independent_check() {
    let mut p = ConicProgram::new(3);
    p.objective = LinExpr { terms: vec![(0, 1.0), (1, -2.0), (2, 0.5)], constant: 0.0 };
    p.push_soc("ball", vec![LinExpr::var(0), LinExpr::var(1), LinExpr::var(2)], LinExpr::constant(2.0));
    p.push_affine_le("half", LinExpr { terms: vec![(0, 1.0), (1, 1.0)], constant: -0.5 });
    let sol = solve(&p, &settings()).unwrap();
    assert_eq!(sol.status, Status::Optimal, "{}", sol.message);
    let report = p.check(sol.x.as_ref().unwrap());
    assert!(report.max_violation() <= 10.0 * sol.solver_tolerance);
    assert!((report.objective - sol.objective_value).abs() < 1e-12);
}
