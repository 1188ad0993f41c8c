//! Solver-agnostic conic program: real variables, a linear objective and an
//! ordered list of affine, second-order-cone and PSD blocks.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::ConicError;

/// Sparse affine form `Σ coef·x[idx] + constant`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self { terms: Vec::new(), constant: c }
    }

    pub fn var(idx: usize) -> Self {
        Self { terms: vec![(idx, 1.0)], constant: 0.0 }
    }

    pub fn term(idx: usize, coef: f64) -> Self {
        Self { terms: vec![(idx, coef)], constant: 0.0 }
    }

    pub fn add_term(&mut self, idx: usize, coef: f64) -> &mut Self {
        if coef != 0.0 {
            self.terms.push((idx, coef));
        }
        self
    }

    pub fn add_constant(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    /// Adds `scale·other` to `self`.
    pub fn add_scaled(&mut self, other: &LinExpr, scale: f64) -> &mut Self {
        for &(i, c) in &other.terms {
            self.add_term(i, c * scale);
        }
        self.constant += scale * other.constant;
        self
    }

    pub fn scaled(&self, scale: f64) -> LinExpr {
        let mut out = LinExpr::zero();
        out.add_scaled(self, scale);
        out
    }

    pub fn negated(&self) -> LinExpr {
        self.scaled(-1.0)
    }

    /// Merges repeated indices and drops exact zeros.
    pub fn compact(&mut self) {
        self.terms.sort_by_key(|t| t.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(self.terms.len());
        for &(i, c) in &self.terms {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 += c,
                _ => out.push((i, c)),
            }
        }
        out.retain(|t| t.1 != 0.0);
        self.terms = out;
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(i, c)| c * x[i]).sum::<f64>()
    }

    /// Sum of absolute term contributions, used to normalise violations.
    pub fn magnitude(&self, x: &[f64]) -> f64 {
        self.constant.abs() + self.terms.iter().map(|&(i, c)| (c * x[i]).abs()).sum::<f64>()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.terms.iter().map(|t| t.0).max()
    }
}

/// Symmetric matrix-valued affine map given by its lower triangle.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PsdBlock {
    pub order: usize,
    /// `((row, col), expr)` with `row >= col`; repeated positions add up.
    pub entries: Vec<((usize, usize), LinExpr)>,
}

impl PsdBlock {
    pub fn new(order: usize) -> Self {
        Self { order, entries: Vec::new() }
    }

    /// Adds `expr` at `(r, c)`; the position is folded into the lower triangle.
    pub fn push(&mut self, r: usize, c: usize, expr: LinExpr) {
        let (r, c) = if r >= c { (r, c) } else { (c, r) };
        self.entries.push(((r, c), expr));
    }

    pub fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.order, self.order);
        for ((r, c), e) in &self.entries {
            let v = e.eval(x);
            m[(*r, *c)] += v;
            if r != c {
                m[(*c, *r)] += v;
            }
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Block {
    /// `expr <= 0`.
    Affine(LinExpr),
    /// `‖rows‖₂ <= bound`.
    Soc { bound: LinExpr, rows: Vec<LinExpr> },
    /// Symmetric matrix `⪰ 0`.
    Psd(PsdBlock),
}

impl Block {
    pub fn kind(&self) -> &'static str {
        match self {
            Block::Affine(_) => "affine",
            Block::Soc { .. } => "soc",
            Block::Psd(_) => "psd",
        }
    }

    fn exprs(&self) -> Box<dyn Iterator<Item = &LinExpr> + '_> {
        match self {
            Block::Affine(e) => Box::new(std::iter::once(e)),
            Block::Soc { bound, rows } => Box::new(std::iter::once(bound).chain(rows.iter())),
            Block::Psd(p) => Box::new(p.entries.iter().map(|(_, e)| e)),
        }
    }

    /// Relative violation at `x`; zero when satisfied.
    pub fn violation(&self, x: &[f64]) -> f64 {
        match self {
            Block::Affine(e) => e.eval(x).max(0.0) / (1.0 + e.magnitude(x)),
            Block::Soc { bound, rows } => {
                let norm = rows.iter().map(|r| r.eval(x).powi(2)).sum::<f64>().sqrt();
                let b = bound.eval(x);
                (norm - b).max(0.0) / (1.0 + norm.max(b.abs()))
            }
            Block::Psd(p) => {
                if p.order == 0 {
                    return 0.0;
                }
                let m = p.eval(x);
                let scale = m.norm();
                let eig = SymmetricEigen::new(m);
                let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
                (-min).max(0.0) / (1.0 + scale)
            }
        }
    }

    /// Number of scalar slack entries the block occupies in standard form.
    pub fn cone_dim(&self) -> usize {
        match self {
            Block::Affine(_) => 1,
            Block::Soc { rows, .. } => rows.len() + 1,
            Block::Psd(p) => p.order * (p.order + 1) / 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedBlock {
    pub name: String,
    pub block: Block,
}

/// `min objective(x)` subject to every block.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConicProgram {
    pub num_vars: usize,
    pub objective: LinExpr,
    pub blocks: Vec<NamedBlock>,
}

/// Per-block outcome of [`ConicProgram::check`].
#[derive(Clone, Debug, PartialEq)]
pub struct BlockCheck {
    pub name: String,
    pub kind: &'static str,
    pub violation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub objective: f64,
    pub blocks: Vec<BlockCheck>,
}

impl CheckReport {
    pub fn max_violation(&self) -> f64 {
        self.blocks.iter().map(|b| b.violation).fold(0.0, f64::max)
    }

    pub fn worst(&self) -> Option<&BlockCheck> {
        self.blocks.iter().max_by(|a, b| a.violation.total_cmp(&b.violation))
    }
}

impl ConicProgram {
    pub fn new(num_vars: usize) -> Self {
        Self { num_vars, objective: LinExpr::zero(), blocks: Vec::new() }
    }

    pub fn push(&mut self, name: impl Into<String>, block: Block) {
        self.blocks.push(NamedBlock { name: name.into(), block });
    }

    pub fn push_affine_le(&mut self, name: impl Into<String>, expr: LinExpr) {
        self.push(name, Block::Affine(expr));
    }

    pub fn push_soc(&mut self, name: impl Into<String>, rows: Vec<LinExpr>, bound: LinExpr) {
        self.push(name, Block::Soc { bound, rows });
    }

    /// Adds `‖F‖² + w <= 0` where `F` are affine rows and `w` affine, as the
    /// rotated cone `‖(2F, 1 + w)‖ <= 1 - w`.
    pub fn push_quadratic_le(&mut self, name: impl Into<String>, quad_rows: &[LinExpr], w: &LinExpr) {
        let mut rows: Vec<LinExpr> = quad_rows.iter().map(|r| r.scaled(2.0)).collect();
        let mut tail = w.clone();
        tail.add_constant(1.0);
        rows.push(tail);
        let mut bound = w.negated();
        bound.add_constant(1.0);
        self.push_soc(name, rows, bound);
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn count_kind(&self, kind: &str) -> usize {
        self.blocks.iter().filter(|b| b.block.kind() == kind).count()
    }

    pub fn block(&self, name: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.name == name).map(|b| &b.block)
    }

    pub fn validate(&self) -> Result<(), ConicError> {
        let check = |e: &LinExpr, name: &str| -> Result<(), ConicError> {
            if let Some(i) = e.max_index() {
                if i >= self.num_vars {
                    return Err(ConicError::Malformed(format!(
                        "block `{name}` references variable {i} but num_vars = {}",
                        self.num_vars
                    )));
                }
            }
            if !e.constant.is_finite() || e.terms.iter().any(|t| !t.1.is_finite()) {
                return Err(ConicError::Malformed(format!("block `{name}` has non-finite data")));
            }
            Ok(())
        };
        check(&self.objective, "objective")?;
        for nb in &self.blocks {
            for e in nb.block.exprs() {
                check(e, &nb.name)?;
            }
            if let Block::Psd(p) = &nb.block {
                if p.entries.iter().any(|((r, _), _)| *r >= p.order) {
                    return Err(ConicError::Malformed(format!(
                        "PSD block `{}` has an entry outside its order {}",
                        nb.name, p.order
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.eval(x)
    }

    /// Re-evaluates every block at `x` without touching any solver state.
    pub fn check(&self, x: &[f64]) -> CheckReport {
        let blocks = self
            .blocks
            .iter()
            .map(|nb| BlockCheck { name: nb.name.clone(), kind: nb.block.kind(), violation: nb.block.violation(x) })
            .collect();
        CheckReport { objective: self.objective_value(x), blocks }
    }
}

impl fmt::Display for ConicProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ConicProgram(vars={}, affine={}, soc={}, psd={})",
            self.num_vars,
            self.count_kind("affine"),
            self.count_kind("soc"),
            self.count_kind("psd")
        )
    }
}
