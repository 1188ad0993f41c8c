//! Plain-text sparse dump of a [`ConicProgram`], one stanza per block.
//!
//! ```text
//! conic-program vars=3 blocks=2
//! objective const=0 0:1
//!
//! block epi affine
//! expr const=5 0:-1
//!
//! block cap soc rows=2
//! bound const=0 0:1
//! row const=3
//! row const=4
//!
//! block lmi psd order=2
//! entry 0 0 const=-1 1:1
//! entry 1 0 const=0 2:1
//! entry 1 1 const=-1 1:1
//! ```
//!
//! Every expression is `const=<c>` followed by `index:coefficient` pairs.
//! Floats are written in Rust's shortest round-trip form.

use std::fmt::Write as _;

use crate::program::{Block, ConicProgram, LinExpr, PsdBlock};
use crate::ConicError;

fn write_expr(out: &mut String, e: &LinExpr) {
    let _ = write!(out, "const={:?}", e.constant);
    for (i, c) in &e.terms {
        let _ = write!(out, " {i}:{c:?}");
    }
}

pub fn write_program(p: &ConicProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "conic-program vars={} blocks={}", p.num_vars, p.blocks.len());
    out.push_str("objective ");
    write_expr(&mut out, &p.objective);
    out.push('\n');
    for nb in &p.blocks {
        let name: String = nb.name.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect();
        out.push('\n');
        match &nb.block {
            Block::Affine(e) => {
                let _ = writeln!(out, "block {name} affine");
                out.push_str("expr ");
                write_expr(&mut out, e);
                out.push('\n');
            }
            Block::Soc { bound, rows } => {
                let _ = writeln!(out, "block {name} soc rows={}", rows.len());
                out.push_str("bound ");
                write_expr(&mut out, bound);
                out.push('\n');
                for r in rows {
                    out.push_str("row ");
                    write_expr(&mut out, r);
                    out.push('\n');
                }
            }
            Block::Psd(pb) => {
                let _ = writeln!(out, "block {name} psd order={}", pb.order);
                for ((r, c), e) in &pb.entries {
                    let _ = write!(out, "entry {r} {c} ");
                    write_expr(&mut out, e);
                    out.push('\n');
                }
            }
        }
    }
    out
}

fn bad(line: usize, msg: impl Into<String>) -> ConicError {
    ConicError::Parse { line, message: msg.into() }
}

fn parse_expr<'a>(line: usize, mut toks: impl Iterator<Item = &'a str>) -> Result<LinExpr, ConicError> {
    let first = toks.next().ok_or_else(|| bad(line, "missing const="))?;
    let c = first.strip_prefix("const=").ok_or_else(|| bad(line, "expected const="))?;
    let mut e = LinExpr::constant(c.parse().map_err(|_| bad(line, "bad constant"))?);
    for t in toks {
        let (i, v) = t.split_once(':').ok_or_else(|| bad(line, format!("bad term `{t}`")))?;
        let i: usize = i.parse().map_err(|_| bad(line, "bad index"))?;
        let v: f64 = v.parse().map_err(|_| bad(line, "bad coefficient"))?;
        e.terms.push((i, v));
    }
    Ok(e)
}

fn kv(line: usize, tok: Option<&str>, key: &str) -> Result<usize, ConicError> {
    tok.and_then(|t| t.strip_prefix(key))
        .and_then(|v| v.strip_prefix('='))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad(line, format!("expected {key}=<n>")))
}

pub fn read_program(text: &str) -> Result<ConicProgram, ConicError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (ln, head) = lines.next().ok_or_else(|| bad(0, "empty dump"))?;
    let mut t = head.split_whitespace();
    if t.next() != Some("conic-program") {
        return Err(bad(ln, "missing conic-program header"));
    }
    let num_vars = kv(ln, t.next(), "vars")?;
    let nblocks = kv(ln, t.next(), "blocks")?;
    let (ln, obj) = lines.next().ok_or_else(|| bad(ln, "missing objective"))?;
    let mut t = obj.split_whitespace();
    if t.next() != Some("objective") {
        return Err(bad(ln, "expected objective"));
    }
    let mut p = ConicProgram::new(num_vars);
    p.objective = parse_expr(ln, t)?;
    let mut pending: Vec<(usize, &str)> = lines.collect();
    pending.reverse();
    while let Some((ln, l)) = pending.pop() {
        let mut t = l.split_whitespace();
        if t.next() != Some("block") {
            return Err(bad(ln, "expected block"));
        }
        let name = t.next().ok_or_else(|| bad(ln, "missing block name"))?.to_string();
        match t.next() {
            Some("affine") => {
                let (ln, l) = pending.pop().ok_or_else(|| bad(ln, "missing expr"))?;
                let mut t = l.split_whitespace();
                if t.next() != Some("expr") {
                    return Err(bad(ln, "expected expr"));
                }
                p.push(name, Block::Affine(parse_expr(ln, t)?));
            }
            Some("soc") => {
                let nrows = kv(ln, t.next(), "rows")?;
                let (ln, l) = pending.pop().ok_or_else(|| bad(ln, "missing bound"))?;
                let mut t = l.split_whitespace();
                if t.next() != Some("bound") {
                    return Err(bad(ln, "expected bound"));
                }
                let bound = parse_expr(ln, t)?;
                let mut rows = Vec::with_capacity(nrows);
                for _ in 0..nrows {
                    let (ln, l) = pending.pop().ok_or_else(|| bad(ln, "missing row"))?;
                    let mut t = l.split_whitespace();
                    if t.next() != Some("row") {
                        return Err(bad(ln, "expected row"));
                    }
                    rows.push(parse_expr(ln, t)?);
                }
                p.push(name, Block::Soc { bound, rows });
            }
            Some("psd") => {
                let order = kv(ln, t.next(), "order")?;
                let mut pb = PsdBlock::new(order);
                while let Some(&(ln, l)) = pending.last() {
                    let mut t = l.split_whitespace();
                    if t.next() != Some("entry") {
                        break;
                    }
                    pending.pop();
                    let r: usize = t.next().and_then(|v| v.parse().ok()).ok_or_else(|| bad(ln, "bad row"))?;
                    let c: usize = t.next().and_then(|v| v.parse().ok()).ok_or_else(|| bad(ln, "bad col"))?;
                    pb.push(r, c, parse_expr(ln, t)?);
                }
                p.push(name, Block::Psd(pb));
            }
            other => return Err(bad(ln, format!("unknown block kind {other:?}"))),
        }
    }
    if p.blocks.len() != nblocks {
        return Err(bad(0, format!("header announced {nblocks} blocks, found {}", p.blocks.len())));
    }
    p.validate()?;
    Ok(p)
}
