//! Real embeddings of complex vectors and Hermitian PSD constraints.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::program::{LinExpr, PsdBlock};

/// `[Re γ; Im γ]`.
pub fn lift_complex_vector(gamma: &[Complex64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(2 * gamma.len());
    x.extend(gamma.iter().map(|g| g.re));
    x.extend(gamma.iter().map(|g| g.im));
    x
}

/// Inverse of [`lift_complex_vector`]; `x` must have even length.
pub fn unlift_complex_vector(x: &[f64]) -> Vec<Complex64> {
    assert!(x.len() % 2 == 0, "lifted vector must have even length");
    let n = x.len() / 2;
    (0..n).map(|i| Complex64::new(x[i], x[n + i])).collect()
}

/// Hermitian matrix whose entries are complex affine forms of the real
/// variables. Only the lower triangle is stored; the upper follows by
/// conjugation.
#[derive(Clone, Debug, Default)]
pub struct HermitianAffine {
    pub order: usize,
    /// `((r, c), re, im)` with `r >= c`; diagonal `im` must be zero.
    pub entries: Vec<((usize, usize), LinExpr, LinExpr)>,
}

impl HermitianAffine {
    pub fn new(order: usize) -> Self {
        Self { order, entries: Vec::new() }
    }

    pub fn push(&mut self, r: usize, c: usize, re: LinExpr, im: LinExpr) {
        assert!(r >= c, "entries live in the lower triangle");
        self.entries.push(((r, c), re, im));
    }
}

/// `M ⪰ 0 ⇔ [[Re M, −Im M], [Im M, Re M]] ⪰ 0`.
pub fn embed_hermitian_psd(m: &HermitianAffine) -> PsdBlock {
    let n = m.order;
    let mut block = PsdBlock::new(2 * n);
    for ((r, c), re, im) in &m.entries {
        let (r, c) = (*r, *c);
        if !re.terms.is_empty() || re.constant != 0.0 {
            block.push(r, c, re.clone());
            block.push(r + n, c + n, re.clone());
        }
        if r != c && (!im.terms.is_empty() || im.constant != 0.0) {
            block.push(n + r, c, im.clone());
            block.push(n + c, r, im.negated());
        }
    }
    block
}

/// Numeric counterpart of [`embed_hermitian_psd`].
pub fn embed_hermitian_matrix(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = m.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let v = m[(i, j)];
            out[(i, j)] = v.re;
            out[(i + n, j + n)] = v.re;
            out[(i + n, j)] = v.im;
            out[(i, j + n)] = -v.im;
        }
    }
    out
}
