//! Symmetric cones in standard form: Nesterov–Todd scaling, Jordan algebra
//! and step lengths. PSD slices use the lower-triangular column-major `svec`
//! layout with `√2` on off-diagonals, which makes `svec` an isometry.

use nalgebra::{DMatrix, SymmetricEigen};

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cone {
    Nonneg(usize),
    Soc(usize),
    /// Matrix order.
    Psd(usize),
}

impl Cone {
    pub fn dim(self) -> usize {
        match self {
            Cone::Nonneg(d) | Cone::Soc(d) => d,
            Cone::Psd(n) => n * (n + 1) / 2,
        }
    }

    pub fn degree(self) -> usize {
        match self {
            Cone::Nonneg(d) => d,
            Cone::Soc(_) => 1,
            Cone::Psd(n) => n,
        }
    }
}

pub fn svec_index(n: usize, r: usize, c: usize) -> usize {
    debug_assert!(r >= c && r < n);
    c * n - c * (c + 1) / 2 + r
}

pub fn svec_to_mat(v: &[f64], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for c in 0..n {
        m[(c, c)] = v[k];
        k += 1;
        for r in c + 1..n {
            let x = v[k] / SQRT2;
            m[(r, c)] = x;
            m[(c, r)] = x;
            k += 1;
        }
    }
    m
}

pub fn mat_to_svec(m: &DMatrix<f64>, out: &mut [f64]) {
    let n = m.nrows();
    let mut k = 0;
    for c in 0..n {
        out[k] = m[(c, c)];
        k += 1;
        for r in c + 1..n {
            out[k] = 0.5 * (m[(r, c)] + m[(c, r)]) * SQRT2;
            k += 1;
        }
    }
}

/// Writes the identity element of `cone` into `out`.
pub fn identity(cone: Cone, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    match cone {
        Cone::Nonneg(_) => out.iter_mut().for_each(|v| *v = 1.0),
        Cone::Soc(_) => out[0] = 1.0,
        Cone::Psd(n) => {
            let mut k = 0;
            for c in 0..n {
                out[k] = 1.0;
                k += n - c;
            }
        }
    }
}

/// Smallest `t` such that `x + t·e` lies on the boundary, i.e. minus the
/// smallest Jordan eigenvalue.
pub fn min_eig(cone: Cone, x: &[f64]) -> f64 {
    match cone {
        Cone::Nonneg(_) => x.iter().cloned().fold(f64::INFINITY, f64::min),
        Cone::Soc(_) => x[0] - norm(&x[1..]),
        Cone::Psd(n) => {
            if n == 0 {
                return f64::INFINITY;
            }
            let m = svec_to_mat(x, n);
            SymmetricEigen::new(m).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
        }
    }
}

/// Jordan product `u ∘ v`.
pub fn jordan_product(cone: Cone, u: &[f64], v: &[f64], out: &mut [f64]) {
    match cone {
        Cone::Nonneg(_) => {
            for i in 0..u.len() {
                out[i] = u[i] * v[i];
            }
        }
        Cone::Soc(_) => {
            out[0] = dot(u, v);
            for i in 1..u.len() {
                out[i] = u[0] * v[i] + v[0] * u[i];
            }
        }
        Cone::Psd(n) => {
            let a = svec_to_mat(u, n);
            let b = svec_to_mat(v, n);
            let p = &a * &b;
            let sym = (&p + p.transpose()) * 0.5;
            mat_to_svec(&sym, out);
        }
    }
}

/// Nesterov–Todd scaling of one cone, with `W z = W⁻ᵀ s = λ`.
#[derive(Clone, Debug)]
pub enum Scaling {
    Nonneg { w: Vec<f64> },
    /// `W = η·W̄`, with `wb` the normalised hyperbolic vector.
    Soc { eta: f64, wb: Vec<f64> },
    /// `W(X) = RᵀXR`; `q = (RRᵀ)⁻¹`; `lam` the diagonal of the scaled point.
    Psd { r: DMatrix<f64>, rinv: DMatrix<f64>, q: DMatrix<f64>, lam: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotInterior;

impl Scaling {
    /// Computes the scaling and writes `λ` into `lambda`.
    pub fn compute(cone: Cone, s: &[f64], z: &[f64], lambda: &mut [f64]) -> Result<Scaling, NotInterior> {
        match cone {
            Cone::Nonneg(_) => {
                let mut w = Vec::with_capacity(s.len());
                for i in 0..s.len() {
                    if !(s[i] > 0.0 && z[i] > 0.0) {
                        return Err(NotInterior);
                    }
                    w.push((s[i] / z[i]).sqrt());
                    lambda[i] = (s[i] * z[i]).sqrt();
                }
                Ok(Scaling::Nonneg { w })
            }
            Cone::Soc(_) => {
                let sjs = jnorm_sq(s);
                let zjz = jnorm_sq(z);
                if !(sjs > 0.0 && zjz > 0.0 && s[0] > 0.0 && z[0] > 0.0) {
                    return Err(NotInterior);
                }
                let (sn, zn) = (sjs.sqrt(), zjz.sqrt());
                let sz = dot(s, z) / (sn * zn);
                let gamma = ((1.0 + sz) * 0.5).sqrt();
                let mut wb = Vec::with_capacity(s.len());
                wb.push((s[0] / sn + z[0] / zn) / (2.0 * gamma));
                for i in 1..s.len() {
                    wb.push((s[i] / sn - z[i] / zn) / (2.0 * gamma));
                }
                let eta = (sn / zn).sqrt();
                let sc = Scaling::Soc { eta, wb };
                sc.apply_w(z, lambda);
                Ok(sc)
            }
            Cone::Psd(n) => {
                let sm = svec_to_mat(s, n);
                let zm = svec_to_mat(z, n);
                let ls = sm.cholesky().ok_or(NotInterior)?.unpack();
                let lz = zm.cholesky().ok_or(NotInterior)?.unpack();
                let prod = lz.transpose() * &ls;
                let svd = prod.svd(true, true);
                let u = svd.u.ok_or(NotInterior)?;
                let vt = svd.v_t.ok_or(NotInterior)?;
                let lam: Vec<f64> = svd.singular_values.iter().cloned().collect();
                if lam.iter().any(|&l| !(l > 0.0)) {
                    return Err(NotInterior);
                }
                let isq = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, lam.iter().map(|l| 1.0 / l.sqrt())));
                let r = &ls * vt.transpose() * &isq;
                let rinv = &isq * u.transpose() * lz.transpose();
                let q = rinv.transpose() * &rinv;
                lambda.iter_mut().for_each(|v| *v = 0.0);
                let mut k = 0;
                for (c, l) in lam.iter().enumerate() {
                    lambda[k] = *l;
                    k += n - c;
                }
                Ok(Scaling::Psd { r, rinv, q, lam })
            }
        }
    }

    /// `out = W x`.
    pub fn apply_w(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Scaling::Nonneg { w } => {
                for i in 0..x.len() {
                    out[i] = w[i] * x[i];
                }
            }
            Scaling::Soc { eta, wb } => hyperbolic(wb, x, out, *eta, false),
            Scaling::Psd { r, .. } => congruence(r, x, out, true),
        }
    }

    /// `out = Wᵀ x`.
    pub fn apply_wt(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Scaling::Psd { r, .. } => congruence(r, x, out, false),
            _ => self.apply_w(x, out),
        }
    }

    /// `out = W⁻ᵀ x`.
    pub fn apply_winv_t(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Scaling::Nonneg { w } => {
                for i in 0..x.len() {
                    out[i] = x[i] / w[i];
                }
            }
            Scaling::Soc { eta, wb } => hyperbolic(wb, x, out, 1.0 / *eta, true),
            Scaling::Psd { rinv, .. } => congruence(rinv, x, out, false),
        }
    }

    /// `out = (WᵀW)⁻¹ x`.
    pub fn apply_hinv(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Scaling::Nonneg { w } => {
                for i in 0..x.len() {
                    out[i] = x[i] / (w[i] * w[i]);
                }
            }
            Scaling::Soc { .. } => {
                let mut tmp = vec![0.0; x.len()];
                self.apply_winv_t(x, &mut tmp);
                self.apply_winv_t(&tmp, out);
            }
            Scaling::Psd { q, .. } => {
                let n = q.nrows();
                let m = svec_to_mat(x, n);
                let p = q * m * q;
                mat_to_svec(&p, out);
            }
        }
    }

    /// Solves `λ ∘ x = w` for `x`.
    pub fn lambda_solve(&self, cone: Cone, lambda: &[f64], w: &[f64], out: &mut [f64]) {
        match (self, cone) {
            (Scaling::Nonneg { .. }, _) => {
                for i in 0..w.len() {
                    out[i] = w[i] / lambda[i];
                }
            }
            (Scaling::Soc { .. }, _) => {
                let l0 = lambda[0];
                let det = jnorm_sq(lambda);
                let l1w1: f64 = lambda[1..].iter().zip(&w[1..]).map(|(a, b)| a * b).sum();
                let x0 = (l0 * w[0] - l1w1) / det;
                out[0] = x0;
                for i in 1..w.len() {
                    out[i] = (w[i] - x0 * lambda[i]) / l0;
                }
            }
            (Scaling::Psd { lam, .. }, Cone::Psd(n)) => {
                let mut k = 0;
                for c in 0..n {
                    for r in c..n {
                        out[k] = 2.0 * w[k] / (lam[r] + lam[c]);
                        k += 1;
                    }
                }
            }
            _ => unreachable!("scaling does not match cone"),
        }
    }
}

/// Largest `α ≤ cap` with `λ + α d` in the cone, where `λ` is the scaled
/// point of `scaling`.
pub fn max_step(cone: Cone, scaling: &Scaling, lambda: &[f64], d: &[f64], cap: f64) -> f64 {
    let t = match (cone, scaling) {
        (Cone::Nonneg(_), _) => {
            let mut worst = 0.0f64;
            for i in 0..d.len() {
                worst = worst.max(-d[i] / lambda[i]);
            }
            worst
        }
        (Cone::Soc(_), _) => {
            let ln = jnorm_sq(lambda).sqrt();
            let lb: Vec<f64> = lambda.iter().map(|v| v / ln).collect();
            let ljd = lb[0] * d[0] - dot(&lb[1..], &d[1..]);
            let coef = (ljd + d[0]) / (lb[0] + 1.0);
            let rho0 = ljd / ln;
            let mut r1 = 0.0;
            for i in 1..d.len() {
                let v = (d[i] - coef * lb[i]) / ln;
                r1 += v * v;
            }
            r1.sqrt() - rho0
        }
        (Cone::Psd(n), Scaling::Psd { lam, .. }) => {
            let mut m = svec_to_mat(d, n);
            for c in 0..n {
                for r in 0..n {
                    m[(r, c)] /= (lam[r] * lam[c]).sqrt();
                }
            }
            let e = SymmetricEigen::new(m);
            -e.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
        }
        _ => unreachable!("scaling does not match cone"),
    };
    if t <= 0.0 {
        cap
    } else {
        (1.0 / t).min(cap)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn jnorm_sq(x: &[f64]) -> f64 {
    x[0] * x[0] - dot(&x[1..], &x[1..])
}

/// `out = scale·W̄x`, or `scale·W̄⁻¹x` when `inverse`.
fn hyperbolic(wb: &[f64], x: &[f64], out: &mut [f64], scale: f64, inverse: bool) {
    let sign = if inverse { -1.0 } else { 1.0 };
    let w0 = wb[0];
    let w1x1 = dot(&wb[1..], &x[1..]);
    out[0] = scale * (w0 * x[0] + sign * w1x1);
    let coef = sign * x[0] + w1x1 / (1.0 + w0);
    for i in 1..x.len() {
        out[i] = scale * (x[i] + coef * wb[i]);
    }
}

/// `out = svec(AᵀXA)` when `transpose_left`, else `svec(AXAᵀ)`.
fn congruence(a: &DMatrix<f64>, x: &[f64], out: &mut [f64], transpose_left: bool) {
    let n = a.nrows();
    let m = svec_to_mat(x, n);
    let p = if transpose_left { a.transpose() * m * a } else { a * m * a.transpose() };
    mat_to_svec(&p, out);
}
