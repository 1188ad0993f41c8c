//! Dense symmetric kernels: Cholesky factor/solve and `C += AᵀA`.
//!
//! Matrices are column-major `n×n` buffers; only the lower triangle is read.

#[cfg(feature = "openblas")]
extern crate openblas_src;

#[cfg(feature = "openblas")]
mod ffi {
    use std::os::raw::{c_char, c_int};
    extern "C" {
        pub fn dpotrf_(uplo: *const c_char, n: *const c_int, a: *mut f64, lda: *const c_int, info: *mut c_int);
        pub fn dpotrs_(
            uplo: *const c_char,
            n: *const c_int,
            nrhs: *const c_int,
            a: *const f64,
            lda: *const c_int,
            b: *mut f64,
            ldb: *const c_int,
            info: *mut c_int,
        );
        pub fn dsyrk_(
            uplo: *const c_char,
            trans: *const c_char,
            n: *const c_int,
            k: *const c_int,
            alpha: *const f64,
            a: *const f64,
            lda: *const c_int,
            beta: *const f64,
            c: *mut f64,
            ldc: *const c_int,
        );
    }
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
#[derive(Clone, Debug)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors `a` in place. On failure returns the 1-based index of the
    /// first non-positive pivot.
    pub fn factor(mut a: Vec<f64>, n: usize) -> Result<Self, usize> {
        assert_eq!(a.len(), n * n);
        if n == 0 {
            return Ok(Self { n, l: a });
        }
        #[cfg(feature = "openblas")]
        {
            let ni = n as i32;
            let mut info = 0i32;
            unsafe { ffi::dpotrf_(b"L".as_ptr() as *const _, &ni, a.as_mut_ptr(), &ni, &mut info) };
            if info != 0 {
                return Err(info.unsigned_abs() as usize);
            }
            Ok(Self { n, l: a })
        }
        #[cfg(not(feature = "openblas"))]
        {
            for j in 0..n {
                for i in 0..j {
                    a[j * n + i] = a[i * n + j];
                }
            }
            let m = nalgebra::DMatrix::from_vec(n, n, a);
            match m.cholesky() {
                Some(ch) => Ok(Self { n, l: ch.unpack().as_slice().to_vec() }),
                None => Err(1),
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        if self.n == 0 {
            return;
        }
        #[cfg(feature = "openblas")]
        {
            let ni = self.n as i32;
            let one = 1i32;
            let mut info = 0i32;
            unsafe {
                ffi::dpotrs_(
                    b"L".as_ptr() as *const _,
                    &ni,
                    &one,
                    self.l.as_ptr(),
                    &ni,
                    b.as_mut_ptr(),
                    &ni,
                    &mut info,
                )
            };
            debug_assert_eq!(info, 0);
        }
        #[cfg(not(feature = "openblas"))]
        {
            let n = self.n;
            let l = &self.l;
            for i in 0..n {
                let mut v = b[i];
                for k in 0..i {
                    v -= l[k * n + i] * b[k];
                }
                b[i] = v / l[i * n + i];
            }
            for i in (0..n).rev() {
                let mut v = b[i];
                for k in i + 1..n {
                    v -= l[i * n + k] * b[k];
                }
                b[i] = v / l[i * n + i];
            }
        }
    }
}

/// `C += AᵀA` on the lower triangle, with `A` a column-major `k×n` matrix.
pub fn syrk_lower_add(c: &mut [f64], n: usize, a: &[f64], k: usize) {
    assert_eq!(c.len(), n * n);
    assert_eq!(a.len(), k * n);
    if n == 0 || k == 0 {
        return;
    }
    #[cfg(feature = "openblas")]
    {
        let (ni, ki) = (n as i32, k as i32);
        let one = 1.0f64;
        unsafe {
            ffi::dsyrk_(
                b"L".as_ptr() as *const _,
                b"T".as_ptr() as *const _,
                &ni,
                &ki,
                &one,
                a.as_ptr(),
                &ki,
                &one,
                c.as_mut_ptr(),
                &ni,
            )
        };
    }
    #[cfg(not(feature = "openblas"))]
    {
        for j in 0..n {
            let aj = &a[j * k..(j + 1) * k];
            for i in j..n {
                let ai = &a[i * k..(i + 1) * k];
                c[j * n + i] += ai.iter().zip(aj).map(|(p, q)| p * q).sum::<f64>();
            }
        }
    }
}

/// OpenBLAS picks its kernels when the library loads, and on some
/// virtualised CPUs it falls back to a generic core. When
/// `OPENBLAS_CORETYPE` is unset and the CPU supports a faster kernel, this
/// re-runs the current executable with the variable set and returns the
/// child's exit code. Returns `None` when no re-exec is needed.
pub fn reexec_with_blas_coretype() -> Option<i32> {
    if !cfg!(feature = "openblas") || std::env::var_os("OPENBLAS_CORETYPE").is_some() {
        return None;
    }
    let core = detect_coretype()?;
    let exe = std::env::current_exe().ok()?;
    let status = std::process::Command::new(exe)
        .args(std::env::args_os().skip(1))
        .env("OPENBLAS_CORETYPE", core)
        .status()
        .ok()?;
    Some(status.code().unwrap_or(1))
}

fn detect_coretype() -> Option<&'static str> {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx512f") && std::arch::is_x86_feature_detected!("avx512dq") {
            return Some("SKYLAKEX");
        }
        if std::arch::is_x86_feature_detected!("avx2") && std::arch::is_x86_feature_detected!("fma") {
            return Some("HASWELL");
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_and_solve_spd() {
        let n = 3;
        // column-major [[4,2,0],[2,5,1],[0,1,3]]
        let a = vec![4.0, 2.0, 0.0, 2.0, 5.0, 1.0, 0.0, 1.0, 3.0];
        let ch = Cholesky::factor(a, n).unwrap();
        let mut b = vec![6.0, 8.0, 4.0];
        ch.solve(&mut b);
        for (v, e) in b.iter().zip([1.0, 1.0, 1.0]) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_is_rejected() {
        let a = vec![1.0, 2.0, 2.0, 1.0];
        assert!(Cholesky::factor(a, 2).is_err());
    }

    #[test]
    fn syrk_matches_loops() {
        let (k, n) = (3, 2);
        let a = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let mut c = vec![0.0; 4];
        syrk_lower_add(&mut c, n, &a, k);
        assert_eq!(c[0], 14.0);
        assert_eq!(c[1], 32.0);
        assert_eq!(c[3], 77.0);
    }
}
