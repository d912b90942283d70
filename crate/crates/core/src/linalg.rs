//! Tridiagonal solves for the Crank-Nicolson step.

use num_complex::Complex64;

/// Solves a tridiagonal system with constant off-diagonal `off` and diagonal
/// `diag`, in place on `rhs`. `scratch` must have the same length.
///
/// Returns `false` on a zero pivot.
pub(crate) fn solve_tridiagonal(
    off: Complex64,
    diag: &[Complex64],
    rhs: &mut [Complex64],
    scratch: &mut [Complex64],
) -> bool {
    let n = diag.len();
    let mut pivot = diag[0];
    if pivot.norm() == 0.0 {
        return false;
    }
    rhs[0] /= pivot;
    for i in 1..n {
        scratch[i] = off / pivot;
        pivot = diag[i] - off * scratch[i];
        if pivot.norm() == 0.0 {
            return false;
        }
        rhs[i] = (rhs[i] - off * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        let upper = rhs[i + 1];
        rhs[i] -= scratch[i + 1] * upper;
    }
    true
}

/// Cyclic tridiagonal solve (corner entries equal to `off`) via
/// Sherman-Morrison on top of [`solve_tridiagonal`].
pub(crate) fn solve_cyclic_tridiagonal(
    off: Complex64,
    diag: &[Complex64],
    rhs: &mut [Complex64],
    work: &mut CyclicWork,
) -> bool {
    let n = diag.len();
    // A = B + u vᵀ with u = (γ, 0, …, 0, off), v = (1, 0, …, 0, off/γ)
    let gamma = -diag[0];
    let b = &mut work.diag;
    b.copy_from_slice(diag);
    b[0] -= gamma;
    b[n - 1] -= off * off / gamma;
    if !solve_tridiagonal(off, b, rhs, &mut work.scratch) {
        return false;
    }
    let z = &mut work.z;
    z.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
    z[0] = gamma;
    z[n - 1] = off;
    if !solve_tridiagonal(off, b, z, &mut work.scratch) {
        return false;
    }
    let fact_num = rhs[0] + rhs[n - 1] * off / gamma;
    let fact_den = Complex64::new(1.0, 0.0) + z[0] + z[n - 1] * off / gamma;
    if fact_den.norm() == 0.0 {
        return false;
    }
    let fact = fact_num / fact_den;
    for (r, zi) in rhs.iter_mut().zip(z.iter()) {
        *r -= fact * zi;
    }
    true
}

#[derive(Debug, Clone)]
pub(crate) struct CyclicWork {
    diag: Vec<Complex64>,
    scratch: Vec<Complex64>,
    z: Vec<Complex64>,
}

impl CyclicWork {
    pub(crate) fn new(n: usize) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            diag: vec![zero; n],
            scratch: vec![zero; n],
            z: vec![zero; n],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn apply(off: Complex64, diag: &[Complex64], x: &[Complex64], cyclic: bool) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += off * x[i - 1];
                } else if cyclic {
                    s += off * x[n - 1];
                }
                if i + 1 < n {
                    s += off * x[i + 1];
                } else if cyclic {
                    s += off * x[0];
                }
                s
            })
            .collect()
    }

    #[test]
    fn solves_match_matrix_application() {
        let n = 12;
        let off = c(0.0, -0.7);
        let diag: Vec<Complex64> = (0..n).map(|i| c(1.0, 1.4 + 0.1 * i as f64)).collect();
        let x: Vec<Complex64> = (0..n).map(|i| c((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        for cyclic in [false, true] {
            let mut rhs = apply(off, &diag, &x, cyclic);
            if cyclic {
                let mut work = CyclicWork::new(n);
                assert!(solve_cyclic_tridiagonal(off, &diag, &mut rhs, &mut work));
            } else {
                let mut scratch = vec![c(0.0, 0.0); n];
                assert!(solve_tridiagonal(off, &diag, &mut rhs, &mut scratch));
            }
            for (a, b) in rhs.iter().zip(&x) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }
}
