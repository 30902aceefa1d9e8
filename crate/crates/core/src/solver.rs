//! Iterative linear algebra helpers: restarted GMRES for complex operators
//! given as closures, used by the direct resolvent oracle and the
//! Laplace-domain solvers.

use num_complex::Complex64;

use crate::error::CoreError;

fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn nrm2(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Restarted GMRES with right preconditioning: solves A x = b with
/// `apply_a` the operator and `apply_m` an approximate inverse (use the
/// identity closure when no preconditioner is available). Returns x with
/// ‖b − Ax‖ ≤ tol·‖b‖.
pub fn gmres(
    mut apply_a: impl FnMut(&[Complex64]) -> Vec<Complex64>,
    mut apply_m: impl FnMut(&[Complex64]) -> Vec<Complex64>,
    b: &[Complex64],
    tol: f64,
    restart: usize,
    max_outer: usize,
    what: &str,
) -> Result<Vec<Complex64>, CoreError> {
    let n = b.len();
    let bnorm = nrm2(b);
    if bnorm == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); n]);
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut last_res = f64::INFINITY;
    for _ in 0..max_outer {
        let ax = apply_a(&x);
        let mut r: Vec<Complex64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = nrm2(&r);
        last_res = beta / bnorm;
        if last_res <= tol {
            return Ok(x);
        }
        for ri in r.iter_mut() {
            *ri /= beta;
        }
        // Arnoldi with modified Gram-Schmidt on the preconditioned operator.
        let mut basis: Vec<Vec<Complex64>> = vec![r];
        let m = restart;
        let mut h = vec![vec![Complex64::new(0.0, 0.0); m]; m + 1];
        // Givens rotation bookkeeping for the least-squares residual.
        let mut cs = vec![Complex64::new(0.0, 0.0); m];
        let mut sn = vec![Complex64::new(0.0, 0.0); m];
        let mut g = vec![Complex64::new(0.0, 0.0); m + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut k_used = 0;
        for j in 0..m {
            let z = apply_m(&basis[j]);
            let mut w = apply_a(&z);
            for (i, v) in basis.iter().enumerate() {
                let hij = dotc(v, &w);
                h[i][j] = hij;
                for (wx, vx) in w.iter_mut().zip(v) {
                    *wx -= hij * vx;
                }
            }
            let hnext = nrm2(&w);
            h[j + 1][j] = Complex64::new(hnext, 0.0);
            // Apply the accumulated rotations to the new column.
            for i in 0..j {
                let t = cs[i].conj() * h[i][j] + sn[i].conj() * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let denom = (h[j][j].norm_sqr() + h[j + 1][j].norm_sqr()).sqrt();
            if denom > 0.0 {
                cs[j] = h[j][j] / denom;
                sn[j] = h[j + 1][j] / denom;
                h[j][j] = Complex64::new(denom, 0.0);
                h[j + 1][j] = Complex64::new(0.0, 0.0);
                let t = cs[j].conj() * g[j];
                g[j + 1] = -sn[j] * g[j];
                g[j] = t;
            }
            k_used = j + 1;
            let res = g[j + 1].norm() / bnorm;
            if res <= tol || hnext < 1e-14 {
                break;
            }
            for wx in w.iter_mut() {
                *wx /= hnext;
            }
            basis.push(w);
        }
        // Back-substitute y and update x += M Σ y_j v_j.
        let mut y = vec![Complex64::new(0.0, 0.0); k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for (jj, yj) in y.iter().enumerate().skip(i + 1) {
                s -= h[i][jj] * yj;
            }
            y[i] = s / h[i][i];
        }
        let mut corr = vec![Complex64::new(0.0, 0.0); n];
        for (j, yj) in y.iter().enumerate() {
            for (cx, vx) in corr.iter_mut().zip(&basis[j]) {
                *cx += yj * vx;
            }
        }
        let corr = apply_m(&corr);
        for (xi, ci) in x.iter_mut().zip(&corr) {
            *xi += ci;
        }
    }
    // Final residual check.
    let ax = apply_a(&x);
    let res = b
        .iter()
        .zip(&ax)
        .map(|(bi, ai)| (bi - ai).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / bnorm;
    if res <= tol {
        Ok(x)
    } else {
        Err(CoreError::IterationNonConvergence {
            what: what.into(),
            residual: res.min(last_res),
            iters: max_outer,
        })
    }
}

/// Solves a complex tridiagonal system in place (Thomas algorithm).
/// `diag` has length n, `off` length n−1 (symmetric off-diagonal).
pub fn solve_tridiagonal_symmetric(
    diag: &[Complex64],
    off: &[Complex64],
    rhs: &[Complex64],
) -> Vec<Complex64> {
    let n = diag.len();
    assert_eq!(off.len() + 1, n);
    assert_eq!(rhs.len(), n);
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    c[0] = off.first().copied().unwrap_or(Complex64::new(0.0, 0.0)) / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - off[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = off[i] / m;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / m;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let xi1 = x[i + 1];
        x[i] -= c[i] * xi1;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gmres_solves_small_dense_system() {
        // A = diag(1..5) + i·rank-structure via a fixed dense matrix.
        let a = [
            [3.0, 0.5, 0.0, 0.1],
            [0.2, 4.0, 0.3, 0.0],
            [0.0, 0.1, 5.0, 0.4],
            [0.3, 0.0, 0.2, 6.0],
        ];
        let apply = |x: &[Complex64]| -> Vec<Complex64> {
            (0..4)
                .map(|i| {
                    (0..4)
                        .map(|j| Complex64::new(a[i][j], if i == j { 0.5 } else { 0.0 }) * x[j])
                        .sum()
                })
                .collect()
        };
        let b: Vec<Complex64> = (0..4).map(|i| Complex64::new(1.0 + i as f64, -0.5)).collect();
        let x = gmres(apply, |v| v.to_vec(), &b, 1e-12, 10, 5, "test").unwrap();
        let ax = apply(&x);
        let res: f64 = b
            .iter()
            .zip(&ax)
            .map(|(bi, ai)| (bi - ai).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(res < 1e-10, "{res}");
    }

    #[test]
    fn tridiagonal_solver_roundtrip() {
        let n = 50;
        let diag: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(4.0 + 0.1 * i as f64, 0.3))
            .collect();
        let off: Vec<Complex64> = (0..n - 1).map(|_| Complex64::new(-1.0, 0.0)).collect();
        let rhs: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((i as f64 * 0.3).sin(), (i as f64 * 0.7).cos()))
            .collect();
        let x = solve_tridiagonal_symmetric(&diag, &off, &rhs);
        for i in 0..n {
            let mut ax = diag[i] * x[i];
            if i > 0 {
                ax += off[i - 1] * x[i - 1];
            }
            if i < n - 1 {
                ax += off[i] * x[i + 1];
            }
            assert!((ax - rhs[i]).norm() < 1e-12);
        }
    }
}
