use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Right singular vector belonging to the smallest singular value.
pub fn null_vector(a: &DMatrix<f64>) -> Result<DVector<f64>> {
    let svd = a.clone().svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::numeric("SVD did not return V"))?;
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .ok_or_else(|| Error::numeric("empty matrix"))?;
    Ok(v_t.row(idx).transpose())
}

/// Flip `v` so that its first component of magnitude above `tol` is positive.
pub fn fix_sign(v: &mut DVector<f64>, tol: f64) {
    if let Some(x) = v.iter().find(|x| x.abs() > tol) {
        if *x < 0.0 {
            v.neg_mut();
        }
    }
}

/// Eigenvalues of a general real matrix, sorted by real part.
pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex64> {
    let mut ev: Vec<Complex64> = a
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect();
    ev.sort_by(|x, y| x.re.total_cmp(&y.re));
    ev
}

/// Eigenvalues of a complex matrix from the diagonal of its Schur form.
pub fn complex_eigenvalues(a: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let schur = a
        .clone()
        .try_schur(1e-15, 10_000)
        .ok_or_else(|| Error::numeric("complex Schur decomposition did not converge"))?;
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().copied().collect())
}

pub fn sym_part(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

pub fn antisym_norm(a: &DMatrix<f64>) -> f64 {
    (a - a.transpose()).norm()
}

/// Sorted eigenvalues of a symmetric matrix.
pub fn sym_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Largest eigenvalue of a symmetric matrix; closed forms up to 3×3.
pub fn sym_max_eigenvalue(a: &DMatrix<f64>) -> f64 {
    match a.nrows() {
        0 => f64::NEG_INFINITY,
        1 => a[(0, 0)],
        2 => {
            let m = 0.5 * (a[(0, 0)] + a[(1, 1)]);
            let h = 0.5 * (a[(0, 0)] - a[(1, 1)]);
            m + h.hypot(a[(0, 1)])
        }
        3 => {
            let p1 = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
            let q = (a[(0, 0)] + a[(1, 1)] + a[(2, 2)]) / 3.0;
            let p2 = (a[(0, 0)] - q).powi(2) + (a[(1, 1)] - q).powi(2) + (a[(2, 2)] - q).powi(2) + 2.0 * p1;
            if p2 == 0.0 {
                return q;
            }
            let p = (p2 / 6.0).sqrt();
            let b = (a - DMatrix::identity(3, 3) * q) / p;
            let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
            q + 2.0 * p * (r.acos() / 3.0).cos()
        }
        _ => *sym_eigenvalues(a).last().unwrap(),
    }
}

/// Finite-difference weights for the first derivative at `x0` on nodes `xs`
/// (Fornberg's recursion).
pub fn fd_weights(x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    // c[i][k]: weight of node i for derivative k (k = 0, 1)
    let mut c = vec![[0.0f64; 2]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn sym_max_eigenvalue_matches_solver() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for n in 1..=4 {
            for _ in 0..50 {
                let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-2.0..2.0));
                let s = sym_part(&m);
                let exact = *sym_eigenvalues(&s).last().unwrap();
                assert!((sym_max_eigenvalue(&s) - exact).abs() < 1e-12 * (1.0 + exact.abs()));
            }
        }
    }

    use super::*;

    #[test]
    fn null_vector_of_rank_one() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let v = null_vector(&a).unwrap();
        assert!((&a * &v).norm() < 1e-14);
    }

    #[test]
    fn fd_weights_exact_for_quartic() {
        let xs = [0.0, 0.3, 0.7, 1.2, 2.0];
        let w = fd_weights(0.7, &xs);
        let d: f64 = xs.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((d - 4.0 * 0.7f64.powi(3)).abs() < 1e-12);
        let uniform = fd_weights(0.0, &[-1.0, 0.0, 1.0]);
        assert!((uniform[0] + 0.5).abs() < 1e-15 && uniform[1].abs() < 1e-15);
    }

    #[test]
    fn complex_schur_diag() {
        let a = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0), Complex64::new(0.0, 0.0),
        ]);
        let mut ev = complex_eigenvalues(&a).unwrap();
        ev.sort_by(|x, y| x.im.total_cmp(&y.im));
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }
}
