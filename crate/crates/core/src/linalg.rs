//! Dense helpers: constraint null spaces and the symmetric-definite
//! generalized eigenproblem.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

/// Orthonormal basis of `{x : C x = 0}` via a full Householder QR of Cᵀ.
/// Returns `None` if C does not have full row rank.
pub fn null_space(c: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let (k, n) = c.shape();
    if k == 0 {
        return Some(DMatrix::identity(n, n));
    }
    let mut a = c.transpose();
    let mut q = DMatrix::<f64>::identity(n, n);
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for j in 0..k {
        let norm = (j..n).map(|i| a[(i, j)] * a[(i, j)]).sum::<f64>().sqrt();
        if norm <= 1e-13 * scale * (n as f64) {
            return None;
        }
        let alpha = if a[(j, j)] > 0.0 { -norm } else { norm };
        let mut v = vec![0.0; n];
        for i in j..n {
            v[i] = a[(i, j)];
        }
        v[j] -= alpha;
        let vn2: f64 = v.iter().map(|x| x * x).sum();
        if vn2 == 0.0 {
            continue;
        }
        // A <- (I - 2 v vᵀ / vᵀv) A
        for col in j..k {
            let d: f64 = (j..n).map(|i| v[i] * a[(i, col)]).sum();
            let f = 2.0 * d / vn2;
            for i in j..n {
                a[(i, col)] -= f * v[i];
            }
        }
        // Q <- Q (I - 2 v vᵀ / vᵀv)
        for row in 0..n {
            let d: f64 = (j..n).map(|i| q[(row, i)] * v[i]).sum();
            let f = 2.0 * d / vn2;
            for i in j..n {
                q[(row, i)] -= f * v[i];
            }
        }
    }
    Some(q.columns(k, n - k).into_owned())
}

/// Solves `A x = λ M x` for symmetric A and symmetric positive definite M.
/// Eigenvalues ascending; eigenvectors M-orthonormal (columns).
pub fn generalized_eigen(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>), String> {
    let n = a.nrows();
    // Diagonal equilibration before the Cholesky factorization.
    let d: Vec<f64> = (0..n).map(|i| 1.0 / m[(i, i)].abs().max(f64::MIN_POSITIVE).sqrt()).collect();
    let scale = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d));
    let m = &scale * m * &scale;
    let a = &scale * a * &scale;
    let chol = Cholesky::new(m).ok_or("mass matrix is not positive definite")?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or("Cholesky factor is singular")?;
    let mut s = &linv * &a * linv.transpose();
    s = (&s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(s, f64::EPSILON, 10_000).ok_or("symmetric eigen-solve did not converge")?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut q = DMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        q.set_column(c, &eig.eigenvectors.column(i));
    }
    let v = scale * linv.transpose() * q;
    Ok((vals, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn null_space_is_orthonormal_and_annihilated(seed in 0u64..500, k in 1usize..4, extra in 1usize..6) {
            let n = k + extra;
            let mut x = seed as f64 * 0.377 + 0.1;
            let c = DMatrix::from_fn(k, n, |_, _| { x = (x * 9.1 + 0.3).fract(); x - 0.5 });
            let z = null_space(&c).unwrap();
            prop_assert_eq!(z.ncols(), n - k);
            let cz = &c * &z;
            prop_assert!(cz.abs().max() < 1e-13);
            let g = z.transpose() * &z;
            let e = DMatrix::<f64>::identity(n - k, n - k);
            prop_assert!((g - e).abs().max() < 1e-13);
        }
    }

    #[test]
    fn rank_deficiency_detected() {
        let c = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert!(null_space(&c).is_none());
    }

    #[test]
    fn generalized_eigen_diagonalizes() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0]);
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 1.5]);
        let (vals, v) = generalized_eigen(&a, &m).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let mm = v.transpose() * &m * &v;
        let aa = v.transpose() * &a * &v;
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((mm[(i, j)] - e).abs() < 1e-13);
                let d = if i == j { vals[i] } else { 0.0 };
                assert!((aa[(i, j)] - d).abs() < 1e-12);
            }
        }
    }
}
