//! Dense symmetric eigen helpers shared by the form-bound, trace and spectral
//! computations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Eigenpairs of a symmetric matrix, eigenvalues ascending, eigenvectors in
/// the matching columns.
pub fn symmetric_eigen_ascending(m: DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = m.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Eigenvalues only, ascending.
pub fn symmetric_eigenvalues_ascending(m: DMatrix<f64>) -> DVector<f64> {
    let mut values: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    DVector::from_vec(values)
}

/// Solves `A x = λ B x` for symmetric `A` and symmetric positive definite `B`.
///
/// Eigenvalues ascending; eigenvectors are `B`-orthonormal.
pub fn generalized_symmetric_eigen(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if a.shape() != b.shape() || !a.is_square() {
        return Err(Error::invalid(
            "pencil matrices must be square and equal-sized",
        ));
    }
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("metric matrix is not positive definite".into()))?;
    let l = chol.l();
    // C = L⁻¹ A L⁻ᵀ
    let linv_a = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&linv_a.transpose())
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let (values, y) = symmetric_eigen_ascending(c);
    let x = l
        .transpose()
        .solve_upper_triangular(&y)
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    Ok((values, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generalized_matches_diagonal_metric() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 4.0]));
        let (vals, vecs) = generalized_symmetric_eigen(&a, &b).unwrap();
        let plain = symmetric_eigenvalues_ascending(a.clone());
        for i in 0..2 {
            assert!((vals[i] - plain[i] / 4.0).abs() < 1e-14);
        }
        let gram = vecs.transpose() * &b * &vecs;
        assert!((gram - DMatrix::identity(2, 2)).amax() < 1e-12);
    }
}
