use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenpairs of `A x = λ B x`, ascending, `B`-orthonormal columns.
#[derive(Debug, Clone)]
pub struct DenseEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// Symmetric-definite generalized eigenproblem via the Cholesky factor of
/// `B`: `L⁻¹ A L⁻ᵀ y = λ y`, `x = L⁻ᵀ y`.
pub fn dense_generalized_eigen(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DenseEigen> {
    let n = a.nrows();
    let chol = b.clone().cholesky().ok_or_else(|| Error::Factorization {
        stage: "dense mass Cholesky",
        pivot: 0,
        hint: "the mass matrix is not positive definite".into(),
    })?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Factorization {
            stage: "dense mass Cholesky",
            pivot: 0,
            hint: "singular Cholesky factor".into(),
        })?;
    let mut c = &linv * a * linv.transpose();
    c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let lt = linv.transpose();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in idx.iter().enumerate() {
        let y: DVector<f64> = eig.eigenvectors.column(i).into_owned();
        vectors.set_column(col, &(&lt * y));
    }
    Ok(DenseEigen { values, vectors })
}
