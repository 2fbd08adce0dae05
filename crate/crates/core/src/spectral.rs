//! Hermitian eigen-decomposition and the spectral calculus `f(A) = sum f(lambda_i) P_i`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::kernels::ScalarFunction;
use crate::tensor::{EinsteinTensor, TensorShape, C64};

/// `A = sum_i lambda_i U_i U_i^H` with eigenvalues in descending order.
///
/// Eigentensors are the columns of `eigenvectors` (unfolded), orthonormal under
/// the Einstein inner product.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    shape: TensorShape,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<C64>,
}

const EIGEN_MAX_ITER: usize = 10_000;

/// Eigen-decomposition of a Hermitian tensor.
///
/// Ties are broken by the solver's output order (stable sort), so repeated
/// eigenvalues come back in a deterministic order for a given input.
pub fn eigh(a: &EinsteinTensor) -> Result<SpectralDecomposition> {
    a.ensure_hermitian()?;
    let h = a.hermitian_part().into_unfolded();
    let scale = h.norm();
    let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::Eigensolver("QR iteration did not converge".into()))?;
    let d = a.dim();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = DMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    if eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigensolver("non-finite eigenvalue".into()));
    }
    let dec = SpectralDecomposition {
        shape: a.shape().clone(),
        eigenvalues,
        eigenvectors,
    };
    let residual = (dec.reconstruct_matrix() - &h).norm();
    if residual > 1e-8 * (1.0 + scale) {
        return Err(Error::Eigensolver(format!(
            "reconstruction residual {residual:.3e} too large"
        )));
    }
    Ok(dec)
}

impl SpectralDecomposition {
    /// Assemble from known eigenpairs. Columns of `eigenvectors` must be
    /// orthonormal; eigenvalues are re-sorted into descending order.
    pub fn from_parts(shape: &TensorShape, eigenvalues: Vec<f64>, eigenvectors: DMatrix<C64>) -> Result<Self> {
        let d = shape.dim();
        if eigenvalues.len() != d || eigenvectors.nrows() != d || eigenvectors.ncols() != d {
            return Err(Error::InvalidShape(format!(
                "need {d} eigenpairs of length {d}, got {} values and a {}x{} basis",
                eigenvalues.len(),
                eigenvectors.nrows(),
                eigenvectors.ncols()
            )));
        }
        let defect = (eigenvectors.adjoint() * &eigenvectors - DMatrix::<C64>::identity(d, d)).norm();
        if defect > 1e-10 * d as f64 {
            return Err(Error::InvalidParameter(format!(
                "eigenvector basis is not orthonormal (defect {defect:.3e})"
            )));
        }
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| eigenvalues[j].total_cmp(&eigenvalues[i]));
        let mut vecs = DMatrix::zeros(d, d);
        for (dst, &src) in order.iter().enumerate() {
            vecs.set_column(dst, &eigenvectors.column(src));
        }
        Ok(SpectralDecomposition {
            shape: shape.clone(),
            eigenvalues: order.iter().map(|&i| eigenvalues[i]).collect(),
            eigenvectors: vecs,
        })
    }

    pub fn shape(&self) -> &TensorShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unfolded eigentensors as columns (`U` with `A = U diag(lambda) U^H`).
    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.eigenvectors
    }

    /// Rank-one projector `P_i = U_i U_i^H`.
    pub fn projector(&self, i: usize) -> Result<EinsteinTensor> {
        if i >= self.dim() {
            return Err(Error::IndexOutOfRange {
                index: i,
                dim: self.dim(),
            });
        }
        let u = self.eigenvectors.column(i);
        EinsteinTensor::from_unfolded(&self.shape, &u * u.adjoint())
    }

    fn weighted(&self, weights: &[f64]) -> DMatrix<C64> {
        let mut scaled = self.eigenvectors.clone();
        for (j, &w) in weights.iter().enumerate() {
            scaled.column_mut(j).scale_mut(w);
        }
        scaled * self.eigenvectors.adjoint()
    }

    fn reconstruct_matrix(&self) -> DMatrix<C64> {
        self.weighted(&self.eigenvalues)
    }

    /// `sum_i lambda_i P_i`.
    pub fn reconstruct(&self) -> EinsteinTensor {
        EinsteinTensor::from_unfolded(&self.shape, self.reconstruct_matrix()).expect("square unfolding")
    }

    /// `f(A) = sum_i f(lambda_i) P_i`.
    pub fn apply(&self, f: &ScalarFunction) -> Result<EinsteinTensor> {
        let values = self
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                f.eval(l).map_err(|e| Error::Eigenvalue {
                    index: i,
                    value: l,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        EinsteinTensor::from_unfolded(&self.shape, self.weighted(&values))
    }

    /// Whether every eigenvalue exceeds `tol`.
    pub fn is_positive_definite(&self, tol: f64) -> bool {
        self.eigenvalues.iter().all(|&l| l > tol)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// `f(A)` for a Hermitian tensor.
pub fn apply_function(f: &ScalarFunction, a: &EinsteinTensor) -> Result<EinsteinTensor> {
    eigh(a)?.apply(f)
}

/// Positive definiteness with a tolerance relative to the spectral scale.
pub fn is_positive_definite(a: &EinsteinTensor) -> Result<bool> {
    let dec = eigh(a)?;
    let scale = dec.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    Ok(dec.is_positive_definite(1e-12 * scale))
}
