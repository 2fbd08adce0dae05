//! Double and triple tensor integrals.
//!
//! For `A = sum lambda_i P_{U_i}` and `B = sum mu_j P_{V_j}`,
//! `T_{A,B,psi}(X) = sum_ij psi(lambda_i, mu_j) P_{U_i} X P_{V_j}`.
//! In eigen-coordinates this is a Hadamard product: with `C = U^H X V`,
//! `T(X) = U (Psi o C) V^H` where `Psi_ij = psi(lambda_i, mu_j)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernels::{Kernel, ScalarFunction};
use crate::norms::{norm, NormSpec};
use crate::spectral::{eigh, SpectralDecomposition};
use crate::tensor::{EinsteinTensor, C64};

/// `x_ij = <X V_j, U_i>`, the coordinates of `X` in the product eigenbasis.
pub fn coefficient_matrix(
    a: &SpectralDecomposition,
    b: &SpectralDecomposition,
    x: &EinsteinTensor,
) -> Result<DMatrix<C64>> {
    check_shapes(a, b, x)?;
    Ok(a.eigenvectors().adjoint() * x.unfold() * b.eigenvectors())
}

/// `Psi_ij = psi(lambda_i, mu_j)`; a domain failure names the eigenvalue pair.
pub fn kernel_matrix(psi: &Kernel, lambda: &[f64], mu: &[f64]) -> Result<DMatrix<f64>> {
    if psi.arity() != 2 {
        return Err(Error::InvalidParameter(format!(
            "{} has arity {}, a double integral needs 2",
            psi.name(),
            psi.arity()
        )));
    }
    let mut out = DMatrix::zeros(lambda.len(), mu.len());
    for (i, &l) in lambda.iter().enumerate() {
        for (j, &m) in mu.iter().enumerate() {
            out[(i, j)] = psi.eval2(l, m).map_err(|e| Error::EigenPair {
                i,
                j,
                source: Box::new(e),
            })?;
        }
    }
    Ok(out)
}

fn check_shapes(a: &SpectralDecomposition, b: &SpectralDecomposition, x: &EinsteinTensor) -> Result<()> {
    for s in [a.shape(), b.shape()] {
        if s != x.shape() {
            return Err(Error::ShapeMismatch {
                left: s.modes().to_vec(),
                right: x.shape().modes().to_vec(),
            });
        }
    }
    Ok(())
}

/// `T_{A,B,psi}(X)`.
pub fn dti_apply(
    a: &SpectralDecomposition,
    b: &SpectralDecomposition,
    psi: &Kernel,
    x: &EinsteinTensor,
) -> Result<EinsteinTensor> {
    let w = kernel_matrix(psi, a.eigenvalues(), b.eigenvalues())?;
    dti_apply_weights(a, b, &w.map(|v| C64::new(v, 0.0)), x)
}

/// Double integral with an explicit (possibly complex) weight matrix `W_ij`.
pub fn dti_apply_weights(
    a: &SpectralDecomposition,
    b: &SpectralDecomposition,
    weights: &DMatrix<C64>,
    x: &EinsteinTensor,
) -> Result<EinsteinTensor> {
    let c = coefficient_matrix(a, b, x)?;
    if weights.shape() != c.shape() {
        return Err(Error::InvalidShape(format!(
            "weight matrix is {:?}, expected {:?}",
            weights.shape(),
            c.shape()
        )));
    }
    let weighted = c.component_mul(weights);
    EinsteinTensor::from_unfolded(x.shape(), a.eigenvectors() * weighted * b.eigenvectors().adjoint())
}

/// Reference double integral: the literal sum of `D^2` Einstein products
/// `psi(lambda_i, mu_j) P_{U_i} * X * P_{V_j}`.
pub fn dti_apply_naive(
    a: &SpectralDecomposition,
    b: &SpectralDecomposition,
    psi: &Kernel,
    x: &EinsteinTensor,
) -> Result<EinsteinTensor> {
    check_shapes(a, b, x)?;
    let d = x.dim();
    let pa: Vec<EinsteinTensor> = (0..d).map(|i| a.projector(i)).collect::<Result<_>>()?;
    let pb: Vec<EinsteinTensor> = (0..d).map(|j| b.projector(j)).collect::<Result<_>>()?;
    let mut out = EinsteinTensor::zeros(x.shape());
    for (i, p) in pa.iter().enumerate() {
        let px = p.einstein_product(x)?;
        for (j, q) in pb.iter().enumerate() {
            let w = psi
                .eval2(a.eigenvalues()[i], b.eigenvalues()[j])
                .map_err(|e| Error::EigenPair { i, j, source: Box::new(e) })?;
            out = out.add(&px.einstein_product(q)?.scale_real(w))?;
        }
    }
    Ok(out)
}

/// `T_{A,B,C,phi}(X, Y) = sum_ijk phi(lambda_i, mu_j, nu_k) P_{U_i} X P_{V_j} Y P_{W_k}`.
///
/// Computed in eigen-coordinates: with `x = U^H X V` and `y = V^H Y W`,
/// the result is `U R W^H` where `R_ik = sum_j phi_ijk x_ij y_jk`.
pub fn tti_apply(
    a: &SpectralDecomposition,
    b: &SpectralDecomposition,
    c: &SpectralDecomposition,
    phi: &Kernel,
    x: &EinsteinTensor,
    y: &EinsteinTensor,
) -> Result<EinsteinTensor> {
    if phi.arity() != 3 {
        return Err(Error::InvalidParameter(format!(
            "{} has arity {}, a triple integral needs 3",
            phi.name(),
            phi.arity()
        )));
    }
    let xc = coefficient_matrix(a, b, x)?;
    let yc = coefficient_matrix(b, c, y)?;
    let d = x.dim();
    let (la, lb, lc) = (a.eigenvalues(), b.eigenvalues(), c.eigenvalues());
    let mut r = DMatrix::<C64>::zeros(d, d);
    for i in 0..d {
        for k in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..d {
                let w = phi.eval3(la[i], lb[j], lc[k]).map_err(|e| Error::Domain {
                    name: phi.name(),
                    args: vec![la[i], lb[j], lc[k]],
                    reason: format!("eigenvalue triple ({i}, {j}, {k}): {e}"),
                })?;
                acc += xc[(i, j)] * yc[(j, k)] * w;
            }
            r[(i, k)] = acc;
        }
    }
    EinsteinTensor::from_unfolded(x.shape(), a.eigenvectors() * r * c.eigenvectors().adjoint())
}

/// Reference triple integral by explicit projector products.
pub fn tti_apply_naive(
    a: &SpectralDecomposition,
    b: &SpectralDecomposition,
    c: &SpectralDecomposition,
    phi: &Kernel,
    x: &EinsteinTensor,
    y: &EinsteinTensor,
) -> Result<EinsteinTensor> {
    check_shapes(a, b, x)?;
    check_shapes(b, c, y)?;
    let d = x.dim();
    let mut out = EinsteinTensor::zeros(x.shape());
    for i in 0..d {
        let pxi = a.projector(i)?.einstein_product(x)?;
        for j in 0..d {
            let mid = pxi.einstein_product(&b.projector(j)?)?.einstein_product(y)?;
            for k in 0..d {
                let w = phi.eval3(a.eigenvalues()[i], b.eigenvalues()[j], c.eigenvalues()[k])?;
                out = out.add(&mid.einstein_product(&c.projector(k)?)?.scale_real(w))?;
            }
        }
    }
    Ok(out)
}

/// Size of an identity residual together with the scale it should be judged against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual {
    pub absolute: f64,
    pub scale: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        self.absolute / self.scale
    }
}

/// `|| f(A) - f(B) - T_{A,B,f^[1]}(A - B) ||`, judged against `1 + ||f(A)|| + ||f(B)||`.
pub fn perturbation_residual(
    f: &ScalarFunction,
    a: &EinsteinTensor,
    b: &EinsteinTensor,
    rho: &NormSpec,
) -> Result<Residual> {
    let (da, db) = (eigh(a)?, eigh(b)?);
    let (fa, fb) = (da.apply(f)?, db.apply(f)?);
    let t = dti_apply(&da, &db, &Kernel::divided_difference(f.clone()), &a.sub(b)?)?;
    let r = fa.sub(&fb)?.sub(&t)?;
    Ok(Residual {
        absolute: norm(&r, rho)?,
        scale: 1.0 + norm(&fa, rho)? + norm(&fb, rho)?,
    })
}

/// `|| D f(A) - f(B) D - T_{B,A,f^[1]}(D A - B D) ||`, judged against
/// `1 + ||f(A)|| + ||f(B)||`.
///
/// The projectors of `B` act on the left: summing
/// `f^[1](mu_j, lambda_i) P_{V_j} (D A - B D) P_{U_i}` telescopes to
/// `D f(A) - f(B) D`.
pub fn quasi_commutator_residual(
    f: &ScalarFunction,
    a: &EinsteinTensor,
    b: &EinsteinTensor,
    d: &EinsteinTensor,
    rho: &NormSpec,
) -> Result<Residual> {
    let (da, db) = (eigh(a)?, eigh(b)?);
    let (fa, fb) = (da.apply(f)?, db.apply(f)?);
    let lhs = d.einstein_product(&fa)?.sub(&fb.einstein_product(d)?)?;
    let t = quasi_commutator_integral(f, &da, &db, d)?;
    Ok(Residual {
        absolute: norm(&lhs.sub(&t)?, rho)?,
        scale: 1.0 + norm(&fa, rho)? + norm(&fb, rho)?,
    })
}

/// `T_{B,A,f^[1]}(D A - B D)`, which equals `D f(A) - f(B) D`.
pub fn quasi_commutator_integral(
    f: &ScalarFunction,
    a: &SpectralDecomposition,
    b: &SpectralDecomposition,
    d: &EinsteinTensor,
) -> Result<EinsteinTensor> {
    let (ra, rb) = (a.reconstruct(), b.reconstruct());
    let x = d.einstein_product(&ra)?.sub(&rb.einstein_product(d)?)?;
    dti_apply(b, a, &Kernel::divided_difference(f.clone()), &x)
}

/// Fréchet derivative `d/dt f(A + tX) |_{t=0} = T_{A,A,f^[1]}(X)`.
pub fn frechet_derivative(f: &ScalarFunction, a: &SpectralDecomposition, x: &EinsteinTensor) -> Result<EinsteinTensor> {
    dti_apply(a, a, &Kernel::divided_difference(f.clone()), x)
}

/// Relative tolerance for `||D A - A D|| <= tol ||D|| ||A||` (Frobenius).
pub const COMMUTE_TOLERANCE: f64 = 1e-8;

/// Check that `D` commutes with `A`.
pub fn check_commutes(a: &EinsteinTensor, d: &EinsteinTensor) -> Result<()> {
    let comm = d.einstein_product(a)?.sub(&a.einstein_product(d)?)?;
    let n = comm.frobenius_norm();
    let tolerance = COMMUTE_TOLERANCE * d.frobenius_norm() * a.frobenius_norm();
    if n > tolerance {
        return Err(Error::NotCommuting { norm: n, tolerance });
    }
    Ok(())
}

/// Quasi-commutator derivative `T_{A,A,f^[1]}(D X)` for `D` commuting with `A`;
/// equals `d/dt (D f(A + tX) - f(A) D) |_{t=0}`.
pub fn quasi_derivative(
    f: &ScalarFunction,
    a: &SpectralDecomposition,
    x: &EinsteinTensor,
    d: &EinsteinTensor,
) -> Result<EinsteinTensor> {
    check_commutes(&a.reconstruct(), d)?;
    frechet_derivative(f, a, &d.einstein_product(x)?)
}
