//! Markov-type tail bounds and the expectations they consume.

use crate::ensembles::{sample_decomposed, EnsembleSpec, SeedSpec};
use crate::error::{Error, Result};
use crate::kernels::{divided_difference_1, Kernel, ScalarFunction};
use crate::norms::{norm, NormSpec};

use super::sampling::{labels, try_map_indexed};
use super::stats::Estimate;

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::InvalidParameter(format!("theta must be positive and finite, got {theta}")));
    }
    Ok(())
}

fn dim_sq(dim: usize) -> f64 {
    (dim * dim) as f64
}

/// `(D^2 ||X|| / theta) sum_ij E|psi(lambda_i, mu_j)|`.
///
/// ```
/// use dti_core::harness::theorem1_bound;
/// assert!((theorem1_bound(100.0, 1.0, 10.0, 2).unwrap() - 0.4).abs() < 1e-15);
/// ```
pub fn theorem1_bound(theta: f64, norm_x: f64, kernel_expectation: f64, dim: usize) -> Result<f64> {
    check_theta(theta)?;
    Ok(dim_sq(dim) * norm_x * kernel_expectation / theta)
}

/// `(D^2 Omega / theta) E||A - B||`; also the quasi-commutator bound with
/// `E||D A - B D||` in place of `E||A - B||`.
pub fn lipschitz_bound(theta: f64, omega: f64, expected_diff_norm: f64, dim: usize) -> Result<f64> {
    check_theta(theta)?;
    if !(omega >= 0.0) {
        return Err(Error::InvalidParameter(format!("Omega must be nonnegative, got {omega}")));
    }
    Ok(dim_sq(dim) * omega * expected_diff_norm / theta)
}

/// Same formula as [`lipschitz_bound`], fed with `E||D A - B D||`.
pub fn quasi_lipschitz_bound(theta: f64, omega: f64, expected_quasi_diff_norm: f64, dim: usize) -> Result<f64> {
    lipschitz_bound(theta, omega, expected_quasi_diff_norm, dim)
}

/// `(D^2 ||X|| / theta) sum_ij E|f^[1](lambda_i, lambda_j)|`, with `||D X||` in
/// place of `||X||` for the quasi-commutator derivative.
pub fn derivative_bound(theta: f64, norm_dx: f64, dd_expectation: f64, dim: usize) -> Result<f64> {
    check_theta(theta)?;
    Ok(dim_sq(dim) * norm_dx * dd_expectation / theta)
}

fn check_pair(a: &EnsembleSpec, b: &EnsembleSpec) -> Result<()> {
    if a.shape != b.shape {
        return Err(Error::ShapeMismatch {
            left: a.shape.modes().to_vec(),
            right: b.shape.modes().to_vec(),
        });
    }
    Ok(())
}

/// Monte Carlo estimate of `sum_ij E|psi(lambda_i, mu_j)|` over `n` independent draws.
pub fn expectation_abs_kernel(
    ensemble_a: &EnsembleSpec,
    ensemble_b: &EnsembleSpec,
    psi: &Kernel,
    n: usize,
    seed: &SeedSpec,
) -> Result<Estimate> {
    check_pair(ensemble_a, ensemble_b)?;
    let (sa, sb) = (seed.derive(labels::ENSEMBLE_A), seed.derive(labels::ENSEMBLE_B));
    let sums = try_map_indexed(n, |i| {
        let (_, da) = sample_decomposed(ensemble_a, &sa, i)?;
        let (_, db) = sample_decomposed(ensemble_b, &sb, i)?;
        abs_kernel_sum(psi, da.eigenvalues(), db.eigenvalues())
    })?;
    Estimate::from_samples(&sums)
}

pub(crate) fn abs_kernel_sum(psi: &Kernel, lambda: &[f64], mu: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for (i, &l) in lambda.iter().enumerate() {
        for (j, &m) in mu.iter().enumerate() {
            acc += psi
                .eval2(l, m)
                .map_err(|e| Error::EigenPair { i, j, source: Box::new(e) })?
                .abs();
        }
    }
    Ok(acc)
}

/// Monte Carlo estimate of `sum_ij E|f^[1](lambda_i, lambda_j)|` with both
/// spectra taken from the same draw of `A`.
pub fn expectation_abs_divided_difference(
    ensemble: &EnsembleSpec,
    f: &ScalarFunction,
    n: usize,
    seed: &SeedSpec,
) -> Result<Estimate> {
    let sa = seed.derive(labels::ENSEMBLE_A);
    let sums = try_map_indexed(n, |i| {
        let (_, da) = sample_decomposed(ensemble, &sa, i)?;
        abs_divided_difference_sum(f, da.eigenvalues())
    })?;
    Estimate::from_samples(&sums)
}

pub(crate) fn abs_divided_difference_sum(f: &ScalarFunction, lambda: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for (i, &l) in lambda.iter().enumerate() {
        for (j, &m) in lambda.iter().enumerate() {
            acc += divided_difference_1(f, l, m)
                .map_err(|e| Error::EigenPair { i, j, source: Box::new(e) })?
                .abs();
        }
    }
    Ok(acc)
}

/// Monte Carlo estimate of `E||A - B||`.
pub fn expectation_diff_norm(
    ensemble_a: &EnsembleSpec,
    ensemble_b: &EnsembleSpec,
    rho: &NormSpec,
    n: usize,
    seed: &SeedSpec,
) -> Result<Estimate> {
    check_pair(ensemble_a, ensemble_b)?;
    let (sa, sb) = (seed.derive(labels::ENSEMBLE_A), seed.derive(labels::ENSEMBLE_B));
    let v = try_map_indexed(n, |i| {
        let (a, _) = sample_decomposed(ensemble_a, &sa, i)?;
        let (b, _) = sample_decomposed(ensemble_b, &sb, i)?;
        norm(&a.sub(&b)?, rho)
    })?;
    Estimate::from_samples(&v)
}

/// Monte Carlo estimate of `E||D A - B D||` for a fixed `D`.
pub fn expectation_quasi_diff_norm(
    ensemble_a: &EnsembleSpec,
    ensemble_b: &EnsembleSpec,
    d: &crate::tensor::EinsteinTensor,
    rho: &NormSpec,
    n: usize,
    seed: &SeedSpec,
) -> Result<Estimate> {
    check_pair(ensemble_a, ensemble_b)?;
    let (sa, sb) = (seed.derive(labels::ENSEMBLE_A), seed.derive(labels::ENSEMBLE_B));
    let v = try_map_indexed(n, |i| {
        let (a, _) = sample_decomposed(ensemble_a, &sa, i)?;
        let (b, _) = sample_decomposed(ensemble_b, &sb, i)?;
        norm(&d.einstein_product(&a)?.sub(&b.einstein_product(d)?)?, rho)
    })?;
    Estimate::from_samples(&v)
}
