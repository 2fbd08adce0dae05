//! Tail-bound sums for the mean kernels, estimated by Monte Carlo.
//!
//! Each corollary replaces `sum_ij E|psi(lambda_i, mu_j)|` in the double-integral
//! bound by a kind-specific expression:
//!
//! * arithmetic: `(1/2) sum_ij (E|lambda_i| + E|mu_j|)`
//! * geometric: `(sum_i E sqrt(lambda_i)) (sum_j E sqrt(mu_j))`, using independence of `A` and `B`
//! * harmonic and logarithmic: `sum_ij E psi(lambda_i, mu_j)` estimated directly
//! * general(alpha): `((alpha-1)/alpha) sum_ij E(X_ij / Y_ij)` with
//!   `X_ij = lambda_i^alpha - mu_j^alpha`, `Y_ij = lambda_i^(alpha-1) - mu_j^(alpha-1)`,
//!   each ratio expectation taken from its centred-moment series when that
//!   series has settled, and from the sample mean of the kernel otherwise.

use serde::{Deserialize, Serialize};

use crate::ensembles::{sample_decomposed, EnsembleSpec, SeedSpec};
use crate::error::{Error, Result};
use crate::kernels::{mean_kernel, Kernel, MeanKind};

use super::bounds::{abs_kernel_sum, theorem1_bound};
use super::ratio::expectation_ratio_series;
use super::sampling::{labels, try_map_indexed};
use super::stats::Estimate;

/// Relative size of the last series term below which the series value is used.
pub const SERIES_SETTLE_TOLERANCE: f64 = 1e-3;
/// Default number of series terms.
pub const DEFAULT_SERIES_TERMS: usize = 8;

/// How a corollary sum was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanCorollary {
    pub kind: MeanKind,
    /// The corollary's replacement for `sum_ij E|psi|`.
    pub corollary_sum: Estimate,
    /// Direct paired estimate of `sum_ij E|psi(lambda_i, mu_j)|` on the same draws.
    pub direct_sum: Estimate,
    /// For general(alpha): eigenvalue pairs whose ratio came from the series.
    pub series_pairs: usize,
    /// For general(alpha): eigenvalue pairs that fell back to the sample mean.
    pub fallback_pairs: usize,
}

impl MeanCorollary {
    /// `(D^2 ||X|| / theta) * corollary_sum`.
    pub fn bound(&self, theta: f64, norm_x: f64, dim: usize) -> Result<f64> {
        theorem1_bound(theta, norm_x, self.corollary_sum.estimate, dim)
    }
}

/// Estimate the corollary sum and the direct sum on `n` paired draws.
pub fn mean_corollary(
    kind: MeanKind,
    ensemble_a: &EnsembleSpec,
    ensemble_b: &EnsembleSpec,
    n: usize,
    seed: &SeedSpec,
    series_terms: usize,
) -> Result<MeanCorollary> {
    let psi = mean_kernel(kind)?;
    if ensemble_a.shape != ensemble_b.shape {
        return Err(Error::ShapeMismatch {
            left: ensemble_a.shape.modes().to_vec(),
            right: ensemble_b.shape.modes().to_vec(),
        });
    }
    let (sa, sb) = (seed.derive(labels::ENSEMBLE_A), seed.derive(labels::ENSEMBLE_B));
    let spectra = try_map_indexed(n, |i| {
        let (_, da) = sample_decomposed(ensemble_a, &sa, i)?;
        let (_, db) = sample_decomposed(ensemble_b, &sb, i)?;
        let (la, lb) = (da.eigenvalues().to_vec(), db.eigenvalues().to_vec());
        if psi.requires_positive() {
            if let Some(bad) = la.iter().chain(&lb).find(|&&v| v <= 0.0) {
                return Err(Error::domain(&psi.name(), &[*bad], "nonpositive eigenvalue"));
            }
        }
        Ok((la, lb))
    })?;
    let direct: Vec<f64> = spectra
        .iter()
        .map(|(la, lb)| abs_kernel_sum(&psi, la, lb))
        .collect::<Result<_>>()?;
    let direct_sum = Estimate::from_samples(&direct)?;
    let d = ensemble_a.shape.dim() as f64;

    let (corollary_sum, series_pairs, fallback_pairs) = match kind {
        MeanKind::Arithmetic => {
            let per: Vec<f64> = spectra
                .iter()
                .map(|(la, lb)| 0.5 * d * (la.iter().map(|v| v.abs()).sum::<f64>() + lb.iter().map(|v| v.abs()).sum::<f64>()))
                .collect();
            (Estimate::from_samples(&per)?, 0, 0)
        }
        MeanKind::Geometric => {
            let ra: Vec<f64> = spectra.iter().map(|(la, _)| la.iter().map(|v| v.sqrt()).sum()).collect();
            let rb: Vec<f64> = spectra.iter().map(|(_, lb)| lb.iter().map(|v| v.sqrt()).sum()).collect();
            let (ea, eb) = (Estimate::from_samples(&ra)?, Estimate::from_samples(&rb)?);
            let se = (eb.estimate.powi(2) * ea.std_error.powi(2) + ea.estimate.powi(2) * eb.std_error.powi(2)).sqrt();
            (
                Estimate {
                    estimate: ea.estimate * eb.estimate,
                    std_error: se,
                    n,
                },
                0,
                0,
            )
        }
        MeanKind::Harmonic | MeanKind::Logarithmic => (direct_sum, 0, 0),
        MeanKind::General { alpha } => general_mean_sum(alpha, &psi, &spectra, series_terms, direct_sum)?,
    };
    Ok(MeanCorollary {
        kind,
        corollary_sum,
        direct_sum,
        series_pairs,
        fallback_pairs,
    })
}

fn general_mean_sum(
    alpha: f64,
    psi: &Kernel,
    spectra: &[(Vec<f64>, Vec<f64>)],
    terms: usize,
    direct: Estimate,
) -> Result<(Estimate, usize, usize)> {
    if alpha == 1.0 {
        // the alpha -> 1 limit is the logarithmic mean; Y vanishes identically
        return Ok((direct, 0, 0));
    }
    let d = spectra[0].0.len();
    let factor = (alpha - 1.0) / alpha;
    let (mut total, mut series, mut fallback) = (0.0, 0, 0);
    for i in 0..d {
        for j in 0..d {
            let xs: Vec<f64> = spectra.iter().map(|(la, lb)| la[i].powf(alpha) - lb[j].powf(alpha)).collect();
            let ys: Vec<f64> = spectra
                .iter()
                .map(|(la, lb)| la[i].powf(alpha - 1.0) - lb[j].powf(alpha - 1.0))
                .collect();
            let settled = expectation_ratio_series(&xs, &ys, terms).ok().and_then(|r| {
                let s = &r.partial_sums;
                let last = s[s.len() - 1];
                let prev = if s.len() > 1 { s[s.len() - 2] } else { last };
                let ok = s.iter().all(|v| v.is_finite()) && (last - prev).abs() <= SERIES_SETTLE_TOLERANCE * last.abs();
                ok.then_some(last)
            });
            match settled {
                Some(v) => {
                    total += factor * v;
                    series += 1;
                }
                None => {
                    let mut acc = 0.0;
                    for (la, lb) in spectra {
                        acc += psi.eval2(la[i], lb[j])?;
                    }
                    total += acc / spectra.len() as f64;
                    fallback += 1;
                }
            }
        }
    }
    Ok((
        Estimate {
            estimate: total,
            std_error: direct.std_error,
            n: direct.n,
        },
        series,
        fallback,
    ))
}

/// The corollary bound `(D^2 ||X|| / theta) * corollary_sum` for one mean kind.
pub fn mean_corollary_bound(
    kind: MeanKind,
    ensemble_a: &EnsembleSpec,
    ensemble_b: &EnsembleSpec,
    theta: f64,
    norm_x: f64,
    n: usize,
    seed: &SeedSpec,
) -> Result<f64> {
    mean_corollary(kind, ensemble_a, ensemble_b, n, seed, DEFAULT_SERIES_TERMS)?.bound(theta, norm_x, ensemble_a.shape.dim())
}
