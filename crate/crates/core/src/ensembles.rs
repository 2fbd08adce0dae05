//! Seeded random Hermitian and positive-definite tensors.
//!
//! Every draw is a pure function of `(spec, master seed, index)`: sample `i`
//! uses its own ChaCha8 stream, so results do not depend on which thread or
//! in which order samples are generated.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{eigh, SpectralDecomposition};
use crate::tensor::{EinsteinTensor, TensorShape, C64};

/// Master seed from which all substreams are derived.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SeedSpec {
    pub master: u64,
}

impl SeedSpec {
    pub fn new(master: u64) -> Self {
        SeedSpec { master }
    }

    /// An independent child seed for a labelled purpose.
    pub fn derive(&self, label: u64) -> SeedSpec {
        SeedSpec {
            master: splitmix64(self.master ^ splitmix64(label.wrapping_add(0x9e37_79b9_7f4a_7c15))),
        }
    }

    /// Generator for sample `index`.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(index);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// How eigenvalues are drawn for a fixed-spectrum ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "sampler", rename_all = "snake_case", deny_unknown_fields)]
pub enum EigenvalueSampler {
    /// The same eigenvalues on every draw.
    Constant { values: Vec<f64> },
    /// Independent uniform eigenvalues on `[low, high)`.
    Uniform { low: f64, high: f64 },
}

/// Ensemble of random Hermitian tensors.
///
/// JSON form: `{"kind": "gaussian_hermitian", "scale": 1.0}`,
/// `{"kind": "wishart_pd", "inner_dim": 8, "scale": 1.0, "ridge": 0.1}`,
/// `{"kind": "fixed_eigenvalues", "sampler": "uniform", "low": 0, "high": 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleKind {
    /// `sigma (G + G^H) / 2` with `G` standard complex Gaussian (`E|G_ij|^2 = 1`).
    GaussianHermitian { scale: f64 },
    /// `sigma^2 G^H G / m + eps I` with `G` an `m x D` standard complex Gaussian.
    WishartPd { inner_dim: usize, scale: f64, ridge: f64 },
    /// `Q diag(lambda) Q^H` with `Q` Haar-distributed unitary.
    FixedEigenvalues {
        #[serde(flatten)]
        sampler: EigenvalueSampler,
    },
}

/// A shape together with an ensemble kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub shape: TensorShape,
    pub ensemble: EnsembleKind,
}

impl EnsembleSpec {
    pub fn new(shape: TensorShape, ensemble: EnsembleKind) -> Self {
        EnsembleSpec { shape, ensemble }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match &self.ensemble {
            EnsembleKind::GaussianHermitian { scale } if !(scale.is_finite() && *scale > 0.0) => {
                bad(format!("gaussian_hermitian scale must be positive, got {scale}"))
            }
            EnsembleKind::WishartPd { inner_dim, scale, ridge } => {
                if *inner_dim == 0 {
                    bad("wishart_pd inner_dim must be positive".into())
                } else if !(scale.is_finite() && *scale > 0.0) {
                    bad(format!("wishart_pd scale must be positive, got {scale}"))
                } else if !(ridge.is_finite() && *ridge >= 0.0) {
                    bad(format!("wishart_pd ridge must be nonnegative, got {ridge}"))
                } else if *ridge == 0.0 && *inner_dim < self.shape.dim() {
                    bad(format!(
                        "wishart_pd with ridge 0 needs inner_dim >= {} to be positive definite",
                        self.shape.dim()
                    ))
                } else {
                    Ok(())
                }
            }
            EnsembleKind::FixedEigenvalues {
                sampler: EigenvalueSampler::Constant { values },
            } => {
                if values.len() != self.shape.dim() {
                    bad(format!("expected {} eigenvalues, got {}", self.shape.dim(), values.len()))
                } else if values.iter().any(|v| !v.is_finite()) {
                    bad("eigenvalues must be finite".into())
                } else {
                    Ok(())
                }
            }
            EnsembleKind::FixedEigenvalues {
                sampler: EigenvalueSampler::Uniform { low, high },
            } if !(low.is_finite() && high.is_finite() && low < high) => {
                bad(format!("uniform sampler needs low < high, got [{low}, {high})"))
            }
            _ => Ok(()),
        }
    }

    /// Whether every draw is positive definite by construction.
    pub fn is_positive_definite(&self) -> bool {
        match &self.ensemble {
            EnsembleKind::GaussianHermitian { .. } => false,
            EnsembleKind::WishartPd { inner_dim, ridge, .. } => *ridge > 0.0 || *inner_dim >= self.shape.dim(),
            EnsembleKind::FixedEigenvalues { sampler } => match sampler {
                EigenvalueSampler::Constant { values } => values.iter().all(|&v| v > 0.0),
                EigenvalueSampler::Uniform { low, .. } => *low > 0.0,
            },
        }
    }

    /// Interval guaranteed to contain every eigenvalue, when one is known.
    pub fn spectral_window(&self) -> Option<(f64, f64)> {
        match &self.ensemble {
            EnsembleKind::FixedEigenvalues { sampler } => match sampler {
                EigenvalueSampler::Constant { values } => {
                    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    Some((lo, hi))
                }
                EigenvalueSampler::Uniform { low, high } => Some((*low, *high)),
            },
            _ => None,
        }
    }
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar unitary: QR of a complex Gaussian matrix with the phases of `diag(R)` removed.
pub fn haar_unitary(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<C64> {
    let qr = gaussian_matrix(rng, d, d).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let n = rjj.norm();
        if n > 0.0 {
            let col = q.column(j) * (rjj / n);
            q.set_column(j, &col);
        }
    }
    q
}

/// Draw sample `index` of the ensemble.
pub fn sample(spec: &EnsembleSpec, seed: &SeedSpec, index: u64) -> Result<EinsteinTensor> {
    Ok(sample_decomposed(spec, seed, index)?.0)
}

/// Draw sample `index` together with its spectral decomposition.
///
/// Fixed-spectrum ensembles return the sampled eigenvalues and basis
/// directly, so eigenvalues are exact; other kinds are decomposed with [`eigh`].
pub fn sample_decomposed(
    spec: &EnsembleSpec,
    seed: &SeedSpec,
    index: u64,
) -> Result<(EinsteinTensor, SpectralDecomposition)> {
    spec.validate()?;
    let d = spec.shape.dim();
    let mut rng = seed.stream(index);
    let tensor = match &spec.ensemble {
        EnsembleKind::GaussianHermitian { scale } => {
            let g = gaussian_matrix(&mut rng, d, d);
            let h = (&g + g.adjoint()) * C64::new(0.5 * scale, 0.0);
            EinsteinTensor::from_unfolded(&spec.shape, h)?.hermitian_part()
        }
        EnsembleKind::WishartPd { inner_dim, scale, ridge } => {
            let g = gaussian_matrix(&mut rng, *inner_dim, d);
            let mut w = g.adjoint() * &g * C64::new(scale * scale / *inner_dim as f64, 0.0);
            for i in 0..d {
                w[(i, i)] += C64::new(*ridge, 0.0);
            }
            EinsteinTensor::from_unfolded(&spec.shape, w)?.hermitian_part()
        }
        EnsembleKind::FixedEigenvalues { sampler } => {
            let values: Vec<f64> = match sampler {
                EigenvalueSampler::Constant { values } => values.clone(),
                EigenvalueSampler::Uniform { low, high } => {
                    (0..d).map(|_| low + (high - low) * rng.random::<f64>()).collect()
                }
            };
            let q = haar_unitary(&mut rng, d);
            let dec = SpectralDecomposition::from_parts(&spec.shape, values, q)?;
            let t = dec.reconstruct().hermitian_part();
            return Ok((t, dec));
        }
    };
    let dec = eigh(&tensor).map_err(|e| Error::Sample {
        index,
        source: Box::new(e),
    })?;
    Ok((tensor, dec))
}

/// Eigenvalues of sample `index`, descending.
pub fn sample_eigenvalues(spec: &EnsembleSpec, seed: &SeedSpec, index: u64) -> Result<Vec<f64>> {
    Ok(sample_decomposed(spec, seed, index)?.1.eigenvalues().to_vec())
}

/// A general (non-Hermitian) tensor with standard complex Gaussian entries.
pub fn sample_general(shape: &TensorShape, seed: &SeedSpec, index: u64) -> Result<EinsteinTensor> {
    let d = shape.dim();
    EinsteinTensor::from_unfolded(shape, gaussian_matrix(&mut seed.stream(index), d, d))
}

/// A Haar-random unitary tensor.
pub fn sample_unitary(shape: &TensorShape, seed: &SeedSpec, index: u64) -> Result<EinsteinTensor> {
    EinsteinTensor::from_unfolded(shape, haar_unitary(&mut seed.stream(index), shape.dim()))
}
