//! Where fixed tensors in a configuration come from.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ensembles::{sample, sample_general, EnsembleKind, EnsembleSpec, SeedSpec};
use crate::error::{Error, Result};
use crate::tensor::{EinsteinTensor, TensorFile, TensorShape};

/// A fixed tensor: `{"source": "identity"}`, `{"source": "file", "path": "x.json"}`,
/// `{"source": "inline", "modes": [2], "entries": [[1,0], ...]}`,
/// `{"source": "random_hermitian", "seed": 7, "scale": 1.0}` or
/// `{"source": "random_general", "seed": 7, "scale": 1.0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum TensorSource {
    Identity,
    File { path: PathBuf },
    Inline(TensorFile),
    RandomHermitian { seed: u64, scale: f64 },
    RandomGeneral { seed: u64, scale: f64 },
}

impl TensorSource {
    /// Materialise the tensor; relative file paths are taken from `base_dir`.
    pub fn resolve(&self, shape: &TensorShape, base_dir: Option<&Path>) -> Result<EinsteinTensor> {
        let t = match self {
            TensorSource::Identity => EinsteinTensor::identity(shape),
            TensorSource::File { path } => {
                let full = match base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                EinsteinTensor::load_json(&full)?
            }
            TensorSource::Inline(file) => file.to_tensor()?,
            TensorSource::RandomHermitian { seed, scale } => {
                let spec = EnsembleSpec::new(shape.clone(), EnsembleKind::GaussianHermitian { scale: *scale });
                sample(&spec, &SeedSpec::new(*seed), 0)?
            }
            TensorSource::RandomGeneral { seed, scale } => {
                if !(scale.is_finite() && *scale > 0.0) {
                    return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
                }
                sample_general(shape, &SeedSpec::new(*seed), 0)?.scale_real(*scale)
            }
        };
        if t.shape() != shape {
            return Err(Error::ShapeMismatch {
                left: t.shape().modes().to_vec(),
                right: shape.modes().to_vec(),
            });
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolves_sources() {
        let s = TensorShape::new(vec![2, 2]).unwrap();
        assert_eq!(TensorSource::Identity.resolve(&s, None).unwrap(), EinsteinTensor::identity(&s));
        let h = TensorSource::RandomHermitian { seed: 1, scale: 1.0 }.resolve(&s, None).unwrap();
        assert!(h.is_hermitian(0.0));
        let src: TensorSource = serde_json::from_str(r#"{"source":"inline","modes":[2],"entries":[[1,0],[0,0],[0,0],[1,0]]}"#).unwrap();
        assert!(src.resolve(&s, None).is_err());
        let one = TensorShape::new(vec![2]).unwrap();
        assert_eq!(src.resolve(&one, None).unwrap(), EinsteinTensor::identity(&one));
        let missing = TensorSource::File { path: "does-not-exist.json".into() };
        let err = missing.resolve(&s, Some(Path::new("/nonexistent-dir"))).unwrap_err();
        assert!(err.to_string().contains("does-not-exist.json"));
    }
}
