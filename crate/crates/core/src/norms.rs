//! Unitarily invariant norms computed from singular values of the unfolding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::EinsteinTensor;

/// A unitarily invariant norm `rho`.
///
/// JSON form: `{"norm": "schatten", "p": 2}`, `{"norm": "ky_fan", "k": 1}`,
/// `{"norm": "k_trace", "k": 2}`, `{"norm": "operator"}`.
///
/// `KTrace(k)` is the k-th elementary symmetric polynomial of the singular
/// values. For `k >= 2` it is homogeneous of degree `k`, so it is not a norm in
/// the triangle-inequality sense.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "norm", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormSpec {
    Schatten { p: f64 },
    KyFan { k: usize },
    KTrace { k: usize },
    Operator,
}

impl NormSpec {
    pub fn frobenius() -> Self {
        NormSpec::Schatten { p: 2.0 }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match *self {
            NormSpec::Schatten { p } if !(p >= 1.0) || !p.is_finite() => Err(Error::InvalidParameter(format!(
                "Schatten exponent must be finite and >= 1, got {p}"
            ))),
            NormSpec::KyFan { k } | NormSpec::KTrace { k } if k == 0 || k > dim => Err(Error::InvalidParameter(
                format!("{} needs 1 <= k <= {dim}, got {k}", self.label()),
            )),
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            NormSpec::Schatten { p } => format!("schatten-{p}"),
            NormSpec::KyFan { k } => format!("ky_fan-{k}"),
            NormSpec::KTrace { k } => format!("k_trace-{k}"),
            NormSpec::Operator => "operator".into(),
        }
    }

    /// Whether this satisfies the triangle inequality and submultiplicativity.
    pub fn is_subadditive(&self) -> bool {
        !matches!(self, NormSpec::KTrace { k } if *k >= 2)
    }

    /// Gauge function applied to singular values sorted in descending order.
    pub fn gauge(&self, sigma: &[f64]) -> f64 {
        match *self {
            NormSpec::Schatten { p } => {
                let top = sigma.first().copied().unwrap_or(0.0);
                if top == 0.0 {
                    return 0.0;
                }
                if p == 1.0 {
                    return sigma.iter().sum();
                }
                if p == 2.0 {
                    return sigma.iter().map(|s| s * s).sum::<f64>().sqrt();
                }
                top * sigma.iter().map(|s| (s / top).powf(p)).sum::<f64>().powf(1.0 / p)
            }
            NormSpec::KyFan { k } => sigma.iter().take(k).sum(),
            NormSpec::KTrace { k } => elementary_symmetric(sigma, k),
            NormSpec::Operator => sigma.first().copied().unwrap_or(0.0),
        }
    }
}

/// Singular values of the unfolding, descending.
pub fn singular_values(x: &EinsteinTensor) -> Vec<f64> {
    let mut s: Vec<f64> = x.unfold().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `rho(X)`.
pub fn norm(x: &EinsteinTensor, spec: &NormSpec) -> Result<f64> {
    spec.validate(x.dim())?;
    if let NormSpec::Schatten { p } = spec {
        if *p == 2.0 {
            return Ok(x.frobenius_norm());
        }
    }
    Ok(spec.gauge(&singular_values(x)))
}

/// `e_k(values)` via the recurrence `e_j <- e_j + v e_{j-1}`.
pub fn elementary_symmetric(values: &[f64], k: usize) -> f64 {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &v in values {
        for j in (1..=k.min(values.len())).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e[k]
}

/// `|rho(U X U^H) - rho(X)| / max(1, rho(X))` for a unitary `U`.
pub fn unitary_invariance_defect(x: &EinsteinTensor, u: &EinsteinTensor, spec: &NormSpec) -> Result<f64> {
    let d = u.dim();
    let gram = u.adjoint().einstein_product(u)?;
    let defect = (gram.unfold() - EinsteinTensor::identity(u.shape()).unfold()).norm();
    if defect > 1e-10 * d as f64 {
        return Err(Error::InvalidParameter(format!(
            "tensor is not unitary (defect {defect:.3e})"
        )));
    }
    let rotated = u.einstein_product(x)?.einstein_product(&u.adjoint())?;
    let base = norm(x, spec)?;
    Ok((norm(&rotated, spec)? - base).abs() / base.max(1.0))
}
