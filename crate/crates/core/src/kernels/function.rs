//! Real scalar functions applied through the spectral calculus.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::polygamma::polygamma;
use super::polynomial::Polynomial;
use crate::error::{Error, Result};

/// Where a scalar function may be evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Real,
    NonNegative,
    Positive,
}

impl Domain {
    pub fn contains(self, x: f64) -> bool {
        x.is_finite()
            && match self {
                Domain::Real => true,
                Domain::NonNegative => x >= 0.0,
                Domain::Positive => x > 0.0,
            }
    }
}

type Closure = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied function; derivatives come from central finite differences.
#[derive(Clone)]
pub struct CustomFunction {
    pub name: String,
    pub domain: Domain,
    f: Closure,
    derivative: Option<Closure>,
}

impl CustomFunction {
    pub fn new(name: &str, domain: Domain, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        CustomFunction {
            name: name.to_string(),
            domain,
            f: Arc::new(f),
            derivative: None,
        }
    }

    pub fn with_derivative(mut self, df: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(df));
        self
    }
}

impl fmt::Debug for CustomFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFunction")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

/// A real function `f` with derivatives, as used in `f(A)` and `f^[1]`, `f^[2]`.
///
/// JSON form: `{"kind": "exp"}`, `{"kind": "polynomial", "coeffs": [0, 0, 1]}`
/// (ascending powers), `{"kind": "power", "alpha": 1.5}`,
/// `{"kind": "polygamma", "order": 0}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarFunction {
    Polynomial { coeffs: Vec<f64> },
    Exp,
    Log,
    Sqrt,
    Power { alpha: f64 },
    Polygamma { order: u32 },
    #[serde(skip)]
    Custom(CustomFunction),
}

impl ScalarFunction {
    pub fn polynomial(coeffs: &[f64]) -> Self {
        ScalarFunction::Polynomial {
            coeffs: coeffs.to_vec(),
        }
    }

    /// `x^n` as a polynomial.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = 1.0;
        ScalarFunction::Polynomial { coeffs }
    }

    pub fn custom(name: &str, domain: Domain, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarFunction::Custom(CustomFunction::new(name, domain, f))
    }

    pub fn name(&self) -> String {
        match self {
            ScalarFunction::Polynomial { coeffs } => format!("polynomial{coeffs:?}"),
            ScalarFunction::Exp => "exp".into(),
            ScalarFunction::Log => "log".into(),
            ScalarFunction::Sqrt => "sqrt".into(),
            ScalarFunction::Power { alpha } => format!("power({alpha})"),
            ScalarFunction::Polygamma { order } => format!("polygamma({order})"),
            ScalarFunction::Custom(c) => c.name.clone(),
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            ScalarFunction::Polynomial { .. } | ScalarFunction::Exp => Domain::Real,
            ScalarFunction::Sqrt => Domain::NonNegative,
            ScalarFunction::Log | ScalarFunction::Power { .. } | ScalarFunction::Polygamma { .. } => {
                Domain::Positive
            }
            ScalarFunction::Custom(c) => c.domain,
        }
    }

    /// The polynomial behind a `Polynomial` function.
    pub fn as_polynomial(&self) -> Option<Polynomial> {
        match self {
            ScalarFunction::Polynomial { coeffs } => Some(Polynomial::new(coeffs.clone())),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ScalarFunction::Polynomial { coeffs } if coeffs.iter().any(|c| !c.is_finite()) => Err(
                Error::InvalidParameter("polynomial coefficients must be finite".into()),
            ),
            ScalarFunction::Power { alpha } if !alpha.is_finite() => {
                Err(Error::InvalidParameter("power exponent must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if self.domain().contains(x) {
            Ok(())
        } else {
            Err(Error::domain(
                &self.name(),
                &[x],
                &format!("outside domain {:?}", self.domain()),
            ))
        }
    }

    fn finite(&self, x: f64, v: f64) -> Result<f64> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::domain(&self.name(), &[x], "value is not finite"))
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.derivative(0, x)
    }

    /// `n`-th derivative at `x` (`n = 0` is the value).
    ///
    /// Analytic for the named kinds. For custom functions without a supplied
    /// derivative, `n = 1` uses a central difference with step
    /// `h = eps^(1/3) (1 + |x|)`; higher orders nest central differences with
    /// correspondingly larger steps.
    pub fn derivative(&self, n: u32, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        let v = match self {
            ScalarFunction::Polynomial { coeffs } => Polynomial::new(coeffs.clone()).nth_derivative(n).eval(x),
            ScalarFunction::Exp => x.exp(),
            ScalarFunction::Log => {
                if n == 0 {
                    x.ln()
                } else {
                    // (-1)^(n-1) (n-1)! / x^n
                    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
                    sign * falling(n as f64 - 1.0, n - 1) / x.powi(n as i32)
                }
            }
            ScalarFunction::Sqrt => {
                if n == 0 {
                    x.sqrt()
                } else if x == 0.0 {
                    return Err(Error::domain("sqrt", &[x], "derivative is unbounded at 0"));
                } else {
                    falling(0.5, n) * x.powf(0.5 - n as f64)
                }
            }
            ScalarFunction::Power { alpha } => falling(*alpha, n) * x.powf(alpha - n as f64),
            ScalarFunction::Polygamma { order } => polygamma(order + n, x)?,
            ScalarFunction::Custom(c) => custom_derivative(c, n, x)?,
        };
        self.finite(x, v)
    }
}

/// Falling factorial `a (a-1) ... (a-n+1)`.
fn falling(a: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (a - i as f64))
}

fn custom_derivative(c: &CustomFunction, n: u32, x: f64) -> Result<f64> {
    match (n, &c.derivative) {
        (0, _) => Ok((c.f)(x)),
        (1, Some(df)) => Ok(df(x)),
        (_, Some(df)) => nested_difference(&|t| df(t), n - 1, x, c),
        (_, None) => nested_difference(&|t| (c.f)(t), n, x, c),
    }
}

fn nested_difference(g: &dyn Fn(f64) -> f64, n: u32, x: f64, c: &CustomFunction) -> Result<f64> {
    if n == 0 {
        return Ok(g(x));
    }
    if n > 3 {
        return Err(Error::InvalidParameter(format!(
            "finite-difference derivative of order {n} is not supported for {}",
            c.name
        )));
    }
    let h = f64::EPSILON.powf(1.0 / (n as f64 + 2.0)) * (1.0 + x.abs());
    let (lo, hi) = (x - h, x + h);
    if !c.domain.contains(lo) || !c.domain.contains(hi) {
        return Err(Error::domain(
            &c.name,
            &[x],
            "finite-difference stencil leaves the domain",
        ));
    }
    let up = nested_difference(g, n - 1, hi, c)?;
    let down = nested_difference(g, n - 1, lo, c)?;
    Ok((up - down) / (2.0 * h))
}
