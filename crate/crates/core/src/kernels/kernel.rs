//! Bivariate and trivariate kernels `psi`, `phi` weighting tensor integrals.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::divided::{divided_difference_1, divided_difference_2};
use super::function::ScalarFunction;
use crate::error::{Error, Result};

type KernelClosure = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// User-supplied kernel of arity 2 or 3.
#[derive(Clone)]
pub struct CustomKernel {
    pub name: String,
    pub arity: usize,
    pub positive_arguments: bool,
    f: KernelClosure,
}

impl CustomKernel {
    pub fn new(
        name: &str,
        arity: usize,
        positive_arguments: bool,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CustomKernel {
            name: name.to_string(),
            arity,
            positive_arguments,
            f: Arc::new(f),
        }
    }
}

impl fmt::Debug for CustomKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomKernel")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .finish_non_exhaustive()
    }
}

/// Two-variable means that have their own tail-bound corollaries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeanKind {
    Arithmetic,
    Geometric,
    Harmonic,
    General { alpha: f64 },
    Logarithmic,
}

impl MeanKind {
    pub fn label(&self) -> String {
        match self {
            MeanKind::Arithmetic => "arithmetic".into(),
            MeanKind::Geometric => "geometric".into(),
            MeanKind::Harmonic => "harmonic".into(),
            MeanKind::General { alpha } => format!("general(alpha={alpha})"),
            MeanKind::Logarithmic => "logarithmic".into(),
        }
    }
}

/// A kernel. JSON form: `{"kind": "general_mean", "alpha": 2.0}`,
/// `{"kind": "divided_difference", "function": {"kind": "exp"}}`, ...
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Kernel {
    Constant { value: f64 },
    ArithmeticMean,
    GeometricMean,
    HarmonicMean,
    GeneralMean { alpha: f64 },
    LogarithmicMean,
    DividedDifference { function: ScalarFunction },
    SecondDividedDifference { function: ScalarFunction },
    #[serde(skip)]
    Custom(CustomKernel),
}

/// Kernel for one of the mean families.
///
/// ```
/// use dti_core::kernels::{mean_kernel, MeanKind};
/// let k = mean_kernel(MeanKind::Arithmetic).unwrap();
/// assert_eq!(k.eval2(2.0, 4.0).unwrap(), 3.0);
/// assert!(mean_kernel(MeanKind::General { alpha: 0.0 }).is_err());
/// ```
pub fn mean_kernel(kind: MeanKind) -> Result<Kernel> {
    let k = match kind {
        MeanKind::Arithmetic => Kernel::ArithmeticMean,
        MeanKind::Geometric => Kernel::GeometricMean,
        MeanKind::Harmonic => Kernel::HarmonicMean,
        MeanKind::General { alpha } => Kernel::GeneralMean { alpha },
        MeanKind::Logarithmic => Kernel::LogarithmicMean,
    };
    k.validate()?;
    Ok(k)
}

impl Kernel {
    pub fn divided_difference(f: ScalarFunction) -> Self {
        Kernel::DividedDifference { function: f }
    }

    pub fn second_divided_difference(f: ScalarFunction) -> Self {
        Kernel::SecondDividedDifference { function: f }
    }

    pub fn custom2(name: &str, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Kernel::Custom(CustomKernel::new(name, 2, false, move |a| f(a[0], a[1])))
    }

    pub fn custom3(name: &str, f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Kernel::Custom(CustomKernel::new(name, 3, false, move |a| f(a[0], a[1], a[2])))
    }

    pub fn arity(&self) -> usize {
        match self {
            Kernel::SecondDividedDifference { .. } => 3,
            Kernel::Custom(c) => c.arity,
            _ => 2,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Kernel::Constant { value } => format!("constant({value})"),
            Kernel::ArithmeticMean => "arithmetic_mean".into(),
            Kernel::GeometricMean => "geometric_mean".into(),
            Kernel::HarmonicMean => "harmonic_mean".into(),
            Kernel::GeneralMean { alpha } => format!("general_mean(alpha={alpha})"),
            Kernel::LogarithmicMean => "logarithmic_mean".into(),
            Kernel::DividedDifference { function } => format!("{}^[1]", function.name()),
            Kernel::SecondDividedDifference { function } => format!("{}^[2]", function.name()),
            Kernel::Custom(c) => c.name.clone(),
        }
    }

    /// Whether every argument must be strictly positive.
    pub fn requires_positive(&self) -> bool {
        match self {
            Kernel::Constant { .. } | Kernel::ArithmeticMean => false,
            Kernel::GeometricMean
            | Kernel::HarmonicMean
            | Kernel::GeneralMean { .. }
            | Kernel::LogarithmicMean => true,
            Kernel::DividedDifference { .. } | Kernel::SecondDividedDifference { .. } => false,
            Kernel::Custom(c) => c.positive_arguments,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Kernel::Constant { value } if !value.is_finite() => {
                Err(Error::InvalidParameter("constant kernel value must be finite".into()))
            }
            Kernel::GeneralMean { alpha } if *alpha == 0.0 || !alpha.is_finite() => Err(
                Error::InvalidParameter(format!("general mean needs a finite nonzero alpha, got {alpha}")),
            ),
            Kernel::DividedDifference { function } | Kernel::SecondDividedDifference { function } => {
                function.validate()
            }
            Kernel::Custom(c) if c.arity != 2 && c.arity != 3 => {
                Err(Error::InvalidParameter(format!("kernel arity must be 2 or 3, got {}", c.arity)))
            }
            _ => Ok(()),
        }
    }

    fn check_args(&self, args: &[f64]) -> Result<()> {
        if args.len() != self.arity() {
            return Err(Error::InvalidParameter(format!(
                "{} takes {} arguments, got {}",
                self.name(),
                self.arity(),
                args.len()
            )));
        }
        if args.iter().any(|a| !a.is_finite()) {
            return Err(Error::domain(&self.name(), args, "arguments must be finite"));
        }
        if self.requires_positive() && args.iter().any(|&a| a <= 0.0) {
            return Err(Error::domain(&self.name(), args, "arguments must be positive"));
        }
        Ok(())
    }

    pub fn eval2(&self, x: f64, y: f64) -> Result<f64> {
        self.eval(&[x, y])
    }

    pub fn eval3(&self, x: f64, y: f64, z: f64) -> Result<f64> {
        self.eval(&[x, y, z])
    }

    pub fn eval(&self, args: &[f64]) -> Result<f64> {
        self.check_args(args)?;
        let v = match self {
            Kernel::Constant { value } => *value,
            Kernel::ArithmeticMean => 0.5 * (args[0] + args[1]),
            Kernel::GeometricMean => (args[0] * args[1]).sqrt(),
            Kernel::HarmonicMean => 2.0 * args[0] * args[1] / (args[0] + args[1]),
            Kernel::GeneralMean { alpha } => general_mean(*alpha, args[0], args[1])?,
            Kernel::LogarithmicMean => logarithmic_mean(args[0], args[1]),
            Kernel::DividedDifference { function } => divided_difference_1(function, args[0], args[1])?,
            Kernel::SecondDividedDifference { function } => {
                divided_difference_2(function, args[0], args[1], args[2])?
            }
            Kernel::Custom(c) => (c.f)(args),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::domain(&self.name(), args, "value is not finite"))
        }
    }
}

/// `(x - y) / (ln x - ln y)`, extended by `x` on the diagonal.
fn logarithmic_mean(x: f64, y: f64) -> f64 {
    let l = x.ln() - y.ln();
    if l == 0.0 {
        return x;
    }
    // y (e^l - 1) / l keeps full precision when x and y are close
    y * l.exp_m1() / l
}

/// `((a - 1) / a) (x^a - y^a) / (x^(a-1) - y^(a-1))`, extended by `x` on the
/// diagonal and by the logarithmic mean at `a = 1`.
///
/// With `l = ln x - ln y` this equals `((a - 1) / a) y expm1(a l) / expm1((a - 1) l)`,
/// which stays accurate for nearby arguments and for `a` near 1.
fn general_mean(alpha: f64, x: f64, y: f64) -> Result<f64> {
    if alpha == 0.0 {
        return Err(Error::InvalidParameter("general mean with alpha = 0".into()));
    }
    if alpha == 1.0 {
        return Ok(logarithmic_mean(x, y));
    }
    let l = x.ln() - y.ln();
    if l == 0.0 {
        return Ok(x);
    }
    Ok((alpha - 1.0) / alpha * y * (alpha * l).exp_m1() / ((alpha - 1.0) * l).exp_m1())
}
