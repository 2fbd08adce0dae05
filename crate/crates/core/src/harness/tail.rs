//! Empirical tail frequencies of DTI statistics checked against the Markov-type bounds.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dti::{check_commutes, dti_apply, frechet_derivative};
use crate::ensembles::{sample_decomposed, EnsembleSpec, SeedSpec};
use crate::error::{Error, Result};
use crate::kernels::{omega_polygamma_bound, omega_polynomial_bound, Kernel, Polynomial, ScalarFunction};
use crate::norms::{norm, NormSpec};
use crate::spectral::SpectralDecomposition;
use crate::tensor::{EinsteinTensor, TensorShape};

use super::bounds::{
    abs_divided_difference_sum, derivative_bound, expectation_abs_divided_difference, expectation_abs_kernel,
    expectation_diff_norm, expectation_quasi_diff_norm, lipschitz_bound, quasi_lipschitz_bound, theorem1_bound,
};
use super::sampling::{labels, map_indexed, tolerate_failures, try_map_indexed};
use super::source::TensorSource;
use super::stats::{clopper_pearson, quantile_sorted, Estimate};

/// Where the Lipschitz constant `Omega` of `f^[1]` comes from.
///
/// `polynomial` and `polygamma` windows are enforced: a draw with an
/// eigenvalue outside `[a, b]` counts as a failed sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "omega", rename_all = "snake_case", deny_unknown_fields)]
pub enum OmegaSpec {
    Constant { value: f64 },
    Polynomial { a: f64, b: f64 },
    Polygamma { a: f64, b: f64 },
}

impl OmegaSpec {
    pub fn evaluate(&self, f: &ScalarFunction) -> Result<f64> {
        match self {
            OmegaSpec::Constant { value } => {
                if !(value.is_finite() && *value >= 0.0) {
                    return Err(Error::InvalidParameter(format!("Omega must be nonnegative, got {value}")));
                }
                Ok(*value)
            }
            OmegaSpec::Polynomial { a, b } => {
                let p = f.as_polynomial().ok_or_else(|| {
                    Error::InvalidParameter(format!("polynomial Omega needs a polynomial function, got {}", f.name()))
                })?;
                omega_polynomial_bound(p.coeffs(), *a, *b)
            }
            OmegaSpec::Polygamma { a, b } => match f {
                ScalarFunction::Polygamma { order } => omega_polygamma_bound(*order, *a, *b),
                _ => Err(Error::InvalidParameter(format!(
                    "polygamma Omega needs a polygamma function, got {}",
                    f.name()
                ))),
            },
        }
    }

    fn window(&self) -> Option<(f64, f64)> {
        match self {
            OmegaSpec::Constant { .. } => None,
            OmegaSpec::Polynomial { a, b } | OmegaSpec::Polygamma { a, b } => Some((*a, *b)),
        }
    }
}

fn check_window(window: Option<(f64, f64)>, dec: &SpectralDecomposition, which: &str) -> Result<()> {
    if let Some((a, b)) = window {
        if let Some(&v) = dec.eigenvalues().iter().find(|&&v| v < a || v > b) {
            return Err(Error::InvalidParameter(format!(
                "eigenvalue {v} of {which} lies outside the Omega window [{a}, {b}]"
            )));
        }
    }
    Ok(())
}

/// A tensor `D` that must commute with `A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "commuting", rename_all = "snake_case", deny_unknown_fields)]
pub enum CommutingTensor {
    /// A fixed tensor, checked against every draw of `A`.
    Fixed { tensor: TensorSource },
    /// `D = p(A)` for a polynomial `p` with the given coefficients.
    PolynomialOfA { coeffs: Vec<f64> },
}

/// The random quantity whose tail is measured.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum StatisticSpec {
    /// `||T_{A,B,psi}(X)||`.
    DtiNorm { kernel: Kernel, x: TensorSource },
    /// `||f(A) - f(B)||`.
    Lipschitz { function: ScalarFunction, omega: OmegaSpec },
    /// `||D f(A) - f(B) D||`.
    QuasiLipschitz {
        function: ScalarFunction,
        omega: OmegaSpec,
        d: TensorSource,
    },
    /// `||T_{A,A,f^[1]}(X)||`, the norm of the derivative of `f` at `A` along `X`.
    Derivative { function: ScalarFunction, x: TensorSource },
    /// `||T_{A,A,f^[1]}(D X)||` with `D` commuting with `A`.
    QuasiDerivative {
        function: ScalarFunction,
        x: TensorSource,
        d: CommutingTensor,
    },
}

impl StatisticSpec {
    pub fn label(&self) -> String {
        match self {
            StatisticSpec::DtiNorm { kernel, .. } => format!("dti_norm[{}]", kernel.name()),
            StatisticSpec::Lipschitz { function, .. } => format!("lipschitz[{}]", function.name()),
            StatisticSpec::QuasiLipschitz { function, .. } => format!("quasi_lipschitz[{}]", function.name()),
            StatisticSpec::Derivative { function, .. } => format!("derivative[{}]", function.name()),
            StatisticSpec::QuasiDerivative { function, .. } => format!("quasi_derivative[{}]", function.name()),
        }
    }

    fn uses_b(&self) -> bool {
        matches!(
            self,
            StatisticSpec::DtiNorm { .. } | StatisticSpec::Lipschitz { .. } | StatisticSpec::QuasiLipschitz { .. }
        )
    }
}

/// Thresholds: explicit values, or quantiles of the sampled statistic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaGrid {
    Values(Vec<f64>),
    Quantiles(Vec<f64>),
}

fn default_confidence() -> f64 {
    0.99
}

/// Minimum sample count for tail and expectation estimates.
pub const MIN_SAMPLES: usize = 100;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub statistic: StatisticSpec,
    pub ensemble_a: EnsembleSpec,
    /// Defaults to `ensemble_a` (drawn independently).
    #[serde(default)]
    pub ensemble_b: Option<EnsembleSpec>,
    pub norm: NormSpec,
    pub thetas: ThetaGrid,
    pub n_samples: usize,
    pub n_expectation_samples: usize,
    pub seed: u64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
}

impl TailExperimentConfig {
    pub fn ensemble_b(&self) -> &EnsembleSpec {
        self.ensemble_b.as_ref().unwrap_or(&self.ensemble_a)
    }

    pub fn shape(&self) -> &TensorShape {
        &self.ensemble_a.shape
    }

    pub fn validate(&self) -> Result<()> {
        self.ensemble_a.validate()?;
        if self.statistic.uses_b() {
            let b = self.ensemble_b();
            b.validate()?;
            if b.shape != self.ensemble_a.shape {
                return Err(Error::ShapeMismatch {
                    left: self.ensemble_a.shape.modes().to_vec(),
                    right: b.shape.modes().to_vec(),
                });
            }
        }
        self.norm.validate(self.shape().dim())?;
        if !self.norm.is_subadditive() {
            log::warn!("{} is not subadditive; the bounds are not guaranteed", self.norm.label());
        }
        if self.n_samples < MIN_SAMPLES || self.n_expectation_samples < MIN_SAMPLES {
            return Err(Error::InvalidParameter(format!(
                "n_samples and n_expectation_samples must be at least {MIN_SAMPLES}"
            )));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "confidence must lie in (0, 1), got {}",
                self.confidence
            )));
        }
        match &self.thetas {
            ThetaGrid::Values(v) => {
                if v.is_empty() {
                    return Err(Error::InvalidParameter("theta grid is empty".into()));
                }
                if let Some(t) = v.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
                    return Err(Error::InvalidParameter(format!("theta must be nonnegative and finite, got {t}")));
                }
            }
            ThetaGrid::Quantiles(q) => {
                if q.is_empty() {
                    return Err(Error::InvalidParameter("quantile grid is empty".into()));
                }
                if let Some(p) = q.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                    return Err(Error::InvalidParameter(format!("quantile level {p} outside [0, 1]")));
                }
            }
        }
        match &self.statistic {
            StatisticSpec::DtiNorm { kernel, .. } => {
                kernel.validate()?;
                if kernel.arity() != 2 {
                    return Err(Error::InvalidParameter(format!("{} is not a two-variable kernel", kernel.name())));
                }
            }
            StatisticSpec::Lipschitz { function, omega } | StatisticSpec::QuasiLipschitz { function, omega, .. } => {
                function.validate()?;
                omega.evaluate(function)?;
            }
            StatisticSpec::Derivative { function, .. } => function.validate()?,
            StatisticSpec::QuasiDerivative { function, d, .. } => {
                function.validate()?;
                if let CommutingTensor::PolynomialOfA { coeffs } = d {
                    if coeffs.iter().any(|c| !c.is_finite()) {
                        return Err(Error::InvalidParameter("polynomial coefficients must be finite".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        let digest = Sha256::digest(&json);
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    /// The bound is undefined at this threshold (`theta = 0`).
    Invalid,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Invalid => "INVALID",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub theta: f64,
    pub exceedances: usize,
    pub n_effective: usize,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Raw bound; may exceed 1.
    pub bound: Option<f64>,
    pub bound_clipped: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatisticSummary {
    pub mean: f64,
    pub std_error: f64,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailExperimentReport {
    pub name: Option<String>,
    pub statistic: String,
    pub norm: String,
    pub config_hash: String,
    pub seed: u64,
    pub n_samples: usize,
    pub failed_samples: usize,
    pub first_failure: Option<String>,
    /// The expectation feeding the bound (kernel sum, `E||A - B||`, ...).
    pub expectation: Estimate,
    /// `||X||`, `||D X||` or 1 when the norm is folded into the expectation.
    pub norm_factor: f64,
    pub omega: Option<f64>,
    pub summary: StatisticSummary,
    pub rows: Vec<TailRow>,
    pub runtime_seconds: f64,
}

impl TailExperimentReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.verdict == Verdict::Pass)
    }

    /// Per-threshold rows as CSV. Contains no timing data, so it is
    /// reproducible byte for byte.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta,p_hat,ci_lo,ci_hi,bound,verdict\n");
        for r in &self.rows {
            let bound = r.bound.map(|b| format!("{b:e}")).unwrap_or_default();
            let _ = writeln!(
                s,
                "{:e},{:e},{:e},{:e},{},{}",
                r.theta,
                r.p_hat,
                r.ci_lo,
                r.ci_hi,
                bound,
                r.verdict.as_str()
            );
        }
        s
    }
}

/// The fixed tensors a statistic needs, resolved once.
enum Prepared {
    Dti { kernel: Kernel, x: EinsteinTensor },
    Lipschitz { f: ScalarFunction, window: Option<(f64, f64)> },
    QuasiLipschitz { f: ScalarFunction, window: Option<(f64, f64)>, d: EinsteinTensor },
    Derivative { f: ScalarFunction, x: EinsteinTensor },
    QuasiFixed { f: ScalarFunction, x: EinsteinTensor, d: EinsteinTensor },
    QuasiPoly { f: ScalarFunction, x: EinsteinTensor, p: Polynomial },
}

fn prepare(config: &TailExperimentConfig, base_dir: Option<&Path>) -> Result<Prepared> {
    let shape = config.shape();
    Ok(match &config.statistic {
        StatisticSpec::DtiNorm { kernel, x } => Prepared::Dti {
            kernel: kernel.clone(),
            x: x.resolve(shape, base_dir)?,
        },
        StatisticSpec::Lipschitz { function, omega } => Prepared::Lipschitz {
            f: function.clone(),
            window: omega.window(),
        },
        StatisticSpec::QuasiLipschitz { function, omega, d } => Prepared::QuasiLipschitz {
            f: function.clone(),
            window: omega.window(),
            d: d.resolve(shape, base_dir)?,
        },
        StatisticSpec::Derivative { function, x } => Prepared::Derivative {
            f: function.clone(),
            x: x.resolve(shape, base_dir)?,
        },
        StatisticSpec::QuasiDerivative { function, x, d } => {
            let x = x.resolve(shape, base_dir)?;
            match d {
                CommutingTensor::Fixed { tensor } => Prepared::QuasiFixed {
                    f: function.clone(),
                    x,
                    d: tensor.resolve(shape, base_dir)?,
                },
                CommutingTensor::PolynomialOfA { coeffs } => Prepared::QuasiPoly {
                    f: function.clone(),
                    x,
                    p: Polynomial::new(coeffs.clone()),
                },
            }
        }
    })
}

/// `p(A) = sum_i p(lambda_i) P_i`.
fn polynomial_of(p: &Polynomial, dec: &SpectralDecomposition) -> Result<EinsteinTensor> {
    dec.apply(&ScalarFunction::polynomial(p.coeffs()))
}

/// One draw of the statistic.
fn evaluate(
    prepared: &Prepared,
    ens_a: &EnsembleSpec,
    ens_b: &EnsembleSpec,
    seed_a: &SeedSpec,
    seed_b: &SeedSpec,
    rho: &NormSpec,
    index: u64,
) -> Result<f64> {
    let (a, da) = sample_decomposed(ens_a, seed_a, index)?;
    let draw_b = || sample_decomposed(ens_b, seed_b, index);
    match prepared {
        Prepared::Dti { kernel, x } => {
            let (_, db) = draw_b()?;
            norm(&dti_apply(&da, &db, kernel, x)?, rho)
        }
        Prepared::Lipschitz { f, window } => {
            let (_, db) = draw_b()?;
            check_window(*window, &da, "A")?;
            check_window(*window, &db, "B")?;
            norm(&da.apply(f)?.sub(&db.apply(f)?)?, rho)
        }
        Prepared::QuasiLipschitz { f, window, d } => {
            let (_, db) = draw_b()?;
            check_window(*window, &da, "A")?;
            check_window(*window, &db, "B")?;
            norm(&d.einstein_product(&da.apply(f)?)?.sub(&db.apply(f)?.einstein_product(d)?)?, rho)
        }
        Prepared::Derivative { f, x } => norm(&frechet_derivative(f, &da, x)?, rho),
        Prepared::QuasiFixed { f, x, d } => {
            check_commutes(&a, d)?;
            norm(&frechet_derivative(f, &da, &d.einstein_product(x)?)?, rho)
        }
        Prepared::QuasiPoly { f, x, p } => {
            let d = polynomial_of(p, &da)?;
            norm(&frechet_derivative(f, &da, &d.einstein_product(x)?)?, rho)
        }
    }
}

/// The expectation and the multiplicative factor entering the bound.
struct BoundInputs {
    expectation: Estimate,
    norm_factor: f64,
    omega: Option<f64>,
}

fn bound_inputs(config: &TailExperimentConfig, prepared: &Prepared, seed: &SeedSpec) -> Result<BoundInputs> {
    let n = config.n_expectation_samples;
    let (ea, eb, rho) = (&config.ensemble_a, config.ensemble_b(), &config.norm);
    let omega_of = |f: &ScalarFunction| match &config.statistic {
        StatisticSpec::Lipschitz { omega, .. } | StatisticSpec::QuasiLipschitz { omega, .. } => omega.evaluate(f),
        _ => unreachable!("only Lipschitz statistics carry Omega"),
    };
    Ok(match prepared {
        Prepared::Dti { kernel, x } => BoundInputs {
            expectation: expectation_abs_kernel(ea, eb, kernel, n, seed)?,
            norm_factor: norm(x, rho)?,
            omega: None,
        },
        Prepared::Lipschitz { f, .. } => BoundInputs {
            expectation: expectation_diff_norm(ea, eb, rho, n, seed)?,
            norm_factor: 1.0,
            omega: Some(omega_of(f)?),
        },
        Prepared::QuasiLipschitz { f, d, .. } => BoundInputs {
            expectation: expectation_quasi_diff_norm(ea, eb, d, rho, n, seed)?,
            norm_factor: 1.0,
            omega: Some(omega_of(f)?),
        },
        Prepared::Derivative { f, x } => BoundInputs {
            expectation: expectation_abs_divided_difference(ea, f, n, seed)?,
            norm_factor: norm(x, rho)?,
            omega: None,
        },
        Prepared::QuasiFixed { f, x, d } => BoundInputs {
            expectation: expectation_abs_divided_difference(ea, f, n, seed)?,
            norm_factor: norm(&d.einstein_product(x)?, rho)?,
            omega: None,
        },
        Prepared::QuasiPoly { f, x, p } => {
            // D depends on A, so ||D X|| stays inside the expectation.
            let sa = seed.derive(labels::ENSEMBLE_A);
            let v = try_map_indexed(n, |i| {
                let (_, da) = sample_decomposed(ea, &sa, i)?;
                let d = polynomial_of(p, &da)?;
                Ok(norm(&d.einstein_product(x)?, rho)? * abs_divided_difference_sum(f, da.eigenvalues())?)
            })?;
            BoundInputs {
                expectation: Estimate::from_samples(&v)?,
                norm_factor: 1.0,
                omega: None,
            }
        }
    })
}

fn bound_at(prepared: &Prepared, inputs: &BoundInputs, theta: f64, dim: usize) -> Result<f64> {
    let e = inputs.expectation.estimate;
    match prepared {
        Prepared::Dti { .. } => theorem1_bound(theta, inputs.norm_factor, e, dim),
        Prepared::Lipschitz { .. } => lipschitz_bound(theta, inputs.omega.unwrap_or(0.0), e, dim),
        Prepared::QuasiLipschitz { .. } => quasi_lipschitz_bound(theta, inputs.omega.unwrap_or(0.0), e, dim),
        Prepared::Derivative { .. } | Prepared::QuasiFixed { .. } | Prepared::QuasiPoly { .. } => {
            derivative_bound(theta, inputs.norm_factor, e, dim)
        }
    }
}

/// Run a tail experiment. Relative tensor file paths resolve against `base_dir`.
///
/// Tail samples and bound expectations are drawn from independent substreams
/// of the configured seed.
pub fn empirical_tail(config: &TailExperimentConfig, base_dir: Option<&Path>) -> Result<TailExperimentReport> {
    let start = Instant::now();
    config.validate()?;
    let prepared = prepare(config, base_dir)?;
    let seed = SeedSpec::new(config.seed);
    let tail_seed = seed.derive(labels::TAIL);
    let (sa, sb) = (tail_seed.derive(labels::ENSEMBLE_A), tail_seed.derive(labels::ENSEMBLE_B));
    let (ens_a, ens_b) = (&config.ensemble_a, config.ensemble_b());

    let results = map_indexed(config.n_samples, |i| evaluate(&prepared, ens_a, ens_b, &sa, &sb, &config.norm, i));
    let (values, failed, first_failure) = tolerate_failures(results)?;
    if failed > 0 {
        log::warn!("{failed} of {} samples failed; first: {}", config.n_samples, first_failure.as_deref().unwrap_or(""));
    }
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);

    let inputs = bound_inputs(config, &prepared, &seed.derive(labels::EXPECTATION))?;
    let dim = config.shape().dim();

    let thetas: Vec<f64> = match &config.thetas {
        ThetaGrid::Values(v) => v.clone(),
        ThetaGrid::Quantiles(q) => q.iter().map(|&p| quantile_sorted(&sorted, p)).collect::<Result<_>>()?,
    };
    let n_eff = values.len();
    let mut rows = Vec::with_capacity(thetas.len());
    for &theta in &thetas {
        let exceedances = values.iter().filter(|&&v| v >= theta).count();
        let (ci_lo, ci_hi) = clopper_pearson(exceedances, n_eff, config.confidence)?;
        let (bound, bound_clipped, verdict) = if theta > 0.0 {
            let b = bound_at(&prepared, &inputs, theta, dim)?;
            let clipped = b.min(1.0);
            let v = if ci_hi <= clipped { Verdict::Pass } else { Verdict::Fail };
            (Some(b), Some(clipped), v)
        } else {
            (None, None, Verdict::Invalid)
        };
        rows.push(TailRow {
            theta,
            exceedances,
            n_effective: n_eff,
            p_hat: exceedances as f64 / n_eff as f64,
            ci_lo,
            ci_hi,
            bound,
            bound_clipped,
            verdict,
        });
    }

    let est = Estimate::from_samples(&values)?;
    let summary = StatisticSummary {
        mean: est.estimate,
        std_error: est.std_error,
        min: sorted[0],
        median: quantile_sorted(&sorted, 0.5)?,
        max: sorted[sorted.len() - 1],
    };
    Ok(TailExperimentReport {
        name: config.name.clone(),
        statistic: config.statistic.label(),
        norm: config.norm.label(),
        config_hash: config.hash(),
        seed: config.seed,
        n_samples: config.n_samples,
        failed_samples: failed,
        first_failure,
        expectation: inputs.expectation,
        norm_factor: inputs.norm_factor,
        omega: inputs.omega,
        summary,
        rows,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}
