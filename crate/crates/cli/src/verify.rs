//! Deterministic identity suites.
//!
//! Each suite evaluates a residual on seeded random instances and reports the
//! largest one against a fixed tolerance.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use dti_core::dti::{
    dti_apply, dti_apply_naive, perturbation_residual, quasi_commutator_residual, quasi_derivative, tti_apply,
    tti_apply_naive,
};
use dti_core::ensembles::{sample, sample_general, sample_unitary, EnsembleKind, EnsembleSpec, SeedSpec};
use dti_core::harness::{omega_second_difference_grid, try_map_indexed, TensorSource};
use dti_core::kernels::{mean_kernel, Kernel, MeanKind, ScalarFunction};
use dti_core::norms::{norm, unitary_invariance_defect, NormSpec};
use dti_core::spectral::eigh;
use dti_core::tensor::einstein_product_naive;
use dti_core::{EinsteinTensor, Result, TensorShape};

fn default_shapes() -> Vec<TensorShape> {
    [vec![2], vec![3], vec![2, 2], vec![2, 3]]
        .into_iter()
        .map(|m| TensorShape::new(m).expect("valid shape"))
        .collect()
}

fn default_instances() -> usize {
    50
}

/// Configuration of a `verify` run.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_shapes")]
    pub shapes: Vec<TensorShape>,
    #[serde(default = "default_instances")]
    pub instances: usize,
    pub seed: u64,
    /// Replaces every suite tolerance.
    #[serde(default)]
    pub tolerance: Option<f64>,
    /// Fixed `X` for the double-integral suites instead of random tensors.
    #[serde(default)]
    pub x: Option<TensorSource>,
    /// Run only suites whose name starts with one of these prefixes.
    #[serde(default)]
    pub suites: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdentityResult {
    pub identity: String,
    pub shape: Vec<usize>,
    pub instances: usize,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifySummary {
    pub seed: u64,
    pub results: Vec<IdentityResult>,
    pub all_pass: bool,
}

impl VerifySummary {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("identity,shape,instances,residual,tolerance,verdict\n");
        for r in &self.results {
            let shape: Vec<String> = r.shape.iter().map(|m| m.to_string()).collect();
            let _ = writeln!(
                s,
                "{},{},{},{:e},{:e},{}",
                r.identity,
                shape.join("x"),
                r.instances,
                r.residual,
                r.tolerance,
                if r.pass { "PASS" } else { "FAIL" }
            );
        }
        s
    }
}

/// Random inputs for one shape; every role draws from its own substream.
struct Inputs<'a> {
    shape: &'a TensorShape,
    seed: SeedSpec,
    fixed_x: Option<EinsteinTensor>,
}

impl Inputs<'_> {
    fn hermitian(&self, role: u64, i: u64) -> Result<EinsteinTensor> {
        let spec = EnsembleSpec::new(self.shape.clone(), EnsembleKind::GaussianHermitian { scale: 1.0 });
        sample(&spec, &self.seed.derive(role), i)
    }

    fn positive(&self, role: u64, i: u64) -> Result<EinsteinTensor> {
        let spec = EnsembleSpec::new(
            self.shape.clone(),
            EnsembleKind::WishartPd {
                inner_dim: self.shape.dim() + 2,
                scale: 1.0,
                ridge: 0.1,
            },
        );
        sample(&spec, &self.seed.derive(role), i)
    }

    fn general(&self, role: u64, i: u64) -> Result<EinsteinTensor> {
        sample_general(self.shape, &self.seed.derive(role), i)
    }

    fn x(&self, role: u64, i: u64) -> Result<EinsteinTensor> {
        match &self.fixed_x {
            Some(x) => Ok(x.clone()),
            None => self.general(role, i),
        }
    }
}

const ROLE_A: u64 = 1;
const ROLE_B: u64 = 2;
const ROLE_C: u64 = 3;
const ROLE_X: u64 = 4;
const ROLE_Y: u64 = 5;
const ROLE_D: u64 = 6;
const ROLE_U: u64 = 7;

fn max_over(n: usize, f: impl Fn(u64) -> Result<f64> + Sync) -> Result<f64> {
    Ok(try_map_indexed(n, f)?.into_iter().fold(0.0, f64::max))
}

fn rel(diff: &EinsteinTensor, scale: f64) -> f64 {
    diff.frobenius_norm() / scale
}

fn test_functions() -> Vec<(ScalarFunction, bool)> {
    vec![
        (ScalarFunction::monomial(2), false),
        (ScalarFunction::monomial(3), false),
        (ScalarFunction::Exp, false),
        (ScalarFunction::Log, true),
    ]
}

fn mean_kernels() -> Vec<Kernel> {
    let kinds = [
        MeanKind::Arithmetic,
        MeanKind::Geometric,
        MeanKind::Harmonic,
        MeanKind::General { alpha: 0.5 },
        MeanKind::General { alpha: 2.0 },
        MeanKind::General { alpha: 3.0 },
        MeanKind::Logarithmic,
    ];
    kinds.into_iter().map(|k| mean_kernel(k).expect("valid mean")).collect()
}

fn all_norms(dim: usize) -> Vec<NormSpec> {
    let mut v = vec![
        NormSpec::Schatten { p: 1.0 },
        NormSpec::Schatten { p: 2.0 },
        NormSpec::Schatten { p: 3.0 },
        NormSpec::Operator,
        NormSpec::KyFan { k: 1 },
        NormSpec::KTrace { k: 1 },
    ];
    if dim >= 2 {
        v.push(NormSpec::KyFan { k: 2 });
        v.push(NormSpec::KTrace { k: 2 });
    }
    v
}

/// Suite name, tolerance, and the largest residual over the instances.
type Suite = (String, f64, f64);

fn run_shape(inp: &Inputs, n: usize, wanted: &dyn Fn(&str) -> bool) -> Result<Vec<Suite>> {
    let mut out: Vec<Suite> = Vec::new();
    let d = inp.shape.dim();
    let mut push = |name: String, tol: f64, f: &dyn Fn() -> Result<f64>| -> Result<()> {
        if wanted(&name) {
            out.push((name, tol, f()?));
        }
        Ok(())
    };

    push("einstein_product".into(), 1e-12, &|| {
        max_over(n, |i| {
            let (x, y) = (inp.general(ROLE_X, i)?, inp.general(ROLE_Y, i)?);
            let diff = x.einstein_product(&y)?.sub(&einstein_product_naive(&x, &y)?)?;
            Ok(rel(&diff, x.frobenius_norm() * y.frobenius_norm()))
        })
    })?;

    push("dti_unit_kernel".into(), 1e-12, &|| {
        max_over(n, |i| {
            let (a, b, x) = (eigh(&inp.hermitian(ROLE_A, i)?)?, eigh(&inp.hermitian(ROLE_B, i)?)?, inp.x(ROLE_X, i)?);
            let t = dti_apply(&a, &b, &Kernel::Constant { value: 1.0 }, &x)?;
            Ok(rel(&t.sub(&x)?, x.frobenius_norm()))
        })
    })?;

    let psi1 = Kernel::divided_difference(ScalarFunction::Exp);
    let psi2 = Kernel::ArithmeticMean;
    push("dti_hadamard".into(), 1e-10, &|| {
        let (p1, p2) = (psi1.clone(), psi2.clone());
        let prod = Kernel::custom2("product", move |s, t| p1.eval2(s, t).unwrap() * p2.eval2(s, t).unwrap());
        max_over(n, |i| {
            let (a, b, x) = (eigh(&inp.hermitian(ROLE_A, i)?)?, eigh(&inp.hermitian(ROLE_B, i)?)?, inp.x(ROLE_X, i)?);
            let lhs = dti_apply(&a, &b, &prod, &x)?;
            let rhs = dti_apply(&a, &b, &psi1, &dti_apply(&a, &b, &psi2, &x)?)?;
            Ok(rel(&lhs.sub(&rhs)?, 1.0 + lhs.frobenius_norm()))
        })
    })?;

    push("dti_linearity".into(), 1e-10, &|| {
        let (p1, p2) = (psi1.clone(), psi2.clone());
        let comb = Kernel::custom2("combination", move |s, t| {
            2.0 * p1.eval2(s, t).unwrap() - 3.0 * p2.eval2(s, t).unwrap()
        });
        max_over(n, |i| {
            let (a, b) = (eigh(&inp.hermitian(ROLE_A, i)?)?, eigh(&inp.hermitian(ROLE_B, i)?)?);
            let (x, y) = (inp.x(ROLE_X, i)?, inp.general(ROLE_Y, i)?);
            let lhs = dti_apply(&a, &b, &comb, &x)?;
            let rhs = dti_apply(&a, &b, &psi1, &x)?
                .scale_real(2.0)
                .sub(&dti_apply(&a, &b, &psi2, &x)?.scale_real(3.0))?;
            let in_kernel = rel(&lhs.sub(&rhs)?, 1.0 + lhs.frobenius_norm());
            let sum = dti_apply(&a, &b, &psi1, &x.add(&y.scale_real(-0.5))?)?;
            let parts = dti_apply(&a, &b, &psi1, &x)?.sub(&dti_apply(&a, &b, &psi1, &y)?.scale_real(0.5))?;
            let in_x = rel(&sum.sub(&parts)?, 1.0 + sum.frobenius_norm());
            Ok(in_kernel.max(in_x))
        })
    })?;

    push("dti_naive".into(), 1e-10, &|| {
        max_over(n, |i| {
            let (a, b, x) = (eigh(&inp.hermitian(ROLE_A, i)?)?, eigh(&inp.hermitian(ROLE_B, i)?)?, inp.x(ROLE_X, i)?);
            let fast = dti_apply(&a, &b, &psi1, &x)?;
            let slow = dti_apply_naive(&a, &b, &psi1, &x)?;
            Ok(rel(&fast.sub(&slow)?, 1.0 + fast.frobenius_norm()))
        })
    })?;

    for (f, needs_pd) in test_functions() {
        let draw = |role, i| if needs_pd { inp.positive(role, i) } else { inp.hermitian(role, i) };
        push(format!("perturbation[{}]", f.name()), 1e-7, &|| {
            max_over(n, |i| {
                Ok(perturbation_residual(&f, &draw(ROLE_A, i)?, &draw(ROLE_B, i)?, &NormSpec::frobenius())?.relative())
            })
        })?;
        push(format!("quasi_commutator[{}]", f.name()), 1e-7, &|| {
            max_over(n, |i| {
                let r = quasi_commutator_residual(
                    &f,
                    &draw(ROLE_A, i)?,
                    &draw(ROLE_B, i)?,
                    &inp.general(ROLE_D, i)?,
                    &NormSpec::frobenius(),
                )?;
                Ok(r.relative())
            })
        })?;
    }

    for f in [ScalarFunction::monomial(3), ScalarFunction::Exp] {
        let phi = Kernel::second_divided_difference(f.clone());
        if d <= 4 {
            push(format!("tti_naive[{}]", f.name()), 1e-9, &|| {
                max_over(n, |i| {
                    let a = eigh(&inp.hermitian(ROLE_A, i)?)?;
                    let b = eigh(&inp.hermitian(ROLE_B, i)?)?;
                    let c = eigh(&inp.hermitian(ROLE_C, i)?)?;
                    let (x, y) = (inp.general(ROLE_X, i)?, inp.general(ROLE_Y, i)?);
                    let fast = tti_apply(&a, &b, &c, &phi, &x, &y)?;
                    let slow = tti_apply_naive(&a, &b, &c, &phi, &x, &y)?;
                    Ok(rel(&fast.sub(&slow)?, 1.0 + fast.frobenius_norm()))
                })
            })?;
        }
        // residual is the largest ratio of the norm to its bound
        push(format!("tti_norm_lemma[{}]", f.name()), 1.0, &|| {
            let norms = all_norms(d);
            max_over(n, |i| {
                let a = eigh(&inp.hermitian(ROLE_A, i)?)?;
                let b = eigh(&inp.hermitian(ROLE_B, i)?)?;
                let c = eigh(&inp.hermitian(ROLE_C, i)?)?;
                let (x, y) = (inp.general(ROLE_X, i)?, inp.general(ROLE_Y, i)?);
                let all: Vec<f64> = [&a, &b, &c].iter().flat_map(|s| s.eigenvalues().to_vec()).collect();
                let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let omega = omega_second_difference_grid(&f, lo, hi, 33)?;
                let t = tti_apply(&a, &b, &c, &phi, &x, &y)?;
                let mut worst = 0.0f64;
                for rho in norms.iter().filter(|r| r.is_subadditive()) {
                    let bound = (d as f64).powi(3) * omega * norm(&x, rho)? * norm(&y, rho)?;
                    worst = worst.max(norm(&t, rho)? / bound);
                }
                Ok(worst)
            })
        })?;
    }

    for psi in mean_kernels() {
        push(format!("norm_estimate[{}]", psi.name()), 1.0, &|| {
            let norms = all_norms(d);
            max_over(n, |i| {
                let a = eigh(&inp.positive(ROLE_A, i)?)?;
                let b = eigh(&inp.positive(ROLE_B, i)?)?;
                let x = inp.x(ROLE_X, i)?;
                let t = dti_apply(&a, &b, &psi, &x)?;
                let mut sum = 0.0;
                for &l in a.eigenvalues() {
                    for &m in b.eigenvalues() {
                        sum += psi.eval2(l, m)?.abs();
                    }
                }
                let mut worst = 0.0f64;
                for rho in &norms {
                    worst = worst.max(norm(&t, rho)? / (sum * norm(&x, rho)?));
                }
                Ok(worst)
            })
        })?;
    }

    push("norm_reductions".into(), 1e-10, &|| {
        max_over(n, |i| {
            let p = inp.positive(ROLE_A, i)?;
            let x = inp.general(ROLE_X, i)?;
            let s1 = norm(&p, &NormSpec::Schatten { p: 1.0 })?;
            let trace_norm = p.trace().re;
            let mut worst = (s1 - trace_norm).abs() / trace_norm;
            let nx = x.frobenius_norm();
            let x_s1 = norm(&x, &NormSpec::Schatten { p: 1.0 })?;
            worst = worst.max((norm(&x, &NormSpec::KTrace { k: 1 })? - x_s1).abs() / x_s1);
            let op = norm(&x, &NormSpec::Operator)?;
            worst = worst.max((norm(&x, &NormSpec::KyFan { k: 1 })? - op).abs() / op);
            worst = worst.max((norm(&x, &NormSpec::frobenius())? - nx).abs() / nx);
            Ok(worst)
        })
    })?;

    push("unitary_invariance".into(), 1e-10, &|| {
        let norms = all_norms(d);
        max_over(n, |i| {
            let x = inp.general(ROLE_X, i)?;
            let u = sample_unitary(inp.shape, &inp.seed.derive(ROLE_U), i)?;
            let mut worst = 0.0f64;
            for rho in &norms {
                worst = worst.max(unitary_invariance_defect(&x, &u, rho)?);
            }
            Ok(worst)
        })
    })?;

    for f in [ScalarFunction::monomial(2), ScalarFunction::Exp] {
        // residual is the distance of the fitted log-log slope from 1
        push(format!("frechet_order[{}]", f.name()), 0.1, &|| {
            max_over(n.min(10), |i| {
                let a = inp.hermitian(ROLE_A, i)?;
                let x = inp.hermitian(ROLE_X, i)?;
                let da = eigh(&a)?;
                let exact = dti_core::dti::frechet_derivative(&f, &da, &x)?;
                let fa = da.apply(&f)?;
                slope_residual(|t| {
                    let ft = eigh(&a.add(&x.scale_real(t))?)?.apply(&f)?;
                    Ok(ft.sub(&fa)?.scale_real(1.0 / t).sub(&exact)?.frobenius_norm())
                })
            })
        })?;
        push(format!("quasi_frechet_order[{}]", f.name()), 0.1, &|| {
            max_over(n.min(10), |i| {
                let a = inp.hermitian(ROLE_A, i)?;
                let x = inp.hermitian(ROLE_X, i)?;
                let dt = a.einstein_product(&a)?;
                let da = eigh(&a)?;
                let exact = quasi_derivative(&f, &da, &x, &dt)?;
                let fa = da.apply(&f)?;
                slope_residual(|t| {
                    let ft = eigh(&a.add(&x.scale_real(t))?)?.apply(&f)?;
                    let q = dt.einstein_product(&ft)?.sub(&fa.einstein_product(&dt)?)?;
                    Ok(q.scale_real(1.0 / t).sub(&exact)?.frobenius_norm())
                })
            })
        })?;
    }
    Ok(out)
}

/// Steps used to confirm first-order convergence of difference quotients.
pub const FRECHET_STEPS: [f64; 3] = [1e-3, 1e-4, 1e-5];

/// `|slope - 1|` for the least-squares fit of `log err(t)` against `log t`.
pub fn slope_residual(err: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let pts: Vec<(f64, f64)> = FRECHET_STEPS
        .iter()
        .map(|&t| Ok((t.ln(), err(t)?.max(f64::MIN_POSITIVE).ln())))
        .collect::<Result<_>>()?;
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok((sxy / sxx - 1.0).abs())
}

/// Run every selected suite on every configured shape.
pub fn run_verify(config: &VerifyConfig, base_dir: Option<&Path>) -> Result<VerifySummary> {
    if config.instances == 0 {
        return Err(dti_core::Error::InvalidParameter("instances must be positive".into()));
    }
    if let Some(t) = config.tolerance {
        if !(t >= 0.0) {
            return Err(dti_core::Error::InvalidParameter(format!("tolerance must be nonnegative, got {t}")));
        }
    }
    // resolve fixed tensors up front so bad files are reported before any work
    let fixed: Vec<Option<EinsteinTensor>> = config
        .shapes
        .iter()
        .map(|s| config.x.as_ref().map(|src| src.resolve(s, base_dir)).transpose())
        .collect::<Result<_>>()?;
    let wanted = |name: &str| match &config.suites {
        None => true,
        Some(list) => list.iter().any(|p| name.starts_with(p.as_str())),
    };
    let mut results = Vec::new();
    for (k, (shape, fixed_x)) in config.shapes.iter().zip(fixed).enumerate() {
        let inputs = Inputs {
            shape,
            seed: SeedSpec::new(config.seed).derive(k as u64),
            fixed_x,
        };
        for (identity, tol, residual) in run_shape(&inputs, config.instances, &wanted)? {
            let tolerance = config.tolerance.unwrap_or(tol);
            results.push(IdentityResult {
                identity,
                shape: shape.modes().to_vec(),
                instances: config.instances,
                residual,
                tolerance,
                pass: residual <= tolerance,
            });
        }
    }
    let all_pass = results.iter().all(|r| r.pass);
    Ok(VerifySummary {
        seed: config.seed,
        results,
        all_pass,
    })
}
