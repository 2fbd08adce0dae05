//! r-th mean convergence of `T_{A_n,B_n,f^[1]}(X)` as the perturbations shrink.
//!
//! With common random numbers, sample `i` draws `A`, `B` and Gaussian
//! Hermitian directions `E`, `F` once, and every scale `c` uses
//! `A_n = A + c E`, `B_n = B + c F`.

use serde::{Deserialize, Serialize};

use crate::dti::dti_apply;
use crate::ensembles::{sample, sample_decomposed, EnsembleKind, EnsembleSpec, SeedSpec};
use crate::error::{Error, Result};
use crate::kernels::{divided_difference_2, Kernel, ScalarFunction};
use crate::norms::{norm, NormSpec};
use crate::spectral::eigh;
use crate::tensor::EinsteinTensor;

use super::sampling::{labels, try_map_indexed};
use super::stats::Estimate;

/// Grid points per axis for the `Omega_{f^[2]}` search.
pub const OMEGA2_GRID: usize = 33;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub scale: f64,
    /// `E||T_{A_n,B_n,f^[1]}(X) - T_{A,B,f^[1]}(X)||^r`.
    pub rth_mean: Estimate,
    /// `E||A_n - A||^r + E||B_n - B||^r`.
    pub perturbation_rth_mean: f64,
    /// `2^r Omega^r ||X||^r (E||A_n - A||^r + E||B_n - B||^r)`.
    pub bound: f64,
    /// The same with the `D^3` factor of the triple-integral norm estimate.
    pub bound_with_dim: f64,
    pub under_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub function: String,
    pub r: f64,
    pub omega: f64,
    /// Interval containing every spectrum seen, over which `Omega` was taken.
    pub window: (f64, f64),
    pub norm_x: f64,
    pub rows: Vec<ConvergenceRow>,
    /// r-th means nonincreasing as the scale decreases.
    pub monotone: bool,
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        self.monotone && self.rows.iter().all(|r| r.under_bound)
    }
}

/// `max |f^[2](x, y, z)|` over sorted triples of an `m`-point grid on `[a, b]`.
pub fn omega_second_difference_grid(f: &ScalarFunction, a: f64, b: f64, m: usize) -> Result<f64> {
    if !(a <= b) || m < 2 {
        return Err(Error::InvalidParameter(format!("bad grid [{a}, {b}] with {m} points")));
    }
    let pts: Vec<f64> = (0..m).map(|i| a + (b - a) * i as f64 / (m - 1) as f64).collect();
    let mut best = 0.0f64;
    for i in 0..m {
        for j in i..m {
            for k in j..m {
                best = best.max(divided_difference_2(f, pts[i], pts[j], pts[k])?.abs());
            }
        }
    }
    Ok(best)
}

struct Draw {
    diffs: Vec<f64>,
    pert: Vec<f64>,
    lo: f64,
    hi: f64,
}

/// Estimate the r-th mean of the DTI difference at each scale and compare it
/// with `2^r Omega^r ||X||^r (E||A_n - A||^r + E||B_n - B||^r)`.
///
/// `A` and `B` are independent draws from `base`. `scales` should decrease.
#[allow(clippy::too_many_arguments)]
pub fn convergence_in_mean_check(
    base: &EnsembleSpec,
    scales: &[f64],
    f: &ScalarFunction,
    x: &EinsteinTensor,
    r: f64,
    rho: &NormSpec,
    n_samples: usize,
    seed: &SeedSpec,
) -> Result<ConvergenceReport> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("r must satisfy 1 <= r < inf, got {r}")));
    }
    if scales.is_empty() || scales.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
        return Err(Error::InvalidParameter("scales must be nonnegative and finite".into()));
    }
    if n_samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    f.validate()?;
    rho.validate(base.shape.dim())?;
    let psi = Kernel::divided_difference(f.clone());
    let direction = EnsembleSpec::new(base.shape.clone(), EnsembleKind::GaussianHermitian { scale: 1.0 });
    let (sa, sb) = (seed.derive(labels::ENSEMBLE_A), seed.derive(labels::ENSEMBLE_B));
    let (se, sf) = (seed.derive(labels::PERTURB_A), seed.derive(labels::PERTURB_B));

    let draws = try_map_indexed(n_samples, |i| {
        let (a, da) = sample_decomposed(base, &sa, i)?;
        let (b, db) = sample_decomposed(base, &sb, i)?;
        let (e, fm) = (sample(&direction, &se, i)?, sample(&direction, &sf, i)?);
        let t0 = dti_apply(&da, &db, &psi, x)?;
        let mut lo = da.min_eigenvalue().min(db.min_eigenvalue());
        let mut hi = da.max_eigenvalue().max(db.max_eigenvalue());
        let (ne, nf) = (norm(&e, rho)?, norm(&fm, rho)?);
        let mut diffs = Vec::with_capacity(scales.len());
        let mut pert = Vec::with_capacity(scales.len());
        for &c in scales {
            let an = eigh(&a.add(&e.scale_real(c))?)?;
            let bn = eigh(&b.add(&fm.scale_real(c))?)?;
            lo = lo.min(an.min_eigenvalue()).min(bn.min_eigenvalue());
            hi = hi.max(an.max_eigenvalue()).max(bn.max_eigenvalue());
            let t = dti_apply(&an, &bn, &psi, x)?;
            diffs.push(norm(&t.sub(&t0)?, rho)?.powf(r));
            pert.push((c * ne).powf(r) + (c * nf).powf(r));
        }
        Ok(Draw { diffs, pert, lo, hi })
    })?;

    let lo = draws.iter().map(|d| d.lo).fold(f64::INFINITY, f64::min);
    let hi = draws.iter().map(|d| d.hi).fold(f64::NEG_INFINITY, f64::max);
    let omega = omega_second_difference_grid(f, lo, hi, OMEGA2_GRID)?;
    let norm_x = norm(x, rho)?;
    let dim = base.shape.dim() as f64;
    let factor = (2.0 * omega * norm_x).powf(r);

    let mut rows = Vec::with_capacity(scales.len());
    for (s, &scale) in scales.iter().enumerate() {
        let v: Vec<f64> = draws.iter().map(|d| d.diffs[s]).collect();
        let rth_mean = Estimate::from_samples(&v)?;
        let perturbation_rth_mean = draws.iter().map(|d| d.pert[s]).sum::<f64>() / n_samples as f64;
        let bound = factor * perturbation_rth_mean;
        rows.push(ConvergenceRow {
            scale,
            rth_mean,
            perturbation_rth_mean,
            bound,
            bound_with_dim: dim.powi(3).powf(r) * bound,
            under_bound: rth_mean.estimate <= bound,
        });
    }
    let mut order: Vec<&ConvergenceRow> = rows.iter().collect();
    order.sort_by(|p, q| q.scale.total_cmp(&p.scale));
    let monotone = order.windows(2).all(|w| w[1].rth_mean.estimate <= w[0].rth_mean.estimate);
    Ok(ConvergenceReport {
        function: f.name(),
        r,
        omega,
        window: (lo, hi),
        norm_x,
        rows,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::TensorShape;

    fn gaussian() -> EnsembleSpec {
        EnsembleSpec::new(TensorShape::new(vec![2]).unwrap(), EnsembleKind::GaussianHermitian { scale: 1.0 })
    }

    #[test]
    fn zero_scale_and_linear_function_give_zero_difference() {
        let x = EinsteinTensor::identity(&TensorShape::new(vec![2]).unwrap());
        let seed = SeedSpec::new(4);
        let r = convergence_in_mean_check(&gaussian(), &[0.0], &ScalarFunction::Exp, &x, 1.0, &NormSpec::frobenius(), 20, &seed)
            .unwrap();
        assert_eq!(r.rows[0].rth_mean.estimate, 0.0);
        let lin = ScalarFunction::polynomial(&[1.0, 3.0]);
        let r = convergence_in_mean_check(&gaussian(), &[1.0, 0.5], &lin, &x, 2.0, &NormSpec::frobenius(), 20, &seed).unwrap();
        assert!(r.rows.iter().all(|row| row.rth_mean.estimate < 1e-20));
        assert!(r.omega < 1e-6);
    }

    #[test]
    fn exp_shrinks_under_bound() {
        let shape = TensorShape::new(vec![2]).unwrap();
        let x = crate::ensembles::sample_general(&shape, &SeedSpec::new(9), 0).unwrap();
        let r = convergence_in_mean_check(
            &gaussian(),
            &[1.0, 0.5, 0.25, 0.125],
            &ScalarFunction::Exp,
            &x,
            1.0,
            &NormSpec::frobenius(),
            100,
            &SeedSpec::new(5),
        )
        .unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn grid_omega_for_exp_is_half_exp_of_right_end() {
        let w = omega_second_difference_grid(&ScalarFunction::Exp, -1.0, 2.0, 9).unwrap();
        assert!((w - 2f64.exp() / 2.0).abs() < 1e-8);
        assert!(convergence_in_mean_check(
            &gaussian(),
            &[1.0],
            &ScalarFunction::Exp,
            &EinsteinTensor::identity(&TensorShape::new(vec![2]).unwrap()),
            0.5,
            &NormSpec::frobenius(),
            5,
            &SeedSpec::new(0)
        )
        .is_err());
    }
}
