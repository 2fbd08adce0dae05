//! Series expansion of `E(X / Y)` in centred moments of `Y`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Partial sums of the expansion together with the moments they use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSeriesResult {
    pub truncation: usize,
    pub mean_x: f64,
    pub mean_y: f64,
    /// `S_0, ..., S_K`.
    pub partial_sums: Vec<f64>,
    /// `E(Y'^i)` for `i = 1..=K`, with `Y' = Y - E(Y)`.
    pub centered_y_moments: Vec<f64>,
    /// `E(X' Y'^i)` for `i = 1..=K`, with `X' = X - E(X)`.
    pub cross_moments: Vec<f64>,
    /// Brute-force `mean(X / Y)`.
    pub reference: f64,
}

impl RatioSeriesResult {
    pub fn value(&self) -> f64 {
        *self.partial_sums.last().expect("S_0 always present")
    }
}

/// `S_K = E(X)/E(Y) + sum_{i=1}^K (-1)^i [E(X) E(Y'^i) + E(X' Y'^i)] / E(Y)^(i+1)`,
/// with all moments taken empirically over the paired samples.
///
/// ```
/// use dti_core::harness::expectation_ratio_series;
/// let r = expectation_ratio_series(&[1.0, 2.0], &[1.0, 2.0], 4).unwrap();
/// assert_eq!(r.partial_sums[0], 1.0);
/// assert!((r.partial_sums[1] - 8.0 / 9.0).abs() < 1e-15);
/// assert!((r.partial_sums[4] - 1.0).abs() < 1e-15);
/// ```
pub fn expectation_ratio_series(x: &[f64], y: &[f64], k: usize) -> Result<RatioSeriesResult> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "need paired nonempty samples, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if let Some(pos) = y.iter().position(|&v| v == 0.0) {
        return Err(Error::InvalidParameter(format!("Y sample {pos} is zero")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("samples must be finite".into()));
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    if mean_y == 0.0 {
        return Err(Error::InvalidParameter("empirical E(Y) is zero".into()));
    }
    let reference = x.iter().zip(y).map(|(a, b)| a / b).sum::<f64>() / n;

    let mut centered_y_moments = Vec::with_capacity(k);
    let mut cross_moments = Vec::with_capacity(k);
    let mut powers: Vec<f64> = vec![1.0; y.len()];
    for _ in 0..k {
        let mut my = 0.0;
        let mut mxy = 0.0;
        for ((p, &yv), &xv) in powers.iter_mut().zip(y).zip(x) {
            *p *= yv - mean_y;
            my += *p;
            mxy += (xv - mean_x) * *p;
        }
        centered_y_moments.push(my / n);
        cross_moments.push(mxy / n);
    }

    let mut partial_sums = Vec::with_capacity(k + 1);
    let mut s = mean_x / mean_y;
    partial_sums.push(s);
    let mut denom = mean_y;
    for i in 1..=k {
        denom *= mean_y;
        let sign = if i % 2 == 1 { -1.0 } else { 1.0 };
        s += sign * (mean_x * centered_y_moments[i - 1] + cross_moments[i - 1]) / denom;
        partial_sums.push(s);
    }
    Ok(RatioSeriesResult {
        truncation: k,
        mean_x,
        mean_y,
        partial_sums,
        centered_y_moments,
        cross_moments,
        reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::SeedSpec;
    use rand::Rng;
    use rand_distr::{Beta, Distribution};

    /// Exact rational evaluation of the two-point case `X = Y` uniform on `{1, 2}`.
    fn two_point_rational(k: usize) -> Vec<(i128, i128)> {
        // E X = E Y = 3/2; Y' = +-1/2; E Y'^i = (1/2)^i for even i else 0;
        // E X'Y'^i = E Y'^(i+1).
        fn reduce(p: i128, q: i128) -> (i128, i128) {
            fn gcd(a: i128, b: i128) -> i128 {
                if b == 0 { a.abs() } else { gcd(b, a % b) }
            }
            let g = gcd(p, q);
            (p / g, q / g)
        }
        let mut out = vec![(1i128, 1i128)];
        let (mut p, mut q) = (1i128, 1i128);
        for i in 1..=k {
            let half_pow = |e: usize| -> (i128, i128) { if e % 2 == 0 { (1, 1 << e) } else { (0, 1) } };
            let (my_p, my_q) = half_pow(i);
            let (mc_p, mc_q) = half_pow(i + 1);
            // numerator: 3/2 * my + mc
            let (np, nq) = reduce(3 * my_p * mc_q + 2 * mc_p * my_q, 2 * my_q * mc_q);
            // divide by (3/2)^(i+1)
            let (tp, tq) = reduce(np * (1i128 << (i + 1)), nq * 3i128.pow(i as u32 + 1));
            let sign = if i % 2 == 1 { -1 } else { 1 };
            let (a, b) = reduce(p * tq + sign * tp * q, q * tq);
            p = a;
            q = b;
            out.push((p, q));
        }
        out
    }

    #[test]
    fn two_point_case_matches_exact_rationals() {
        let exact = two_point_rational(4);
        assert_eq!(exact, vec![(1, 1), (8, 9), (1, 1), (80, 81), (1, 1)]);
        let r = expectation_ratio_series(&[1.0, 2.0], &[1.0, 2.0], 4).unwrap();
        for (s, (p, q)) in r.partial_sums.iter().zip(exact) {
            assert!((s - p as f64 / q as f64).abs() <= 1e-15);
        }
        assert_eq!(r.reference, 1.0);
    }

    #[test]
    fn constant_y_is_exact_for_all_truncations() {
        let x = [0.5, 1.5, 4.0, -2.0];
        let y = [2.0; 4];
        let r = expectation_ratio_series(&x, &y, 6).unwrap();
        for s in &r.partial_sums {
            assert_eq!(*s, r.reference);
        }
        assert!(r.centered_y_moments.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn s0_is_ratio_of_means_and_zero_y_rejected() {
        let r = expectation_ratio_series(&[1.0, 5.0, 2.0], &[2.0, 3.0, 4.0], 3).unwrap();
        assert_eq!(r.partial_sums[0], (8.0 / 3.0) / 3.0);
        assert!(expectation_ratio_series(&[1.0, 2.0], &[1.0, 0.0], 2).is_err());
        assert!(expectation_ratio_series(&[1.0], &[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn even_truncations_approach_reference_for_concentrated_y() {
        let mut rng = SeedSpec::new(21).stream(0);
        let beta = Beta::new(20.0, 20.0).unwrap();
        let n = 20_000;
        let y: Vec<f64> = (0..n).map(|_| 1.0 + beta.sample(&mut rng)).collect();
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 3.0).collect();
        let r = expectation_ratio_series(&x, &y, 4).unwrap();
        let err = |k: usize| (r.partial_sums[k] - r.reference).abs();
        assert!(err(0) > err(2) && err(2) > err(4), "{:?} vs {}", r.partial_sums, r.reference);
    }
}
