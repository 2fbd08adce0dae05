//! Digamma and polygamma functions.

use crate::error::{Error, Result};

/// Bernoulli numbers `B_2, B_4, ..., B_20`.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Largest supported derivative order; `k!` and the series coefficients stay finite well past this.
pub const MAX_POLYGAMMA_ORDER: u32 = 100;

/// `k`-th derivative of the digamma function at `x > 0`.
///
/// Shifts `x` upward with `psi^(k)(x) = psi^(k)(x+1) + (-1)^(k+1) k! / x^(k+1)`
/// until the asymptotic expansion is accurate, then sums the expansion.
///
/// ```
/// use dti_core::kernels::polygamma;
/// let gamma = 0.577_215_664_901_532_9;
/// assert!((polygamma(0, 1.0).unwrap() + gamma).abs() < 1e-14);
/// let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
/// assert!((polygamma(1, 1.0).unwrap() - pi2_6).abs() < 1e-14);
/// ```
pub fn polygamma(k: u32, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(
            &format!("polygamma({k})"),
            &[x],
            "argument must be positive and finite",
        ));
    }
    if k > MAX_POLYGAMMA_ORDER {
        return Err(Error::InvalidParameter(format!(
            "polygamma order {k} exceeds {MAX_POLYGAMMA_ORDER}"
        )));
    }
    let threshold = 20.0 + k as f64;
    let mut shifted = x;
    let mut head = 0.0;
    if k == 0 {
        while shifted < threshold {
            head -= 1.0 / shifted;
            shifted += 1.0;
        }
        Ok(head + digamma_asymptotic(shifted))
    } else {
        let kf = factorial(k);
        let p = (k + 1) as i32;
        while shifted < threshold {
            head += 1.0 / shifted.powi(p);
            shifted += 1.0;
        }
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let value = sign * (kf * head + polygamma_asymptotic_magnitude(k, shifted));
        if !value.is_finite() {
            return Err(Error::domain(
                &format!("polygamma({k})"),
                &[x],
                "result overflows",
            ));
        }
        Ok(value)
    }
}

/// Digamma `psi(x)`.
pub fn digamma(x: f64) -> Result<f64> {
    polygamma(0, x)
}

fn digamma_asymptotic(x: f64) -> f64 {
    let inv2 = 1.0 / (x * x);
    let mut pow = inv2;
    let mut sum = 0.0;
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let two_j = 2.0 * (j + 1) as f64;
        sum += b / two_j * pow;
        pow *= inv2;
    }
    x.ln() - 0.5 / x - sum
}

/// `(k-1)!/x^k + k!/(2 x^(k+1)) + sum_j B_2j (2j+k-1)!/((2j)! x^(2j+k))`, for `k >= 1`.
fn polygamma_asymptotic_magnitude(k: u32, x: f64) -> f64 {
    let kf = k as f64;
    let fact_km1 = factorial(k - 1);
    let xk = x.powi(k as i32);
    let mut sum = fact_km1 / xk + fact_km1 * kf / (2.0 * xk * x);
    // coef_j = (2j+k-1)! / (2j)!, built incrementally from coef_0 = (k-1)!.
    let mut coef = fact_km1;
    let inv2 = 1.0 / (x * x);
    let mut pow = 1.0 / xk;
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let two_j = 2.0 * (j + 1) as f64;
        coef *= (two_j + kf - 2.0) * (two_j + kf - 1.0) / ((two_j - 1.0) * two_j);
        pow *= inv2;
        sum += b * coef * pow;
    }
    sum
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    const ZETA3: f64 = 1.202_056_903_159_594_3;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    /// Hurwitz zeta by direct summation plus an Euler-Maclaurin tail, so that
    /// `psi^(k)(x) = (-1)^(k+1) k! zeta(k+1, x)` gives an independent oracle.
    fn hurwitz_oracle(s: f64, x: f64) -> f64 {
        let n = 2000usize;
        let mut sum = 0.0;
        for m in (0..n).rev() {
            sum += (x + m as f64).powf(-s);
        }
        let a = x + n as f64;
        let mut tail = a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
        // B2/2! s a^(-s-1) + B4/4! s(s+1)(s+2) a^(-s-3)
        tail += (1.0 / 12.0) * s * a.powf(-s - 1.0);
        tail -= (1.0 / 720.0) * s * (s + 1.0) * (s + 2.0) * a.powf(-s - 3.0);
        sum + tail
    }

    #[test]
    fn known_values() {
        assert!((polygamma(0, 1.0).unwrap() + EULER_GAMMA).abs() < 1e-14);
        assert!((polygamma(0, 0.5).unwrap() + EULER_GAMMA + 2.0 * LN_2).abs() < 1e-13);
        assert!(rel(polygamma(1, 1.0).unwrap(), PI * PI / 6.0) < 1e-13);
        assert!(rel(polygamma(1, 0.5).unwrap(), PI * PI / 2.0) < 1e-13);
        assert!(rel(polygamma(2, 1.0).unwrap(), -2.0 * ZETA3) < 1e-13);
        assert!(rel(polygamma(3, 1.0).unwrap(), PI.powi(4) / 15.0) < 1e-13);
        // psi(n) = -gamma + H_{n-1}
        let h: f64 = (1..10).map(|i| 1.0 / i as f64).sum();
        assert!(rel(polygamma(0, 10.0).unwrap(), -EULER_GAMMA + h) < 1e-14);
    }

    #[test]
    fn recurrence_holds() {
        for &x in &[1e-3, 0.01, 0.3, 1.7, 4.2, 19.5, 25.0, 300.0] {
            let d = polygamma(0, x + 1.0).unwrap() - polygamma(0, x).unwrap();
            assert!(rel(d, 1.0 / x) < 1e-11, "x={x}");
            let d1 = polygamma(1, x + 1.0).unwrap() - polygamma(1, x).unwrap();
            assert!(rel(d1, -1.0 / (x * x)) < 1e-10, "x={x}");
        }
    }

    #[test]
    fn matches_hurwitz_oracle_over_range() {
        for k in 1..=4u32 {
            let kf = factorial(k);
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            for &x in &[1e-3, 0.05, 0.9, 3.3, 17.0, 55.5, 999.0] {
                let expected = sign * kf * hurwitz_oracle((k + 1) as f64, x);
                let got = polygamma(k, x).unwrap();
                assert!(rel(got, expected) < 1e-10, "k={k} x={x} got={got} exp={expected}");
            }
        }
    }

    #[test]
    fn duplication_formula() {
        // psi(2x) = psi(x)/2 + psi(x+1/2)/2 + ln 2 and
        // psi^(k)(2x) = 2^-(k+1) (psi^(k)(x) + psi^(k)(x+1/2)) for k >= 1.
        for &x in &[0.01, 0.7, 2.5, 12.0, 400.0] {
            let lhs = polygamma(0, 2.0 * x).unwrap();
            let rhs = 0.5 * polygamma(0, x).unwrap() + 0.5 * polygamma(0, x + 0.5).unwrap() + LN_2;
            assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()), "x={x}");
            for k in 1..=5u32 {
                let lhs = polygamma(k, 2.0 * x).unwrap();
                let rhs = (polygamma(k, x).unwrap() + polygamma(k, x + 0.5).unwrap())
                    / 2f64.powi(k as i32 + 1);
                assert!(rel(lhs, rhs) < 1e-11, "k={k} x={x}");
            }
        }
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(polygamma(0, 0.0).is_err());
        assert!(polygamma(2, -1.0).is_err());
        assert!(polygamma(0, f64::NAN).is_err());
    }
}
