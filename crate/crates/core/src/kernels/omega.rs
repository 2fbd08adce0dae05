//! Constants `Omega` that bound divided differences on an interval.

use super::polygamma::polygamma;
use super::polynomial::Polynomial;
use crate::error::{Error, Result};

/// `sum_{k=1}^m max_{[a,b]} |f^(k)| (b - a)^k / k!` for a polynomial `f` of degree `m`.
///
/// Each inner maximum is exact: candidates are the endpoints and the roots of
/// `f^(k+1)` in `[a, b]`.
///
/// For `b - a >= 1` this dominates `sup |f^[1]|` on `[a, b]^2`. On shorter
/// intervals the `(b - a)^k` weighting can fall below `max |f'|`
/// (e.g. `x^2` on `[0, 0.5]` gives `0.75 < 1`); use a window of width at least
/// one, or [`polynomial_divided_difference_sup`], when a guaranteed bound is needed.
///
/// ```
/// use dti_core::kernels::omega_polynomial_bound;
/// assert_eq!(omega_polynomial_bound(&[0.0, 1.0], 0.0, 1.0).unwrap(), 1.0);
/// assert_eq!(omega_polynomial_bound(&[0.0, 0.0, 1.0], 0.0, 1.0).unwrap(), 3.0);
/// ```
pub fn omega_polynomial_bound(coeffs: &[f64], a: f64, b: f64) -> Result<f64> {
    check_window(a, b, false)?;
    let p = Polynomial::new(coeffs.to_vec());
    let degree = match p.degree() {
        None | Some(0) => {
            log::warn!("omega_polynomial_bound: constant polynomial, bound is 0");
            return Ok(0.0);
        }
        Some(m) => m,
    };
    let width = b - a;
    let mut total = 0.0;
    let mut deriv = p;
    let mut factorial = 1.0;
    let mut width_pow = 1.0;
    for k in 1..=degree {
        deriv = deriv.derivative();
        factorial *= k as f64;
        width_pow *= width;
        total += deriv.max_abs_on(a, b) * width_pow / factorial;
    }
    Ok(total)
}

/// `max_{[a,b]} |f'|`, the sharp bound on `|f^[1]|` over `[a, b]^2` for a polynomial.
pub fn polynomial_divided_difference_sup(coeffs: &[f64], a: f64, b: f64) -> Result<f64> {
    check_window(a, b, false)?;
    Ok(Polynomial::new(coeffs.to_vec()).derivative().max_abs_on(a, b))
}

const GRID_POINTS: usize = 10_000;
const IDENTRIC_GRID: usize = 100;

/// Bound on `|psi^(k)[1](x, y)|` for `x, y` in the window `[a, b]`, where
/// `psi^(k)` is the `k`-th polygamma function.
///
/// Takes the largest `|psi^(k+1)|` found by a dense grid over `[a, b]`
/// refined by golden-section search, and over identric means
/// `I(s, t) = e^-1 (t^t / s^s)^(1/(t-s))` of grid pairs `a <= s < t <= b`.
pub fn omega_polygamma_bound(k: u32, a: f64, b: f64) -> Result<f64> {
    check_window(a, b, true)?;
    let g = |x: f64| polygamma(k + 1, x).map(f64::abs);

    let mut best_x = a;
    let mut best = g(a)?;
    for i in 1..=GRID_POINTS {
        let x = a + (b - a) * i as f64 / GRID_POINTS as f64;
        let v = g(x)?;
        if v > best {
            best = v;
            best_x = x;
        }
    }
    let step = (b - a) / GRID_POINTS as f64;
    let lo = (best_x - step).max(a);
    let hi = (best_x + step).min(b);
    best = best.max(golden_section_max(&g, lo, hi)?);

    for i in 0..IDENTRIC_GRID {
        let s = a + (b - a) * i as f64 / IDENTRIC_GRID as f64;
        for j in (i + 1)..=IDENTRIC_GRID {
            let t = a + (b - a) * j as f64 / IDENTRIC_GRID as f64;
            let m = identric_mean(s, t);
            if m.is_finite() && m > 0.0 {
                best = best.max(g(m)?);
            }
        }
    }
    Ok(best)
}

/// `e^-1 (t^t / s^s)^(1/(t-s))`, which lies strictly between `s` and `t`.
pub fn identric_mean(s: f64, t: f64) -> f64 {
    if s == t {
        return s;
    }
    ((t * t.ln() - s * s.ln()) / (t - s) - 1.0).exp()
}

fn golden_section_max(g: &dyn Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut best = g(lo)?.max(g(hi)?);
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let mut gc = g(c)?;
    let mut gd = g(d)?;
    for _ in 0..80 {
        best = best.max(gc).max(gd);
        if gc > gd {
            hi = d;
            d = c;
            gd = gc;
            c = hi - ratio * (hi - lo);
            gc = g(c)?;
        } else {
            lo = c;
            c = d;
            gc = gd;
            d = lo + ratio * (hi - lo);
            gd = g(d)?;
        }
        if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
            break;
        }
    }
    Ok(best.max(gc).max(gd))
}

fn check_window(a: f64, b: f64, positive: bool) -> Result<()> {
    if !a.is_finite() || !b.is_finite() || !(a < b) {
        return Err(Error::InvalidParameter(format!("window [{a}, {b}] must satisfy a < b")));
    }
    if positive && a <= 0.0 {
        return Err(Error::InvalidParameter(format!("window [{a}, {b}] must be positive")));
    }
    Ok(())
}
