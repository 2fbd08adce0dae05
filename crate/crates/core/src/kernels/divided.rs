//! First and second divided differences of scalar functions.

use super::function::ScalarFunction;
use crate::error::Result;

/// Relative width of the near-diagonal band where `f^[1]` switches to `f'`.
pub const DIAGONAL_BAND: f64 = 1e-7;

/// Relative spread below which `f^[2]` is evaluated by quadrature of `f''`.
pub const SECOND_DIFFERENCE_QUADRATURE_SPREAD: f64 = 0.1;

/// `f^[1](x, y) = (f(x) - f(y)) / (x - y)`, or `f'((x + y) / 2)` when
/// `|x - y| <= 1e-7 (1 + max(|x|, |y|))`. Exactly symmetric in `x, y`.
///
/// ```
/// use dti_core::kernels::{divided_difference_1, ScalarFunction};
/// let sq = ScalarFunction::monomial(2);
/// assert_eq!(divided_difference_1(&sq, 3.0, 1.0).unwrap(), 4.0);
/// assert_eq!(divided_difference_1(&sq, 2.5, 2.5).unwrap(), 5.0);
/// ```
pub fn divided_difference_1(f: &ScalarFunction, x: f64, y: f64) -> Result<f64> {
    let scale = 1.0 + x.abs().max(y.abs());
    if (x - y).abs() > DIAGONAL_BAND * scale {
        Ok((f.eval(x)? - f.eval(y)?) / (x - y))
    } else {
        f.derivative(1, 0.5 * (x + y))
    }
}

/// `f^[2](x, y, z) = (f^[1](y, z) - f^[1](x, y)) / (z - x)`, symmetric in all arguments.
///
/// Arguments are sorted first. When their spread is below
/// `0.1 (1 + max |arg|)` the value is computed from the Hermite-Genocchi
/// representation `f^[2] = int_simplex f''` with a tensor Gauss-Legendre rule,
/// which avoids the cancellation of nested difference quotients; at full
/// coincidence this is `f''(x) / 2`.
pub fn divided_difference_2(f: &ScalarFunction, x: f64, y: f64, z: f64) -> Result<f64> {
    let mut v = [x, y, z];
    v.sort_by(f64::total_cmp);
    let [a, b, c] = v;
    let scale = 1.0 + a.abs().max(c.abs());
    if c - a > SECOND_DIFFERENCE_QUADRATURE_SPREAD * scale {
        Ok((divided_difference_1(f, b, c)? - divided_difference_1(f, a, b)?) / (c - a))
    } else {
        simplex_second_derivative(f, a, b, c)
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]` (8 points).
const GL8: [(f64, f64); 8] = [
    (0.019_855_071_751_231_856, 0.050_614_268_145_188_13),
    (0.101_666_761_293_186_63, 0.111_190_517_226_687_24),
    (0.237_233_795_041_835_5, 0.156_853_322_938_943_64),
    (0.408_282_678_752_175_1, 0.181_341_891_689_180_99),
    (0.591_717_321_247_824_9, 0.181_341_891_689_180_99),
    (0.762_766_204_958_164_5, 0.156_853_322_938_943_64),
    (0.898_333_238_706_813_4, 0.111_190_517_226_687_24),
    (0.980_144_928_248_768_1, 0.050_614_268_145_188_13),
];

/// `int_0^1 int_0^{1-u} f''(a + u (b - a) + v (c - a)) dv du` via the Duffy map `v = (1 - u) w`.
fn simplex_second_derivative(f: &ScalarFunction, a: f64, b: f64, c: f64) -> Result<f64> {
    if a == c {
        return Ok(0.5 * f.derivative(2, a)?);
    }
    let mut acc = 0.0;
    for &(u, wu) in &GL8 {
        let mut inner = 0.0;
        for &(w, ww) in &GL8 {
            let v = (1.0 - u) * w;
            let t = (a + u * (b - a) + v * (c - a)).clamp(a, c);
            inner += ww * f.derivative(2, t)?;
        }
        acc += wu * (1.0 - u) * inner;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::E;

    #[test]
    fn first_difference_examples() {
        let sq = ScalarFunction::monomial(2);
        assert_eq!(divided_difference_1(&sq, 3.0, 1.0).unwrap(), 4.0);
        assert_eq!(divided_difference_1(&sq, 1.7, 1.7).unwrap(), 3.4);
        let e = divided_difference_1(&ScalarFunction::Exp, 1.0, 0.0).unwrap();
        assert!((e - (E - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn first_difference_continuous_across_band() {
        let f = ScalarFunction::Exp;
        for &x in &[-3.0, 0.0, 0.4, 2.0, 7.0] {
            let band = DIAGONAL_BAND * (1.0 + f64::abs(x));
            let inside = divided_difference_1(&f, x, x + 0.99 * band).unwrap();
            let outside = divided_difference_1(&f, x, x + 1.01 * band).unwrap();
            assert!((inside - outside).abs() <= 1e-5, "x={x}");
        }
    }

    #[test]
    fn second_difference_examples() {
        let sq = ScalarFunction::monomial(2);
        let cube = ScalarFunction::monomial(3);
        let lin = ScalarFunction::polynomial(&[2.0, -1.5]);
        assert!((divided_difference_2(&sq, 0.3, -2.0, 5.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((divided_difference_2(&cube, 0.0, 1.0, 2.0).unwrap() - 3.0).abs() < 1e-14);
        assert!(divided_difference_2(&lin, 1.0, 4.0, -2.0).unwrap().abs() < 1e-14);
        // quadrature branch: x^3 gives x + y + z exactly
        let q = divided_difference_2(&cube, 1.0, 1.01, 1.02).unwrap();
        assert!((q - 3.03).abs() < 1e-13);
        assert!((divided_difference_2(&cube, 2.0, 2.0, 2.0).unwrap() - 6.0).abs() < 1e-13);
    }

    /// Newton's formula evaluated in extended form for well separated points.
    fn newton_oracle(f: impl Fn(f64) -> f64, x: f64, y: f64, z: f64) -> f64 {
        f(x) / ((x - y) * (x - z)) + f(y) / ((y - x) * (y - z)) + f(z) / ((z - x) * (z - y))
    }

    #[test]
    fn second_difference_matches_newton_on_both_branches() {
        let f = ScalarFunction::Exp;
        for &(x, y, z) in &[(0.0, 0.5, 1.3), (0.2, 0.23, 0.27), (-1.0, 2.0, 0.7), (3.0, 3.05, 3.12)] {
            let got = divided_difference_2(&f, x, y, z).unwrap();
            let want = newton_oracle(f64::exp, x, y, z);
            assert!((got - want).abs() < 1e-9 * want.abs(), "{x} {y} {z}: {got} vs {want}");
        }
    }

    proptest! {
        #[test]
        fn first_difference_symmetric(x in -5.0f64..5.0, y in -5.0f64..5.0) {
            let f = ScalarFunction::Exp;
            prop_assert_eq!(divided_difference_1(&f, x, y).unwrap(), divided_difference_1(&f, y, x).unwrap());
        }

        #[test]
        fn second_difference_symmetric(x in -3.0f64..3.0, y in -3.0f64..3.0, z in -3.0f64..3.0) {
            let f = ScalarFunction::Exp;
            let base = divided_difference_2(&f, x, y, z).unwrap();
            for p in [(y, x, z), (z, y, x), (x, z, y), (y, z, x), (z, x, y)] {
                prop_assert_eq!(base, divided_difference_2(&f, p.0, p.1, p.2).unwrap());
            }
        }

        #[test]
        fn mean_value_domination(x in 0.5f64..2.0, y in 0.5f64..2.0) {
            // exp' is monotone, so |exp^[1]| <= max_[0.5, 2] exp = e^2
            let v = divided_difference_1(&ScalarFunction::Exp, x, y).unwrap();
            prop_assert!(v.abs() <= 2f64.exp() * (1.0 + 1e-12));
            let lo = x.min(y).exp();
            prop_assert!(v >= lo * (1.0 - 1e-9));
        }

        #[test]
        fn second_difference_brackets_half_second_derivative(
            x in 0.0f64..2.0, y in 0.0f64..2.0, z in 0.0f64..2.0,
        ) {
            let v = divided_difference_2(&ScalarFunction::Exp, x, y, z).unwrap();
            let lo = x.min(y).min(z);
            let hi = x.max(y).max(z);
            prop_assert!(v >= 0.5 * lo.exp() * (1.0 - 1e-8));
            prop_assert!(v <= 0.5 * hi.exp() * (1.0 + 1e-8));
        }
    }
}
