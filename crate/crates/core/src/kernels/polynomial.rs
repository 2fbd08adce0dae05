//! Real polynomials with exact extremum search on intervals.

/// Polynomial with coefficients in ascending powers.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: u32) -> Polynomial {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    /// Real roots in `[a, b]`, sorted.
    ///
    /// The interval is split at the roots of the derivative (found recursively);
    /// on each monotone piece a sign change is located by bisection.
    pub fn roots_in(&self, a: f64, b: f64) -> Vec<f64> {
        match self.degree() {
            None | Some(0) => Vec::new(),
            Some(1) => {
                let r = -self.coeffs[0] / self.coeffs[1];
                if r >= a && r <= b {
                    vec![r]
                } else {
                    Vec::new()
                }
            }
            Some(_) => {
                let mut knots = vec![a];
                knots.extend(self.derivative().roots_in(a, b));
                knots.push(b);
                let mut roots: Vec<f64> = Vec::new();
                for w in knots.windows(2) {
                    let (lo, hi) = (w[0], w[1]);
                    let (flo, fhi) = (self.eval(lo), self.eval(hi));
                    let candidate = if flo == 0.0 {
                        Some(lo)
                    } else if fhi == 0.0 {
                        Some(hi)
                    } else if (flo < 0.0) != (fhi < 0.0) {
                        Some(bisect(|x| self.eval(x), lo, hi, flo))
                    } else {
                        None
                    };
                    if let Some(r) = candidate {
                        if roots.last().is_none_or(|&last| r > last) {
                            roots.push(r);
                        }
                    }
                }
                roots
            }
        }
    }

    /// `max_{[a, b]} |p|`, attained at an endpoint or a critical point.
    pub fn max_abs_on(&self, a: f64, b: f64) -> f64 {
        let mut best = self.eval(a).abs().max(self.eval(b).abs());
        for r in self.derivative().roots_in(a, b) {
            best = best.max(self.eval(r).abs());
        }
        best
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
