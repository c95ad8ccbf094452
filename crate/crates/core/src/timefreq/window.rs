use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::hermite_functions;

/// `|h_k(x)| < 1e-16` once `|x|` exceeds the turning point `√(2k+1)` by this.
const GAUSSIAN_DECAY: f64 = 8.6;
/// Coefficients below this are dropped from expansions.
const EXPANSION_FLOOR: f64 = 1e-16;

/// A Schwartz-class window on the real line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Window {
    /// `π^{-1/4} e^{-x²/2}`
    Gaussian,
    /// The `k`-th Hermite function.
    Hermite { k: usize },
    /// `Σ c_k h_k`.
    Expansion { coeffs: Vec<Complex64> },
    /// Samples `values[i]` at `x0 + i·h`, interpolated by cubic Catmull–Rom
    /// splines and zero outside the sampled range.
    Samples { x0: f64, h: f64, values: Vec<Complex64> },
}

pub fn gaussian_window() -> Window {
    Window::Gaussian
}

pub fn hermite_window(k: usize) -> Window {
    Window::Hermite { k }
}

impl Window {
    pub fn eval(&self, x: f64) -> Complex64 {
        match self {
            Window::Gaussian => Complex64::new(PI.powf(-0.25) * (-0.5 * x * x).exp(), 0.0),
            Window::Hermite { k } => Complex64::new(hermite_functions(x, k + 1)[*k], 0.0),
            Window::Expansion { coeffs } => {
                let h = hermite_functions(x, coeffs.len());
                coeffs.iter().zip(&h).map(|(c, v)| c * v).sum()
            }
            Window::Samples { x0, h, values } => catmull_rom(*x0, *h, values, x),
        }
    }

    /// Half-width beyond which `|φ| < 1e-16`.
    pub fn decay_hint(&self) -> f64 {
        match self {
            Window::Gaussian => GAUSSIAN_DECAY,
            Window::Hermite { k } => (2.0 * *k as f64 + 1.0).sqrt() + GAUSSIAN_DECAY,
            Window::Expansion { coeffs } => {
                let top = coeffs.iter().rposition(|c| c.norm() > EXPANSION_FLOOR).unwrap_or(0);
                (2.0 * top as f64 + 1.0).sqrt() + GAUSSIAN_DECAY
            }
            Window::Samples { x0, h, values } => {
                let x1 = x0 + h * (values.len().max(1) - 1) as f64;
                x0.abs().max(x1.abs())
            }
        }
    }

    /// `‖φ‖₂` by trapezoid quadrature, which is spectrally accurate for
    /// rapidly decaying smooth windows.
    pub fn l2_norm(&self) -> f64 {
        match self {
            Window::Gaussian | Window::Hermite { .. } => 1.0,
            Window::Expansion { coeffs } => coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
            Window::Samples { .. } => {
                let d = self.decay_hint();
                let n = 8192;
                let dx = 2.0 * d / n as f64;
                ((0..=n).map(|i| self.eval(-d + i as f64 * dx).norm_sqr()).sum::<f64>() * dx).sqrt()
            }
        }
    }

    /// `⟨self, other⟩ = ∫ self · conj(other)`.
    pub fn inner(&self, other: &Window) -> Complex64 {
        let d = self.decay_hint().max(other.decay_hint());
        let n = 8192;
        let dx = 2.0 * d / n as f64;
        (0..=n)
            .map(|i| {
                let x = -d + i as f64 * dx;
                self.eval(x) * other.eval(x).conj()
            })
            .sum::<Complex64>()
            * dx
    }

    /// Hermite coefficients `c_k = ⟨φ, h_k⟩` for `k < count`.
    ///
    /// Errors with [`Error::BasisTooSmall`] when the last tenth of the
    /// coefficients still carries more than `1e-10`.
    pub fn hermite_coefficients(&self, count: usize) -> Result<Vec<Complex64>> {
        if count == 0 {
            return Err(Error::InvalidArgument("Hermite basis must be non-empty".into()));
        }
        let coeffs = match self {
            Window::Gaussian => one_hot(0, count),
            Window::Hermite { k } if *k >= count => return Err(Error::BasisTooSmall { tail: 1.0 }),
            Window::Hermite { k } => one_hot(*k, count),
            Window::Expansion { coeffs } => {
                let mut out = vec![Complex64::new(0.0, 0.0); count];
                for (o, c) in out.iter_mut().zip(coeffs) {
                    *o = *c;
                }
                let dropped = coeffs.iter().skip(count).map(|c| c.norm()).fold(0.0, f64::max);
                if dropped > 1e-10 {
                    return Err(Error::BasisTooSmall { tail: dropped });
                }
                out
            }
            Window::Samples { .. } => {
                let d = self.decay_hint().max((2.0 * count as f64 + 1.0).sqrt() + GAUSSIAN_DECAY);
                let dx = 0.02;
                let n = (2.0 * d / dx).ceil() as usize;
                let mut out = vec![Complex64::new(0.0, 0.0); count];
                for i in 0..=n {
                    let x = -d + i as f64 * dx;
                    let v = self.eval(x);
                    if v.norm() == 0.0 {
                        continue;
                    }
                    for (o, h) in out.iter_mut().zip(hermite_functions(x, count)) {
                        *o += v * h * dx;
                    }
                }
                out
            }
        };
        let from = count - count.div_ceil(10);
        let tail = coeffs[from..].iter().map(|c| c.norm()).fold(0.0, f64::max);
        if tail > 1e-10 {
            return Err(Error::BasisTooSmall { tail });
        }
        Ok(coeffs)
    }
}

fn one_hot(k: usize, count: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); count];
    v[k] = Complex64::new(1.0, 0.0);
    v
}

fn catmull_rom(x0: f64, h: f64, values: &[Complex64], x: f64) -> Complex64 {
    let n = values.len();
    let t = (x - x0) / h;
    if n == 0 || t < 0.0 || t > (n - 1) as f64 {
        return Complex64::new(0.0, 0.0);
    }
    let i = (t.floor() as usize).min(n.saturating_sub(2));
    let u = t - i as f64;
    let get = |j: isize| {
        if j < 0 || j as usize >= n {
            Complex64::new(0.0, 0.0)
        } else {
            values[j as usize]
        }
    };
    let i = i as isize;
    let (p0, p1, p2, p3) = (get(i - 1), get(i), get(i + 1), get(i + 2));
    let u2 = u * u;
    let u3 = u2 * u;
    (p1 * 2.0 + (p2 - p0) * u + (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * u2 + (p1 * 3.0 - p0 - p2 * 3.0 + p3) * u3) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::GaussLegendre;

    #[test]
    fn gaussian_normalisation() {
        let g = gaussian_window();
        assert!((g.eval(0.0).re - PI.powf(-0.25)).abs() < 1e-16);
        let rule = GaussLegendre::new(200);
        let norm2 = rule.integrate(-12.0, 12.0, |x| g.eval(x).norm_sqr());
        assert!((norm2 - 1.0).abs() < 1e-12);
        assert!(g.eval(g.decay_hint()).norm() < 1e-16);
    }

    #[test]
    fn hermite_windows_are_unit() {
        let rule = GaussLegendre::new(400);
        for k in 0..=10 {
            let w = hermite_window(k);
            let d = w.decay_hint();
            let norm2 = rule.integrate(-d, d, |x| w.eval(x).norm_sqr());
            assert!((norm2 - 1.0).abs() < 1e-12, "k = {k}: {norm2}");
        }
    }

    #[test]
    fn sampled_window_coefficients() {
        let x0 = -12.0;
        let h = 0.01;
        let values = (0..2401)
            .map(|i| hermite_window(3).eval(x0 + i as f64 * h) * 0.6 + gaussian_window().eval(x0 + i as f64 * h) * 0.8)
            .collect();
        let w = Window::Samples { x0, h, values };
        let c = w.hermite_coefficients(40).unwrap();
        assert!((c[0].re - 0.8).abs() < 1e-6);
        assert!((c[3].re - 0.6).abs() < 1e-6);
        assert!((w.l2_norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn expansion_overflowing_basis_is_rejected() {
        let w = hermite_window(30);
        assert!(matches!(w.hermite_coefficients(20), Err(Error::BasisTooSmall { .. })));
        let w = hermite_window(19);
        assert!(matches!(w.hermite_coefficients(20), Err(Error::BasisTooSmall { .. })));
        assert!(w.hermite_coefficients(40).is_ok());
    }
}
