use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::timefreq::Window;
use crate::Point;

/// Default Hermite basis size for the fractional Fourier transform.
pub const DEFAULT_FRFT_BASIS: usize = 256;

/// Angle `θ` with `ω = (cos θ, sin θ)`.
pub fn direction_angle(omega: Point) -> Result<f64> {
    let len = omega[0].hypot(omega[1]);
    if (len - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("direction must be a unit vector, |ω| = {len}")));
    }
    Ok(omega[1].atan2(omega[0]))
}

/// Fractional Fourier transform `F^ω φ = Σ_k e^{-ikθ} ⟨φ, h_k⟩ h_k`.
///
/// `ω = (1, 0)` is the identity and `ω = (0, 1)` is the unitary Fourier
/// transform `(2π)^{-1/2} ∫ e^{-ixξ} φ(x) dx`.
pub fn frft(phi: &Window, omega: Point, basis: usize) -> Result<Window> {
    let theta = direction_angle(omega)?;
    let mut coeffs = phi.hermite_coefficients(basis)?;
    for (k, c) in coeffs.iter_mut().enumerate() {
        *c *= Complex64::from_polar(1.0, -(k as f64) * theta);
    }
    let top = coeffs.iter().rposition(|c| c.norm() > 1e-16).unwrap_or(0);
    coeffs.truncate(top + 1);
    Ok(Window::Expansion { coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timefreq::{gaussian_window, hermite_window};
    use std::f64::consts::PI;

    /// Fourier transform by direct trapezoid sum on a fine grid.
    fn fourier(phi: &Window, xi: f64) -> Complex64 {
        let d = phi.decay_hint();
        let dx = 0.01;
        let n = (2.0 * d / dx) as usize;
        (0..=n)
            .map(|i| {
                let x = -d + i as f64 * dx;
                phi.eval(x) * Complex64::from_polar(1.0, -x * xi)
            })
            .sum::<Complex64>()
            * dx
            / (2.0 * PI).sqrt()
    }

    #[test]
    fn identity_direction() {
        let phi = Window::Expansion {
            coeffs: vec![Complex64::new(0.5, 0.1), Complex64::new(0.0, -0.7), Complex64::new(0.3, 0.0)],
        };
        let out = frft(&phi, [1.0, 0.0], 32).unwrap();
        for x in [-3.0, -0.4, 0.0, 1.1, 2.5] {
            assert!((out.eval(x) - phi.eval(x)).norm() < 1e-10);
        }
    }

    #[test]
    fn quarter_turn_is_fourier_transform() {
        for k in 0..5 {
            let phi = hermite_window(k);
            let out = frft(&phi, [0.0, 1.0], 16).unwrap();
            for xi in [-2.0, -0.3, 0.8, 1.7] {
                let want = fourier(&phi, xi);
                assert!((out.eval(xi) - want).norm() < 1e-10, "k = {k}, ξ = {xi}");
            }
        }
        let g = frft(&gaussian_window(), [0.0, 1.0], 16).unwrap();
        assert!((g.eval(0.7) - gaussian_window().eval(0.7)).norm() < 1e-15);
        let h1 = frft(&hermite_window(1), [0.0, 1.0], 16).unwrap();
        assert!((h1.eval(0.9) + Complex64::i() * hermite_window(1).eval(0.9)).norm() < 1e-15);
    }

    #[test]
    fn unitary() {
        let phi = Window::Expansion {
            coeffs: (0..12).map(|k| Complex64::new((k as f64).cos(), 0.1 * k as f64) / 3.0).collect(),
        };
        for t in [0.3f64, 1.9, 4.0] {
            let out = frft(&phi, [t.cos(), t.sin()], 64).unwrap();
            assert!((out.l2_norm() - phi.l2_norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_unit_direction() {
        assert!(frft(&gaussian_window(), [1.0, 1.0], 8).is_err());
    }
}
