use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::GaussLegendre;
use crate::timefreq::frft::{direction_angle, frft, DEFAULT_FRFT_BASIS};
use crate::timefreq::{PhaseWeight, Window};
use crate::Point;

const FOURIER_FLOOR: f64 = 1e-14;
const TAIL_TOLERANCE: f64 = 1e-12;
const FLAT_PROBE: f64 = 5e-7;
const FLAT_TOLERANCE: f64 = 1e-9;

/// Uniform grid `start + i·step`, `i < count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl Default for LambdaGrid {
    /// `[-8, 8]` with step `1/256`.
    fn default() -> Self {
        Self::symmetric(8.0, 256)
    }
}

impl LambdaGrid {
    /// `[-extent, extent]` with `per_unit` steps per unit length.
    pub fn symmetric(extent: f64, per_unit: usize) -> Self {
        let step = 1.0 / per_unit as f64;
        let count = (2.0 * extent * per_unit as f64).round() as usize + 1;
        Self { start: -extent, step, count }
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.point(self.count - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.point(i))
    }
}

/// The edge profile `Q_ω(λ) = ∫_{z·ω ≤ λ} W(z) dz` on a λ-grid, with its
/// derivative for cubic Hermite interpolation between nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileQ {
    pub omega: Point,
    pub lambdas: LambdaGrid,
    values: Vec<Complex64>,
    density: Vec<Complex64>,
    tail_clamp: f64,
}

impl ProfileQ {
    fn new(omega: Point, lambdas: LambdaGrid, values: Vec<Complex64>, density: Vec<Complex64>) -> Self {
        let lo = values[0];
        let hi = *values.last().expect("non-empty grid");
        let mut tail_clamp = 0.0f64;
        for (i, v) in values.iter().enumerate() {
            let l = lambdas.point(i);
            let settled = if l < 0.0 { (v - lo).norm() < TAIL_TOLERANCE } else { (v - hi).norm() < TAIL_TOLERANCE };
            if !settled {
                tail_clamp = tail_clamp.max(l.abs());
            }
        }
        Self {
            omega,
            lambdas,
            values,
            density,
            tail_clamp,
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `dQ/dλ` at the grid nodes.
    pub fn density(&self) -> &[Complex64] {
        &self.density
    }

    /// `|λ|` beyond which the samples equal their end values within `1e-12`.
    pub fn tail_clamp(&self) -> f64 {
        self.tail_clamp
    }

    /// `Q(+∞)`, i.e. `∫ W`.
    pub fn limit(&self) -> Complex64 {
        *self.values.last().expect("non-empty grid")
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// Cubic Hermite interpolation, constant extension off the grid.
    pub fn eval(&self, lambda: f64) -> Complex64 {
        let g = self.lambdas;
        if lambda <= g.start {
            return self.values[0];
        }
        if lambda >= g.end() {
            return self.limit();
        }
        let t = (lambda - g.start) / g.step;
        let i = (t.floor() as usize).min(g.count - 2);
        let u = t - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.density[i] * g.step, self.density[i + 1] * g.step);
        let u2 = u * u;
        let u3 = u2 * u;
        y0 * (2.0 * u3 - 3.0 * u2 + 1.0) + d0 * (u3 - 2.0 * u2 + u) + y1 * (-2.0 * u3 + 3.0 * u2) + d1 * (u3 - u2)
    }

    pub fn eval_real(&self, lambda: f64) -> f64 {
        self.eval(lambda).re
    }

    /// True when the real parts never decrease by more than `tol`.
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.values.windows(2).all(|p| p[1].re >= p[0].re - tol)
    }

    /// `∫ |Q(λ) − χ_{[0,∞)}(λ)| dλ` over the grid, trapezoid rule split at 0.
    pub fn l1_distance_to_step(&self) -> f64 {
        let g = self.lambdas;
        let f = |l: f64| (self.eval(l) - if l >= 0.0 { 1.0 } else { 0.0 }).norm();
        let rule = GaussLegendre::new(4);
        let mut acc = 0.0;
        for i in 0..g.count - 1 {
            let (a, b) = (g.point(i), g.point(i + 1));
            if a < 0.0 && b > 0.0 {
                acc += rule.integrate(a, 0.0, f) + rule.integrate(0.0, b, f);
            } else {
                acc += rule.integrate(a, b, f);
            }
        }
        acc
    }

    /// The profile of the weight translated by `v`: `λ ↦ Q(λ − v·ω)`.
    pub fn shifted(&self, offset: f64) -> Self {
        let values = self.lambdas.points().map(|l| self.eval(l - offset)).collect();
        let density = self.lambdas.points().map(|l| self.density_at(l - offset)).collect();
        Self::new(self.omega, self.lambdas, values, density)
    }

    fn density_at(&self, lambda: f64) -> Complex64 {
        let g = self.lambdas;
        if lambda <= g.start || lambda >= g.end() {
            return Complex64::new(0.0, 0.0);
        }
        let t = (lambda - g.start) / g.step;
        let i = (t.floor() as usize).min(g.count - 2);
        let u = t - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.density[i] * g.step, self.density[i + 1] * g.step);
        let u2 = u * u;
        (y0 * (6.0 * u2 - 6.0 * u) + d0 * (3.0 * u2 - 4.0 * u + 1.0) + y1 * (6.0 * u - 6.0 * u2) + d1 * (3.0 * u2 - 2.0 * u))
            / g.step
    }
}

/// `Q_ω` by the Fourier slice theorem: the projection `R(λ) = ∫_{z·ω=λ} W`
/// has transform `Ŵ(κω)`, which is summed as a Fourier series of period
/// `P ≥ 4L` and integrated term by term from `−P/2`.
pub fn profile_q_halfplane(w: &PhaseWeight, omega: Point, lambdas: LambdaGrid) -> Result<ProfileQ> {
    direction_angle(omega)?;
    let grid = w.grid();
    let period = (4.0 * grid.half_extent).max(64.0);
    let dk = 2.0 * PI / period;
    let nyquist = PI / grid.spacing();

    let mut coeffs = vec![(0.0, w.fourier_at([0.0, 0.0]))];
    let scale = coeffs[0].1.norm().max(w.moments()[0]);
    for sign in [1.0, -1.0] {
        let mut quiet = 0;
        let mut m = 1;
        loop {
            let kappa = sign * m as f64 * dk;
            if kappa.abs() > nyquist {
                return Err(Error::GridTooCoarse(format!(
                    "weight transform has not decayed below {FOURIER_FLOOR:e} by the grid Nyquist frequency {nyquist}"
                )));
            }
            let v = w.fourier_at([kappa * omega[0], kappa * omega[1]]);
            coeffs.push((kappa, v));
            if v.norm() < FOURIER_FLOOR * scale {
                quiet += 1;
                if quiet >= 3 {
                    break;
                }
            } else {
                quiet = 0;
            }
            m += 1;
        }
    }

    let lambda0 = -0.5 * period;
    let norm = dk / (2.0 * PI);
    let mut values = Vec::with_capacity(lambdas.count);
    let mut density = Vec::with_capacity(lambdas.count);
    for lambda in lambdas.points() {
        let mut q = coeffs[0].1 * (lambda - lambda0);
        let mut r = coeffs[0].1;
        for &(kappa, v) in &coeffs[1..] {
            let e = Complex64::from_polar(1.0, kappa * lambda);
            let e0 = Complex64::from_polar(1.0, kappa * lambda0);
            q += v * (e - e0) / Complex64::new(0.0, kappa);
            r += v * e;
        }
        values.push(q * norm);
        density.push(r * norm);
    }
    Ok(ProfileQ::new(omega, lambdas, values, density))
}

/// `Q_ω(λ) = ∫_{−∞}^{λ} F^ω φ₂ · conj(F^ω φ₁)`, the unnormalised profile of
/// `W_{φ₂,φ₁}`, integrated with 4-point Gauss–Legendre per grid cell.
pub fn profile_q_frft(phi2: &Window, phi1: &Window, omega: Point, lambdas: LambdaGrid) -> Result<ProfileQ> {
    profile_q_frft_with_basis(phi2, phi1, omega, lambdas, DEFAULT_FRFT_BASIS)
}

pub fn profile_q_frft_with_basis(
    phi2: &Window,
    phi1: &Window,
    omega: Point,
    lambdas: LambdaGrid,
    basis: usize,
) -> Result<ProfileQ> {
    let f2 = frft(phi2, omega, basis)?;
    let f1 = frft(phi1, omega, basis)?;
    let product = |l: f64| f2.eval(l) * f1.eval(l).conj();
    let rule = GaussLegendre::new(4);
    let cell = |a: f64, b: f64| -> Complex64 {
        rule.mapped(a, b).map(|(x, w)| product(x) * w).sum()
    };

    let lower = -(f2.decay_hint().max(f1.decay_hint()));
    let mut acc = Complex64::new(0.0, 0.0);
    if lower < lambdas.start {
        let cells = ((lambdas.start - lower) / lambdas.step).ceil() as usize;
        let width = (lambdas.start - lower) / cells as f64;
        for c in 0..cells {
            let a = lower + c as f64 * width;
            acc += cell(a, a + width);
        }
    }
    let mut values = Vec::with_capacity(lambdas.count);
    let mut density = Vec::with_capacity(lambdas.count);
    for i in 0..lambdas.count {
        if i > 0 {
            acc += cell(lambdas.point(i - 1), lambdas.point(i));
        }
        values.push(acc);
        density.push(product(lambdas.point(i)));
    }
    Ok(ProfileQ::new(omega, lambdas, values, density))
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (f(m) >= 0.0) == (fa >= 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn require_counting_profile(q: &ProfileQ, delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("threshold must lie in (0, 1), got {delta}")));
    }
    let imag = q.max_imag();
    if imag > 1e-10 {
        return Err(Error::ComplexProfile { max_imag: imag });
    }
    if q.values[0].re >= delta || q.limit().re <= delta {
        return Err(Error::InvalidArgument(format!(
            "profile does not cross {delta} inside the λ-grid (Q(start) = {}, Q(end) = {})",
            q.values[0].re,
            q.limit().re
        )));
    }
    Ok(())
}

/// `g_ω(δ) = μ({λ ≤ 0 : Q > δ}) − μ({λ ≥ 0 : Q < δ})`.
///
/// Crossings of `δ` are located on the grid and refined by bisection on the
/// interpolant; the measures are then exact sums of interval lengths.
pub fn counting_profile_g(q: &ProfileQ, delta: f64) -> Result<f64> {
    require_counting_profile(q, delta)?;
    let g = q.lambdas;
    let f = |l: f64| q.eval_real(l) - delta;
    let mut crossings = Vec::new();
    for i in 0..g.count - 1 {
        let (a, b) = (q.values[i].re - delta, q.values[i + 1].re - delta);
        if (a >= 0.0) != (b >= 0.0) {
            let c = bisect(f, g.point(i), g.point(i + 1));
            if f(c - FLAT_PROBE).abs() < FLAT_TOLERANCE && f(c + FLAT_PROBE).abs() < FLAT_TOLERANCE {
                return Err(Error::FlatCrossing { lambda: c });
            }
            crossings.push(c);
        }
    }
    let mut breaks = vec![g.start];
    breaks.extend(crossings.iter().copied().filter(|&c| c != 0.0));
    breaks.push(0.0);
    breaks.push(g.end());
    breaks.sort_by(f64::total_cmp);

    let mut above_left = 0.0;
    let mut below_right = 0.0;
    for seg in breaks.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if b <= a {
            continue;
        }
        let above = f(0.5 * (a + b)) > 0.0;
        if b <= 0.0 && above {
            above_left += b - a;
        } else if a >= 0.0 && !above {
            below_right += b - a;
        }
    }
    Ok(above_left - below_right)
}

/// `Q^{-1}(δ)` by bisection, valid for non-decreasing `Q`; then
/// `g_ω(δ) = −Q^{-1}(δ)`.
pub fn inverse_profile(q: &ProfileQ, delta: f64) -> Result<f64> {
    require_counting_profile(q, delta)?;
    let i = q.values.iter().position(|v| v.re >= delta).expect("checked above");
    let g = q.lambdas;
    Ok(bisect(|l| q.eval_real(l) - delta, g.point(i - 1), g.point(i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timefreq::{gaussian_window, hermite_window, wigner, WeightGrid};

    fn erf_profile(l: f64) -> f64 {
        0.5 * (1.0 + statrs::function::erf::erf(l))
    }

    fn gaussian_weight() -> PhaseWeight {
        let g = gaussian_window();
        wigner(&g, &g, WeightGrid::for_windows(&g, &g)).unwrap()
    }

    #[test]
    fn halfplane_profile_of_gaussian() {
        let w = gaussian_weight();
        for t in [0.0f64, 0.7, 2.2] {
            let q = profile_q_halfplane(&w, [t.cos(), t.sin()], LambdaGrid::default()).unwrap();
            let err = q
                .lambdas
                .points()
                .zip(q.values())
                .map(|(l, v)| (v.re - erf_profile(l)).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-8, "{err}");
            assert!((q.eval_real(0.0) - 0.5).abs() < 1e-12);
            assert!((q.limit().re - 1.0).abs() < 1e-10);
            assert!(q.is_monotone(1e-12));
            // interpolation between nodes
            let l = 0.123456;
            assert!((q.eval_real(l) - erf_profile(l)).abs() < 1e-9);
        }
    }

    #[test]
    fn frft_profile_of_gaussian() {
        let g = gaussian_window();
        let q = profile_q_frft(&g, &g, [0.6, 0.8], LambdaGrid::default()).unwrap();
        for (l, v) in q.lambdas.points().zip(q.values()).step_by(37) {
            assert!((v.re - erf_profile(l)).abs() < 1e-10);
        }
    }

    #[test]
    fn orthogonal_windows_have_zero_limit() {
        let (a, b) = (gaussian_window(), hermite_window(1));
        let q = profile_q_frft(&a, &b, [1.0, 0.0], LambdaGrid::default()).unwrap();
        assert!(q.limit().norm() < 1e-12);
    }

    #[test]
    fn counting_profile_on_gaussian() {
        let w = gaussian_weight();
        let q = profile_q_halfplane(&w, [1.0, 0.0], LambdaGrid::default()).unwrap();
        assert!(counting_profile_g(&q, 0.5).unwrap().abs() < 1e-12);
        let g = counting_profile_g(&q, 0.25).unwrap();
        assert!((g - 0.476_936_276_204_469_9).abs() < 1e-8, "{g}");
        for delta in [0.1, 0.25, 0.6, 0.9] {
            let a = counting_profile_g(&q, delta).unwrap();
            let b = -inverse_profile(&q, delta).unwrap();
            assert!((a - b).abs() < 1e-8);
        }
        assert!(counting_profile_g(&q, 1.5).is_err());
    }

    #[test]
    fn flat_profile_is_rejected() {
        // Q rises to 0.3, stays flat over [-1, 1], then rises to 1
        let grid = LambdaGrid::default();
        let step = |l: f64, c: f64| 0.5 * (1.0 + statrs::function::erf::erf(4.0 * (l - c)));
        let values: Vec<Complex64> =
            grid.points().map(|l| Complex64::new(0.3 * step(l, -2.0) + 0.7 * step(l, 2.0), 0.0)).collect();
        let density = vec![Complex64::new(0.0, 0.0); grid.count];
        let q = ProfileQ::new([1.0, 0.0], grid, values, density);
        assert!(matches!(counting_profile_g(&q, 0.3), Err(Error::FlatCrossing { .. })));
    }

    #[test]
    fn step_distance_bounded_by_first_moment() {
        let w = gaussian_weight();
        for t in [0.0f64, 1.0, 2.5] {
            let omega = [t.cos(), t.sin()];
            let q = profile_q_halfplane(&w, omega, LambdaGrid::default()).unwrap();
            let lhs = q.l1_distance_to_step();
            let rhs = w.directional_moment(omega);
            // equality holds for the Gaussian: both sides are 1/√π
            assert!((lhs - 1.0 / PI.sqrt()).abs() < 1e-8, "{lhs}");
            // the grid moment carries an O(h²) error from the kink of |z·ω|
            assert!(lhs <= rhs * (1.0 + 5e-3), "{lhs} vs {rhs}");
            assert!(rhs <= w.moments()[1] + 1e-10);
        }
    }

    #[test]
    fn shifted_profile() {
        let w = gaussian_weight();
        let q = profile_q_halfplane(&w, [1.0, 0.0], LambdaGrid::default()).unwrap();
        let s = q.shifted(0.3);
        assert!((s.eval_real(0.3) - 0.5).abs() < 1e-10);
        assert!((-inverse_profile(&s, 0.25).unwrap() - (0.476_936_276_204_469_9 - 0.3)).abs() < 1e-8);
    }
}
