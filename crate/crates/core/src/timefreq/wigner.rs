use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ChirpTransform;
use crate::timefreq::Window;
use crate::Point;

const EDGE_TOLERANCE: f64 = 1e-10;

/// Square sample grid centred at the origin: `z_{ij} = (-L + i h, -L + j h)`
/// with `h = 2L/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightGrid {
    pub half_extent: f64,
    pub n: usize,
}

impl WeightGrid {
    pub fn new(half_extent: f64, n: usize) -> Result<Self> {
        if !(half_extent > 0.0) || n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "weight grid needs half_extent > 0 and a power-of-two n >= 8, got ({half_extent}, {n})"
            )));
        }
        Ok(Self { half_extent, n })
    }

    /// Grid covering both windows with spacing at most `0.09`.
    pub fn for_windows(phi2: &Window, phi1: &Window) -> Self {
        let half_extent = phi2.decay_hint().max(phi1.decay_hint()) + 2.0;
        let n = ((2.0 * half_extent / 0.09).ceil() as usize).next_power_of_two().max(256);
        Self { half_extent, n }
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_extent / self.n as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_extent + i as f64 * self.spacing()
    }
}

/// The convolution weight `W` on the phase plane, stored as samples on a
/// [`WeightGrid`] (row index `x`, column index `ξ`).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseWeight {
    grid: WeightGrid,
    samples: Vec<Complex64>,
    integral: Complex64,
    moments: [f64; 3],
    source: Option<(Window, Window, Complex64)>,
}

/// Cross-Wigner transform
/// `W_{φ₂,φ₁}(x,ξ) = (2π)^{-1} ∫ e^{-itξ} φ₂(x+t/2) conj(φ₁(x−t/2)) dt`.
///
/// The integral in `t` is a trapezoid sum with `Δt = h`, evaluated for all
/// `ξ` at once by a chirp transform. The output is checked for mass at the
/// grid edge ([`Error::GridTooSmall`]) and for mass near the `ξ`-period
/// `π/h` of the `t`-sampling ([`Error::GridTooCoarse`]).
pub fn wigner(phi2: &Window, phi1: &Window, grid: WeightGrid) -> Result<PhaseWeight> {
    let n = grid.n;
    let h = grid.spacing();
    let reach = phi2.decay_hint().max(phi1.decay_hint());
    let m = (2.0 * reach / h).ceil() as i64;
    let taps = (2 * m + 1) as usize;

    // window values on the half-step lattice -L + p h/2
    let p_min = -m;
    let p_max = 2 * (n as i64 - 1) + m;
    let half_lattice = |p: i64| -grid.half_extent + p as f64 * 0.5 * h;
    let v2: Vec<Complex64> = (p_min..=p_max).map(|p| phi2.eval(half_lattice(p))).collect();
    let v1: Vec<Complex64> = (p_min..=p_max).map(|p| phi1.eval(half_lattice(p)).conj()).collect();

    // ξ outputs from -J to J in steps of h, J ≈ π/h², covering one full period
    let j_max = (PI / (h * h)).floor() as i64;
    let n_ext = (2 * j_max + 1) as usize;
    let chirp = ChirpTransform::new(taps, -j_max, n_ext, -h * h);
    let post: Vec<Complex64> = (-j_max..=j_max)
        .map(|j| Complex64::from_polar(h / (2.0 * PI), ((m * j) as f64 * h * h).rem_euclid(2.0 * PI)))
        .collect();

    let mut input = vec![Complex64::new(0.0, 0.0); taps];
    let mut output = vec![Complex64::new(0.0, 0.0); n_ext];
    let mut scratch = vec![Complex64::new(0.0, 0.0); chirp.scratch_len()];
    let mut samples = vec![Complex64::new(0.0, 0.0); n * n];
    let mut max_in = 0.0f64;
    let mut max_outside = 0.0f64;
    let mut max_alias = 0.0f64;
    let half = (n / 2) as i64;
    for i in 0..n {
        for (l, slot) in input.iter_mut().enumerate() {
            // x_i ± t_l/2 with t_l = (l − m) h
            let off = l as i64 - m;
            let plus = 2 * i as i64 + off - p_min;
            let minus = 2 * i as i64 - off - p_min;
            *slot = v2[plus as usize] * v1[minus as usize];
        }
        chirp.apply_with_scratch(&input, &mut output, &mut scratch);
        for (k, (o, p)) in output.iter().zip(&post).enumerate() {
            let j = k as i64 - j_max;
            let v = o * p;
            if (-half..half).contains(&j) {
                samples[i * n + (j + half) as usize] = v;
                max_in = max_in.max(v.norm());
            } else if j.abs() as f64 >= 0.9 * j_max as f64 {
                max_alias = max_alias.max(v.norm());
            } else {
                max_outside = max_outside.max(v.norm());
            }
        }
    }
    if max_in == 0.0 {
        return Err(Error::InvalidArgument("Wigner transform vanishes on the grid".into()));
    }
    if max_alias > EDGE_TOLERANCE * max_in {
        return Err(Error::GridTooCoarse(format!(
            "relative Wigner magnitude {:e} near the ξ-period π/h",
            max_alias / max_in
        )));
    }
    let mut edge = max_outside;
    for i in 0..n {
        for j in [0, n - 1] {
            edge = edge.max(samples[i * n + j].norm()).max(samples[j * n + i].norm());
        }
    }
    if edge > EDGE_TOLERANCE * max_in {
        return Err(Error::GridTooSmall { leak: edge / max_in });
    }
    let mut w = PhaseWeight::from_samples(grid, samples)?;
    w.source = Some((phi2.clone(), phi1.clone(), Complex64::new(1.0, 0.0)));
    Ok(w)
}

impl PhaseWeight {
    pub fn from_samples(grid: WeightGrid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.n * grid.n {
            return Err(Error::InvalidArgument(format!(
                "expected {} weight samples, got {}",
                grid.n * grid.n,
                samples.len()
            )));
        }
        let h = grid.spacing();
        let mut integral = Complex64::new(0.0, 0.0);
        let mut moments = [0.0; 3];
        for i in 0..grid.n {
            let x = grid.coord(i);
            for j in 0..grid.n {
                let xi = grid.coord(j);
                let v = samples[i * grid.n + j];
                let r = x.hypot(xi);
                integral += v;
                let a = v.norm();
                moments[0] += a;
                moments[1] += a * r;
                moments[2] += a * r * r;
            }
        }
        let area = h * h;
        Ok(Self {
            grid,
            samples,
            integral: integral * area,
            moments: moments.map(|m| m * area),
            source: None,
        })
    }

    /// Samples a user-supplied weight on `grid`.
    pub fn from_fn<F: Fn(Point) -> Complex64>(grid: WeightGrid, f: F) -> Result<Self> {
        let n = grid.n;
        let samples = (0..n * n).map(|k| f([grid.coord(k / n), grid.coord(k % n)])).collect();
        Self::from_samples(grid, samples)
    }

    /// `W(z) = (πs²)^{-1} e^{-|z|²/s²}`, the Wigner transform of a Gaussian
    /// window when `s = 1`.
    pub fn gaussian(scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::InvalidArgument(format!("Gaussian weight scale must be positive, got {scale}")));
        }
        let half_extent = 6.2 * scale + 2.0;
        let n = ((2.0 * half_extent / (0.09 * scale.min(1.0))).ceil() as usize).next_power_of_two().max(256);
        let grid = WeightGrid::new(half_extent, n)?;
        let c = 1.0 / (PI * scale * scale);
        Self::from_fn(grid, |z| Complex64::new(c * (-(z[0] * z[0] + z[1] * z[1]) / (scale * scale)).exp(), 0.0))
    }

    /// Rescales to unit integral.
    pub fn normalized(&self) -> Result<Self> {
        if self.integral.norm() < 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "weight integral {} is too small to normalise",
                self.integral
            )));
        }
        let inv = self.integral.inv();
        let mut out = self.clone();
        for v in &mut out.samples {
            *v *= inv;
        }
        out.moments = self.moments.map(|m| m * inv.norm());
        out.integral = Complex64::new(1.0, 0.0);
        if let Some((_, _, s)) = out.source.as_mut() {
            *s *= inv;
        }
        Ok(out)
    }

    pub fn grid(&self) -> WeightGrid {
        self.grid
    }

    /// Row-major samples `[i * n + j] = W(x_i, ξ_j)`.
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn integral(&self) -> Complex64 {
        self.integral
    }

    /// `∫ |z|^k |W(z)| dz` for `k = 0, 1, 2`.
    pub fn moments(&self) -> [f64; 3] {
        self.moments
    }

    /// `∫ |z·ω| |W(z)| dz`.
    pub fn directional_moment(&self, omega: Point) -> f64 {
        let n = self.grid.n;
        let h = self.grid.spacing();
        let mut acc = 0.0;
        for i in 0..n {
            let x = self.grid.coord(i);
            for j in 0..n {
                acc += (x * omega[0] + self.grid.coord(j) * omega[1]).abs() * self.samples[i * n + j].norm();
            }
        }
        acc * h * h
    }

    /// Windows the weight was built from, with the factor `c` such that
    /// `W = c · W_{φ₂,φ₁}`.
    pub fn source_windows(&self) -> Option<(&Window, &Window, Complex64)> {
        self.source.as_ref().map(|(a, b, c)| (a, b, *c))
    }

    pub fn max_imag(&self) -> f64 {
        self.samples.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.max_imag() <= tol * self.moments[0].max(1e-300)
    }

    /// Half-width of the square outside which the weight is negligible.
    pub fn support_radius(&self) -> f64 {
        self.grid.half_extent * std::f64::consts::SQRT_2
    }

    /// Bicubic Catmull–Rom interpolation; zero off the grid.
    pub fn eval(&self, z: Point) -> Complex64 {
        let n = self.grid.n;
        let h = self.grid.spacing();
        let tx = (z[0] + self.grid.half_extent) / h;
        let ty = (z[1] + self.grid.half_extent) / h;
        if tx < 0.0 || ty < 0.0 || tx > (n - 1) as f64 || ty > (n - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let (ix, iy) = (tx.floor() as i64, ty.floor() as i64);
        let (ux, uy) = (tx - ix as f64, ty - iy as f64);
        let wx = catmull_rom_weights(ux);
        let wy = catmull_rom_weights(uy);
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, wa) in wx.iter().enumerate() {
            let i = ix + a as i64 - 1;
            if i < 0 || i >= n as i64 {
                continue;
            }
            for (b, wb) in wy.iter().enumerate() {
                let j = iy + b as i64 - 1;
                if j < 0 || j >= n as i64 {
                    continue;
                }
                acc += self.samples[i as usize * n + j as usize] * (wa * wb);
            }
        }
        acc
    }

    /// `Ŵ(k) = ∫ W(z) e^{-ik·z} dz` by the trapezoid rule on the grid.
    pub fn fourier_at(&self, k: Point) -> Complex64 {
        let n = self.grid.n;
        let h = self.grid.spacing();
        let ex: Vec<Complex64> = (0..n).map(|j| Complex64::from_polar(1.0, -k[1] * self.grid.coord(j))).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let row: Complex64 = self.samples[i * n..(i + 1) * n].iter().zip(&ex).map(|(w, e)| w * e).sum();
            acc += row * Complex64::from_polar(1.0, -k[0] * self.grid.coord(i));
        }
        acc * h * h
    }

    /// `Ŵ(m₁Δk, m₂Δk)` for `|m₁|, |m₂| ≤ m_max`, row-major over
    /// `(m₁ + m_max, m₂ + m_max)`.
    pub fn fourier_lattice(&self, dk: f64, m_max: i64) -> Result<Vec<Complex64>> {
        if !(dk > 0.0) || m_max < 0 {
            return Err(Error::InvalidArgument("Fourier lattice needs dk > 0 and m_max >= 0".into()));
        }
        let n = self.grid.n;
        let h = self.grid.spacing();
        let side = (2 * m_max + 1) as usize;
        let chirp = ChirpTransform::new(n, -m_max, side, -dk * h);
        let mut scratch = vec![Complex64::new(0.0, 0.0); chirp.scratch_len()];
        // e^{-i m dk (−L)} from the grid origin
        let origin: Vec<Complex64> = (-m_max..=m_max)
            .map(|m| Complex64::from_polar(1.0, (m as f64 * dk * self.grid.half_extent).rem_euclid(2.0 * PI)))
            .collect();

        let mut partial = vec![Complex64::new(0.0, 0.0); n * side];
        let mut out_row = vec![Complex64::new(0.0, 0.0); side];
        for i in 0..n {
            chirp.apply_with_scratch(&self.samples[i * n..(i + 1) * n], &mut out_row, &mut scratch);
            for (b, v) in out_row.iter().enumerate() {
                partial[i * side + b] = v * origin[b];
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); side * side];
        let mut column = vec![Complex64::new(0.0, 0.0); n];
        for b in 0..side {
            for i in 0..n {
                column[i] = partial[i * side + b];
            }
            chirp.apply_with_scratch(&column, &mut out_row, &mut scratch);
            for (a, v) in out_row.iter().enumerate() {
                out[a * side + b] = v * origin[a] * (h * h);
            }
        }
        Ok(out)
    }
}

fn catmull_rom_weights(u: f64) -> [f64; 4] {
    let u2 = u * u;
    let u3 = u2 * u;
    [
        0.5 * (-u3 + 2.0 * u2 - u),
        0.5 * (3.0 * u3 - 5.0 * u2 + 2.0),
        0.5 * (-3.0 * u3 + 4.0 * u2 + u),
        0.5 * (u3 - u2),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timefreq::{gaussian_window, hermite_window};

    fn gaussian_weight() -> PhaseWeight {
        let g = gaussian_window();
        wigner(&g, &g, WeightGrid::for_windows(&g, &g)).unwrap()
    }

    #[test]
    fn gaussian_wigner_closed_form() {
        let w = gaussian_weight();
        let grid = w.grid();
        let mut err = 0.0f64;
        for i in (0..grid.n).step_by(3) {
            for j in (0..grid.n).step_by(5) {
                let (x, xi) = (grid.coord(i), grid.coord(j));
                let exact = (-x * x - xi * xi).exp() / PI;
                err = err.max((w.samples()[i * grid.n + j] - exact).norm());
            }
        }
        assert!(err < 1e-8, "{err}");
        assert!((w.integral() - 1.0).norm() < 1e-10);
        assert!(w.max_imag() < 1e-12);
    }

    #[test]
    fn marginal_in_xi_is_window_product() {
        let (a, b) = (hermite_window(1), gaussian_window());
        let w = wigner(&a, &b, WeightGrid::for_windows(&a, &b)).unwrap();
        let grid = w.grid();
        let h = grid.spacing();
        for i in (0..grid.n).step_by(7) {
            let x = grid.coord(i);
            let marginal: Complex64 = w.samples()[i * grid.n..(i + 1) * grid.n].iter().sum::<Complex64>() * h;
            let want = a.eval(x) * b.eval(x).conj();
            assert!((marginal - want).norm() < 1e-8, "x = {x}");
        }
        // orthogonal windows integrate to zero
        assert!(w.integral().norm() < 1e-10);
    }

    #[test]
    fn conjugate_symmetry_of_cross_wigner() {
        let (a, b) = (hermite_window(2), hermite_window(1));
        let grid = WeightGrid::for_windows(&a, &b);
        let ab = wigner(&a, &b, grid).unwrap();
        let ba = wigner(&b, &a, grid).unwrap();
        let err = ab.samples().iter().zip(ba.samples()).map(|(u, v)| (u - v.conj()).norm()).fold(0.0, f64::max);
        assert!(err < 1e-13);
    }

    #[test]
    fn too_small_grid_is_detected() {
        let g = gaussian_window();
        let grid = WeightGrid::new(3.0, 64).unwrap();
        assert!(matches!(wigner(&g, &g, grid), Err(Error::GridTooSmall { .. })));
    }

    #[test]
    fn fourier_lattice_matches_direct() {
        let w = gaussian_weight();
        let dk = 0.37;
        let lat = w.fourier_lattice(dk, 6).unwrap();
        for (m1, m2) in [(0, 0), (3, -2), (-6, 6), (1, 5)] {
            let k = [m1 as f64 * dk, m2 as f64 * dk];
            let direct = w.fourier_at(k);
            let got = lat[((m1 + 6) * 13 + m2 + 6) as usize];
            let exact = (-(k[0] * k[0] + k[1] * k[1]) / 4.0).exp();
            assert!((got - direct).norm() < 1e-12);
            assert!((got - exact).norm() < 1e-10);
        }
    }

    #[test]
    fn moments_of_gaussian() {
        let w = gaussian_weight();
        let [m0, m1, m2] = w.moments();
        assert!((m0 - 1.0).abs() < 1e-10);
        // |z| is Rayleigh with σ² = 1/2; the kink of |z| at 0 limits the
        // grid quadrature to O(h²)
        assert!((m1 - PI.sqrt() / 2.0).abs() < 1e-3);
        assert!((m2 - 1.0).abs() < 1e-8);
    }
}
