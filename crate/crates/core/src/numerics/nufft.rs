//! Type-1 non-uniform FFT in two dimensions by Gaussian gridding
//! (Greengard & Lee), oversampling factor 2 and a 12-point spreading
//! half-width, which gives roughly twelve correct digits.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

const OVERSAMPLING: usize = 2;
const SPREAD: i64 = 12;

/// Computes `F[m1, m2] = Σ_p c_p exp(-i (m1 x_p + m2 y_p))` for
/// `m1, m2 ∈ [-modes/2, modes/2)`.
///
/// `points` must lie in `[-π, π]²` (values outside are wrapped periodically).
/// Output is row-major in `(m1 + modes/2, m2 + modes/2)`.
pub fn nufft2d_type1(points: &[[f64; 2]], strengths: &[Complex64], modes: usize) -> Vec<Complex64> {
    assert_eq!(points.len(), strengths.len());
    assert!(modes >= 2 && modes.is_multiple_of(2), "mode count must be even");
    let m = modes;
    let mr = OVERSAMPLING * m;
    let r = OVERSAMPLING as f64;
    let tau = PI * SPREAD as f64 / ((m * m) as f64 * r * (r - 0.5));
    let h = 2.0 * PI / mr as f64;
    let mr_i = mr as i64;

    let mut grid = vec![Complex64::new(0.0, 0.0); mr * mr];
    let width = (2 * SPREAD + 1) as usize;
    let mut gx = vec![0.0; width];
    let mut gy = vec![0.0; width];
    for (p, c) in points.iter().zip(strengths) {
        let x = p[0].rem_euclid(2.0 * PI);
        let y = p[1].rem_euclid(2.0 * PI);
        let ix = (x / h).round() as i64;
        let iy = (y / h).round() as i64;
        for (t, (wx, wy)) in gx.iter_mut().zip(gy.iter_mut()).enumerate() {
            let off = t as i64 - SPREAD;
            let dx = (ix + off) as f64 * h - x;
            let dy = (iy + off) as f64 * h - y;
            *wx = (-dx * dx / (4.0 * tau)).exp();
            *wy = (-dy * dy / (4.0 * tau)).exp();
        }
        for (a, wx) in gx.iter().enumerate() {
            let row = (ix + a as i64 - SPREAD).rem_euclid(mr_i) as usize;
            let cw = c * wx;
            let base = row * mr;
            for (b, wy) in gy.iter().enumerate() {
                let col = (iy + b as i64 - SPREAD).rem_euclid(mr_i) as usize;
                grid[base + col] += cw * wy;
            }
        }
    }

    fft2_forward(&mut grid, mr);

    let mut out = vec![Complex64::new(0.0, 0.0); m * m];
    let half = (m / 2) as i64;
    let norm = PI / tau / (mr * mr) as f64;
    for k1 in -half..half {
        let row = k1.rem_euclid(mr_i) as usize;
        let d1 = ((k1 * k1) as f64 * tau).exp();
        for k2 in -half..half {
            let col = k2.rem_euclid(mr_i) as usize;
            let d2 = ((k2 * k2) as f64 * tau).exp();
            out[((k1 + half) as usize) * m + (k2 + half) as usize] = grid[row * mr + col] * (norm * d1 * d2);
        }
    }
    out
}

/// In-place forward 2D FFT of a square row-major array.
pub(crate) fn fft2_forward(data: &mut [Complex64], n: usize) {
    fft2(data, n, false);
}

/// In-place unnormalised inverse 2D FFT of a square row-major array.
pub(crate) fn fft2_inverse(data: &mut [Complex64], n: usize) {
    fft2(data, n, true);
}

fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = data[i * n + j];
        }
        fft.process(&mut col);
        for i in 0..n {
            data[i * n + j] = col[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_sum() {
        let pts: Vec<[f64; 2]> = (0..57)
            .map(|i| {
                let t = i as f64 * 0.731 + 0.2;
                [PI * (1.7 * t).sin(), PI * (0.9 * t + 1.0).cos()]
            })
            .collect();
        let c: Vec<Complex64> = (0..57).map(|i| Complex64::new((i as f64).cos(), 0.3 * i as f64 / 57.0)).collect();
        let modes = 24;
        let got = nufft2d_type1(&pts, &c, modes);
        let half = (modes / 2) as i64;
        let mut max_err: f64 = 0.0;
        for k1 in -half..half {
            for k2 in -half..half {
                let want: Complex64 = pts
                    .iter()
                    .zip(&c)
                    .map(|(p, c)| c * Complex64::from_polar(1.0, -(k1 as f64 * p[0] + k2 as f64 * p[1])))
                    .sum();
                let g = got[((k1 + half) as usize) * modes + (k2 + half) as usize];
                max_err = max_err.max((g - want).norm());
            }
        }
        let mass: f64 = c.iter().map(|v| v.norm()).sum();
        assert!(max_err < 1e-11 * mass, "max error {max_err}");
    }
}
