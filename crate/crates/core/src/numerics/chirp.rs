//! Chirp-z (Bluestein) evaluation of exponential sums on arbitrary lattices.
//!
//! `ChirpTransform` computes
//!
//! ```text
//! X_j = Σ_{l=0}^{N-1} x_l · exp(i α (m0 + j) l),   j = 0..M
//! ```
//!
//! for any real `α`, so sampled Fourier integrals can be taken between grids
//! whose spacings are not DFT-conjugate.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub struct ChirpTransform {
    n_in: usize,
    n_out: usize,
    len: usize,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
    kernel_hat: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for ChirpTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChirpTransform")
            .field("n_in", &self.n_in)
            .field("n_out", &self.n_out)
            .field("len", &self.len)
            .finish()
    }
}

fn half_square_phase(alpha: f64, m: i64) -> Complex64 {
    // (α/2)·m² reduced mod 2π before taking the exponential
    let angle = (0.5 * alpha * (m as f64) * (m as f64)).rem_euclid(2.0 * PI);
    Complex64::from_polar(1.0, angle)
}

impl ChirpTransform {
    pub fn new(n_in: usize, m0: i64, n_out: usize, alpha: f64) -> Self {
        assert!(n_in > 0 && n_out > 0);
        let len = (n_in + n_out - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);

        let pre = (0..n_in as i64).map(|l| half_square_phase(alpha, l)).collect();
        let post = (0..n_out as i64).map(|j| half_square_phase(alpha, m0 + j)).collect();

        // kernel b_d = exp(-iα d²/2) for d = m0-(N-1) ..= m0+M-1
        let d_min = m0 - (n_in as i64 - 1);
        let mut kernel_hat = vec![Complex64::new(0.0, 0.0); len];
        for (e, slot) in kernel_hat.iter_mut().take(n_in + n_out - 1).enumerate() {
            *slot = half_square_phase(alpha, d_min + e as i64).conj();
        }
        forward.process(&mut kernel_hat);
        let scale = 1.0 / len as f64;
        for v in &mut kernel_hat {
            *v *= scale;
        }

        Self {
            n_in,
            n_out,
            len,
            pre,
            post,
            kernel_hat,
            forward,
            inverse,
        }
    }

    pub fn input_len(&self) -> usize {
        self.n_in
    }

    pub fn output_len(&self) -> usize {
        self.n_out
    }

    /// Scratch length required by [`ChirpTransform::apply_with_scratch`].
    pub fn scratch_len(&self) -> usize {
        self.len
    }

    pub fn apply(&self, input: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_out];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.len];
        self.apply_with_scratch(input, &mut out, &mut scratch);
        out
    }

    pub fn apply_with_scratch(
        &self,
        input: &[Complex64],
        output: &mut [Complex64],
        scratch: &mut [Complex64],
    ) {
        assert_eq!(input.len(), self.n_in);
        assert_eq!(output.len(), self.n_out);
        let buf = &mut scratch[..self.len];
        for (b, (x, p)) in buf.iter_mut().zip(input.iter().zip(&self.pre)) {
            *b = x * p;
        }
        for b in buf[self.n_in..].iter_mut() {
            *b = Complex64::new(0.0, 0.0);
        }
        self.forward.process(buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.inverse.process(buf);
        for (j, out) in output.iter_mut().enumerate() {
            *out = buf[j + self.n_in - 1] * self.post[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn direct(x: &[Complex64], m0: i64, m: usize, alpha: f64) -> Vec<Complex64> {
        (0..m as i64)
            .map(|j| {
                x.iter()
                    .enumerate()
                    .map(|(l, v)| v * Complex64::from_polar(1.0, alpha * ((m0 + j) * l as i64) as f64))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_plain_dft_when_alpha_is_conjugate() {
        let n = 16;
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, (i * i) as f64 * 0.1)).collect();
        let chirp = ChirpTransform::new(n, -8, n, 2.0 * PI / n as f64);
        let got = chirp.apply(&x);
        let want = direct(&x, -8, n, 2.0 * PI / n as f64);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn agrees_with_direct_sum(
            n in 1usize..40,
            m in 1usize..50,
            m0 in -60i64..60,
            alpha in -3.0f64..3.0,
            seed in 0u64..1000,
        ) {
            let x: Vec<Complex64> = (0..n)
                .map(|i| {
                    let t = (seed as f64 + 1.0) * (i as f64 + 0.37);
                    Complex64::new(t.sin(), (1.3 * t).cos())
                })
                .collect();
            let got = ChirpTransform::new(n, m0, m, alpha).apply(&x);
            let want = direct(&x, m0, m, alpha);
            for (a, b) in got.iter().zip(&want) {
                prop_assert!((a - b).norm() < 1e-9 * (n as f64));
            }
        }
    }
}
