//! L²-normalised Hermite functions `h_k(x) = (2^k k! √π)^{-1/2} H_k(x) e^{-x²/2}`.
//!
//! Evaluated with the normalised three-term recurrence
//! `h_{k+1} = √(2/(k+1)) x h_k − √(k/(k+1)) h_{k−1}`, carrying a separate
//! exponent so that large `|x|` does not underflow the Gaussian factor before
//! the polynomial part has grown.

use std::f64::consts::PI;

const RESCALE_ABOVE: f64 = 1e150;

/// Values `h_0(x), …, h_{count-1}(x)` at a single point.
pub fn hermite_functions(x: f64, count: usize) -> Vec<f64> {
    let mut out = vec![0.0; count];
    fill_hermite(x, &mut out);
    out
}

/// Row-major table `table[i * count + k] = h_k(xs[i])`.
pub fn hermite_table(xs: &[f64], count: usize) -> Vec<f64> {
    let mut table = vec![0.0; xs.len() * count];
    for (row, &x) in table.chunks_mut(count.max(1)).zip(xs) {
        fill_hermite(x, row);
    }
    table
}

fn fill_hermite(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    // value = v * exp(log_scale)
    let mut log_scale = -0.5 * x * x;
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    out[0] = cur * log_scale.exp();
    for k in 0..out.len() - 1 {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_ABOVE {
            prev /= RESCALE_ABOVE;
            cur /= RESCALE_ABOVE;
            log_scale += RESCALE_ABOVE.ln();
        }
        out[k + 1] = cur * log_scale.exp();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_state_closed_form() {
        for &x in &[-3.0, -0.5, 0.0, 1.25, 4.0] {
            let h = hermite_functions(x, 3);
            let g = PI.powf(-0.25) * (-0.5 * x * x).exp();
            assert!((h[0] - g).abs() < 1e-15);
            assert!((h[1] - 2f64.sqrt() * x * g).abs() < 1e-14);
            assert!((h[2] - (2.0 * x * x - 1.0) / 2f64.sqrt() * g).abs() < 1e-14);
        }
    }

    #[test]
    fn orthonormal_on_fine_grid() {
        let dx = 0.02;
        let xs: Vec<f64> = (0..3001).map(|i| -30.0 + i as f64 * dx).collect();
        let n = 40;
        let tab = hermite_table(&xs, n);
        for j in 0..n {
            for k in 0..=j {
                let s: f64 = (0..xs.len()).map(|i| tab[i * n + j] * tab[i * n + k]).sum::<f64>() * dx;
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-12, "<h{j},h{k}> = {s}");
            }
        }
    }

    #[test]
    fn far_tail_does_not_produce_nan() {
        let h = hermite_functions(45.0, 600);
        assert!(h.iter().all(|v| v.is_finite()));
        // h_599 is oscillatory out to about √1199 ≈ 34.6 and tiny at 45
        assert!(h[599].abs() < 1e-20);
        let h = hermite_functions(30.0, 600);
        assert!(h[599].abs() > 1e-4);
    }
}
