//! Smoothed-symbol Weyl operators on the phase plane, their spectra, and the
//! second-order asymptotics of `tr f(T_r)` as the symbol is dilated.
//!
//! Module map:
//!
//! - [`geometry`]: planar domains, signed distance, curvature, tube quadrature.
//! - [`timefreq`]: windows, Wigner transforms, edge profiles `Q_ω` and `g_ω`.
//! - [`symbolics`]: symbol grids, dilation, smoothing by `W`, Moyal terms.
//! - [`quantize`]: Weyl quantisation as Hermitian matrices, traces, spectra.
//! - [`szego`]: the coefficients `A₀`, `A₁`, predictions and sweep fits.
//! - [`pipeline`]: one-call measurements for a given dilation `r`.

pub mod error;
pub mod geometry;
pub mod numerics;
pub mod pipeline;
pub mod quantize;
pub mod symbolics;
pub mod szego;
pub mod timefreq;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// A point `(x, ξ)` of the phase plane.
pub type Point = [f64; 2];
