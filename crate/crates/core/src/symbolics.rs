//! Phase-space symbols on uniform grids: dilation, the smoothed symbol
//! `q = W ∗ (aχ_Ω)_r`, Moyal expansion terms and derivative norms.
//!
//! The smoothed symbol is assembled in Fourier space. The transform of the
//! sharp cutoff `(aχ_Ω)_r` is computed exactly (up to quadrature) from polar
//! quadrature over `rΩ` and a type-1 NUFFT, multiplied by `Ŵ`, and brought
//! back to the grid by one inverse FFT. Sampling `χ_Ω` pointwise instead
//! would carry an `O(h)` error along the edge.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::numerics::nufft::{fft2_forward, fft2_inverse};
use crate::numerics::{nufft2d_type1, GaussLegendre};
use crate::timefreq::PhaseWeight;
use crate::Point;

/// Relative magnitude below which `Ŵ` is treated as zero; the lattice
/// transform itself has a roundoff floor near `1e-15`.
const SPECTRUM_FLOOR: f64 = 1e-13;
/// Relative magnitude allowed on the border of a symbol grid.
const EDGE_TOLERANCE: f64 = 1e-10;

/// Square grid `x_i = c₁ − L + i h`, `ξ_j = c₂ − L + j h`, `h = 2L/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub center: Point,
    pub half_extent: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(center: Point, half_extent: f64, n: usize) -> Result<Self> {
        if !(half_extent > 0.0 && half_extent.is_finite()) || n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "grid needs half_extent > 0 and a power-of-two n >= 8, got ({half_extent}, {n})"
            )));
        }
        Ok(Self { center, half_extent, n })
    }

    /// The critically sampled grid `n h² = π` centred at the origin. On this
    /// grid the discrete Weyl kernel of `q ≡ 1` is exactly the identity.
    pub fn critical(n: usize) -> Result<Self> {
        let half_extent = (PI * n as f64).sqrt() / 2.0;
        Self::new([0.0, 0.0], half_extent, n)
    }

    /// Smallest critical grid whose half-extent reaches both
    /// `r·bounding_radius + 10` and `√(2K) + 6`.
    pub fn for_dilation(r: f64, bounding_radius: f64, basis: usize) -> Result<Self> {
        let need = (r * bounding_radius + 10.0).max((2.0 * basis as f64).sqrt() + 6.0);
        let mut n = 8usize;
        while (PI * n as f64).sqrt() / 2.0 < need {
            n *= 2;
        }
        Self::critical(n)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_extent / self.n as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.center[0] - self.half_extent + i as f64 * self.spacing()
    }

    pub fn xi(&self, j: usize) -> f64 {
        self.center[1] - self.half_extent + j as f64 * self.spacing()
    }

    pub fn point(&self, i: usize, j: usize) -> Point {
        [self.x(i), self.xi(j)]
    }

    /// `Δk = π/L`, the mode spacing of the periodic box of side `2L`.
    pub fn mode_spacing(&self) -> f64 {
        PI / self.half_extent
    }
}

/// Serialisable amplitude `a` of the symbol `aχ_Ω`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolSpec {
    Constant {
        value: f64,
    },
    /// `amplitude · exp(−|z − center|² / width²)`
    GaussianBump {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: Point,
    },
    Sum {
        terms: Vec<SymbolSpec>,
    },
    Product {
        factors: Vec<SymbolSpec>,
    },
}

impl Default for SymbolSpec {
    fn default() -> Self {
        SymbolSpec::Constant { value: 1.0 }
    }
}

impl SymbolSpec {
    pub fn eval(&self, z: Point) -> f64 {
        match self {
            SymbolSpec::Constant { value } => *value,
            SymbolSpec::GaussianBump { amplitude, width, center } => {
                let d2 = (z[0] - center[0]).powi(2) + (z[1] - center[1]).powi(2);
                amplitude * (-d2 / (width * width)).exp()
            }
            SymbolSpec::Sum { terms } => terms.iter().map(|t| t.eval(z)).sum(),
            SymbolSpec::Product { factors } => factors.iter().map(|t| t.eval(z)).product(),
        }
    }

    /// Upper bound on `sup |a|`.
    pub fn sup_bound(&self) -> f64 {
        match self {
            SymbolSpec::Constant { value } => value.abs(),
            SymbolSpec::GaussianBump { amplitude, .. } => amplitude.abs(),
            SymbolSpec::Sum { terms } => terms.iter().map(|t| t.sup_bound()).sum(),
            SymbolSpec::Product { factors } => factors.iter().map(|t| t.sup_bound()).product(),
        }
    }

    /// The value when the symbol is constant.
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            SymbolSpec::Constant { value } => Some(*value),
            SymbolSpec::Sum { terms } => terms.iter().map(|t| t.as_constant()).sum(),
            SymbolSpec::Product { factors } => factors.iter().map(|t| t.as_constant()).product(),
            SymbolSpec::GaussianBump { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SymbolSpec::Constant { value } if !value.is_finite() => {
                Err(Error::InvalidArgument("symbol constant must be finite".into()))
            }
            SymbolSpec::GaussianBump { width, .. } if !(*width > 0.0) => {
                Err(Error::InvalidArgument(format!("gaussian_bump width must be positive, got {width}")))
            }
            SymbolSpec::Sum { terms } if terms.is_empty() => Err(Error::InvalidArgument("empty symbol sum".into())),
            SymbolSpec::Product { factors } if factors.is_empty() => {
                Err(Error::InvalidArgument("empty symbol product".into()))
            }
            SymbolSpec::Sum { terms: parts } | SymbolSpec::Product { factors: parts } => {
                parts.iter().try_for_each(|p| p.validate())
            }
            _ => Ok(()),
        }
    }
}

/// `p_r(z) = p(z/r)`.
pub fn dilate<T, F: Fn(Point) -> T>(p: F, r: f64) -> impl Fn(Point) -> T {
    assert!(r > 0.0, "dilation factor must be positive");
    move |z: Point| p([z[0] / r, z[1] / r])
}

/// Fourier coefficients of a grid function on its periodic box:
/// `q(z) = Σ_m c_m e^{i m Δk · (z − center)}` for `|m|_∞ ≤ m_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTable {
    pub dk: f64,
    pub m_max: i64,
    /// Row-major over `(m₁ + m_max, m₂ + m_max)`.
    pub coeffs: Vec<Complex64>,
}

impl ModeTable {
    fn eval(&self, rel: Point) -> Complex64 {
        let side = (2 * self.m_max + 1) as usize;
        let base1 = Complex64::from_polar(1.0, self.dk * rel[0]);
        let base2 = Complex64::from_polar(1.0, self.dk * rel[1]);
        let e2: Vec<Complex64> = (-self.m_max..=self.m_max).map(|m| base2.powi(m as i32)).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..side {
            let row: Complex64 = self.coeffs[a * side..(a + 1) * side].iter().zip(&e2).map(|(c, e)| c * e).sum();
            acc += row * base1.powi(a as i32 - self.m_max as i32);
        }
        acc
    }
}

/// A sampled phase-space function, row-major `values[i * n + j] = q(x_i, ξ_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid {
    grid: GridSpec,
    values: Vec<Complex64>,
    meta: String,
    modes: Option<ModeTable>,
}

impl SymbolGrid {
    pub fn new(grid: GridSpec, values: Vec<Complex64>, meta: impl Into<String>) -> Result<Self> {
        if values.len() != grid.n * grid.n {
            return Err(Error::InvalidArgument(format!(
                "expected {} symbol samples, got {}",
                grid.n * grid.n,
                values.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            meta: meta.into(),
            modes: None,
        })
    }

    pub fn from_fn<F: Fn(Point) -> Complex64>(grid: GridSpec, f: F, meta: impl Into<String>) -> Self {
        let n = grid.n;
        let values = (0..n * n).map(|k| f(grid.point(k / n, k % n))).collect();
        Self {
            grid,
            values,
            meta: meta.into(),
            modes: None,
        }
    }

    pub fn constant(grid: GridSpec, c: Complex64) -> Self {
        Self {
            grid,
            values: vec![c; grid.n * grid.n],
            meta: format!("constant {c}"),
            modes: Some(ModeTable {
                dk: grid.mode_spacing(),
                m_max: 0,
                coeffs: vec![c],
            }),
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn meta(&self) -> &str {
        &self.meta
    }

    pub fn modes(&self) -> Option<&ModeTable> {
        self.modes.as_ref()
    }

    pub fn value(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.grid.n + j]
    }

    /// Off-grid evaluation: exact Fourier sum when the mode table is known,
    /// bicubic Catmull–Rom interpolation otherwise.
    pub fn eval_at(&self, z: Point) -> Complex64 {
        let rel = [z[0] - self.grid.center[0], z[1] - self.grid.center[1]];
        if let Some(modes) = &self.modes {
            return modes.eval(rel);
        }
        let n = self.grid.n;
        let h = self.grid.spacing();
        let tx = (rel[0] + self.grid.half_extent) / h;
        let ty = (rel[1] + self.grid.half_extent) / h;
        let (ix, iy) = (tx.floor() as i64, ty.floor() as i64);
        let (ux, uy) = (tx - ix as f64, ty - iy as f64);
        let w = |u: f64| {
            let (u2, u3) = (u * u, u * u * u);
            [
                0.5 * (-u3 + 2.0 * u2 - u),
                0.5 * (3.0 * u3 - 5.0 * u2 + 2.0),
                0.5 * (-3.0 * u3 + 4.0 * u2 + u),
                0.5 * (u3 - u2),
            ]
        };
        let (wx, wy) = (w(ux), w(uy));
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, wa) in wx.iter().enumerate() {
            let i = ix + a as i64 - 1;
            for (b, wb) in wy.iter().enumerate() {
                let j = iy + b as i64 - 1;
                if (0..n as i64).contains(&i) && (0..n as i64).contains(&j) {
                    acc += self.values[i as usize * n + j as usize] * (wa * wb);
                }
            }
        }
        acc
    }

    /// `∫ q` by the trapezoid rule.
    pub fn integral(&self) -> Complex64 {
        let h = self.grid.spacing();
        self.values.iter().sum::<Complex64>() * (h * h)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// Largest `|q|` on the grid border relative to `sup |q|`.
    pub fn edge_leak(&self) -> f64 {
        let n = self.grid.n;
        let sup = self.sup_abs();
        if sup == 0.0 {
            return 0.0;
        }
        let mut edge = 0.0f64;
        for k in 0..n {
            for (i, j) in [(0, k), (n - 1, k), (k, 0), (k, n - 1)] {
                edge = edge.max(self.value(i, j).norm());
            }
        }
        edge / sup
    }

    /// Pointwise map; the mode table is dropped.
    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F, meta: impl Into<String>) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| f(*v)).collect(),
            meta: meta.into(),
            modes: None,
        }
    }

    /// CSV dump: a `#` header line with the grid, then `x,xi,re,im` rows.
    pub fn to_csv(&self) -> String {
        let g = self.grid;
        let mut out = format!(
            "# center_x={:.16e} center_xi={:.16e} half_extent={:.16e} n={} meta={}\nx,xi,re,im\n",
            g.center[0], g.center[1], g.half_extent, g.n, self.meta
        );
        for i in 0..g.n {
            for j in 0..g.n {
                let v = self.value(i, j);
                let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", g.x(i), g.xi(j), v.re, v.im);
            }
        }
        out
    }

    /// Flat little-endian dump: `b"SZSG"`, `n: u64`, `center: 2×f64`,
    /// `half_extent: f64`, then `n²` interleaved `(re, im)` pairs.
    pub fn to_bytes(&self) -> Vec<u8> {
        let g = self.grid;
        let mut out = Vec::with_capacity(36 + 16 * self.values.len());
        out.extend_from_slice(b"SZSG");
        out.extend_from_slice(&(g.n as u64).to_le_bytes());
        for v in [g.center[0], g.center[1], g.half_extent] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in &self.values {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = || Error::InvalidArgument("malformed symbol grid dump".into());
        if bytes.len() < 36 || &bytes[..4] != b"SZSG" {
            return Err(bad());
        }
        let u = |k: usize| u64::from_le_bytes(bytes[k..k + 8].try_into().expect("8 bytes"));
        let f = |k: usize| f64::from_le_bytes(bytes[k..k + 8].try_into().expect("8 bytes"));
        let n = u(4) as usize;
        let grid = GridSpec::new([f(12), f(20)], f(28), n)?;
        if bytes.len() != 36 + 16 * n * n {
            return Err(bad());
        }
        let values = (0..n * n).map(|k| Complex64::new(f(36 + 16 * k), f(44 + 16 * k))).collect();
        Self::new(grid, values, "loaded")
    }
}

/// `q = W ∗ (aχ_Ω)_r` sampled on `grid`.
///
/// Errors with [`Error::GridTooSmall`] when `|q|` on the grid border exceeds
/// `1e-10` of its maximum, and with [`Error::GridTooCoarse`] when `Ŵ` has not
/// decayed within the grid's frequency range.
pub fn smoothed_symbol<A: Fn(Point) -> f64>(
    w: &PhaseWeight,
    a: A,
    dom: &Domain,
    r: f64,
    grid: GridSpec,
) -> Result<SymbolGrid> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("dilation must be positive, got {r}")));
    }
    let n = grid.n as i64;
    let dk = grid.mode_spacing();
    let scaled = dom.dilated(r);

    // the sampled domain must sit inside the periodic box
    let reach = scaled.bounding_radius() + grid.center[0].hypot(grid.center[1]);
    if reach >= grid.half_extent {
        return Err(Error::GridTooSmall { leak: 1.0 });
    }

    let wg = w.grid();
    let m_cap = (n / 2 - 1).min((PI / (wg.spacing() * dk)).floor() as i64);
    let m_max = weight_bandwidth(w, dk, m_cap)?;
    let side = (2 * m_max + 1) as usize;
    let w_hat = w.fourier_lattice(dk, m_max)?;

    // polar quadrature of a(z/r) over rΩ
    let k_eff = m_max as f64 * dk;
    let rho_max = scaled.bounding_radius() - scaled.center()[0].hypot(scaled.center()[1]);
    let n_theta = 2 * (k_eff * rho_max).ceil() as usize + 64;
    let n_rho = (0.6 * k_eff * rho_max).ceil() as usize + 24;
    let nodes = scaled.area_nodes(n_theta, n_rho);
    let mut points = Vec::with_capacity(nodes.len());
    let mut strengths = Vec::with_capacity(nodes.len());
    for (z, wt) in &nodes {
        points.push([dk * (z[0] - grid.center[0]), dk * (z[1] - grid.center[1])]);
        strengths.push(Complex64::new(a([z[0] / r, z[1] / r]) * wt, 0.0));
    }
    let modes_nufft = 2 * (m_max as usize + 1);
    let p_hat = nufft2d_type1(&points, &strengths, modes_nufft);
    let offset = (modes_nufft / 2) as i64;

    let box_area = 4.0 * grid.half_extent * grid.half_extent;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); side * side];
    let mut spectrum = vec![Complex64::new(0.0, 0.0); (n * n) as usize];
    for m1 in -m_max..=m_max {
        for m2 in -m_max..=m_max {
            let p = p_hat[((m1 + offset) as usize) * modes_nufft + (m2 + offset) as usize];
            let c = w_hat[((m1 + m_max) as usize) * side + (m2 + m_max) as usize] * p / box_area;
            coeffs[((m1 + m_max) as usize) * side + (m2 + m_max) as usize] = c;
            let sign = if (m1 + m2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            spectrum[(m1.rem_euclid(n) * n + m2.rem_euclid(n)) as usize] = c * sign;
        }
    }
    fft2_inverse(&mut spectrum, grid.n);
    if w.is_real(1e-14) {
        for v in &mut spectrum {
            v.im = 0.0;
        }
    }

    let meta = format!(
        "W*(a chi_Omega)_r with r={r}, domain={:?}, center={:?}, weight grid n={}, modes |m|<={m_max}",
        dom.shape(),
        dom.center(),
        wg.n
    );
    let q = SymbolGrid {
        grid,
        values: spectrum,
        meta,
        modes: Some(ModeTable { dk, m_max, coeffs }),
    };
    let leak = q.edge_leak();
    if leak > EDGE_TOLERANCE {
        return Err(Error::GridTooSmall { leak });
    }
    Ok(q)
}

/// Smallest `M` with `|Ŵ(mΔk)| < 1e-13·|Ŵ|_max` for every `|m|_∞ > M`.
fn weight_bandwidth(w: &PhaseWeight, dk: f64, m_cap: i64) -> Result<i64> {
    let lattice = w.fourier_lattice(dk, m_cap)?;
    let side = (2 * m_cap + 1) as usize;
    let mut ring = vec![0.0f64; m_cap as usize + 1];
    let mut top = 0.0f64;
    for a in 0..side {
        for b in 0..side {
            let m = (a as i64 - m_cap).abs().max((b as i64 - m_cap).abs()) as usize;
            let v = lattice[a * side + b].norm();
            ring[m] = ring[m].max(v);
            top = top.max(v);
        }
    }
    let threshold = SPECTRUM_FLOOR * top;
    if ring[m_cap as usize] >= threshold {
        return Err(Error::GridTooCoarse(format!(
            "weight transform is {:e} (relative) at the grid frequency limit",
            ring[m_cap as usize] / top
        )));
    }
    let mut m_max = m_cap;
    while m_max > 0 && ring[m_max as usize] < threshold {
        m_max -= 1;
    }
    Ok(m_max)
}

/// Spectral partial derivative `∂_x^a ∂_ξ^b` of a periodic grid function.
pub fn spectral_derivative(q: &SymbolGrid, order: (u32, u32)) -> SymbolGrid {
    let g = q.grid;
    let n = g.n;
    let mut data = q.values.clone();
    fft2_forward(&mut data, n);
    let scale = 2.0 * PI / (n as f64 * g.spacing());
    let wave = |m: usize, p: u32| -> Complex64 {
        let mi = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
        if m == n / 2 && p % 2 == 1 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(0.0, mi * scale).powu(p)
    };
    for a in 0..n {
        let fa = wave(a, order.0);
        for b in 0..n {
            data[a * n + b] *= fa * wave(b, order.1) / (n * n) as f64;
        }
    }
    fft2_inverse(&mut data, n);
    SymbolGrid {
        grid: g,
        values: data,
        meta: format!("d^({},{}) of {}", order.0, order.1, q.meta),
        modes: None,
    }
}

/// Moyal term `F_j` on the diagonal: `j = 0` gives `pq`, `j = 1` gives
/// `(i/2)(∂_x p ∂_ξ q − ∂_ξ p ∂_x q)`.
pub fn moyal_term(p: &SymbolGrid, q: &SymbolGrid, j: u32) -> Result<SymbolGrid> {
    if p.grid != q.grid {
        return Err(Error::InvalidArgument("Moyal terms need identical grids".into()));
    }
    match j {
        0 => Ok(SymbolGrid {
            grid: p.grid,
            values: p.values.iter().zip(&q.values).map(|(a, b)| a * b).collect(),
            meta: "moyal F0".into(),
            modes: None,
        }),
        1 => {
            let (px, pxi) = (spectral_derivative(p, (1, 0)), spectral_derivative(p, (0, 1)));
            let (qx, qxi) = (spectral_derivative(q, (1, 0)), spectral_derivative(q, (0, 1)));
            let half_i = Complex64::new(0.0, 0.5);
            let values = (0..p.values.len())
                .map(|k| half_i * (px.values[k] * qxi.values[k] - pxi.values[k] * qx.values[k]))
                .collect();
            Ok(SymbolGrid {
                grid: p.grid,
                values,
                meta: "moyal F1".into(),
                modes: None,
            })
        }
        _ => Err(Error::InvalidArgument(format!("Moyal term order must be 0 or 1, got {j}"))),
    }
}

/// Grid norms of `∂^k q` for `|k| ≤ 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    /// `(a, b, sup |∂_x^a ∂_ξ^b q|, ∫ |∂_x^a ∂_ξ^b q|)`
    pub entries: Vec<(u32, u32, f64, f64)>,
}

impl NormReport {
    pub fn get(&self, a: u32, b: u32) -> Option<(f64, f64)> {
        self.entries.iter().find(|e| e.0 == a && e.1 == b).map(|e| (e.2, e.3))
    }
}

pub fn symbol_sup_and_l1(q: &SymbolGrid) -> NormReport {
    let h = q.grid.spacing();
    let entries = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
        .into_iter()
        .map(|(a, b)| {
            let d = if (a, b) == (0, 0) { q.clone() } else { spectral_derivative(q, (a, b)) };
            let sup = d.sup_abs();
            let l1 = d.values.iter().map(|v| v.norm()).sum::<f64>() * h * h;
            (a, b, sup, l1)
        })
        .collect();
    NormReport { entries }
}

/// `∫_Ω f(a(z)) dz`-type area integrals reuse the domain's polar rule; this
/// helper integrates `g` over `rΩ` with enough nodes for smooth `g`.
pub fn domain_integral<G: Fn(Point) -> f64>(dom: &Domain, g: G) -> f64 {
    let rule = GaussLegendre::new(96);
    let n_theta = 512;
    let step = 2.0 * PI / n_theta as f64;
    let c = dom.center();
    let mut acc = 0.0;
    for i in 0..n_theta {
        let theta = i as f64 * step;
        let (s, co) = theta.sin_cos();
        let extent = dom.radial_extent(theta);
        for (rho, w) in rule.mapped(0.0, extent) {
            acc += g([c[0] + rho * co, c[1] + rho * s]) * w * rho * step;
        }
    }
    acc
}
