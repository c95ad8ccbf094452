//! Weyl quantisation of sampled symbols as finite matrices.
//!
//! Both discretisations start from the Weyl kernel in midpoint form,
//! `q̌(x, t) = (2π)^{-1} ∫ e^{itξ} q(x, ξ) dξ`, so that
//! `K(x, y) = q̌((x+y)/2, x−y)`. On the symbol grid the midpoint of two
//! lattice points `x_a, x_b` is again a lattice point whenever `a + b` is
//! even, with `t = 2mh`; this gives
//!
//! - [`op_kernel`]: Nyström on the even sublattice, `A = 2h·[q̌(x_{u+v}, 2(u−v)h)]`;
//! - [`op_hermite`]: Galerkin in the Hermite basis with the checkerboard rule
//!   `M = 2h² Σ_{p∈{0,1}} H_pᵀ K_p H_p`, `H_p[u,k] = h_k(x_{2u+p})`.
//!
//! On a critical grid (`n h² = π`) the kernel of `q ≡ 1` is exactly
//! `δ/(2h)`, so both constructions map `q ≡ 1` to the identity up to the
//! lattice quadrature of the basis itself. That defect is carried on every
//! [`OperatorMatrix`].

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{hermite_table, ChirpTransform};
use crate::symbolics::{moyal_term, SymbolGrid};

/// Kernel magnitudes below this fraction of the maximum are dropped.
const KERNEL_FLOOR: f64 = 1e-14;
/// Allowed relative kernel magnitude near the end of the `t`-range.
const ALIAS_TOLERANCE: f64 = 1e-8;
const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// `q̌(x_i, 2mh)` for every grid row `i` and `|m| ≤ band`.
#[derive(Debug, Clone)]
pub struct WeylKernel {
    n: usize,
    spacing: f64,
    origin: f64,
    band: i64,
    rows: Vec<Complex64>,
    meta: String,
}

impl WeylKernel {
    pub fn band(&self) -> i64 {
        self.band
    }

    pub fn points(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// `q̌(x_i, 2mh)`, zero outside the band or the grid.
    pub fn at(&self, i: i64, m: i64) -> Complex64 {
        if m.abs() > self.band || i < 0 || i >= self.n as i64 {
            return Complex64::new(0.0, 0.0);
        }
        self.rows[i as usize * (2 * self.band + 1) as usize + (m + self.band) as usize]
    }
}

/// Computes the midpoint Weyl kernel of `q` on its grid by one chirp
/// transform per row.
pub fn weyl_kernel(q: &SymbolGrid) -> Result<WeylKernel> {
    let g = q.grid();
    let n = g.n;
    let h = g.spacing();
    let m_top = ((n / 2) as i64 - 1).min((PI / (2.0 * h * h)).floor() as i64);
    let width = (2 * m_top + 1) as usize;
    let chirp = ChirpTransform::new(n, -m_top, width, 2.0 * h * h);
    let xi0 = g.center[1] - g.half_extent;
    let post: Vec<Complex64> = (-m_top..=m_top)
        .map(|m| Complex64::from_polar(h / (2.0 * PI), (2.0 * m as f64 * h * xi0).rem_euclid(2.0 * PI)))
        .collect();
    let mut scratch = vec![Complex64::new(0.0, 0.0); chirp.scratch_len()];
    let mut out = vec![Complex64::new(0.0, 0.0); width];
    let mut full = vec![Complex64::new(0.0, 0.0); n * width];
    let mut profile = vec![0.0f64; width];
    for i in 0..n {
        chirp.apply_with_scratch(&q.values()[i * n..(i + 1) * n], &mut out, &mut scratch);
        for (k, (o, p)) in out.iter().zip(&post).enumerate() {
            let v = o * p;
            full[i * width + k] = v;
            profile[k] = profile[k].max(v.norm());
        }
    }
    let top = profile.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(WeylKernel {
            n,
            spacing: h,
            origin: g.center[0] - g.half_extent,
            band: 0,
            rows: vec![Complex64::new(0.0, 0.0); n],
            meta: q.meta().to_string(),
        });
    }
    let edge_from = (0.9 * m_top as f64).floor() as i64;
    let leak = (-m_top..=m_top)
        .filter(|m| m.abs() >= edge_from.max(1))
        .map(|m| profile[(m + m_top) as usize])
        .fold(0.0, f64::max)
        / top;
    if leak > ALIAS_TOLERANCE {
        return Err(Error::AliasedKernel { leak });
    }
    let mut band = m_top;
    while band > 0
        && profile[(band + m_top) as usize] < KERNEL_FLOOR * top
        && profile[(m_top - band) as usize] < KERNEL_FLOOR * top
    {
        band -= 1;
    }
    let kept = (2 * band + 1) as usize;
    let mut rows = vec![Complex64::new(0.0, 0.0); n * kept];
    for i in 0..n {
        let from = i * width + (m_top - band) as usize;
        rows[i * kept..(i + 1) * kept].copy_from_slice(&full[from..from + kept]);
    }
    Ok(WeylKernel {
        n,
        spacing: h,
        origin: g.center[0] - g.half_extent,
        band,
        rows,
        meta: q.meta().to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basis {
    /// Hermite functions `h_0 … h_{size−1}`.
    Hermite { size: usize },
    /// Point values on `origin + i·spacing`, `i < points`.
    Position { points: usize, spacing: f64, origin: f64 },
}

/// A finite matrix representing `op[q]`, with the discretisation error of
/// its construction.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    data: Mat<Complex64>,
    basis: Basis,
    provenance: String,
    identity_defect: f64,
    basis_tail: f64,
}

impl OperatorMatrix {
    pub fn from_mat(data: Mat<Complex64>, basis: Basis, provenance: impl Into<String>) -> Self {
        Self {
            data,
            basis,
            provenance: provenance.into(),
            identity_defect: 0.0,
            basis_tail: 0.0,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_mat(
            Mat::from_fn(dim, dim, |i, j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)),
            Basis::Hermite { size: dim },
            "identity",
        )
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &Mat<Complex64> {
        &self.data
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// `max |M₁ − I|` where `M₁` is this construction applied to `q ≡ 1`.
    pub fn identity_defect(&self) -> f64 {
        self.identity_defect
    }

    /// Largest row norm over the last tenth of the basis.
    pub fn basis_tail(&self) -> f64 {
        self.basis_tail
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max(self.data[(i, j)].norm());
            }
        }
        m
    }

    /// `max |M − M*|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut d = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                d = d.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        d
    }

    pub fn require_hermitian(&self) -> Result<()> {
        let defect = self.hermitian_defect();
        if defect > HERMITIAN_TOLERANCE.max(1e-12 * self.max_abs()) {
            return Err(Error::NonHermitian { defect });
        }
        Ok(())
    }

    fn hermitian_part(&self) -> Mat<Complex64> {
        let n = self.dim();
        Mat::from_fn(n, n, |i, j| (self.data[(i, j)] + self.data[(j, i)].conj()) * 0.5)
    }

    /// Ascending eigenvalues of a Hermitian matrix.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.require_hermitian()?;
        let mut ev = self
            .hermitian_part()
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Linalg(format!("{e:?}")))?;
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    pub fn singular_values(&self) -> Result<Vec<f64>> {
        self.data.singular_values().map_err(|e| Error::Linalg(format!("{e:?}")))
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim();
        let mut out = self.clone();
        out.data = Mat::from_fn(n, n, |i, j| self.data[(j, i)].conj());
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.data = &self.data * &other.data;
        out.provenance = format!("({}) * ({})", self.provenance, other.provenance);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.data = &self.data - &other.data;
        out.provenance = format!("({}) - ({})", self.provenance, other.provenance);
        out
    }

    /// Little-endian dump: `b"SZOM"`, basis kind `u8` (0 Hermite, 1
    /// position), dimension `u64`, then column-major `(re, im)` pairs.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.dim();
        let mut out = Vec::with_capacity(13 + 16 * n * n);
        out.extend_from_slice(b"SZOM");
        out.push(match self.basis {
            Basis::Hermite { .. } => 0,
            Basis::Position { .. } => 1,
        });
        out.extend_from_slice(&(n as u64).to_le_bytes());
        for j in 0..n {
            for i in 0..n {
                let v = self.data[(i, j)];
                out.extend_from_slice(&v.re.to_le_bytes());
                out.extend_from_slice(&v.im.to_le_bytes());
            }
        }
        out
    }
}

/// Galerkin matrix `M_{kj} = ⟨h_k, op[q] h_j⟩` in the first `basis` Hermite
/// functions.
pub fn op_hermite(q: &SymbolGrid, basis: usize) -> Result<OperatorMatrix> {
    let kernel = weyl_kernel(q)?;
    op_hermite_from_kernel(&kernel, basis)
}

pub fn op_hermite_from_kernel(kernel: &WeylKernel, basis: usize) -> Result<OperatorMatrix> {
    if basis == 0 {
        return Err(Error::InvalidArgument("Hermite basis must be non-empty".into()));
    }
    let n = kernel.n;
    let h = kernel.spacing;
    let reach = (2.0 * basis as f64).sqrt() + 6.0;
    let nyquist = PI / (2.0 * h);
    let half_extent = 0.5 * n as f64 * h;
    if reach > nyquist || reach > half_extent {
        return Err(Error::BasisOverflow {
            basis,
            detail: format!("√(2K)+6 = {reach:.3} exceeds min(π/(2h), L) = {:.3}", nyquist.min(half_extent)),
        });
    }
    let xs: Vec<f64> = (0..n).map(|a| kernel.origin + a as f64 * h).collect();
    if xs[0].abs().min(xs[n - 1].abs()) < reach {
        return Err(Error::BasisOverflow {
            basis,
            detail: "Hermite functions are not contained in the x-range of the grid".into(),
        });
    }
    let table = hermite_table(&xs, basis);
    let half = n / 2;
    let mut total = Mat::<Complex64>::zeros(basis, basis);
    let mut gram = Mat::<Complex64>::zeros(basis, basis);
    for p in 0..2 {
        let hp = Mat::<Complex64>::from_fn(half, basis, |u, k| Complex64::new(table[(2 * u + p) * basis + k], 0.0));
        let kp = Mat::<Complex64>::from_fn(half, half, |u, v| kernel.at((u + v + p) as i64, u as i64 - v as i64));
        let kh = &kp * &hp;
        total += hp.transpose() * &kh;
        gram += hp.transpose() * &hp;
    }
    let data = &total * faer::Scale(Complex64::new(2.0 * h * h, 0.0));
    let mut identity_defect = 0.0f64;
    for j in 0..basis {
        for i in 0..basis {
            let want = if i == j { 1.0 } else { 0.0 };
            identity_defect = identity_defect.max((gram[(i, j)] * h - want).norm());
        }
    }
    let identity_defect = identity_defect.max(constant_kernel_defect(n, h, kernel.origin));
    let from = basis - basis.div_ceil(10);
    let mut basis_tail = 0.0f64;
    for i in from..basis {
        let row: f64 = (0..basis).map(|j| data[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        basis_tail = basis_tail.max(row);
    }
    Ok(OperatorMatrix {
        data,
        basis: Basis::Hermite { size: basis },
        provenance: format!("op_hermite(K={basis}) of {}", kernel.meta),
        identity_defect,
        basis_tail,
    })
}

/// `max_m |2h·q̌₁(2mh) − δ_{m0}|` for the constant symbol 1 on the same grid.
fn constant_kernel_defect(n: usize, h: f64, _origin: f64) -> f64 {
    let m_top = ((n / 2) as i64 - 1).min((PI / (2.0 * h * h)).floor() as i64);
    let alpha = 2.0 * h * h;
    (-m_top..=m_top)
        .map(|m| {
            // (h/2π) Σ_l e^{i α m l}, a geometric sum
            let phase = alpha * m as f64;
            let s = if (phase / (2.0 * PI)).fract().abs() < 1e-15 || m == 0 {
                Complex64::new(n as f64, 0.0)
            } else {
                let z = Complex64::from_polar(1.0, phase);
                (Complex64::new(1.0, 0.0) - z.powu(n as u32)) / (Complex64::new(1.0, 0.0) - z)
            };
            let value = s * (h / (2.0 * PI)) * (2.0 * h);
            (value - if m == 0 { 1.0 } else { 0.0 }).norm()
        })
        .fold(0.0, f64::max)
}

/// Nyström matrix of the Weyl kernel on the even sublattice `x_{2u}`.
pub fn op_kernel(q: &SymbolGrid) -> Result<OperatorMatrix> {
    let kernel = weyl_kernel(q)?;
    Ok(op_kernel_from_kernel(&kernel))
}

pub fn op_kernel_from_kernel(kernel: &WeylKernel) -> OperatorMatrix {
    let half = kernel.n / 2;
    let h = kernel.spacing;
    let data = Mat::<Complex64>::from_fn(half, half, |u, v| kernel.at((u + v) as i64, u as i64 - v as i64) * (2.0 * h));
    OperatorMatrix {
        data,
        basis: Basis::Position {
            points: half,
            spacing: 2.0 * h,
            origin: kernel.origin,
        },
        provenance: format!("op_kernel(n={}) of {}", kernel.n, kernel.meta),
        identity_defect: constant_kernel_defect(kernel.n, h, kernel.origin),
        basis_tail: 0.0,
    }
}

pub fn trace(m: &OperatorMatrix) -> Complex64 {
    (0..m.dim()).map(|i| m.data[(i, i)]).sum()
}

/// Sum of singular values; uses `|eigenvalues|` for Hermitian input.
pub fn trace_norm(m: &OperatorMatrix) -> Result<f64> {
    if m.require_hermitian().is_ok() {
        return Ok(m.eigenvalues()?.iter().map(|v| v.abs()).sum());
    }
    Ok(m.singular_values()?.iter().sum())
}

/// Largest singular value.
pub fn op_norm(m: &OperatorMatrix) -> Result<f64> {
    Ok(m.singular_values()?.into_iter().fold(0.0, f64::max))
}

/// A function `f` with `f(0) = 0` applied to matrices.
#[derive(Clone)]
pub enum SpectralFunction {
    /// `f(t) = Σ_k c_k t^k` with `c_0 = 0`.
    Polynomial { coeffs: Vec<f64> },
    /// A smooth real function with a bound on `|f'|` and `|f''|`.
    Smooth {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        derivative_bound: f64,
        label: String,
    },
}

impl std::fmt::Debug for SpectralFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpectralFunction::Polynomial { coeffs } => f.debug_struct("Polynomial").field("coeffs", coeffs).finish(),
            SpectralFunction::Smooth { label, derivative_bound, .. } => f
                .debug_struct("Smooth")
                .field("label", label)
                .field("derivative_bound", derivative_bound)
                .finish(),
        }
    }
}

impl SpectralFunction {
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if let Some(&c0) = coeffs.first() {
            if c0 != 0.0 {
                return Err(Error::SpectralFunctionNonzeroAtOrigin { value: c0 });
            }
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("polynomial coefficients must be finite".into()));
        }
        Ok(SpectralFunction::Polynomial { coeffs })
    }

    /// `f(t) = t`.
    pub fn identity() -> Self {
        SpectralFunction::Polynomial { coeffs: vec![0.0, 1.0] }
    }

    /// `f(t) = t²`.
    pub fn square() -> Self {
        SpectralFunction::Polynomial {
            coeffs: vec![0.0, 0.0, 1.0],
        }
    }

    pub fn smooth<F: Fn(f64) -> f64 + Send + Sync + 'static>(
        f: F,
        derivative_bound: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        let value = f(0.0);
        if value.abs() > 1e-14 {
            return Err(Error::SpectralFunctionNonzeroAtOrigin { value });
        }
        Ok(SpectralFunction::Smooth {
            f: Arc::new(f),
            derivative_bound,
            label: label.into(),
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            SpectralFunction::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c),
            SpectralFunction::Smooth { f, .. } => f(t),
        }
    }

    /// Holomorphic extension; only polynomials have one here.
    pub fn eval_complex(&self, z: Complex64) -> Option<Complex64> {
        match self {
            SpectralFunction::Polynomial { coeffs } => {
                Some(coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c))
            }
            SpectralFunction::Smooth { .. } => None,
        }
    }

    pub fn is_linear(&self) -> bool {
        match self {
            SpectralFunction::Polynomial { coeffs } => coeffs.iter().skip(2).all(|c| *c == 0.0),
            SpectralFunction::Smooth { .. } => false,
        }
    }
}

/// `f(M)` through the eigendecomposition (Hermitian `M`), or by Horner's
/// rule for a polynomial `f` on non-Hermitian input.
pub fn spectral_apply(m: &OperatorMatrix, f: &SpectralFunction) -> Result<OperatorMatrix> {
    match (m.require_hermitian(), f) {
        (Ok(()), _) => spectral_apply_eigen(m, f),
        (Err(_), SpectralFunction::Polynomial { .. }) => spectral_apply_horner(m, f),
        (Err(e), SpectralFunction::Smooth { .. }) => Err(e),
    }
}

pub fn spectral_apply_eigen(m: &OperatorMatrix, f: &SpectralFunction) -> Result<OperatorMatrix> {
    m.require_hermitian()?;
    let eig = m
        .hermitian_part()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let u = eig.U();
    let s = eig.S().column_vector();
    let n = m.dim();
    let scaled = Mat::<Complex64>::from_fn(n, n, |i, j| u[(i, j)] * f.eval(s[j].re));
    let mut out = m.clone();
    out.data = &scaled * u.adjoint();
    out.provenance = format!("f({}) by eigendecomposition", m.provenance);
    Ok(out)
}

pub fn spectral_apply_horner(m: &OperatorMatrix, f: &SpectralFunction) -> Result<OperatorMatrix> {
    let SpectralFunction::Polynomial { coeffs } = f else {
        return Err(Error::InvalidArgument("Horner evaluation needs a polynomial".into()));
    };
    let n = m.dim();
    let mut acc = Mat::<Complex64>::zeros(n, n);
    for c in coeffs.iter().rev() {
        acc = &acc * &m.data;
        for i in 0..n {
            acc[(i, i)] += Complex64::new(*c, 0.0);
        }
    }
    let mut out = m.clone();
    out.data = acc;
    out.provenance = format!("f({}) by Horner", m.provenance);
    Ok(out)
}

/// Result of an eigenvalue count at a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Count {
    pub count: usize,
    /// Eigenvalues within `1e-9` of the threshold; a non-zero value flags a
    /// count that may flip under discretisation error.
    pub near_threshold: usize,
}

/// `#{λ ≥ δ}` for a Hermitian matrix.
pub fn counting(m: &OperatorMatrix, delta: f64) -> Result<Count> {
    Ok(count_eigenvalues(&m.eigenvalues()?, delta))
}

pub fn count_eigenvalues(eigenvalues: &[f64], delta: f64) -> Count {
    Count {
        count: eigenvalues.iter().filter(|&&v| v >= delta).count(),
        near_threshold: eigenvalues.iter().filter(|&&v| (v - delta).abs() < 1e-9).count(),
    }
}

/// `‖op[q]² − op[c_n]‖₁` in the Hermite discretisation, where `c₀ = q²` and
/// `c₁ = q² + F₁(q, q)`.
pub fn composition_remainder(q: &SymbolGrid, order: u32, basis: usize) -> Result<f64> {
    if order > 1 {
        return Err(Error::InvalidArgument(format!("composition order must be 0 or 1, got {order}")));
    }
    let imag = q.max_imag();
    if imag > 1e-12 * q.sup_abs().max(1.0) {
        return Err(Error::InvalidArgument(format!("composition remainder needs a real symbol, max |Im q| = {imag:e}")));
    }
    let mut c = moyal_term(q, q, 0)?;
    if order == 1 {
        let f1 = moyal_term(q, q, 1)?;
        let values: Vec<Complex64> = c.values().iter().zip(f1.values()).map(|(a, b)| a + b).collect();
        c = SymbolGrid::new(c.grid(), values, "c1")?;
    }
    let m = op_hermite(q, basis)?;
    let mc = op_hermite(&c, basis)?;
    trace_norm(&m.matmul(&m).sub(&mc))
}

/// `index,eigenvalue` CSV with 17 significant digits.
pub fn spectrum_csv(eigenvalues: &[f64]) -> String {
    let mut out = String::from("index,eigenvalue\n");
    for (i, v) in eigenvalues.iter().enumerate() {
        let _ = writeln!(out, "{i},{v:.16e}");
    }
    out
}
