//! Two-term asymptotics `r²A₀ + rA₁` for traces and eigenvalue counts of
//! smoothed localisation operators, and least-squares extraction of the
//! coefficients from an r-sweep.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, DEFAULT_BOUNDARY_NODES};
use crate::numerics::GaussLegendre;
use crate::quantize::SpectralFunction;
use crate::timefreq::{counting_profile_g, profile_q_halfplane, LambdaGrid, PhaseWeight, ProfileQ};
use crate::Point;

/// Profiles agreeing to this tolerance in four directions are treated as
/// rotation invariant.
pub const RADIAL_TOLERANCE: f64 = 1e-9;
const COMPLEX_TOLERANCE: f64 = 1e-10;
/// Boundary nodes used when `Q` depends on the direction.
const DIRECTIONAL_NODES: usize = 256;

/// What is measured for each `r`.
#[derive(Debug, Clone)]
pub enum Measurement {
    /// `#{eigenvalues ≥ δ}`.
    Count { delta: f64 },
    /// `tr f(T_r)`.
    Trace(SpectralFunction),
}

/// Options for the boundary coefficient.
#[derive(Debug, Clone, Copy)]
pub struct A1Options {
    pub lambdas: LambdaGrid,
    /// Translate the weight by this vector before taking profiles; the
    /// result must not change.
    pub shift: Point,
    /// Boundary quadrature nodes; `None` picks 1024 for radial weights and
    /// 256 otherwise.
    pub nodes: Option<usize>,
}

impl Default for A1Options {
    fn default() -> Self {
        Self {
            lambdas: LambdaGrid::default(),
            shift: [0.0, 0.0],
            nodes: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub a0: f64,
    pub a1: f64,
    /// `|Q|` at the ends of the λ-window that was cut off, summed over
    /// both ends and maximised over boundary directions.
    pub truncation: f64,
}

impl Coefficients {
    pub fn predict(&self, r: f64) -> f64 {
        self.a0 * r * r + self.a1 * r
    }
}

/// `A₀ = (2π)^{-1} ∫_Ω f(a(z)) dz`.
pub fn coeff_a0<A: Fn(Point) -> f64>(a: A, dom: &Domain, f: &SpectralFunction) -> f64 {
    dom.area_integral(|z| f.eval(a(z))) / (2.0 * PI)
}

/// `A₀` for the count at threshold `δ` with `a ≡ 1`: `μ(Ω)/(2π)` when
/// `δ ≤ 1`, else 0.
pub fn coeff_a0_counting(dom: &Domain, delta: f64) -> f64 {
    if delta <= 1.0 {
        dom.area() / (2.0 * PI)
    } else {
        0.0
    }
}

/// One profile per boundary node, sharing a single profile when the weight is
/// rotation invariant.
struct BoundaryProfiles {
    nodes: Vec<(Point, f64, Point)>,
    shared: Option<ProfileQ>,
    each: Vec<ProfileQ>,
    truncation: f64,
}

impl BoundaryProfiles {
    fn profile(&self, i: usize) -> &ProfileQ {
        self.shared.as_ref().unwrap_or_else(|| &self.each[i])
    }
}

/// True when `Q_ω` agrees in four directions to [`RADIAL_TOLERANCE`].
pub fn is_radial(w: &PhaseWeight, lambdas: LambdaGrid) -> Result<bool> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let dirs = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [h, h]];
    let base = profile_q_halfplane(w, dirs[0], lambdas)?;
    for d in &dirs[1..] {
        let q = profile_q_halfplane(w, *d, lambdas)?;
        let diff = q
            .values()
            .iter()
            .zip(base.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if diff > RADIAL_TOLERANCE {
            return Ok(false);
        }
    }
    Ok(true)
}

fn boundary_profiles(dom: &Domain, w: &PhaseWeight, opts: &A1Options) -> Result<BoundaryProfiles> {
    let radial = is_radial(w, opts.lambdas)?;
    let count = opts
        .nodes
        .unwrap_or(if radial { DEFAULT_BOUNDARY_NODES } else { DIRECTIONAL_NODES });
    let nodes: Vec<(Point, f64, Point)> = dom
        .boundary_nodes(count)
        .into_iter()
        .map(|b| (b.point, b.weight, b.normal))
        .collect();
    let shifting = opts.shift != [0.0, 0.0];
    let mut truncation = 0.0f64;
    let mut note = |q: &ProfileQ| {
        let lim = q.limit();
        truncation = truncation.max(q.values()[0].norm() + (q.eval(opts.lambdas.end()) - lim).norm());
    };
    if radial && !shifting {
        let q = profile_q_halfplane(w, [1.0, 0.0], opts.lambdas)?;
        note(&q);
        return Ok(BoundaryProfiles {
            nodes,
            shared: Some(q),
            each: Vec::new(),
            truncation,
        });
    }
    let base = radial.then(|| profile_q_halfplane(w, [1.0, 0.0], opts.lambdas)).transpose()?;
    let mut each = Vec::with_capacity(nodes.len());
    for (_, _, n) in &nodes {
        let q = match &base {
            Some(q) => {
                let mut q = q.clone();
                q.omega = *n;
                q
            }
            None => profile_q_halfplane(w, *n, opts.lambdas)?,
        };
        let offset = opts.shift[0] * n[0] + opts.shift[1] * n[1];
        let q = if shifting { q.shifted(offset) } else { q };
        note(&q);
        each.push(q);
    }
    Ok(BoundaryProfiles {
        nodes,
        shared: None,
        each,
        truncation,
    })
}

/// `∫ (f(Q(λ)a) − Q(λ) f(a)) dλ` over the λ-window, 4-point Gauss per cell.
fn inner_integral(q: &ProfileQ, a: f64, f: &SpectralFunction) -> Result<Complex64> {
    let complex = q.max_imag() > COMPLEX_TOLERANCE;
    let fa = f.eval(a);
    let integrand = |l: f64| -> Result<Complex64> {
        let v = q.eval(l);
        if complex {
            let fz = f
                .eval_complex(v * a)
                .ok_or(Error::ComplexProfile { max_imag: q.max_imag() })?;
            Ok(fz - v * fa)
        } else {
            Ok(Complex64::new(f.eval(v.re * a) - v.re * fa, 0.0))
        }
    };
    let g = q.lambdas;
    let rule = GaussLegendre::new(4);
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..g.count - 1 {
        for (x, wt) in rule.mapped(g.point(i), g.point(i + 1)) {
            acc += integrand(x)? * wt;
        }
    }
    Ok(acc)
}

/// `A₁ = (2π)^{-1} ∫_{∂Ω} ∫ (f(Q_{n(u)}(λ)a(u)) − Q_{n(u)}(λ) f(a(u))) dλ dμ₁(u)`,
/// allowing a complex profile when `f` is a polynomial.
pub fn coeff_a1_complex<A: Fn(Point) -> f64>(
    a: A,
    dom: &Domain,
    f: &SpectralFunction,
    w: &PhaseWeight,
    opts: &A1Options,
) -> Result<(Complex64, f64)> {
    let profiles = boundary_profiles(dom, w, opts)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, (u, weight, _)) in profiles.nodes.iter().enumerate() {
        acc += inner_integral(profiles.profile(i), a(*u), f)? * *weight;
    }
    Ok((acc / (2.0 * PI), profiles.truncation))
}

/// Real `A₁`; fails with `ComplexProfile` if the result has an imaginary part.
pub fn coeff_a1<A: Fn(Point) -> f64>(
    a: A,
    dom: &Domain,
    f: &SpectralFunction,
    w: &PhaseWeight,
    opts: &A1Options,
) -> Result<f64> {
    let (v, _) = coeff_a1_complex(a, dom, f, w, opts)?;
    if v.im.abs() > COMPLEX_TOLERANCE * v.re.abs().max(1.0) {
        return Err(Error::ComplexProfile { max_imag: v.im.abs() });
    }
    Ok(v.re)
}

/// `A₁ = (2π)^{-1} ∫_{∂Ω} g_{n(u)}(δ) dμ₁(u)` for the count at threshold `δ`
/// with `a ≡ 1`.
pub fn coeff_a1_counting(dom: &Domain, w: &PhaseWeight, delta: f64, opts: &A1Options) -> Result<f64> {
    Ok(coeff_a1_counting_with_budget(dom, w, delta, opts)?.0)
}

fn coeff_a1_counting_with_budget(dom: &Domain, w: &PhaseWeight, delta: f64, opts: &A1Options) -> Result<(f64, f64)> {
    let profiles = boundary_profiles(dom, w, opts)?;
    if let Some(q) = &profiles.shared {
        let g = counting_profile_g(q, delta)?;
        let total: f64 = profiles.nodes.iter().map(|(_, wt, _)| wt).sum();
        return Ok((g * total / (2.0 * PI), profiles.truncation));
    }
    let mut acc = 0.0;
    for (i, (_, weight, _)) in profiles.nodes.iter().enumerate() {
        acc += counting_profile_g(profiles.profile(i), delta)? * weight;
    }
    Ok((acc / (2.0 * PI), profiles.truncation))
}

/// `A₀` and `A₁` for a measurement.
pub fn coefficients<A: Fn(Point) -> f64>(
    a: A,
    dom: &Domain,
    w: &PhaseWeight,
    measurement: &Measurement,
    opts: &A1Options,
) -> Result<Coefficients> {
    match measurement {
        Measurement::Count { delta } => {
            let (a1, truncation) = coeff_a1_counting_with_budget(dom, w, *delta, opts)?;
            Ok(Coefficients {
                a0: coeff_a0_counting(dom, *delta),
                a1,
                truncation,
            })
        }
        Measurement::Trace(f) => {
            let a0 = coeff_a0(&a, dom, f);
            let (a1, truncation) = coeff_a1_complex(&a, dom, f, w, opts)?;
            if a1.im.abs() > COMPLEX_TOLERANCE * a1.re.abs().max(1.0) {
                return Err(Error::ComplexProfile { max_imag: a1.im.abs() });
            }
            Ok(Coefficients {
                a0,
                a1: a1.re,
                truncation,
            })
        }
    }
}

/// Two-term prediction `A₀r² + A₁r`.
pub fn predict<A: Fn(Point) -> f64>(
    a: A,
    dom: &Domain,
    w: &PhaseWeight,
    measurement: &Measurement,
    r: f64,
) -> Result<f64> {
    Ok(coefficients(a, dom, w, measurement, &A1Options::default())?.predict(r))
}

/// Fit of `c₂r² + c₁r + c₀` against the two-term prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    pub r_values: Vec<f64>,
    pub measured: Vec<f64>,
    pub predicted_a0: f64,
    pub predicted_a1: f64,
    pub fitted_c2: f64,
    pub fitted_c1: f64,
    pub fitted_c0: f64,
    /// `|c₂ − A₀| / |A₀|`, absolute when `A₀ = 0`.
    pub c2_error: f64,
    /// `|c₁ − A₁| / |A₁|`, absolute when `A₁ = 0`.
    pub c1_error: f64,
    /// `measured − (A₀r² + A₁r)`.
    pub residuals: Vec<f64>,
}

impl AsymptoticsReport {
    pub fn predicted(&self, r: f64) -> f64 {
        self.predicted_a0 * r * r + self.predicted_a1 * r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serialisable")
    }

    /// `r,measured,predicted,residual` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,measured,predicted,residual\n");
        for ((r, m), res) in self.r_values.iter().zip(&self.measured).zip(&self.residuals) {
            let _ = writeln!(out, "{r:.16e},{m:.16e},{:.16e},{res:.16e}", self.predicted(*r));
        }
        out
    }
}

fn relative(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        (got - want).abs() / want.abs()
    }
}

/// Least squares in the basis `{r², r, 1}` by Householder QR.
pub fn fit_quadratic(r_values: &[f64], measured: &[f64]) -> Result<[f64; 3]> {
    let n = r_values.len();
    if n != measured.len() {
        return Err(Error::InvalidArgument("r values and measurements differ in length".into()));
    }
    if n < 4 {
        return Err(Error::IllConditionedFit(format!("need at least 4 r values, got {n}")));
    }
    let lo = r_values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = r_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo > 0.0) || hi < 2.0 * lo {
        return Err(Error::IllConditionedFit(format!("r values span [{lo}, {hi}], less than a factor of 2")));
    }
    let mut sorted = r_values.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|p| p[0] == p[1]) {
        return Err(Error::IllConditionedFit("r values must be distinct".into()));
    }
    // columns scaled by powers of hi so that all entries are O(1)
    let s = hi;
    let mut cols: Vec<Vec<f64>> = (0..3)
        .map(|p| r_values.iter().map(|r| (r / s).powi(2 - p)).collect())
        .collect();
    let mut rhs = measured.to_vec();
    for k in 0..3 {
        let norm = cols[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        let alpha = if cols[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = cols[k][k..].to_vec();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv == 0.0 {
            continue;
        }
        for col in cols.iter_mut().skip(k) {
            let dot: f64 = v.iter().zip(&col[k..]).map(|(a, b)| a * b).sum();
            for (c, vi) in col[k..].iter_mut().zip(&v) {
                *c -= 2.0 * dot / vv * vi;
            }
        }
        let dot: f64 = v.iter().zip(&rhs[k..]).map(|(a, b)| a * b).sum();
        for (c, vi) in rhs[k..].iter_mut().zip(&v) {
            *c -= 2.0 * dot / vv * vi;
        }
    }
    let mut x = [0.0; 3];
    for k in (0..3).rev() {
        let mut acc = rhs[k];
        for j in k + 1..3 {
            acc -= cols[j][k] * x[j];
        }
        if cols[k][k].abs() < 1e-14 {
            return Err(Error::IllConditionedFit("singular design matrix".into()));
        }
        x[k] = acc / cols[k][k];
    }
    Ok([x[0] / (s * s), x[1] / s, x[2]])
}

/// Fits the sweep and compares the fitted coefficients with `A₀`, `A₁`.
pub fn fit_and_compare(r_values: &[f64], measured: &[f64], predicted: Coefficients) -> Result<AsymptoticsReport> {
    let [c2, c1, c0] = fit_quadratic(r_values, measured)?;
    let residuals = r_values
        .iter()
        .zip(measured)
        .map(|(r, m)| m - predicted.predict(*r))
        .collect();
    Ok(AsymptoticsReport {
        r_values: r_values.to_vec(),
        measured: measured.to_vec(),
        predicted_a0: predicted.a0,
        predicted_a1: predicted.a1,
        fitted_c2: c2,
        fitted_c1: c1,
        fitted_c0: c0,
        c2_error: relative(c2, predicted.a0),
        c1_error: relative(c1, predicted.a1),
        residuals,
    })
}
