//! Named verification batteries. Failures are reported, never thrown: a check
//! that errors is recorded as failed with the error text.

use std::f64::consts::PI;

use clap::ValueEnum;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use szego_core::geometry::Domain;
use szego_core::numerics::GaussLegendre;
use szego_core::pipeline::{Experiment, Route};
use szego_core::quantize::{op_hermite, op_kernel, trace, SpectralFunction};
use szego_core::symbolics::{moyal_term, GridSpec, SymbolGrid, SymbolSpec};
use szego_core::szego::{coeff_a0, coeff_a1, coeff_a1_counting, fit_quadratic, A1Options, Measurement};
use szego_core::timefreq::{
    counting_profile_g, frft, gaussian_window, hermite_window, profile_q_frft, profile_q_halfplane, wigner,
    LambdaGrid, PhaseWeight, WeightGrid, Window,
};
use szego_core::Point;

/// `−erf⁻¹(−1/2)`.
const A1_QUARTER: f64 = 0.476_936_276_204_469_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Geometry,
    Timefreq,
    Symbolics,
    Quantize,
    Szego,
    All,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    /// The measured error or value; `null` when the check raised an error.
    pub value: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<Check>,
}

struct Battery {
    suite: &'static str,
    checks: Vec<Check>,
}

impl Battery {
    fn new(suite: &'static str) -> Self {
        Self { suite, checks: Vec::new() }
    }

    /// Records `value ≤ tolerance`.
    fn check(&mut self, name: &str, tolerance: f64, value: szego_core::Result<f64>) {
        let (value, error) = match value {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e.to_string())),
        };
        self.checks.push(Check {
            suite: self.suite,
            name: name.to_string(),
            value,
            tolerance,
            pass: value.is_some_and(|v| v <= tolerance),
            error,
        });
    }
}

fn gaussian_weight() -> szego_core::Result<PhaseWeight> {
    let g = gaussian_window();
    wigner(&g, &g, WeightGrid::for_windows(&g, &g))
}

fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn geometry(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut b = Battery::new("geometry");
    let ellipse = Domain::ellipse(1.3, 0.8).expect("valid ellipse");
    let star = Domain::star(0.2, 5).expect("valid star");
    b.check("ellipse area vs πab", 1e-10, Ok((ellipse.area() - PI * 1.3 * 0.8).abs()));
    for (name, dom) in [("ellipse", &ellipse), ("star", &star)] {
        let total: f64 = dom.boundary_nodes(1024).iter().map(|n| n.curvature * n.weight).sum();
        b.check(&format!("{name} total curvature vs 2π"), 1e-10, Ok((total - 2.0 * PI).abs()));
    }
    b.check(
        "ellipse tube area vs 2tL",
        1e-10,
        ellipse.tube_integral(0.3, |_| 1.0).map(|v| (v - 0.6 * ellipse.perimeter()).abs() / v),
    );
    b.check(
        "ellipse tubular radius below min curvature radius b²/a",
        0.8 * 0.8 / 1.3 + 1e-12,
        ellipse.tubular_radius(),
    );
    let roundtrip = (|| {
        let tau = ellipse.tubular_radius()?;
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let s = rng.gen_range(0.0..2.0 * PI);
            let lambda = rng.gen_range(-0.9..0.9) * tau;
            let p = ellipse.boundary_point(s);
            let n = ellipse.normal_at(s);
            let z = [p[0] + lambda * n[0], p[1] + lambda * n[1]];
            let near = ellipse.nearest_boundary_point(z)?;
            worst = worst.max((near.lambda - lambda).abs());
        }
        Ok(worst)
    })();
    b.check("ellipse projection round trip inside the tube", 1e-9, roundtrip);
    let mismatches = (0..400)
        .filter(|_| {
            let z: Point = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
            let d = star.signed_distance(z);
            d.abs() > 1e-12 && (d > 0.0) != star.contains(z)
        })
        .count();
    b.check("star signed distance sign matches membership", 0.0, Ok(mismatches as f64));
    b.checks
}

fn timefreq(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut b = Battery::new("timefreq");
    let lambdas = LambdaGrid::symmetric(6.0, 32);
    for (name, phi2, phi1) in [
        ("gaussian", gaussian_window(), gaussian_window()),
        ("(h0, h1)", hermite_window(0), hermite_window(1)),
    ] {
        let value = (|| {
            let w = wigner(&phi2, &phi1, WeightGrid::for_windows(&phi2, &phi1))?;
            let mut worst = 0.0f64;
            for k in 0..4 {
                let t = k as f64 * PI / 2.0 + 0.3;
                let omega = [t.cos(), t.sin()];
                let a = profile_q_halfplane(&w, omega, lambdas)?;
                let c = profile_q_frft(&phi2, &phi1, omega, lambdas)?;
                worst = worst.max(max_abs_diff(a.values(), c.values()));
            }
            Ok(worst)
        })();
        b.check(&format!("route equivalence {name}"), 1e-6, value);
        let value = wigner(&phi2, &phi1, WeightGrid::for_windows(&phi2, &phi1))
            .map(|w| (w.integral() - phi2.inner(&phi1)).norm());
        b.check(&format!("∫W = ⟨φ₂, φ₁⟩ for {name}"), 1e-10, value);
    }
    let rule = GaussLegendre::new(32);
    let oracle = |l: f64| {
        let cells = ((l + 12.0) / 0.25).ceil().max(1.0) as usize;
        let step = (l + 12.0) / cells as f64;
        (0..cells)
            .map(|c| rule.integrate(-12.0 + c as f64 * step, -12.0 + (c + 1) as f64 * step, |s| (-s * s).exp()))
            .sum::<f64>()
            / PI.sqrt()
    };
    let gaussian = (|| {
        let q = profile_q_halfplane(&gaussian_weight()?, [0.6, 0.8], LambdaGrid::default())?;
        Ok(q.lambdas
            .points()
            .enumerate()
            .step_by(11)
            .map(|(i, l)| (q.values()[i].re - oracle(l)).abs())
            .fold(0.0, f64::max))
    })();
    b.check("gaussian profile vs (1 + erf λ)/2", 1e-8, gaussian);
    let g_half = (|| counting_profile_g(&profile_q_halfplane(&gaussian_weight()?, [1.0, 0.0], LambdaGrid::default())?, 0.5))();
    b.check("g(1/2) = 0 for the gaussian", 1e-10, g_half.map(f64::abs));
    let phi = Window::Expansion {
        coeffs: (0..8).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
    };
    let t: f64 = rng.gen_range(0.0..2.0 * PI);
    b.check(
        "fractional Fourier transform is unitary",
        1e-10,
        frft(&phi, [t.cos(), t.sin()], 64).map(|out| (out.l2_norm() - phi.l2_norm()).abs()),
    );
    b.checks
}

fn disc_experiment() -> szego_core::Result<Experiment> {
    Ok(Experiment {
        domain: Domain::unit_disc(),
        weight: gaussian_weight()?,
        symbol: SymbolSpec::default(),
        measurement: Measurement::Count { delta: 0.5 },
        grid_points: None,
        basis: None,
        route: Route::Hermite,
    })
}

fn symbolics() -> Vec<Check> {
    let mut b = Battery::new("symbolics");
    let r = 4.0;
    let q = disc_experiment().and_then(|e| e.symbol_at(r));
    b.check(
        "∫q = r²|Ω| for a unit-mass weight",
        1e-8,
        q.as_ref().map(|q| (q.integral().re - r * r * PI).abs() / (r * r * PI)).map_err(Clone::clone),
    );
    // at the centre of the disc q = ∫_{|y|<r} π^{-1} e^{-|y|²} dy = 1 − e^{-r²}
    b.check(
        "q at the centre is 1 − e^{-r²}, 0 far outside",
        1e-12,
        q.as_ref()
            .map(|q| (q.eval_at([0.0, 0.0]).re - (1.0 - (-r * r).exp())).abs().max(q.eval_at([r + 7.0, 0.0]).norm()))
            .map_err(Clone::clone),
    );
    b.check(
        "0 ≤ q ≤ 1 on the grid",
        1e-10,
        q.as_ref()
            .map(|q| q.values().iter().map(|v| (-v.re).max(v.re - 1.0).max(0.0)).fold(0.0, f64::max))
            .map_err(Clone::clone),
    );
    let product = (|| {
        let grid = GridSpec::critical(256)?;
        let p = SymbolGrid::from_fn(grid, |z| Complex64::new((-(z[0] * z[0] + z[1] * z[1]) / 8.0).exp(), 0.0), "p");
        let s = SymbolGrid::from_fn(grid, |z| Complex64::new(z[0] * (-(z[0] * z[0] + z[1] * z[1]) / 8.0).exp(), 0.0), "s");
        let m = moyal_term(&p, &s, 0)?;
        let want: Vec<Complex64> = p.values().iter().zip(s.values()).map(|(a, c)| a * c).collect();
        Ok(max_abs_diff(m.values(), &want))
    })();
    b.check("zeroth Moyal term is the product", 1e-12, product);
    b.checks
}

/// `P(k+1, x) = 1 − e^{−x} Σ_{j≤k} x^j/j!` for all `k < count`.
fn incomplete_gamma_integer(count: usize, x: f64) -> Vec<f64> {
    let mut term = (-x).exp();
    let mut partial = 0.0;
    (0..count)
        .map(|k| {
            if k > 0 {
                term *= x / k as f64;
            }
            partial += term;
            (1.0 - partial).max(0.0)
        })
        .collect()
}

fn quantize() -> Vec<Check> {
    let mut b = Battery::new("quantize");
    let anchor = (|| {
        let one = SymbolGrid::constant(GridSpec::critical(1024)?, Complex64::new(1.0, 0.0));
        let m = op_hermite(&one, 64)?;
        let mut err = 0.0f64;
        for i in 0..64 {
            for j in 0..64 {
                err = err.max((m.entry(i, j) - if i == j { 1.0 } else { 0.0 }).norm());
            }
        }
        Ok(err)
    })();
    b.check("q ≡ 1 gives the identity (K = 64)", 1e-8, anchor);
    let r = 4.0;
    let setup = (|| {
        let e = disc_experiment()?;
        let q = e.symbol_at(r)?;
        let m = op_hermite(&q, e.basis_for(r))?;
        Ok((q, m))
    })();
    let (q, m) = match setup {
        Ok(v) => v,
        Err(e) => {
            b.check("disc operator at r = 4", 0.0, Err(e));
            return b.checks;
        }
    };
    let want = q.integral().re / (2.0 * PI);
    b.check("trace law at r = 4", 1e-6, Ok((trace(&m).re - want).abs() / want));
    let ev = m.eigenvalues();
    b.check(
        "spectrum inside [0, 1] at r = 4",
        1e-8,
        ev.as_ref().map(|ev| (-ev[0]).max(ev[ev.len() - 1] - 1.0).max(0.0)).map_err(Clone::clone),
    );
    b.check(
        "disc eigenvalues are P(k+1, r²/2)",
        1e-8,
        ev.as_ref()
            .map(|ev| {
                let mut exact = incomplete_gamma_integer(ev.len(), r * r / 2.0);
                exact.sort_by(f64::total_cmp);
                ev.iter().zip(&exact).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max)
            })
            .map_err(Clone::clone),
    );
    let cross = (|| {
        let mut a = m.eigenvalues()?;
        let mut k = op_kernel(&q)?.eigenvalues()?;
        a.reverse();
        k.reverse();
        Ok(a.iter().zip(&k).take(20).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
    })();
    b.check("Hermite and kernel top-20 eigenvalues agree", 1e-6, cross);
    b.checks
}

fn szego(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut b = Battery::new("szego");
    let w = match gaussian_weight() {
        Ok(w) => w,
        Err(e) => {
            b.check("gaussian weight", 0.0, Err(e));
            return b.checks;
        }
    };
    let ellipse = Domain::ellipse(1.3, 0.8).expect("valid ellipse");
    let disc = Domain::unit_disc();
    let plain = A1Options::default();
    b.check(
        "A1 vanishes for linear f",
        1e-12,
        coeff_a1(|z| 1.0 + 0.5 * z[0], &ellipse, &SpectralFunction::identity(), &w, &plain).map(f64::abs),
    );
    b.check(
        "counting A1 at δ = 1/4 vs −erf⁻¹(−1/2)",
        1e-8,
        coeff_a1_counting(&disc, &w, 0.25, &plain).map(|v| (v - A1_QUARTER).abs()),
    );
    b.check(
        "counting A1 at δ = 1/2 vanishes",
        1e-8,
        coeff_a1_counting(&disc, &w, 0.5, &plain).map(f64::abs),
    );
    let shifted = A1Options {
        shift: [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)],
        ..A1Options::default()
    };
    b.check(
        "A1 independent of the λ-origin",
        1e-8,
        (|| Ok((coeff_a1_counting(&ellipse, &w, 0.25, &plain)? - coeff_a1_counting(&ellipse, &w, 0.25, &shifted)?).abs()))(),
    );
    let f = SpectralFunction::square();
    let a = |z: Point| (-(z[0] * z[0] + z[1] * z[1])).exp();
    let base = coeff_a0(a, &ellipse, &f);
    let big = coeff_a0(|z: Point| a([z[0] / 3.0, z[1] / 3.0]), &ellipse.dilated(3.0), &f);
    b.check("A0 scales as r² under dilation", 1e-8, Ok((big - 9.0 * base).abs() / big.abs()));
    let (a0, a1) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let rs = [8.0, 12.0, 16.0, 24.0];
    let m: Vec<f64> = rs.iter().map(|r| a0 * r * r + a1 * r).collect();
    b.check(
        "fit recovers exact two-term data",
        1e-12,
        fit_quadratic(&rs, &m).map(|[c2, c1, c0]| (c2 - a0).abs().max((c1 - a1).abs()).max(c0.abs() / 100.0)),
    );
    b.checks
}

/// Runs `suite` with randomised checks seeded by `seed`.
pub fn run_verify(suite: Suite, seed: u64) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Geometry {
        checks.extend(geometry(&mut rng));
    }
    if all || suite == Suite::Timefreq {
        checks.extend(timefreq(&mut rng));
    }
    if all || suite == Suite::Symbolics {
        checks.extend(symbolics());
    }
    if all || suite == Suite::Quantize {
        checks.extend(quantize());
    }
    if all || suite == Suite::Szego {
        checks.extend(szego(&mut rng));
    }
    let passed = checks.iter().filter(|c| c.pass).count();
    VerifyReport {
        suite,
        seed,
        passed,
        failed: checks.len() - passed,
        checks,
    }
}
