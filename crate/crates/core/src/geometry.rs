//! Compact planar domains with smooth boundary: membership, signed distance,
//! nearest-point projection, curvature, tubular radius and the boundary and
//! tube quadratures built on them.
//!
//! Conventions: boundaries are parametrised counter-clockwise by
//! `s ∈ [0, 2π)`, the normal `n(u)` points into the domain, and curvature is
//! taken with respect to that normal, so a disc of radius `R` has `κ = 1/R`
//! and the tube Jacobian at signed height `λ` is `1 − λκ`.
//!
//! The tubular radius is a certified-by-sampling lower bound rather than the
//! exact reach; every consumer only needs a lower bound.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::GaussLegendre;
use crate::Point;

/// Default trapezoid node count for boundary integrals.
pub const DEFAULT_BOUNDARY_NODES: usize = 1024;
const COARSE_PROJECTION_NODES: usize = 512;
const TUBE_SAMPLE_NODES: usize = 4096;
const TUBE_NORMAL_NODES: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Disc { radius: f64 },
    Ellipse { a: f64, b: f64 },
    /// `r(θ) = 1 + ε cos(kθ)` in polar coordinates.
    Star { epsilon: f64, k: u32 },
}

/// Serialisable description of a domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub shape: Shape,
    #[serde(default)]
    pub center: Point,
}

impl DomainSpec {
    pub fn build(&self) -> Result<Domain> {
        Ok(Domain::new(self.shape)?.translated(self.center))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BoundaryNode {
    pub s: f64,
    pub point: Point,
    pub normal: Point,
    /// `|γ'(s)|`
    pub speed: f64,
    pub curvature: f64,
    /// Trapezoid weight `|γ'(s)| Δs`.
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestPoint {
    pub point: Point,
    pub s: f64,
    /// Signed height along the inward normal: `z = point + lambda · n(point)`.
    pub lambda: f64,
}

#[derive(Debug, Clone)]
pub struct Domain {
    shape: Shape,
    center: Point,
    scale: f64,
    tau: OnceLock<Result<f64>>,
}

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape && self.center == other.center && self.scale == other.scale
    }
}

impl Domain {
    pub fn new(shape: Shape) -> Result<Self> {
        match shape {
            Shape::Disc { radius } if !(radius > 0.0 && radius.is_finite()) => {
                return Err(Error::InvalidArgument(format!("disc radius must be positive, got {radius}")));
            }
            Shape::Ellipse { a, b } if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) => {
                return Err(Error::InvalidArgument(format!("ellipse semi-axes must be positive, got ({a}, {b})")));
            }
            Shape::Star { epsilon, k } if !(epsilon.abs() < 0.5) || k == 0 => {
                return Err(Error::InvalidArgument(format!(
                    "star domain needs |epsilon| < 0.5 and k >= 1, got epsilon = {epsilon}, k = {k}"
                )));
            }
            _ => {}
        }
        Ok(Self {
            shape,
            center: [0.0, 0.0],
            scale: 1.0,
            tau: OnceLock::new(),
        })
    }

    pub fn disc(radius: f64) -> Result<Self> {
        Self::new(Shape::Disc { radius })
    }

    pub fn unit_disc() -> Self {
        Self::disc(1.0).expect("unit disc is valid")
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Self::new(Shape::Ellipse { a, b })
    }

    pub fn star(epsilon: f64, k: u32) -> Result<Self> {
        Self::new(Shape::Star { epsilon, k })
    }

    pub fn translated(&self, offset: Point) -> Self {
        Self {
            shape: self.shape,
            center: [self.center[0] + offset[0], self.center[1] + offset[1]],
            scale: self.scale,
            tau: OnceLock::new(),
        }
    }

    /// The dilated domain `rΩ = {r z : z ∈ Ω}`.
    pub fn dilated(&self, r: f64) -> Self {
        assert!(r > 0.0, "dilation factor must be positive");
        Self {
            shape: self.shape,
            center: [self.center[0] * r, self.center[1] * r],
            scale: self.scale * r,
            tau: OnceLock::new(),
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn center(&self) -> Point {
        self.center
    }

    /// Radius of a disc centred at the origin that contains the domain.
    pub fn bounding_radius(&self) -> f64 {
        let local = match self.shape {
            Shape::Disc { radius } => radius,
            Shape::Ellipse { a, b } => a.max(b),
            Shape::Star { epsilon, .. } => 1.0 + epsilon.abs(),
        };
        (self.center[0].powi(2) + self.center[1].powi(2)).sqrt() + self.scale * local
    }

    fn local_derivatives(&self, s: f64) -> [Point; 3] {
        let (sn, cs) = s.sin_cos();
        match self.shape {
            Shape::Disc { radius: r } => [[r * cs, r * sn], [-r * sn, r * cs], [-r * cs, -r * sn]],
            Shape::Ellipse { a, b } => [[a * cs, b * sn], [-a * sn, b * cs], [-a * cs, -b * sn]],
            Shape::Star { epsilon, k } => {
                let kf = k as f64;
                let (ks, kc) = (kf * s).sin_cos();
                let rho = 1.0 + epsilon * kc;
                let rho1 = -epsilon * kf * ks;
                let rho2 = -epsilon * kf * kf * kc;
                [
                    [rho * cs, rho * sn],
                    [rho1 * cs - rho * sn, rho1 * sn + rho * cs],
                    [rho2 * cs - 2.0 * rho1 * sn - rho * cs, rho2 * sn + 2.0 * rho1 * cs - rho * sn],
                ]
            }
        }
    }

    /// `γ(s)`, `γ'(s)`, `γ''(s)`.
    pub fn derivatives(&self, s: f64) -> [Point; 3] {
        let [g, d1, d2] = self.local_derivatives(s);
        let k = self.scale;
        [
            [self.center[0] + k * g[0], self.center[1] + k * g[1]],
            [k * d1[0], k * d1[1]],
            [k * d2[0], k * d2[1]],
        ]
    }

    pub fn boundary_point(&self, s: f64) -> Point {
        self.derivatives(s)[0]
    }

    /// Inward unit normal at parameter `s`.
    pub fn normal_at(&self, s: f64) -> Point {
        let d1 = self.derivatives(s)[1];
        let len = d1[0].hypot(d1[1]);
        [-d1[1] / len, d1[0] / len]
    }

    /// Signed curvature with respect to the inward normal.
    pub fn curvature_at(&self, s: f64) -> f64 {
        let [_, d1, d2] = self.derivatives(s);
        let speed = d1[0].hypot(d1[1]);
        (d1[0] * d2[1] - d1[1] * d2[0]) / speed.powi(3)
    }

    /// Distance from the centre to the boundary along polar angle `theta`.
    pub fn radial_extent(&self, theta: f64) -> f64 {
        let local = match self.shape {
            Shape::Disc { radius } => radius,
            Shape::Ellipse { a, b } => a * b / ((b * theta.cos()).powi(2) + (a * theta.sin()).powi(2)).sqrt(),
            Shape::Star { epsilon, k } => 1.0 + epsilon * (k as f64 * theta).cos(),
        };
        self.scale * local
    }

    pub fn contains(&self, z: Point) -> bool {
        let dx = z[0] - self.center[0];
        let dy = z[1] - self.center[1];
        let rho = dx.hypot(dy);
        rho <= self.radial_extent(dy.atan2(dx))
    }

    /// Oriented distance: positive inside, negative outside.
    pub fn signed_distance(&self, z: Point) -> f64 {
        let (_, _, dist) = self.project(z);
        if self.contains(z) {
            dist
        } else {
            -dist
        }
    }

    /// Projection of `z` onto the boundary, valid inside the tube.
    pub fn nearest_boundary_point(&self, z: Point) -> Result<NearestPoint> {
        let tau = self.tubular_radius()?;
        let (s, u, dist) = self.project(z);
        let lambda = if self.contains(z) { dist } else { -dist };
        if dist >= tau {
            return Err(Error::NotInTube { distance: dist, tau });
        }
        Ok(NearestPoint { point: u, s, lambda })
    }

    /// Global nearest boundary point: `(s, γ(s), |z − γ(s)|)`.
    fn project(&self, z: Point) -> (f64, Point, f64) {
        if let Shape::Disc { radius } = self.shape {
            let dx = z[0] - self.center[0];
            let dy = z[1] - self.center[1];
            let s = dy.atan2(dx).rem_euclid(2.0 * PI);
            let u = self.boundary_point(s);
            return (s, u, (self.scale * radius - dx.hypot(dy)).abs());
        }

        let n = COARSE_PROJECTION_NODES;
        let step = 2.0 * PI / n as f64;
        let dist2: Vec<f64> = (0..n)
            .map(|i| {
                let g = self.boundary_point(i as f64 * step);
                (g[0] - z[0]).powi(2) + (g[1] - z[1]).powi(2)
            })
            .collect();
        let mut minima: Vec<usize> = (0..n)
            .filter(|&i| dist2[i] <= dist2[(i + n - 1) % n] && dist2[i] <= dist2[(i + 1) % n])
            .collect();
        minima.sort_by(|&a, &b| dist2[a].total_cmp(&dist2[b]));
        minima.truncate(3);

        let mut best = (0.0, [0.0, 0.0], f64::INFINITY);
        for i in minima {
            let s0 = i as f64 * step;
            let s = self.refine_projection(z, s0 - step, s0 + step, s0);
            let u = self.boundary_point(s);
            let d = (u[0] - z[0]).hypot(u[1] - z[1]);
            if d < best.2 {
                best = (s.rem_euclid(2.0 * PI), u, d);
            }
        }
        best
    }

    /// Minimises `|γ(s) − z|²` on `[lo, hi]`: safeguarded Newton with a
    /// golden-section fallback.
    fn refine_projection(&self, z: Point, lo: f64, hi: f64, start: f64) -> f64 {
        let objective = |s: f64| {
            let g = self.boundary_point(s);
            (g[0] - z[0]).powi(2) + (g[1] - z[1]).powi(2)
        };
        let mut s = start;
        for _ in 0..60 {
            let [g, d1, d2] = self.derivatives(s);
            let diff = [g[0] - z[0], g[1] - z[1]];
            let grad = diff[0] * d1[0] + diff[1] * d1[1];
            let hess = d1[0] * d1[0] + d1[1] * d1[1] + diff[0] * d2[0] + diff[1] * d2[1];
            if hess <= 0.0 {
                break;
            }
            let next = s - grad / hess;
            if !(lo..=hi).contains(&next) {
                break;
            }
            let done = (next - s).abs() < 1e-15 * (1.0 + s.abs());
            s = next;
            if done {
                return s;
            }
        }
        // Newton left the bracket or stalled
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (lo, hi);
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut fc, mut fd) = (objective(c), objective(d));
        while (b - a).abs() > 1e-14 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = objective(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = objective(d);
            }
        }
        let g = 0.5 * (a + b);
        if objective(g) <= objective(s) {
            g
        } else {
            s
        }
    }

    /// Lower bound on the reach of the boundary: the smaller of `1/max|κ|`
    /// and half the shortest double-normal chord, both on a 4096-point grid.
    pub fn tubular_radius(&self) -> Result<f64> {
        self.tau.get_or_init(|| self.estimate_tubular_radius()).clone()
    }

    fn estimate_tubular_radius(&self) -> Result<f64> {
        let n = TUBE_SAMPLE_NODES;
        let step = 2.0 * PI / n as f64;
        let mut points = Vec::with_capacity(n);
        let mut arc = Vec::with_capacity(n + 1);
        let mut max_kappa: f64 = 0.0;
        let mut acc = 0.0;
        for i in 0..n {
            let s = i as f64 * step;
            let [g, d1, _] = self.derivatives(s);
            points.push(g);
            arc.push(acc);
            acc += d1[0].hypot(d1[1]) * step;
            max_kappa = max_kappa.max(self.curvature_at(s).abs());
        }
        let perimeter = acc;
        if !max_kappa.is_finite() || max_kappa > 1e12 {
            return Err(Error::DegenerateBoundary { max_curvature: max_kappa });
        }
        let local = if max_kappa > 0.0 { 1.0 / max_kappa } else { f64::INFINITY };

        // Chords between points closer than π·(1/max|κ|) in arc length cannot
        // be bottlenecks; among the rest keep only interior local minima.
        let exclusion = PI * local.min(perimeter);
        let cyclic_arc = |i: usize, j: usize| {
            let d = (arc[i] - arc[j]).abs();
            d.min(perimeter - d)
        };
        let mut bottleneck = f64::INFINITY;
        for i in 0..n {
            let mut best = f64::INFINITY;
            let mut best_j = None;
            for j in 0..n {
                if cyclic_arc(i, j) < exclusion {
                    continue;
                }
                let d = (points[i][0] - points[j][0]).hypot(points[i][1] - points[j][1]);
                if d < best {
                    best = d;
                    best_j = Some(j);
                }
            }
            if let Some(j) = best_j {
                let prev = (j + n - 1) % n;
                let next = (j + 1) % n;
                if cyclic_arc(i, prev) >= exclusion && cyclic_arc(i, next) >= exclusion {
                    bottleneck = bottleneck.min(best);
                }
            }
        }
        Ok(local.min(0.5 * bottleneck))
    }

    /// Trapezoid nodes on the boundary with their geometric data.
    pub fn boundary_nodes(&self, count: usize) -> Vec<BoundaryNode> {
        let step = 2.0 * PI / count as f64;
        (0..count)
            .map(|i| {
                let s = i as f64 * step;
                let [g, d1, d2] = self.derivatives(s);
                let speed = d1[0].hypot(d1[1]);
                BoundaryNode {
                    s,
                    point: g,
                    normal: [-d1[1] / speed, d1[0] / speed],
                    speed,
                    curvature: (d1[0] * d2[1] - d1[1] * d2[0]) / speed.powi(3),
                    weight: speed * step,
                }
            })
            .collect()
    }

    /// `∫_{∂Ω} g dμ₁` by the periodic trapezoid rule.
    pub fn boundary_integral<G: Fn(Point) -> f64>(&self, g: G) -> f64 {
        self.boundary_integral_with(DEFAULT_BOUNDARY_NODES, g)
    }

    pub fn boundary_integral_with<G: Fn(Point) -> f64>(&self, nodes: usize, g: G) -> f64 {
        self.boundary_nodes(nodes).iter().map(|b| g(b.point) * b.weight).sum()
    }

    pub fn perimeter(&self) -> f64 {
        self.boundary_integral(|_| 1.0)
    }

    /// `∫_{∂Ω} ∫_{-t}^{t} F(u + λ n(u)) (1 − λ κ(u)) dλ dμ₁(u)`, which equals
    /// the area integral of `F` over the tube of half-width `t`.
    pub fn tube_integral<F: Fn(Point) -> f64>(&self, t: f64, f: F) -> Result<f64> {
        let tau = self.tubular_radius()?;
        if !(t > 0.0) || t > tau {
            return Err(Error::TubeTooWide { t, tau });
        }
        let rule = GaussLegendre::new(TUBE_NORMAL_NODES);
        let total = self
            .boundary_nodes(DEFAULT_BOUNDARY_NODES)
            .iter()
            .map(|b| {
                let inner = rule.integrate(-t, t, |lambda| {
                    let z = [b.point[0] + lambda * b.normal[0], b.point[1] + lambda * b.normal[1]];
                    f(z) * (1.0 - lambda * b.curvature)
                });
                inner * b.weight
            })
            .sum();
        Ok(total)
    }

    /// Area quadrature nodes `(z, weight)` in polar coordinates about the
    /// centre: trapezoid in angle, Gauss–Legendre in radius.
    pub fn area_nodes(&self, angular: usize, radial: usize) -> Vec<(Point, f64)> {
        let rule = GaussLegendre::new(radial);
        let step = 2.0 * PI / angular as f64;
        let mut nodes = Vec::with_capacity(angular * radial);
        for i in 0..angular {
            let theta = i as f64 * step;
            let (sn, cs) = theta.sin_cos();
            let extent = self.radial_extent(theta);
            for (rho, w) in rule.mapped(0.0, extent) {
                nodes.push(([self.center[0] + rho * cs, self.center[1] + rho * sn], w * rho * step));
            }
        }
        nodes
    }

    /// `∫_Ω g(z) dz` with the polar quadrature of [`Domain::area_nodes`].
    pub fn area_integral<G: Fn(Point) -> f64>(&self, g: G) -> f64 {
        let angular = (256.0 * self.scale.max(1.0)).ceil() as usize;
        // Neumaier-compensated: the node count is large enough for plain
        // summation to lose several digits
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for (z, w) in self.area_nodes(angular, 96) {
            let v = g(z) * w;
            let t = sum + v;
            comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
            sum = t;
        }
        sum + comp
    }

    pub fn area(&self) -> f64 {
        self.area_integral(|_| 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ellipse() -> Domain {
        Domain::ellipse(1.3, 0.8).unwrap()
    }

    /// Brute-force distance: dense sampling then bisection on the
    /// derivative of the squared distance.
    fn brute_force_distance(dom: &Domain, z: Point) -> f64 {
        let n = 200_000;
        let step = 2.0 * PI / n as f64;
        let d2 = |s: f64| {
            let g = dom.boundary_point(s);
            (g[0] - z[0]).powi(2) + (g[1] - z[1]).powi(2)
        };
        let (mut best_i, mut best) = (0, f64::INFINITY);
        for i in 0..n {
            let v = d2(i as f64 * step);
            if v < best {
                best = v;
                best_i = i;
            }
        }
        let deriv = |s: f64| (d2(s + 1e-7) - d2(s - 1e-7)) / 2e-7;
        let (mut a, mut b) = ((best_i as f64 - 1.0) * step, (best_i as f64 + 1.0) * step);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if deriv(a) * deriv(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        d2(0.5 * (a + b)).sqrt()
    }

    #[test]
    fn disc_signed_distance_closed_form() {
        let d = Domain::unit_disc();
        assert_eq!(d.signed_distance([0.0, 0.0]), 1.0);
        assert_eq!(d.signed_distance([2.0, 0.0]), -1.0);
    }

    #[test]
    fn ellipse_signed_distance_matches_brute_force() {
        let d = ellipse();
        for z in [[1.0, 0.5], [0.3, -0.2], [1.6, 0.1], [-0.9, 0.9], [0.0, 0.0]] {
            let got = d.signed_distance(z);
            let want = brute_force_distance(&d, z);
            assert!((got.abs() - want).abs() < 1e-9, "{z:?}: {got} vs {want}");
            assert_eq!(got > 0.0, d.contains(z));
        }
    }

    #[test]
    fn nearest_point_on_disc() {
        let d = Domain::unit_disc();
        let p = d.nearest_boundary_point([0.5, 0.0]).unwrap();
        assert!((p.point[0] - 1.0).abs() < 1e-15 && p.point[1].abs() < 1e-15);
        assert!((p.lambda - 0.5).abs() < 1e-15);
        let p = d.nearest_boundary_point([0.0, -1.25]).unwrap();
        assert!(p.point[0].abs() < 1e-15 && (p.point[1] + 1.0).abs() < 1e-15);
        assert!((p.lambda + 0.25).abs() < 1e-15);
        assert!(matches!(d.nearest_boundary_point([0.0, 0.0]), Err(Error::NotInTube { .. })));
    }

    #[test]
    fn nearest_point_on_ellipse_matches_grid_argmin() {
        let d = ellipse();
        for z in [[1.2, 0.2], [0.1, 0.85], [-1.0, -0.4]] {
            let p = d.nearest_boundary_point(z).unwrap();
            let n = d.normal_at(p.s);
            assert!((p.point[0] + p.lambda * n[0] - z[0]).abs() < 1e-12);
            assert!((p.point[1] + p.lambda * n[1] - z[1]).abs() < 1e-12);
            let want = brute_force_distance(&d, z);
            assert!((p.lambda.abs() - want).abs() < 1e-10);
        }
    }

    #[test]
    fn curvature_conventions() {
        let d = Domain::disc(2.0).unwrap();
        for s in [0.0, 1.0, 4.0] {
            assert!((d.curvature_at(s) - 0.5).abs() < 1e-14);
        }
        let (a, b) = (1.3, 0.8);
        let e = ellipse();
        for s in [0.0, 0.4, 1.2, 2.9] {
            // finite-difference second derivative oracle
            let hstep = 1e-4;
            let g = |t: f64| e.boundary_point(t);
            let (gm, g0, gp) = (g(s - hstep), g(s), g(s + hstep));
            let d1 = [(gp[0] - gm[0]) / (2.0 * hstep), (gp[1] - gm[1]) / (2.0 * hstep)];
            let d2 = [
                (gp[0] - 2.0 * g0[0] + gm[0]) / (hstep * hstep),
                (gp[1] - 2.0 * g0[1] + gm[1]) / (hstep * hstep),
            ];
            let fd = (d1[0] * d2[1] - d1[1] * d2[0]) / d1[0].hypot(d1[1]).powi(3);
            let closed = a * b / (a * a * s.sin().powi(2) + b * b * s.cos().powi(2)).powf(1.5);
            assert!((e.curvature_at(s) - closed).abs() < 1e-12);
            assert!((fd - closed).abs() < 1e-5);
        }
    }

    #[test]
    fn unit_circle_tube_jacobian_is_arc_length_ratio() {
        let d = Domain::unit_disc();
        for lambda in [-0.7, -0.2, 0.3, 0.9] {
            // concentric circle of radius 1 − λ has circumference 2π(1 − λ)
            let kappa = d.curvature_at(0.3);
            assert!((1.0 - lambda * kappa - (1.0 - lambda)).abs() < 1e-15);
        }
    }

    #[test]
    fn tubular_radius_examples() {
        assert!((Domain::unit_disc().tubular_radius().unwrap() - 1.0).abs() < 1e-6);
        assert!((Domain::disc(3.5).unwrap().tubular_radius().unwrap() - 3.5).abs() < 1e-6);
        let tau = ellipse().tubular_radius().unwrap();
        assert!((tau - 0.8 * 0.8 / 1.3).abs() < 1e-6, "{tau}");
        let scaled = ellipse().dilated(2.0).tubular_radius().unwrap();
        assert!((scaled - 2.0 * tau).abs() < 1e-6);
    }

    #[test]
    fn bottleneck_limits_tubular_radius() {
        // thin ellipse: curvature bound b²/a vs half the minor axis
        let d = Domain::ellipse(1.0, 0.05).unwrap();
        let tau = d.tubular_radius().unwrap();
        assert!(tau <= 0.05 * 0.05 + 1e-9);
        // a disc translated far away keeps its reach
        let d = Domain::disc(0.5).unwrap().translated([3.0, -2.0]);
        assert!((d.tubular_radius().unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn boundary_integrals() {
        assert!((Domain::unit_disc().perimeter() - 2.0 * PI).abs() < 1e-13);
        // dense polyline oracle for the ellipse perimeter
        let e = ellipse();
        let n = 400_000;
        let poly: f64 = (0..n)
            .map(|i| {
                let p = e.boundary_point(2.0 * PI * i as f64 / n as f64);
                let q = e.boundary_point(2.0 * PI * (i + 1) as f64 / n as f64);
                (q[0] - p[0]).hypot(q[1] - p[1])
            })
            .sum();
        assert!((e.perimeter() - poly).abs() < 1e-9, "{} vs {poly}", e.perimeter());
        // ∮ n dμ = 0
        for dom in [e.clone(), Domain::star(0.2, 5).unwrap()] {
            let nodes = dom.boundary_nodes(DEFAULT_BOUNDARY_NODES);
            let n1: f64 = nodes.iter().map(|b| b.normal[0] * b.weight).sum();
            let n2: f64 = nodes.iter().map(|b| b.normal[1] * b.weight).sum();
            assert!(n1.abs() < 1e-12 && n2.abs() < 1e-12);
        }
    }

    #[test]
    fn tube_integral_closed_forms() {
        let d = Domain::unit_disc();
        let area = d.tube_integral(0.5, |_| 1.0).unwrap();
        assert!((area - 2.0 * PI).abs() < 1e-12);
        let t: f64 = 0.5;
        let v = d.tube_integral(t, |z| d.signed_distance(z)).unwrap();
        // ∫_{−t}^{t} λ(1 − λ) dλ = −2t³/3 per unit boundary length
        assert!((v - 2.0 * PI * (-2.0 * t.powi(3) / 3.0)).abs() < 1e-12);
        assert!(matches!(d.tube_integral(1.5, |_| 1.0), Err(Error::TubeTooWide { .. })));
    }

    #[test]
    fn area_quadrature() {
        assert!((ellipse().area() - PI * 1.3 * 0.8).abs() < 1e-12);
        // star: area = π(1 + ε²/2)
        let s = Domain::star(0.2, 5).unwrap();
        assert!((s.area() - PI * (1.0 + 0.02)).abs() < 1e-12);
        assert!((Domain::unit_disc().dilated(3.0).area() - 9.0 * PI).abs() < 1e-11);
    }

    #[test]
    fn spec_roundtrip() {
        let spec: DomainSpec = serde_json::from_str(r#"{"kind":"ellipse","a":1.3,"b":0.8}"#).unwrap();
        let dom = spec.build().unwrap();
        assert_eq!(dom, ellipse());
        assert!(serde_json::from_str::<DomainSpec>(r#"{"kind":"disc","radius":-1}"#)
            .unwrap()
            .build()
            .is_err());
    }
}
