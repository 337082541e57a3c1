//! Closed-form harmonic solutions on disks and annuli.
//!
//! Writing `u = Re f(z)` with `f = A₀ + B₀ log z + Σ (α_k z^k + β_k z^{-k})`,
//! the gradient of `u` is `conj f′(z)`, so interior critical points of `u`
//! are the zeros of `f′` and their multiplicities are root multiplicities.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::DomainGeometry;
use crate::poly;
use crate::profile::BoundaryProfile;
use crate::Point;

/// Roots closer than this are one multiple root.
pub const ROOT_CLUSTER_TOL: f64 = 1e-8;
/// Roots this close to a boundary circle are boundary-critical.
pub const BOUNDARY_BAND: f64 = 1e-8;

/// `(a_cos r^k + b_cos r^{-k}) cos kθ + (a_sin r^k + b_sin r^{-k}) sin kθ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicMode {
    pub k: usize,
    pub a_cos: f64,
    pub b_cos: f64,
    pub a_sin: f64,
    pub b_sin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicRepresentation {
    pub domain: DomainGeometry,
    #[serde(rename = "A0")]
    pub a0: f64,
    #[serde(rename = "B0")]
    pub b0: f64,
    pub modes: Vec<HarmonicMode>,
}

/// Harmonic extension of `ψ` into the disk of radius `radius`.
pub fn disk_harmonic(radius: f64, p: &BoundaryProfile) -> HarmonicRepresentation {
    let modes = (1..=p.degree())
        .map(|k| {
            let (c, s) = p.mode(k);
            let rk = radius.powi(k as i32);
            HarmonicMode { k, a_cos: c / rk, b_cos: 0.0, a_sin: s / rk, b_sin: 0.0 }
        })
        .collect();
    HarmonicRepresentation { domain: DomainGeometry::Disk { radius }, a0: p.mean(), b0: 0.0, modes }
}

/// Harmonic `u` on `inner < r < outer` with `u = H` on the inner circle and
/// `u = ψ` on the outer one.
pub fn annulus_harmonic(inner: f64, outer: f64, h: f64, p: &BoundaryProfile) -> Result<HarmonicRepresentation> {
    if !(inner > 0.0 && inner < outer) {
        return Err(Error::Config(format!("annulus radii must satisfy 0 < a < b, got a = {inner}, b = {outer}")));
    }
    let (la, lb) = (inner.ln(), outer.ln());
    let b0 = (p.mean() - h) / (lb - la);
    let a0 = h - b0 * la;
    let modes = (1..=p.degree())
        .map(|k| {
            let (c, s) = p.mode(k);
            let ki = k as i32;
            // A a^k + B a^-k = 0,  A b^k + B b^-k = c
            let (ak, bk) = (inner.powi(ki), outer.powi(ki));
            let det = ak / bk - bk / ak;
            let solve = |rhs: f64| {
                let a = -rhs / ak / det;
                let b = rhs * ak / det;
                (a, b)
            };
            let (a_cos, b_cos) = solve(c);
            let (a_sin, b_sin) = solve(s);
            HarmonicMode { k, a_cos, b_cos, a_sin, b_sin }
        })
        .collect();
    Ok(HarmonicRepresentation { domain: DomainGeometry::Annulus { inner, outer }, a0, b0, modes })
}

impl HarmonicRepresentation {
    pub fn is_constant(&self) -> bool {
        self.b0 == 0.0
            && self.modes.iter().all(|m| m.a_cos == 0.0 && m.b_cos == 0.0 && m.a_sin == 0.0 && m.b_sin == 0.0)
    }

    fn max_k(&self) -> usize {
        self.modes.iter().map(|m| m.k).max().unwrap_or(0)
    }

    /// Laurent coefficients of `f′`, index `i` holding the power `i − (K + 1)`.
    fn derivative_laurent(&self) -> Vec<Complex64> {
        let kmax = self.max_k();
        let off = kmax + 1;
        let mut c = vec![Complex64::new(0.0, 0.0); 2 * kmax + 1];
        c[off - 1] += self.b0;
        for m in &self.modes {
            let kf = m.k as f64;
            let alpha = Complex64::new(m.a_cos, -m.a_sin);
            let beta = Complex64::new(m.b_cos, m.b_sin);
            c[off + m.k - 1] += kf * alpha;
            c[off - m.k - 1] -= kf * beta;
        }
        c
    }

    /// `f′(z)`.
    pub fn complex_derivative(&self, z: Complex64) -> Complex64 {
        let c = self.derivative_laurent();
        let off = self.max_k() as i32 + 1;
        c.iter().enumerate().filter(|(_, a)| a.norm() != 0.0).map(|(i, a)| a * z.powi(i as i32 - off)).sum()
    }

    pub fn value(&self, p: Point) -> f64 {
        let r = p[0].hypot(p[1]);
        let theta = p[1].atan2(p[0]);
        let mut u = self.a0;
        if self.b0 != 0.0 {
            u += self.b0 * r.ln();
        }
        for m in &self.modes {
            let ki = m.k as i32;
            let (rk, rmk) = (r.powi(ki), if m.b_cos != 0.0 || m.b_sin != 0.0 { r.powi(-ki) } else { 0.0 });
            let (s, c) = (m.k as f64 * theta).sin_cos();
            u += (m.a_cos * rk + m.b_cos * rmk) * c + (m.a_sin * rk + m.b_sin * rmk) * s;
        }
        u
    }

    pub fn gradient(&self, p: Point) -> Point {
        let d = self.complex_derivative(Complex64::new(p[0], p[1]));
        [d.re, -d.im]
    }

    /// All zeros of `f′` in the plane (excluding the origin when it is a pole),
    /// clustered into multiple roots.
    pub fn derivative_zeros(&self) -> Vec<(Complex64, usize)> {
        let c = self.derivative_laurent();
        let Some(first) = c.iter().position(|a| a.norm() != 0.0) else {
            return Vec::new();
        };
        let off = self.max_k() + 1;
        // powers below zero are poles at the origin; only z^{-p_min} f′ is a polynomial
        let start = first.min(off);
        let mut rs = poly::roots(&c[start..]);
        rs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        poly::cluster_roots(&rs, ROOT_CLUSTER_TOL)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RootLocation {
    Interior,
    BoundaryCritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleRoot {
    pub x: f64,
    pub y: f64,
    pub multiplicity: usize,
    pub location: RootLocation,
}

/// Interior and boundary-critical points of a harmonic representation.
pub fn oracle_critical_points(rep: &HarmonicRepresentation) -> Result<Vec<OracleRoot>> {
    if rep.is_constant() {
        return Err(Error::ConstantField);
    }
    let mut out = Vec::new();
    for (z, mult) in rep.derivative_zeros() {
        let r = z.norm();
        let location = match rep.domain {
            DomainGeometry::Disk { radius } => {
                if (r - radius).abs() <= BOUNDARY_BAND {
                    Some(RootLocation::BoundaryCritical)
                } else if r < radius {
                    Some(RootLocation::Interior)
                } else {
                    None
                }
            }
            DomainGeometry::Annulus { inner, outer } => {
                if (r - inner).abs() <= BOUNDARY_BAND || (r - outer).abs() <= BOUNDARY_BAND {
                    Some(RootLocation::BoundaryCritical)
                } else if r > inner && r < outer {
                    Some(RootLocation::Interior)
                } else {
                    None
                }
            }
        };
        if let Some(location) = location {
            out.push(OracleRoot { x: z.re, y: z.im, multiplicity: mult, location });
        }
    }
    Ok(out)
}

/// Value and gradient of the harmonic field at a point of the closed domain.
pub fn eval_harmonic(rep: &HarmonicRepresentation, p: Point) -> Result<(f64, Point)> {
    let slack = 1e-9 * rep.domain.outer_radius();
    if rep.domain.distance_to_boundary(p) < -slack {
        return Err(Error::OutsideDomain(p));
    }
    Ok((rep.value(p), rep.gradient(p)))
}

/// Degree of `∇u` over the oriented boundary (outer loop counterclockwise,
/// inner loop clockwise), by dense angle accumulation on the circles.
pub fn oracle_boundary_degree(rep: &HarmonicRepresentation) -> Result<i64> {
    let samples = 4096 * (rep.max_k() + 1);
    let mut total = 0.0;
    let mut circles = vec![(rep.domain.outer_radius(), 1.0)];
    if let Some(a) = rep.domain.inner_radius() {
        circles.push((a, -1.0));
    }
    for (r, dir) in circles {
        let mut prev: Option<f64> = None;
        let mut acc = 0.0;
        for i in 0..=samples {
            let t = dir * 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
            let p = [r * t.cos(), r * t.sin()];
            let g = rep.gradient(p);
            if g[0].hypot(g[1]) < 1e-14 {
                return Err(Error::LoopThroughZero(p));
            }
            let ang = g[1].atan2(g[0]);
            if let Some(a) = prev {
                acc += wrap(ang - a);
            }
            prev = Some(ang);
        }
        total += acc;
    }
    Ok((total / (2.0 * std::f64::consts::PI)).round() as i64)
}

fn wrap(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut x = a % (2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    } else if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

/// JSON body of the `oracle` report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleReport {
    pub critical_points: Vec<OracleRoot>,
    pub coefficients: HarmonicRepresentation,
}
