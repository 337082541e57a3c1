//! Trigonometric-polynomial Dirichlet data and boundary extremum counting.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::DomainKind;

/// `ψ(θ) = c₀ + Σ_k (c_k cos kθ + s_k sin kθ)`.
///
/// `cos` holds `c₀..c_K`, `sin` holds `s₁..s_K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryProfile {
    #[serde(rename = "cos", default)]
    pub cosine_coeffs: Vec<f64>,
    #[serde(rename = "sin", default)]
    pub sine_coeffs: Vec<f64>,
}

impl BoundaryProfile {
    pub fn new(cosine_coeffs: Vec<f64>, sine_coeffs: Vec<f64>) -> Self {
        BoundaryProfile { cosine_coeffs, sine_coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c], vec![])
    }

    /// `amplitude · cos(kθ)`.
    pub fn cosine_mode(k: usize, amplitude: f64) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] += amplitude;
        Self::new(c, vec![])
    }

    /// Highest harmonic K.
    pub fn degree(&self) -> usize {
        self.cosine_coeffs.len().saturating_sub(1).max(self.sine_coeffs.len())
    }

    pub fn mean(&self) -> f64 {
        self.cosine_coeffs.first().copied().unwrap_or(0.0)
    }

    /// Cosine and sine coefficient of harmonic `k ≥ 1`.
    pub fn mode(&self, k: usize) -> (f64, f64) {
        let c = self.cosine_coeffs.get(k).copied().unwrap_or(0.0);
        let s = if k >= 1 { self.sine_coeffs.get(k - 1).copied().unwrap_or(0.0) } else { 0.0 };
        (c, s)
    }

    pub fn is_finite(&self) -> bool {
        self.cosine_coeffs.iter().chain(&self.sine_coeffs).all(|x| x.is_finite())
    }

    pub fn is_constant(&self) -> bool {
        (1..=self.degree()).all(|k| self.mode(k) == (0.0, 0.0))
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.derivative_eval(theta, 0)
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        self.derivative_eval(theta, 1)
    }

    pub fn second_derivative(&self, theta: f64) -> f64 {
        self.derivative_eval(theta, 2)
    }

    /// `order`-th θ-derivative.
    pub fn derivative_eval(&self, theta: f64, order: u32) -> f64 {
        let mut acc = if order == 0 { self.mean() } else { 0.0 };
        for k in 1..=self.degree() {
            let (c, s) = self.mode(k);
            let kf = k as f64;
            let (sn, cs) = (kf * theta).sin_cos();
            let scale = kf.powi(order as i32);
            // d/dθ rotates (cos, sin) → (−sin, cos)
            let (a, b) = match order % 4 {
                0 => (cs, sn),
                1 => (-sn, cs),
                2 => (-cs, -sn),
                _ => (sn, -cs),
            };
            acc += scale * (c * a + s * b);
        }
        acc
    }

    /// `θ ↦ ψ(θ − α)`.
    pub fn rotated(&self, alpha: f64) -> Self {
        let k_max = self.degree();
        let mut cos = vec![0.0; k_max + 1];
        let mut sin = vec![0.0; k_max];
        cos[0] = self.mean();
        for k in 1..=k_max {
            let (c, s) = self.mode(k);
            let (sa, ca) = (k as f64 * alpha).sin_cos();
            cos[k] = c * ca - s * sa;
            sin[k - 1] = c * sa + s * ca;
        }
        Self::new(cos, sin)
    }

    pub fn shifted(&self, by: f64) -> Self {
        let mut out = self.clone();
        if out.cosine_coeffs.is_empty() {
            out.cosine_coeffs.push(0.0);
        }
        out.cosine_coeffs[0] += by;
        out
    }

    /// Σ k^p (|c_k| + |s_k|), a bound on |ψ^(p)|.
    fn derivative_bound(&self, p: i32) -> f64 {
        (1..=self.degree())
            .map(|k| {
                let (c, s) = self.mode(k);
                (k as f64).powi(p) * (c.abs() + s.abs())
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub theta: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryExtremaSummary {
    pub local_maxima: Vec<Extremum>,
    pub local_minima: Vec<Extremum>,
    pub n_local_max: usize,
    pub n_local_min: usize,
    pub n_global_max: usize,
    pub n_global_min: usize,
    pub all_extrema_global: bool,
    pub z_min: f64,
    pub z_max: f64,
    /// Tolerance used to call an extremum global.
    pub value_tol: f64,
}

/// Locates every boundary extremum of a nonconstant profile.
///
/// `tol_value` defaults to `1e-9 · (Z − z)`.
pub fn count_extrema(p: &BoundaryProfile, tol_value: Option<f64>) -> Result<BoundaryExtremaSummary> {
    if !p.is_finite() {
        return Err(Error::DegenerateProfile("non-finite coefficient".into()));
    }
    if p.is_constant() {
        return Err(Error::DegenerateProfile("profile is constant".into()));
    }
    let k = p.degree();
    let n = 4096 * (k + 1);
    let step = 2.0 * PI / n as f64;
    let d1_bound = p.derivative_bound(1);
    let d2_bound = p.derivative_bound(2);
    let d3_bound = p.derivative_bound(3);
    let theta = |i: usize| step * i as f64;
    let d: Vec<f64> = (0..n).map(|i| p.derivative(theta(i))).collect();

    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    for i in 0..n {
        let j = (i + 1) % n;
        let (a, b) = (d[i], d[j]);
        let is_max = a > 0.0 && b <= 0.0;
        let is_min = a < 0.0 && b >= 0.0;
        if !(is_max || is_min) {
            continue;
        }
        let root = bisect(|t| p.derivative(t), theta(i), theta(i) + step, a);
        let root = root.rem_euclid(2.0 * PI);
        let curv = p.second_derivative(root);
        if curv.abs() <= 1e-7 * d2_bound {
            return Err(Error::DegenerateProfile(format!(
                "degenerate critical point of the profile at θ = {root:.12} (ψ'' = {curv:e})"
            )));
        }
        let e = Extremum { theta: root, value: p.eval(root) };
        if is_max {
            maxima.push(e);
        } else {
            minima.push(e);
        }
    }

    // zeros of ψ' without a sign change are plateaus / inflections
    let touch_gate = d3_bound * step * step;
    for i in 0..n {
        let (prev, cur, next) = (d[(i + n - 1) % n], d[i], d[(i + 1) % n]);
        if cur.abs() > touch_gate || cur.abs() > prev.abs() || cur.abs() > next.abs() {
            continue;
        }
        if prev.signum() != next.signum() || cur == 0.0 {
            continue;
        }
        let t = golden_min(|t| p.derivative(t).abs(), theta(i) - step, theta(i) + step);
        if p.derivative(t).abs() <= 1e-10 * d1_bound {
            return Err(Error::DegenerateProfile(format!(
                "ψ' touches zero without changing sign at θ ≈ {:.12}",
                t.rem_euclid(2.0 * PI)
            )));
        }
    }

    maxima.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    minima.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    let z_max = maxima.iter().map(|e| e.value).fold(f64::NEG_INFINITY, f64::max);
    let z_min = minima.iter().map(|e| e.value).fold(f64::INFINITY, f64::min);
    let value_tol = tol_value.unwrap_or(1e-9 * (z_max - z_min));
    let n_global_max = maxima.iter().filter(|e| e.value >= z_max - value_tol).count();
    let n_global_min = minima.iter().filter(|e| e.value <= z_min + value_tol).count();
    Ok(BoundaryExtremaSummary {
        n_local_max: maxima.len(),
        n_local_min: minima.len(),
        all_extrema_global: n_global_max == maxima.len() && n_global_min == minima.len(),
        n_global_max,
        n_global_min,
        local_maxima: maxima,
        local_minima: minima,
        z_min,
        z_max,
        value_tol,
    })
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let lo_positive = f_lo > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..100 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    0.5 * (a + b)
}

/// Which counting theorem family a scenario falls under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ScenarioKind {
    SimplyConnected,
    AnnulusPsiGeH,
    AnnulusPsiLeH,
    AnnulusHBetween,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioClass {
    pub kind: ScenarioKind,
    #[serde(rename = "H", skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
}

/// Classifies a scenario by domain topology and the position of `H`
/// relative to the profile range.
pub fn classify_scenario(
    domain: DomainKind,
    summary: &BoundaryExtremaSummary,
    inner_constant: Option<f64>,
) -> Result<ScenarioClass> {
    match (domain, inner_constant) {
        (DomainKind::Disk, None) => Ok(ScenarioClass { kind: ScenarioKind::SimplyConnected, h: None }),
        (DomainKind::Disk, Some(_)) => {
            Err(Error::DataMismatch("inner constant H given for a simply connected domain".into()))
        }
        (DomainKind::Annulus, None) => Err(Error::DataMismatch("annular domain requires an inner constant H".into())),
        (DomainKind::Annulus, Some(h)) => {
            let (z, big_z, tol) = (summary.z_min, summary.z_max, summary.value_tol);
            if (h - z).abs() <= tol || (h - big_z).abs() <= tol {
                return Err(Error::DegenerateClass { h, z_min: z, z_max: big_z, tol });
            }
            let kind = if z > h {
                ScenarioKind::AnnulusPsiGeH
            } else if big_z < h {
                ScenarioKind::AnnulusPsiLeH
            } else {
                ScenarioKind::AnnulusHBetween
            };
            Ok(ScenarioClass { kind, h: Some(h) })
        }
    }
}
