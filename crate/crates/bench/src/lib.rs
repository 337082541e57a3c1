//! Fixtures shared by the pipeline benchmarks.

use critlab_core::{BoundaryProfile, CoefficientKind, DomainGeometry, ScenarioConfig};

/// Unit disk Laplace scenario with `ψ = cos nθ`.
pub fn disk_mode(n: usize, h: f64) -> ScenarioConfig {
    ScenarioConfig {
        id: format!("disk_cos{n}"),
        domain: DomainGeometry::Disk { radius: 1.0 },
        h,
        coefficient: CoefficientKind::Laplace,
        profile: BoundaryProfile::cosine_mode(n, 1.0),
        inner_constant: None,
        tolerances: Default::default(),
        outputs: Default::default(),
    }
}

/// Annulus `1 < r < b` with `ψ = 2 + cos 2θ` and `H = 0`.
pub fn annulus(b: f64, h: f64) -> ScenarioConfig {
    ScenarioConfig {
        id: format!("annulus_b{b}"),
        domain: DomainGeometry::Annulus { inner: 1.0, outer: b },
        h,
        coefficient: CoefficientKind::Laplace,
        profile: BoundaryProfile::new(vec![2.0, 0.0, 1.0], vec![]),
        inner_constant: Some(0.0),
        tolerances: Default::default(),
        outputs: Default::default(),
    }
}
