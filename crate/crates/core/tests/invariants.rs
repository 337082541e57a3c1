use std::f64::consts::PI;
use std::sync::Arc;

use critlab_core::{
    boundary_degree, build_annulus_mesh, build_disk_mesh, detect_critical_points, disk_harmonic,
    oracle_boundary_degree, run_scenario, solve, BoundaryProfile, CoefficientField, CoefficientKind, CriticalOptions,
    DirichletData, DomainGeometry, NewtonOptions, ScenarioConfig,
};
use proptest::prelude::*;

fn disk_cfg(profile: BoundaryProfile, h: f64) -> ScenarioConfig {
    ScenarioConfig {
        id: "prop".into(),
        domain: DomainGeometry::Disk { radius: 1.0 },
        h,
        coefficient: CoefficientKind::Laplace,
        profile,
        inner_constant: None,
        tolerances: Default::default(),
        outputs: Default::default(),
    }
}

fn profile_strategy() -> impl Strategy<Value = BoundaryProfile> {
    (prop::collection::vec(-1.0..1.0f64, 1..4), prop::collection::vec(-1.0..1.0f64, 0..3))
        .prop_filter("nonconstant", |(c, s)| c.iter().skip(1).chain(s).any(|x| x.abs() > 0.1))
        .prop_map(|(mut c, s)| {
            c.insert(0, 0.0);
            BoundaryProfile::new(c, s)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn constant_shift_moves_values_not_points(p in profile_strategy(), c in -5.0..5.0f64) {
        let mesh = Arc::new(build_disk_mesh(1.0, 0.1).unwrap());
        let opts = NewtonOptions::default();
        let a = solve(mesh.clone(), &CoefficientField::Laplace, &DirichletData::disk(p.clone()), &opts).unwrap();
        let b = solve(mesh, &CoefficientField::Laplace, &DirichletData::disk(p.shifted(c)), &opts).unwrap();
        for (x, y) in a.nodal_values().iter().zip(b.nodal_values()) {
            prop_assert!((y - x - c).abs() < 1e-9);
        }
        let ra = detect_critical_points(&a, &CriticalOptions::default()).unwrap();
        let rb = detect_critical_points(&b, &CriticalOptions::default()).unwrap();
        prop_assert_eq!(ra.len(), rb.len());
        for (x, y) in ra.iter().zip(&rb) {
            prop_assert_eq!(x.multiplicity, y.multiplicity);
            prop_assert!((x.x - y.x).abs() < 1e-9 && (x.y - y.y).abs() < 1e-9);
        }
    }

    #[test]
    fn rotated_mode_keeps_its_saddle(n in 2usize..5, alpha in 0.0..2.0 * PI) {
        let out = run_scenario(&disk_cfg(BoundaryProfile::cosine_mode(n, 1.0).rotated(alpha), 0.04), false).unwrap();
        prop_assert_eq!(out.verdict.sum_m, n - 1);
        prop_assert_eq!(out.records.len(), 1);
        prop_assert!(out.records[0].x.hypot(out.records[0].y) <= 0.08);
        prop_assert_eq!(out.verdict.n_global_max, n);
    }

    #[test]
    fn multiplicities_match_boundary_degree(p in profile_strategy()) {
        let mesh = Arc::new(build_disk_mesh(1.0, 0.05).unwrap());
        let sol = solve(mesh, &CoefficientField::Laplace, &DirichletData::disk(p.clone()), &NewtonOptions::default()).unwrap();
        let recs = detect_critical_points(&sol, &CriticalOptions::default()).unwrap();
        prop_assume!(recs.iter().all(|r| !r.near_boundary()));
        let Ok(deg) = boundary_degree(&sol) else { return Ok(()) };
        let sum: i64 = recs.iter().map(|r| r.multiplicity as i64).sum();
        prop_assert_eq!(sum, -deg);
        prop_assert_eq!(oracle_boundary_degree(&disk_harmonic(1.0, &p)).ok().map(|d| d <= 0), Some(true));
    }

    #[test]
    fn verdicts_are_deterministic(p in profile_strategy()) {
        let cfg = disk_cfg(p, 0.08);
        let a = run_scenario(&cfg, false).unwrap().verdict.to_json().unwrap();
        let b = run_scenario(&cfg, true).unwrap().verdict.to_json().unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn maximum_principle_on_annulus() {
    let mesh = Arc::new(build_annulus_mesh(1.0, 2.0, 0.05).unwrap());
    let data = DirichletData::annulus(BoundaryProfile::new(vec![2.0, 0.0, 1.0], vec![]), 0.5);
    for coeff in [CoefficientField::Laplace, CoefficientField::MinimalSurface] {
        let sol = solve(mesh.clone(), &coeff, &data, &NewtonOptions::default()).unwrap();
        let (lo, hi) = sol.min_max();
        assert!(lo >= 0.5 - 1e-9 && hi <= 3.0 + 1e-9, "{lo} {hi}");
    }
}
