//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;

use critlab_core::{
    analyze_critical_level, build_disk_mesh, check_counting_identity, default_delta, detect_critical_points,
    disk_harmonic, run_scenario, solve, BoundaryProfile, CoefficientField, CoefficientKind, CriticalOptions,
    DirichletData, DiscreteSolution, DomainGeometry, NewtonOptions, RelationId, RootLocation, ScenarioConfig, Verdict,
};

type Outcome = Result<String, String>;

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn corpus(id: &str) -> ScenarioConfig {
    ScenarioConfig::load(&scenarios_dir().join(format!("{id}.json"))).expect("corpus config")
}

fn disk(id: &str, cos: Vec<f64>, sin: Vec<f64>, coefficient: CoefficientKind, h: f64) -> ScenarioConfig {
    ScenarioConfig {
        id: id.into(),
        domain: DomainGeometry::Disk { radius: 1.0 },
        h,
        coefficient,
        profile: BoundaryProfile::new(cos, sin),
        inner_constant: None,
        tolerances: Default::default(),
        outputs: Default::default(),
    }
}

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn critical_point_at_origin() -> Outcome {
    let mut notes = Vec::new();
    for n in 2..=5usize {
        let mut cos = vec![0.0; n + 1];
        cos[n] = 1.0;
        let out = run_scenario(&disk(&format!("cos{n}"), cos, vec![], CoefficientKind::Laplace, 0.02), false)
            .map_err(|e| e.to_string())?;
        let v = &out.verdict;
        let h = v.provenance.h;
        let agree = v.provenance.oracle_agreement.as_ref().is_some_and(|a| a.agrees && a.locations_match);
        let rec = match out.records.as_slice() {
            [r] => r,
            rs => return Err(format!("n={n}: {} records", rs.len())),
        };
        let dist = rec.x.hypot(rec.y);
        let ok = dist <= 2.0 * h
            && rec.multiplicity == n - 1
            && v.n_global_max == n
            && v.relation == Some(RelationId::Eq1_4)
            && v.verdict == Verdict::Holds
            && agree;
        notes.push(format!(
            "n={n} m={} |z|={dist:.4} N={} {:?} oracle={agree}",
            rec.multiplicity, v.n_global_max, v.verdict
        ));
        if !ok {
            return Err(notes.join("; "));
        }
    }
    Ok(notes.join("; "))
}

fn single_maximum_no_records() -> Outcome {
    let out = run_scenario(&corpus("disk_one_plus_cos"), false).map_err(|e| e.to_string())?;
    let v = &out.verdict;
    ensure(
        out.records.is_empty() && v.relation == Some(RelationId::Cor2_5) && v.verdict == Verdict::Holds,
        format!("records={} relation={:?} verdict={:?}", out.records.len(), v.relation, v.verdict),
    )
}

fn non_global_maximum_inequality() -> Outcome {
    let out = run_scenario(&corpus("disk_cos_plus_cos2"), false).map_err(|e| e.to_string())?;
    let v = &out.verdict;
    ensure(
        v.n_local_max == 2 && v.sum_m == 0 && v.relation == Some(RelationId::Ineq1_3) && v.verdict == Verdict::Holds,
        format!("N_local_max={} sum_m={} relation={:?} verdict={:?}", v.n_local_max, v.sum_m, v.relation, v.verdict),
    )
}

fn interpolated_level_counts() -> Outcome {
    let mesh = Arc::new(build_disk_mesh(1.0, 0.02).map_err(|e| e.to_string())?);
    let fields: [(&str, fn([f64; 2]) -> f64, (usize, usize, usize), usize); 2] = [
        ("Re z^2", |p| p[0] * p[0] - p[1] * p[1], (2, 2, 1), 1),
        ("Re z^3", |p| p[0].powi(3) - 3.0 * p[0] * p[1] * p[1], (3, 3, 1), 2),
    ];
    let mut notes = Vec::new();
    for (name, f, expect, m) in fields {
        let sol =
            DiscreteSolution::interpolate(mesh.clone(), f, CoefficientField::Laplace).map_err(|e| e.to_string())?;
        let recs = detect_critical_points(&sol, &CriticalOptions::default()).map_err(|e| e.to_string())?;
        if recs.len() != 1 {
            return Err(format!("{name}: {} records", recs.len()));
        }
        let rep = analyze_critical_level(&sol, &recs, &[0], default_delta(&sol), None, 3.0 * mesh.h())
            .map_err(|e| e.to_string())?;
        let q = rep.q.unwrap_or(0);
        let got = (rep.m1, rep.m2, q);
        let exact = check_counting_identity(rep.m1, rep.m2, rep.sum_m, q);
        notes.push(format!("{name}: (M1,M2,q)={got:?} sum_m={} identity={exact}", rep.sum_m));
        if got != expect || rep.sum_m != m || !exact {
            return Err(notes.join("; "));
        }
    }
    Ok(notes.join("; "))
}

fn annulus_two_saddles() -> Outcome {
    let cfg = corpus("annulus_b3");
    let out = run_scenario(&cfg, false).map_err(|e| e.to_string())?;
    let v = &out.verdict;
    let h = v.provenance.h;
    // closed form: u = B0 ln r + A2 (r² − r⁻²) cos 2θ with B0 = 2/ln 3, A2 = 9/80
    let c = (2.0 / 3f64.ln()) / (2.0 * 9.0 / 80.0);
    let modulus = ((c + (c * c - 4.0).sqrt()) / 2.0).sqrt();
    let roots = &out.oracle.as_ref().ok_or("no oracle")?.critical_points;
    let oracle_ok = roots.len() == 2
        && roots
            .iter()
            .all(|r| r.location == RootLocation::Interior && r.x.abs() < 1e-6 && (r.y.abs() - modulus).abs() < 1e-6);
    let near = |y: f64| out.records.iter().any(|r| r.x.hypot(r.y - y) <= 2.0 * h && r.multiplicity == 1);
    let ok = v.sum_m == 2
        && near(2.82238)
        && near(-2.82238)
        && v.n_global_max == 2
        && v.verdict == Verdict::Holds
        && oracle_ok;
    ensure(
        ok,
        format!(
            "sum_m={} N={} verdict={:?} oracle |z|={modulus:.9} matches={oracle_ok} records={:?}",
            v.sum_m,
            v.n_global_max,
            v.verdict,
            out.records.iter().map(|r| (r.x, r.y)).collect::<Vec<_>>()
        ),
    )
}

fn annulus_counterexample() -> Outcome {
    let cfg = scenarios_dir().join("annulus_b2.json");
    let run = Command::new(env!("CARGO_BIN_EXE_critlab"))
        .args(["verify", "--seq"])
        .arg(&cfg)
        .output()
        .map_err(|e| e.to_string())?;
    let code = run.status.code();
    let v: serde_json::Value = serde_json::from_slice(&run.stdout).map_err(|e| e.to_string())?;
    let oracle = &v["provenance"]["oracle_agreement"];
    let ok = code == Some(1)
        && v["sum_m"] == 0
        && v["N_global_max"] == 2
        && v["verdict"] == "VIOLATED"
        && oracle["oracle_sum_m"] == 0
        && oracle["agrees"] == true;
    ensure(
        ok,
        format!(
            "exit={code:?} sum_m={} N={} verdict={} oracle_sum_m={}",
            v["sum_m"], v["N_global_max"], v["verdict"], oracle["oracle_sum_m"]
        ),
    )
}

fn max_vertex_error(profile: &BoundaryProfile, h: f64) -> Result<f64, String> {
    let mesh = Arc::new(build_disk_mesh(1.0, h).map_err(|e| e.to_string())?);
    let sol = solve(
        mesh.clone(),
        &CoefficientField::Laplace,
        &DirichletData::disk(profile.clone()),
        &NewtonOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let exact = disk_harmonic(1.0, profile);
    Ok(mesh.vertices().iter().zip(sol.nodal_values()).map(|(&p, &u)| (u - exact.value(p)).abs()).fold(0.0, f64::max))
}

fn convergence(profile: BoundaryProfile) -> Outcome {
    let errs = [0.1, 0.05, 0.025].iter().map(|&h| max_vertex_error(&profile, h)).collect::<Result<Vec<_>, _>>()?;
    let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
    ensure(
        ratios.iter().all(|&r| r >= 3.0),
        format!("errors={:?} ratios={ratios:.2?}", errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>()),
    )
}

fn minimal_surface() -> Outcome {
    // u = 1 + 0.3x − 0.2y
    let affine = BoundaryProfile::new(vec![1.0, 0.3], vec![-0.2]);
    let mesh = Arc::new(build_disk_mesh(1.0, 0.05).map_err(|e| e.to_string())?);
    let sol =
        solve(mesh.clone(), &CoefficientField::MinimalSurface, &DirichletData::disk(affine), &NewtonOptions::default())
            .map_err(|e| e.to_string())?;
    let err = mesh
        .vertices()
        .iter()
        .zip(sol.nodal_values())
        .map(|(p, u)| (u - (1.0 + 0.3 * p[0] - 0.2 * p[1])).abs())
        .fold(0.0, f64::max);
    let out = run_scenario(&corpus("minimal_cos2"), false).map_err(|e| e.to_string())?;
    let v = &out.verdict;
    ensure(
        err <= 1e-9
            && v.sum_m == 1
            && v.n_global_max == 2
            && v.relation == Some(RelationId::Eq1_4)
            && v.verdict == Verdict::Holds,
        format!(
            "affine error={err:.2e}; cos2: sum_m={} N={} relation={:?} verdict={:?}",
            v.sum_m, v.n_global_max, v.relation, v.verdict
        ),
    )
}

fn degree_identity() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut paths: Vec<PathBuf> =
        std::fs::read_dir(scenarios_dir()).map_err(|e| e.to_string())?.map(|e| e.unwrap().path()).collect();
    paths.sort();
    for p in paths {
        let cfg = ScenarioConfig::load(&p).map_err(|e| e.to_string())?;
        let out = run_scenario(&cfg, false).map_err(|e| e.to_string())?;
        if out.records.iter().any(|r| r.near_boundary()) {
            continue;
        }
        let deg = out.degree.boundary_degree;
        let holds = deg == Some(-(out.verdict.sum_m as i64));
        ok &= holds;
        notes.push(format!("{}:{}/{}", cfg.id, out.verdict.sum_m, deg.map_or("-".into(), |d| d.to_string())));
    }
    ensure(ok && !notes.is_empty(), format!("sum_m/degree {}", notes.join(" ")))
}

fn deterministic_output() -> Outcome {
    let mut compared = 0;
    for id in ["disk_cos3", "annulus_b3", "minimal_cos2"] {
        let cfg = scenarios_dir().join(format!("{id}.json"));
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_critlab")).args(["verify", "--seq"]).arg(&cfg).output().map(|o| o.stdout)
        };
        let (a, b) = (run().map_err(|e| e.to_string())?, run().map_err(|e| e.to_string())?);
        if a.is_empty() || a != b {
            return Err(format!("{id}: verdict JSON differs between runs"));
        }
        compared += 1;
    }
    Ok(format!("{compared} scenarios byte-identical across repeated runs"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("1 disk cos nθ: one critical point of multiplicity n−1 at the origin", critical_point_at_origin),
        ("2 disk 1+cosθ: no interior critical points", single_maximum_no_records),
        ("3 disk cosθ+0.3cos2θ: inequality with a non-global maximum", non_global_maximum_inequality),
        ("4 interpolated Re z², Re z³: level counts and identity", interpolated_level_counts),
        ("5 annulus 1<r<3: two simple saddles, relation holds", annulus_two_saddles),
        ("6 annulus 1<r<2: no critical points, VIOLATED, exit code 1", annulus_counterexample),
        ("7 solver convergence, disk cosθ, ratios ≥ 3", || convergence(BoundaryProfile::cosine_mode(1, 1.0))),
        ("7s supplementary convergence, disk cos3θ, ratios ≥ 3", || {
            convergence(BoundaryProfile::cosine_mode(3, 1.0))
        }),
        ("8 minimal surface: affine reproduction and cos2θ saddle", minimal_surface),
        ("9 Σm equals minus the boundary degree", degree_identity),
        ("10 sequential verdict JSON is byte-identical", deterministic_output),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS [{name}] {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{name}] {detail}");
            }
        }
    }
    println!("{} of {} acceptance checks passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
