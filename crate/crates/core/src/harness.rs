//! Scenario configuration, the end-to-end pipeline, and counting-relation verdicts.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::critical::{boundary_degree, detect_critical_points, records_to_csv, CriticalOptions, CriticalPointRecord};
use crate::error::{Error, Result};
use crate::levelset::{analyze_critical_level, default_delta, level_groups, level_svg, LevelSetReport};
use crate::mesh::{build_annulus_mesh, build_disk_mesh, DomainGeometry, DomainKind, MeshedDomain};
use crate::oracle::{
    annulus_harmonic, disk_harmonic, oracle_critical_points, HarmonicRepresentation, OracleReport, OracleRoot,
    RootLocation, BOUNDARY_BAND, ROOT_CLUSTER_TOL,
};
use crate::profile::{
    classify_scenario, count_extrema, BoundaryExtremaSummary, BoundaryProfile, ScenarioClass, ScenarioKind,
};
use crate::solver::{solve, CoefficientField, DirichletData, DiscreteSolution, NewtonOptions};

/// Domain of a scenario; same shape as the mesh geometry.
pub type DomainSpec = DomainGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientKind {
    Laplace,
    MinimalSurface,
}

impl CoefficientKind {
    pub fn field(self) -> CoefficientField {
        match self {
            CoefficientKind::Laplace => CoefficientField::Laplace,
            CoefficientKind::MinimalSurface => CoefficientField::MinimalSurface,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub newton_tol: f64,
    pub max_iter: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grad_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub merge_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_delta: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        let n = NewtonOptions::default();
        Tolerances { newton_tol: n.tol, max_iter: n.max_iter, grad_tol: None, merge_radius: None, band_delta: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Outputs {
    pub mesh: bool,
    pub solution: bool,
    pub oracle: bool,
    pub svg: bool,
    pub csv: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub id: String,
    pub domain: DomainSpec,
    pub h: f64,
    pub coefficient: CoefficientKind,
    pub profile: BoundaryProfile,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub inner_constant: Option<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub outputs: Outputs,
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub h: Option<f64>,
    pub grad_tol: Option<f64>,
    pub band_delta: Option<f64>,
    pub svg: bool,
    pub csv: bool,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() || self.id.contains(['/', '\\']) {
            return Err(Error::Config(format!("scenario id {:?} must be a non-empty file-name-safe string", self.id)));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::Config(format!("mesh size h must be positive, got {}", self.h)));
        }
        match self.domain {
            DomainGeometry::Disk { radius } if !(radius > 0.0) => {
                return Err(Error::Config(format!("disk radius must be positive, got {radius}")));
            }
            DomainGeometry::Annulus { inner, outer } if !(inner > 0.0 && inner < outer) => {
                return Err(Error::Config(format!("annulus radii must satisfy 0 < a < b, got {inner}, {outer}")));
            }
            _ => {}
        }
        match (self.domain.kind(), self.inner_constant) {
            (DomainKind::Disk, Some(_)) => return Err(Error::Config("H is only meaningful on an annulus".into())),
            (DomainKind::Annulus, None) => return Err(Error::Config("annulus scenarios need H".into())),
            _ => {}
        }
        if !self.profile.is_finite() || self.inner_constant.is_some_and(|h| !h.is_finite()) {
            return Err(Error::Config("boundary data must be finite".into()));
        }
        Ok(())
    }

    pub fn with_overrides(mut self, o: &Overrides) -> Self {
        if let Some(h) = o.h {
            self.h = h;
        }
        if o.grad_tol.is_some() {
            self.tolerances.grad_tol = o.grad_tol;
        }
        if o.band_delta.is_some() {
            self.tolerances.band_delta = o.band_delta;
        }
        self.outputs.svg |= o.svg;
        self.outputs.csv |= o.csv;
        self
    }

    pub fn dirichlet(&self) -> DirichletData {
        DirichletData { outer_profile: self.profile.clone(), inner_constant: self.inner_constant }
    }

    pub fn mesh(&self) -> Result<MeshedDomain> {
        match self.domain {
            DomainGeometry::Disk { radius } => build_disk_mesh(radius, self.h),
            DomainGeometry::Annulus { inner, outer } => build_annulus_mesh(inner, outer, self.h),
        }
    }

    pub fn newton(&self, parallel: bool) -> NewtonOptions {
        NewtonOptions {
            tol: self.tolerances.newton_tol,
            max_iter: self.tolerances.max_iter,
            parallel,
            ..NewtonOptions::default()
        }
    }

    pub fn critical_options(&self) -> CriticalOptions {
        CriticalOptions {
            grad_tol: self.tolerances.grad_tol,
            merge_radius: self.tolerances.merge_radius,
            probe_radius: None,
        }
    }

    /// Closed-form harmonic solution, for Laplace scenarios.
    pub fn oracle(&self) -> Result<Option<HarmonicRepresentation>> {
        if self.coefficient != CoefficientKind::Laplace {
            return Ok(None);
        }
        Ok(Some(match self.domain {
            DomainGeometry::Disk { radius } => disk_harmonic(radius, &self.profile),
            DomainGeometry::Annulus { inner, outer } => {
                annulus_harmonic(inner, outer, self.inner_constant.unwrap_or(0.0), &self.profile)?
            }
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RelationId {
    #[serde(rename = "INEQ_1_3")]
    Ineq1_3,
    #[serde(rename = "EQ_1_4")]
    Eq1_4,
    #[serde(rename = "INEQ_1_6")]
    Ineq1_6,
    #[serde(rename = "EQ_1_7_OR_1_8")]
    Eq1_7Or1_8,
    #[serde(rename = "INEQ_1_9")]
    Ineq1_9,
    #[serde(rename = "EQ_1_10_OR_1_11")]
    Eq1_10Or1_11,
    #[serde(rename = "COR_2_5")]
    Cor2_5,
    #[serde(rename = "COR_3_6")]
    Cor3_6,
    #[serde(rename = "COR_3_7")]
    Cor3_7,
    #[serde(rename = "COR_4_6")]
    Cor4_6,
}

impl RelationId {
    pub fn is_equality(self) -> bool {
        matches!(self, RelationId::Eq1_4 | RelationId::Eq1_7Or1_8 | RelationId::Eq1_10Or1_11)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Holds,
    Violated,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DegeneracyFlag {
    BoundaryCritical,
    NearBoundary,
    SplitLevels,
    DegenerateClass,
    OracleDisagreement,
}

/// Relation applicable to a classified scenario. A single boundary maximum
/// (minimum when `ψ ≤ H`) selects the corollary; otherwise global extrema
/// select the equality and local extrema the inequality.
pub fn applicable_relation(domain: DomainKind, class: &ScenarioClass, summary: &BoundaryExtremaSummary) -> RelationId {
    let single = summary.n_local_max == 1;
    let global = summary.all_extrema_global;
    match (domain, class.kind) {
        (_, ScenarioKind::AnnulusPsiLeH) => RelationId::Cor3_7,
        (DomainKind::Disk, _) | (_, ScenarioKind::SimplyConnected) => {
            if single {
                RelationId::Cor2_5
            } else if global {
                RelationId::Eq1_4
            } else {
                RelationId::Ineq1_3
            }
        }
        (_, ScenarioKind::AnnulusPsiGeH) => {
            if single {
                RelationId::Cor3_6
            } else if global {
                RelationId::Eq1_7Or1_8
            } else {
                RelationId::Ineq1_6
            }
        }
        (_, ScenarioKind::AnnulusHBetween) => {
            if single {
                RelationId::Cor4_6
            } else if global {
                RelationId::Eq1_10Or1_11
            } else {
                RelationId::Ineq1_9
            }
        }
    }
}

/// Evaluates a relation; returns whether it holds and the `N` it used.
pub fn evaluate_relation(
    relation: RelationId,
    summary: &BoundaryExtremaSummary,
    sum_m: usize,
    record_count: usize,
) -> (bool, usize) {
    let at_most_one_simple = record_count <= 1 && sum_m <= 1;
    let either = |n: usize| sum_m == n || sum_m + 1 == n;
    match relation {
        RelationId::Ineq1_3 => (sum_m < summary.n_local_max, summary.n_local_max),
        RelationId::Eq1_4 => (sum_m + 1 == summary.n_global_max, summary.n_global_max),
        RelationId::Ineq1_6 | RelationId::Ineq1_9 => (sum_m <= summary.n_local_max, summary.n_local_max),
        RelationId::Eq1_7Or1_8 | RelationId::Eq1_10Or1_11 => (either(summary.n_global_max), summary.n_global_max),
        RelationId::Cor2_5 => (sum_m == 0, 1),
        RelationId::Cor3_6 | RelationId::Cor4_6 => (at_most_one_simple, 1),
        RelationId::Cor3_7 => {
            if summary.n_local_min == 1 {
                (at_most_one_simple, 1)
            } else if summary.all_extrema_global {
                (either(summary.n_global_min), summary.n_global_min)
            } else {
                (sum_m <= summary.n_local_min, summary.n_local_min)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub t: f64,
    pub q: usize,
    #[serde(rename = "M1")]
    pub m1: usize,
    #[serde(rename = "M2")]
    pub m2: usize,
    pub sum_m: usize,
    pub identity_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleAgreement {
    pub fem_sum_m: usize,
    pub oracle_sum_m: usize,
    /// Every interior oracle root has a record within 2h with equal multiplicity, and vice versa.
    pub locations_match: bool,
    pub boundary_critical_roots: usize,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedTolerances {
    pub newton_tol: f64,
    pub max_iter: usize,
    pub grad_tol: f64,
    pub merge_radius: f64,
    pub probe_radius: f64,
    pub band_delta: f64,
    pub root_cluster_tol: f64,
    pub boundary_band: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub h: f64,
    pub tolerances: ResolvedTolerances,
    pub oracle_agreement: Option<OracleAgreement>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub scenario: String,
    pub class: Option<ScenarioClass>,
    pub relation: Option<RelationId>,
    #[serde(rename = "N_local_max")]
    pub n_local_max: usize,
    #[serde(rename = "N_global_max")]
    pub n_global_max: usize,
    #[serde(rename = "N_used")]
    pub n_used: Option<usize>,
    pub sum_m: usize,
    pub q_per_level: Vec<LevelSummary>,
    pub verdict: Verdict,
    pub flags: Vec<DegeneracyFlag>,
    pub provenance: Provenance,
}

impl VerdictRecord {
    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeCheck {
    pub boundary_degree: Option<i64>,
    pub consistent: Option<bool>,
}

/// Everything one scenario run produces.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub config: ScenarioConfig,
    pub verdict: VerdictRecord,
    pub summary: BoundaryExtremaSummary,
    pub solution: DiscreteSolution,
    pub records: Vec<CriticalPointRecord>,
    pub levels: Vec<LevelSetReport>,
    pub oracle: Option<OracleReport>,
    pub degree: DegreeCheck,
}

/// Detailed per-scenario report persisted next to the verdict.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport<'a> {
    pub verdict: &'a VerdictRecord,
    pub boundary_extrema: &'a BoundaryExtremaSummary,
    pub newton: &'a crate::solver::NewtonReport,
    pub critical_points: &'a [CriticalPointRecord],
    pub levels: &'a [LevelSetReport],
    pub degree_check: DegreeCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<&'a OracleReport>,
}

fn oracle_agreement(
    records: &[CriticalPointRecord],
    roots: &[OracleRoot],
    h: f64,
    fem_sum_m: usize,
) -> OracleAgreement {
    let interior: Vec<&OracleRoot> = roots.iter().filter(|r| r.location == RootLocation::Interior).collect();
    let oracle_sum_m = interior.iter().map(|r| r.multiplicity).sum();
    let counted: Vec<&CriticalPointRecord> = records.iter().filter(|r| !r.near_boundary()).collect();
    let near = |r: &CriticalPointRecord, o: &OracleRoot| (r.x - o.x).hypot(r.y - o.y) <= 2.0 * h;
    let locations_match =
        interior.iter().all(|o| counted.iter().any(|r| near(r, o) && r.multiplicity == o.multiplicity))
            && counted.iter().all(|r| interior.iter().any(|o| near(r, o) && r.multiplicity == o.multiplicity));
    let boundary_critical_roots = roots.iter().filter(|r| r.location == RootLocation::BoundaryCritical).count();
    OracleAgreement {
        fem_sum_m,
        oracle_sum_m,
        locations_match,
        boundary_critical_roots,
        agrees: fem_sum_m == oracle_sum_m,
    }
}

/// Runs mesh → solve → detect → oracle cross-check → level analysis → verdict.
pub fn run_scenario(cfg: &ScenarioConfig, parallel: bool) -> Result<ScenarioOutcome> {
    run_inner(cfg, parallel).map_err(|e| Error::Scenario { scenario: cfg.id.clone(), source: Box::new(e) })
}

fn run_inner(cfg: &ScenarioConfig, parallel: bool) -> Result<ScenarioOutcome> {
    cfg.validate()?;
    let mut flags = BTreeSet::new();
    let summary = count_extrema(&cfg.profile, None)?;
    let class = match classify_scenario(cfg.domain.kind(), &summary, cfg.inner_constant) {
        Ok(c) => Some(c),
        Err(Error::DegenerateClass { .. }) => {
            flags.insert(DegeneracyFlag::DegenerateClass);
            None
        }
        Err(e) => return Err(e),
    };
    let relation = class.map(|c| applicable_relation(cfg.domain.kind(), &c, &summary));

    let mesh = Arc::new(cfg.mesh()?);
    let h = mesh.h();
    let sol = solve(mesh, &cfg.coefficient.field(), &cfg.dirichlet(), &cfg.newton(parallel))?;
    let copts = cfg.critical_options();
    let records = detect_critical_points(&sol, &copts)?;
    let counted: Vec<usize> = (0..records.len()).filter(|&i| !records[i].near_boundary()).collect();
    if counted.len() < records.len() {
        flags.insert(DegeneracyFlag::NearBoundary);
    }
    let sum_m: usize = counted.iter().map(|&i| records[i].multiplicity).sum();

    let oracle = match cfg.oracle()? {
        Some(rep) => {
            let roots = oracle_critical_points(&rep)?;
            Some(OracleReport { critical_points: roots, coefficients: rep })
        }
        None => None,
    };
    let agreement = oracle.as_ref().map(|o| oracle_agreement(&records, &o.critical_points, h, sum_m));
    if let Some(a) = &agreement {
        if a.boundary_critical_roots > 0 {
            flags.insert(DegeneracyFlag::BoundaryCritical);
        }
        if !a.agrees {
            flags.insert(DegeneracyFlag::OracleDisagreement);
        }
    }

    let delta = cfg.tolerances.band_delta.unwrap_or_else(|| default_delta(&sol));
    let interior: Vec<CriticalPointRecord> = counted.iter().map(|&i| records[i].clone()).collect();
    let groups = level_groups(&sol, &interior, delta);
    let merge = copts.merge_radius(h);
    let mut levels = Vec::new();
    for g in &groups {
        let mut rep = analyze_critical_level(&sol, &interior, g, delta, cfg.inner_constant, merge)?;
        rep.records = g.iter().map(|&i| counted[i]).collect();
        levels.push(rep);
    }
    if groups.len() > 1 && relation.is_some_and(|r| r.is_equality()) {
        flags.insert(DegeneracyFlag::SplitLevels);
    }

    let degree = match boundary_degree(&sol) {
        Ok(d) => DegreeCheck {
            boundary_degree: Some(d),
            consistent: (counted.len() == records.len()).then_some(sum_m as i64 == -d),
        },
        Err(Error::LoopThroughZero(_)) => DegreeCheck { boundary_degree: None, consistent: None },
        Err(e) => return Err(e),
    };

    let (holds, n_used) = match relation {
        Some(r) => {
            let (ok, n) = evaluate_relation(r, &summary, sum_m, counted.len());
            (Some(ok), Some(n))
        }
        None => (None, None),
    };
    let verdict = if !flags.is_empty() {
        Verdict::Degenerate
    } else if holds == Some(true) {
        Verdict::Holds
    } else {
        Verdict::Violated
    };
    let tolerances = ResolvedTolerances {
        newton_tol: cfg.tolerances.newton_tol,
        max_iter: cfg.tolerances.max_iter,
        grad_tol: copts.grad_tol(&sol),
        merge_radius: merge,
        probe_radius: copts.probe_radius(h),
        band_delta: delta,
        root_cluster_tol: ROOT_CLUSTER_TOL,
        boundary_band: BOUNDARY_BAND,
    };
    let record = VerdictRecord {
        scenario: cfg.id.clone(),
        class,
        relation,
        n_local_max: summary.n_local_max,
        n_global_max: summary.n_global_max,
        n_used,
        sum_m,
        q_per_level: levels
            .iter()
            .map(|l| LevelSummary {
                t: l.t,
                q: l.q.unwrap_or(0),
                m1: l.m1,
                m2: l.m2,
                sum_m: l.sum_m,
                identity_holds: l.identity.as_ref().is_some_and(|i| i.holds),
            })
            .collect(),
        verdict,
        flags: flags.into_iter().collect(),
        provenance: Provenance { h, tolerances, oracle_agreement: agreement },
    };
    Ok(ScenarioOutcome {
        config: cfg.clone(),
        verdict: record,
        summary,
        solution: sol,
        records,
        levels,
        oracle,
        degree,
    })
}

/// Runs independent scenarios, preserving order and isolating failures.
pub fn sweep(cfgs: &[ScenarioConfig], parallel: bool) -> Vec<Result<ScenarioOutcome>> {
    if parallel {
        cfgs.par_iter().map(|c| run_scenario(c, false)).collect()
    } else {
        cfgs.iter().map(|c| run_scenario(c, false)).collect()
    }
}

/// Loads every `*.json` config in a directory, sorted by file name.
pub fn load_dir(dir: &Path) -> Result<Vec<(PathBuf, Result<ScenarioConfig>)>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    Ok(paths
        .into_iter()
        .map(|p| {
            let cfg = ScenarioConfig::load(&p);
            (p, cfg)
        })
        .collect())
}

/// Process exit code for a batch: 3 on any execution error, then 1 on any
/// violation, 2 on any degeneracy, 0 when everything holds.
pub fn exit_code<'a>(results: impl IntoIterator<Item = std::result::Result<&'a VerdictRecord, ()>>) -> i32 {
    let mut code = 0;
    for r in results {
        match r {
            Err(()) => return 3,
            Ok(v) => match v.verdict {
                Verdict::Violated => code = 1,
                Verdict::Degenerate if code == 0 => code = 2,
                _ => {}
            },
        }
    }
    code
}

/// Writes `contents` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(".{}.tmp", path.file_name().and_then(|n| n.to_str()).unwrap_or("out")));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Persists the verdict, the detailed report and any requested artifacts under `out/<id>/`.
pub fn write_outputs(outcome: &ScenarioOutcome, out: &Path) -> Result<Vec<PathBuf>> {
    let dir = out.join(&outcome.config.id);
    let mut written = Vec::new();
    let mut put = |name: String, bytes: Vec<u8>| -> Result<()> {
        let p = dir.join(name);
        write_atomic(&p, &bytes)?;
        written.push(p);
        Ok(())
    };
    put("verdict.json".into(), outcome.verdict.to_json()?.into_bytes())?;
    let report = ScenarioReport {
        verdict: &outcome.verdict,
        boundary_extrema: &outcome.summary,
        newton: outcome.solution.newton(),
        critical_points: &outcome.records,
        levels: &outcome.levels,
        degree_check: outcome.degree,
        oracle: outcome.oracle.as_ref(),
    };
    put("report.json".into(), (serde_json::to_string_pretty(&report)? + "\n").into_bytes())?;
    let o = outcome.config.outputs;
    if o.mesh {
        put("mesh.json".into(), serde_json::to_vec(&outcome.solution.mesh().to_export())?)?;
    }
    if o.solution {
        put("solution.json".into(), serde_json::to_vec(&outcome.solution.to_export())?)?;
    }
    if o.oracle {
        if let Some(rep) = &outcome.oracle {
            put("oracle.json".into(), (serde_json::to_string_pretty(rep)? + "\n").into_bytes())?;
        }
    }
    if o.csv {
        put("critical_points.csv".into(), records_to_csv(&outcome.records)?.into_bytes())?;
    }
    if o.svg {
        for (i, l) in outcome.levels.iter().enumerate() {
            put(format!("level_{i}.svg"), level_svg(&outcome.solution, l.t)?.into_bytes())?;
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(cos: Vec<f64>) -> BoundaryExtremaSummary {
        count_extrema(&BoundaryProfile::new(cos, vec![]), None).unwrap()
    }

    fn disk_cfg(id: &str, cos: Vec<f64>, h: f64) -> ScenarioConfig {
        ScenarioConfig {
            id: id.into(),
            domain: DomainGeometry::Disk { radius: 1.0 },
            h,
            coefficient: CoefficientKind::Laplace,
            profile: BoundaryProfile::new(cos, vec![]),
            inner_constant: None,
            tolerances: Tolerances::default(),
            outputs: Outputs::default(),
        }
    }

    #[test]
    fn relation_selection_examples() {
        let disk = ScenarioClass { kind: ScenarioKind::SimplyConnected, h: None };
        assert_eq!(applicable_relation(DomainKind::Disk, &disk, &summary(vec![0.0, 0.0, 0.0, 1.0])), RelationId::Eq1_4);
        assert_eq!(applicable_relation(DomainKind::Disk, &disk, &summary(vec![0.0, 1.0, 0.3])), RelationId::Ineq1_3);
        assert_eq!(applicable_relation(DomainKind::Disk, &disk, &summary(vec![1.0, 1.0])), RelationId::Cor2_5);
        let ge = ScenarioClass { kind: ScenarioKind::AnnulusPsiGeH, h: Some(0.0) };
        assert_eq!(
            applicable_relation(DomainKind::Annulus, &ge, &summary(vec![2.0, 0.0, 1.0])),
            RelationId::Eq1_7Or1_8
        );
        assert_eq!(applicable_relation(DomainKind::Annulus, &ge, &summary(vec![2.0, 1.0])), RelationId::Cor3_6);
        let le = ScenarioClass { kind: ScenarioKind::AnnulusPsiLeH, h: Some(5.0) };
        assert_eq!(applicable_relation(DomainKind::Annulus, &le, &summary(vec![2.0, 0.0, 1.0])), RelationId::Cor3_7);
        let mid = ScenarioClass { kind: ScenarioKind::AnnulusHBetween, h: Some(0.0) };
        assert_eq!(applicable_relation(DomainKind::Annulus, &mid, &summary(vec![0.0, 1.0, 0.3])), RelationId::Ineq1_9);
        assert_eq!(
            applicable_relation(DomainKind::Annulus, &mid, &summary(vec![0.0, 0.0, 1.0])),
            RelationId::Eq1_10Or1_11
        );
    }

    #[test]
    fn relation_evaluation() {
        let s = summary(vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(evaluate_relation(RelationId::Eq1_4, &s, 2, 1), (true, 3));
        assert_eq!(evaluate_relation(RelationId::Eq1_4, &s, 1, 1), (false, 3));
        let s2 = summary(vec![2.0, 0.0, 1.0]);
        assert_eq!(evaluate_relation(RelationId::Eq1_7Or1_8, &s2, 2, 2), (true, 2));
        assert_eq!(evaluate_relation(RelationId::Eq1_7Or1_8, &s2, 1, 1), (true, 2));
        assert_eq!(evaluate_relation(RelationId::Eq1_7Or1_8, &s2, 0, 0), (false, 2));
        let one = summary(vec![2.0, 1.0]);
        assert!(evaluate_relation(RelationId::Cor3_6, &one, 1, 1).0);
        assert!(!evaluate_relation(RelationId::Cor3_6, &one, 2, 1).0);
        assert!(!evaluate_relation(RelationId::Cor2_5, &one, 1, 1).0);
    }

    #[test]
    fn config_round_trip_and_validation() {
        let text = r#"{"id":"a","domain":{"kind":"annulus","inner":1.0,"outer":3.0},"h":0.1,
            "coefficient":"laplace","profile":{"cos":[2.0,0.0,1.0],"sin":[]},"H":0.0}"#;
        let cfg = ScenarioConfig::from_json(text).unwrap();
        assert_eq!(cfg.inner_constant, Some(0.0));
        assert_eq!(cfg.tolerances, Tolerances::default());
        let back = ScenarioConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        let missing_h = text.replace(r#","H":0.0"#, "");
        assert!(matches!(ScenarioConfig::from_json(&missing_h), Err(Error::Config(_))));
        let bad_h = text.replace(r#""h":0.1"#, r#""h":-1"#);
        assert!(matches!(ScenarioConfig::from_json(&bad_h), Err(Error::Config(_))));
    }

    #[test]
    fn cubic_mode_holds() {
        let out = run_scenario(&disk_cfg("cos3", vec![0.0, 0.0, 0.0, 1.0], 0.05), false).unwrap();
        let v = &out.verdict;
        assert_eq!((v.relation, v.sum_m, v.n_global_max, v.verdict), (Some(RelationId::Eq1_4), 2, 3, Verdict::Holds));
        assert!(v.provenance.oracle_agreement.as_ref().unwrap().locations_match);
        assert_eq!(out.degree.consistent, Some(true));
    }

    #[test]
    fn degenerate_class_is_reported() {
        let mut cfg = disk_cfg("touch", vec![1.0, 1.0], 0.1);
        cfg.domain = DomainGeometry::Annulus { inner: 1.0, outer: 2.0 };
        cfg.inner_constant = Some(0.0);
        let out = run_scenario(&cfg, false).unwrap();
        assert_eq!(out.verdict.verdict, Verdict::Degenerate);
        assert!(out.verdict.flags.contains(&DegeneracyFlag::DegenerateClass));
        assert_eq!(out.verdict.relation, None);
    }

    #[test]
    fn sweep_isolates_failures() {
        assert!(sweep(&[], false).is_empty());
        let good = disk_cfg("good", vec![0.0, 0.0, 1.0], 0.1);
        let mut bad = disk_cfg("bad", vec![1.0], 0.1);
        bad.profile = BoundaryProfile::constant(1.0);
        let res = sweep(&[good.clone(), bad, good], true);
        assert_eq!(res.len(), 3);
        assert!(res[0].is_ok() && res[2].is_ok());
        assert!(matches!(&res[1], Err(Error::Scenario { scenario, .. }) if scenario == "bad"));
    }

    #[test]
    fn exit_codes() {
        let v = run_scenario(&disk_cfg("x", vec![0.0, 0.0, 1.0], 0.1), false).unwrap().verdict;
        let mut violated = v.clone();
        violated.verdict = Verdict::Violated;
        let mut degenerate = v.clone();
        degenerate.verdict = Verdict::Degenerate;
        assert_eq!(exit_code([Ok(&v)]), 0);
        assert_eq!(exit_code([Ok(&v), Ok(&degenerate)]), 2);
        assert_eq!(exit_code([Ok(&degenerate), Ok(&violated)]), 1);
        assert_eq!(exit_code([Ok(&v), Err(())]), 3);
    }

    #[test]
    fn outputs_are_written() {
        let dir = std::env::temp_dir().join(format!("critlab-out-{}", std::process::id()));
        let mut cfg = disk_cfg("written", vec![0.0, 0.0, 1.0], 0.1);
        cfg.outputs = Outputs { mesh: true, solution: true, oracle: true, svg: true, csv: true };
        let out = run_scenario(&cfg, false).unwrap();
        let files = write_outputs(&out, &dir).unwrap();
        let names: Vec<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        for n in [
            "verdict.json",
            "report.json",
            "mesh.json",
            "solution.json",
            "oracle.json",
            "critical_points.csv",
            "level_0.svg",
        ] {
            assert!(names.iter().any(|x| x == n), "{n} missing from {names:?}");
        }
        let v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.join("written/verdict.json")).unwrap()).unwrap();
        for key in [
            "scenario",
            "class",
            "relation",
            "N_local_max",
            "N_global_max",
            "sum_m",
            "q_per_level",
            "verdict",
            "flags",
            "provenance",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        fs::remove_dir_all(&dir).unwrap();
    }
}
