//! Numerical laboratory for critical points of solutions to planar
//! quasilinear elliptic Dirichlet problems.
//!
//! The pipeline runs mesh → Newton/Galerkin solve → critical point detection
//! with winding-number multiplicities → level-set topology → counting-relation
//! verdicts. For the Laplace family a closed-form harmonic oracle on disks and
//! annuli provides independent ground truth.

pub mod critical;
pub mod error;
pub mod harness;
pub mod levelset;
pub mod mesh;
pub mod oracle;
pub mod poly;
pub mod profile;
pub mod solver;
pub mod unionfind;

/// Planar point or vector.
pub type Point = [f64; 2];

pub use critical::{
    boundary_degree, detect_critical_points, pl_saddles, records_to_csv, sign_change_count, winding_multiplicity,
    CriticalOptions, CriticalPointRecord, PointFlag, Winding,
};
pub use error::{Error, Result};
pub use harness::{
    applicable_relation, evaluate_relation, exit_code, load_dir, run_scenario, sweep, write_atomic, write_outputs,
    CoefficientKind, DegeneracyFlag, DomainSpec, LevelSummary, OracleAgreement, Outputs, Overrides, RelationId,
    ScenarioConfig, ScenarioOutcome, Tolerances, Verdict, VerdictRecord,
};
pub use levelset::{
    analyze_critical_level, analyze_level, annulus_component_diagnostics, check_annulus_case1, check_counting_identity,
    critical_clusters, default_delta, level_groups, level_svg, sublevel_components, superlevel_components, Component,
    ComponentSet, IdentityKind, LevelSetReport, Side,
};
pub use mesh::{build_annulus_mesh, build_disk_mesh, DomainGeometry, DomainKind, LoopTag, MeshedDomain};
pub use oracle::{
    annulus_harmonic, disk_harmonic, eval_harmonic, oracle_boundary_degree, oracle_critical_points,
    HarmonicRepresentation, OracleReport, OracleRoot, RootLocation,
};
pub use profile::{
    classify_scenario, count_extrema, BoundaryExtremaSummary, BoundaryProfile, ScenarioClass, ScenarioKind,
};
pub use solver::{
    ellipticity_check, residual_norm, solve, CoefficientField, DirichletData, DiscreteSolution, Flux, NewtonOptions,
    NewtonReport, SolutionExport,
};
