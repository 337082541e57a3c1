use thiserror::Error;

use crate::Point;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh sizing error: {0}")]
    Sizing(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("empty triangle subset")]
    EmptySubset,
    #[error("triangle subset is not edge-connected")]
    DisconnectedSubset,

    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),
    #[error("DEGENERATE_CLASS: H = {h} is within {tol:e} of the profile range [{z_min}, {z_max}]")]
    DegenerateClass { h: f64, z_min: f64, z_max: f64, tol: f64 },
    #[error("boundary data does not match the domain: {0}")]
    DataMismatch(String),

    #[error("CONVERGENCE_FAILURE after {iterations} Newton iterations (residual history {history:?})")]
    ConvergenceFailure { iterations: usize, history: Vec<f64> },
    #[error("ELLIPTICITY_FAILURE at gradient sample {sample:?}: {detail}")]
    EllipticityFailure { sample: Point, detail: String },
    #[error("discrete maximum principle violated at vertex {vertex}: {value} outside [{lo}, {hi}]")]
    MaximumPrinciple { vertex: usize, value: f64, lo: f64, hi: f64 },
    #[error("sparse factorization failed: {0}")]
    LinearSolve(String),

    #[error("field is constant")]
    ConstantField,
    #[error("point {0:?} lies outside the domain")]
    OutsideDomain(Point),
    #[error("probe loop of radius {radius} around {center:?} leaves the domain")]
    LoopExitsDomain { center: Point, radius: f64 },
    #[error("LOOP_THROUGH_ZERO: gradient vanishes at loop sample {0:?}")]
    LoopThroughZero(Point),

    #[error("level {t} outside the open range ({min}, {max})")]
    LevelOutOfRange { t: f64, min: f64, max: f64 },
    #[error("SPLIT_LEVELS: critical values form {} groups: {groups:?}", groups.len())]
    SplitLevels { groups: Vec<Vec<usize>> },
    #[error("no critical point records supplied")]
    EmptyRecords,

    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("scenario {scenario}: {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
