use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("field is only C^{class} but C^{needed} is required")]
    NotDifferentiable { class: u32, needed: u32 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("ray from {origin:?} along {direction:?} leaves the box without crossing the boundary")]
    RayMissesBoundary { origin: Vec<f64>, direction: Vec<f64> },

    #[error("gradient vanishes at {0:?}")]
    DegenerateGradient(Vec<f64>),

    #[error("point {point:?} is not on the boundary (|rho| = {residual:e})")]
    NotOnBoundary { point: Vec<f64>, residual: f64 },

    #[error("no interior point found in the bounding box grid")]
    NoInteriorPoint,

    #[error("multiplier is not positive at {point:?} (value {value})")]
    NonPositiveMultiplier { point: Vec<f64>, value: f64 },

    #[error("direction is not tangent: |grad . w| = {0:e}")]
    NotTangent(f64),

    #[error("not strongly convex at {point:?}: {reason}")]
    NotStronglyConvex { point: Vec<f64>, reason: String },

    #[error("restricted form is non-negative ({0})")]
    NonNegativeForm(f64),

    #[error("no sign pattern found before eps underflowed")]
    Inconclusive,

    #[error("origin is not interior")]
    OriginNotInterior,

    #[error("matrix is singular (|det| = {0:e})")]
    Singular(f64),

    #[error("point {point:?} is not convex, order of contact is undefined")]
    NotConvexPoint { point: Vec<f64> },

    #[error("slope {slope} is not within 0.2 of an integer")]
    IndeterminateOrder { slope: f64, probes: Vec<(f64, f64)> },

    #[error("neighbour {point:?} has order {order} above {bound}")]
    OrderIncreased { point: Vec<f64>, order: u32, bound: u32 },

    #[error("patch point {0:?} is not strongly convex")]
    PatchNotStronglyConvex(Vec<f64>),

    #[error("point {0:?} is outside the domain")]
    OutsideDomain(Vec<f64>),

    #[error("no grid point lies in the domain")]
    EmptyGrid,

    #[error("domain is not convex: segment {a:?} -> {b:?} leaves it at {exit:?}")]
    NotConvex { a: Vec<f64>, b: Vec<f64>, exit: Vec<f64> },

    #[error("no supporting hyperplane at {point:?}; interior sample {violator:?} has L = {value:e}")]
    NoSupportingHyperplane { point: Vec<f64>, violator: Vec<f64>, value: f64 },

    #[error("quadrature too coarse: profile integral off by {0:e}")]
    QuadratureTooCoarse(f64),

    #[error("levels must be strictly increasing")]
    LevelsNotIncreasing,

    #[error("level {level} is near a critical value (|grad| = {gradient:e} at {point:?})")]
    CriticalLevel { level: f64, gradient: f64, point: Vec<f64> },

    #[error("level {0} is below the minimum of the exhaustion")]
    EmptySublevel(f64),

    #[error("infeasible bump data: {reason}")]
    Infeasible { reason: String, sample: Option<f64> },

    #[error("flat point: order of contact exceeds {cutoff}; {detail}")]
    FlatPoint {
        cutoff: u32,
        detail: String,
        witness: Option<(Vec<f64>, Vec<f64>)>,
    },

    #[error("target order {target} exceeds the point order {order}")]
    TargetExceedsOrder { target: u32, order: u32 },

    #[error("convexity check failed: {0}")]
    CheckFailed(String),

    #[error("unknown gallery entry {0:?}")]
    UnknownDomain(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
