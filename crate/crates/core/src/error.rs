use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("polygon is not convex (reflex turn at vertex {vertex})")]
    NotConvex { vertex: usize },

    #[error("support body is not C2+: h + h'' = {rho:e} at theta = {theta}")]
    NotC2Plus { theta: f64, rho: f64 },

    #[error("invalid support body: {0}")]
    InvalidSupportBody(String),

    #[error("invalid disk radius {0}")]
    InvalidDisk(f64),

    #[error("a polygon has no smooth boundary point or curvature")]
    PolygonNotSmooth,

    #[error("degenerate segment: endpoints coincide")]
    DegenerateSegment,

    #[error("degenerate zonogon: all generators are parallel")]
    DegenerateZonogon,

    #[error("invalid cross-covariogram family parameters: {0}")]
    InvalidFamilyParams(String),

    #[error("curvature fit failed: {0}")]
    FitFailed(String),

    #[error("|Im zeta| = {im} exceeds the precision cap {cap}")]
    PrecisionLoss { im: f64, cap: f64 },

    #[error("|Re zeta| = {re} exceeds the resolved band {band} of this context")]
    OutOfBand { re: f64, band: f64 },

    #[error("Newton iteration for branch m = {m} did not converge in {iterations} steps")]
    NewtonDiverged { m: u32, iterations: usize },

    #[error("argument-principle validation failed for branch m = {m}: winding {winding}")]
    ValidationFailed { m: u32, winding: f64 },

    #[error("branch (m = {m}, theta = {theta}): {source}")]
    Branch {
        m: u32,
        theta: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("zero of the covariogram transform at {re} + {im}i matches no branch")]
    UnmatchedZero { re: f64, im: f64 },

    #[error("paraboloid cap is empty: 2t - <Qq,q> = {0} < 0")]
    InvalidCap(f64),

    #[error("matrix is not symmetric positive definite")]
    NotSpd,

    #[error("experiment inconclusive: {0}")]
    Inconclusive(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `line` is 0 when the parser could not attribute the error to a position.
    #[error("malformed JSON{}: {message}", json_position(*line, *column))]
    Json {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn json_position(line: usize, column: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!(" at line {line}, column {column}")
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        let (line, column) = (e.line(), e.column());
        let full = e.to_string();
        let suffix = format!(" at line {line} column {column}");
        Error::Json {
            line,
            column,
            message: full.strip_suffix(&suffix).unwrap_or(&full).to_string(),
        }
    }
}
