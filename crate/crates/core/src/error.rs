use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("point {coords:?} lies outside every chart domain of `{manifold}`")]
    PointOutsideCharts { manifold: String, coords: Vec<f64> },

    #[error("chart {chart} is not part of manifold `{manifold}`")]
    UnknownChart { manifold: String, chart: usize },

    #[error("metric matrix is singular or indefinite at {coords:?}")]
    SingularMetric { coords: Vec<f64> },

    #[error("vector field `{field}` is not defined on chart {chart}")]
    FieldNotDefined { field: String, chart: usize },

    #[error("no transition map from chart {from} to chart {to}")]
    MissingTransition { from: usize, to: usize },

    #[error("mismatched base points: {0}")]
    BasePointMismatch(String),

    #[error("negative argument t = {0} for a metric sextet (defined on t >= 0)")]
    NegativeT(f64),

    #[error("sextet `{name}` is not defined at t = {t} (valid for t >= {t_min})")]
    SextetOutOfRange { name: String, t: f64, t_min: f64 },

    #[error("degenerate sextet `{name}` at t = {t}: alpha = {alpha}, phi = {phi}")]
    DegenerateSextet {
        name: String,
        t: f64,
        alpha: f64,
        phi: f64,
    },

    #[error("invalid preset parameters: {0}")]
    InvalidParameters(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("contact structure requires odd dimension, got {0}")]
    EvenDimension(usize),

    #[error("operation `{op}` is not compatible with manifold `{manifold}`: {reason}")]
    IncompatibleOperation {
        op: String,
        manifold: String,
        reason: String,
    },

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GeometryError>;
