use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate frame: {0}")]
    DegenerateFrame(String),

    #[error("parameter u = {u} outside the interval [{lo}, {hi}]")]
    OutOfInterval { u: f64, lo: f64, hi: f64 },

    #[error("integrator step underflow: {0}")]
    StepUnderflow(String),

    #[error("validity violated at u = {u}: s + r'^2 = {value} (must be > 0)")]
    Validity { u: f64, value: f64 },

    #[error("radius must be positive, got r({u}) = {r}")]
    NonPositiveRadius { u: f64, r: f64 },

    #[error("invalid configuration: {0}")]
    Invalid(String),

    #[error("degenerate normal: triple product norm {0:e}")]
    DegenerateNormal(f64),

    #[error("degenerate metric: det g = {0:e}")]
    DegenerateMetric(f64),

    #[error("complex principal curvatures: {re} ± {im}i")]
    Spectral { re: f64, im: f64 },

    #[error("singular point: closed-form denominator {0:e}")]
    Singular(f64),

    #[error("analytic derivatives unavailable: {0}")]
    AnalyticUnavailable(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),
}
