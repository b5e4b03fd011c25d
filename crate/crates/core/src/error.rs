use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid tube law exponents m = {m}, n = {n} (need m > 0 and -2 < n <= 0)")]
    InvalidTubeLaw { m: f64, n: f64 },

    #[error("non-positive cross-sectional area {area:e}")]
    NonPositiveArea { area: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no steady profile: {0}")]
    NoSteadyProfile(String),

    #[error("steady slope is singular at a critical point (x = {x})")]
    CriticalSingularity { x: f64 },

    #[error("newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonFailed { iterations: usize, residual: f64 },

    #[error("mesh: {0}")]
    Mesh(String),

    #[error("positivity lost in cell {cell} (A = {area:e}) at t = {time}")]
    PositivityLoss { cell: usize, area: f64, time: f64 },

    #[error("junction {node}: {reason}")]
    Junction { node: String, reason: String },

    #[error("network: {0}")]
    Network(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
