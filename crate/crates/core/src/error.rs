use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Parameters outside the model's domain (bad `d`, zero right side, ...).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A degree sequence or core graph that cannot exist.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A special function evaluated outside its domain.
    #[error("{function}: argument {value} outside domain ({expected})")]
    Domain {
        function: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("brute-force matcher limited to n, m <= {limit} (got n = {n}, m = {m})")]
    TooLarge { n: usize, m: usize, limit: usize },

    #[error("unknown export format `{0}` (expected csv or json)")]
    UnknownFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
