use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index} out of range 0..{len}")]
    Index { index: usize, len: usize },

    #[error("segment {segment} (symbol offset {offset}), sample {sample}: sampling time {time:e} s outside [0, {t_total:e})")]
    Construction {
        segment: usize,
        offset: i64,
        sample: usize,
        time: f64,
        t_total: f64,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("no symbol supplied for aggressor offset {0}")]
    MissingSymbol(i64),

    #[error("invalid channel model: {0}")]
    InvalidModel(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("draw {draw}: {source}")]
    Campaign {
        draw: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
