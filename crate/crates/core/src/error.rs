use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("parse error in {what} at position {pos}: {msg}")]
    Parse {
        what: &'static str,
        pos: usize,
        msg: String,
    },

    #[error("{}:{line}: {msg}", path.display())]
    Csv {
        path: PathBuf,
        line: u64,
        msg: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{} record(s) fall outside every zone: {}", points.len(), fmt_points(points))]
    OutsideZones { points: Vec<(f64, f64)> },

    #[error("zones {a} and {b} have coincident centroids (infinite inverse-distance weight)")]
    CoincidentCentroids { a: usize, b: usize },

    #[error("zone {0} has no neighbours; row standardization needs a nonzero row")]
    IsolatedZone(usize),

    #[error("Moran's I is undefined: {0}")]
    UndefinedStatistic(String),

    #[error("kernel matrix is ill-conditioned (Cholesky failed even with diagonal jitter up to {max_jitter:e}); try a larger noise variance or a longer lengthscale")]
    IllConditioned { max_jitter: f64 },

    #[error("fitting failed: {0}")]
    Fit(String),

    #[error("posterior sampling failed: {0}")]
    Sampling(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

fn fmt_points(points: &[(f64, f64)]) -> String {
    let shown: Vec<String> = points
        .iter()
        .take(10)
        .map(|(x, y)| format!("({x}, {y})"))
        .collect();
    let mut s = shown.join(", ");
    if points.len() > 10 {
        s.push_str(", ...");
    }
    s
}

impl Error {
    /// True for errors caused by the caller's inputs (bad config, missing
    /// file, malformed CSV) as opposed to numerical or internal failures.
    pub fn is_user_error(&self) -> bool {
        match self {
            Error::IllConditioned { .. } | Error::Fit(_) | Error::Sampling(_) => false,
            Error::Stage { source, .. } => source.is_user_error(),
            _ => true,
        }
    }

    pub fn in_stage(self, stage: impl Into<String>) -> Error {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
