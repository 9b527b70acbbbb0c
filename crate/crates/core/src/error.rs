use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("degenerate margin in column {column}: all values identical")]
    DegenerateMargin { column: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("invalid R-vine matrix: {0}")]
    Structure(String),

    #[error("cell ({row},{col}): {source}")]
    Cell {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("edge {edge}: {msg}")]
    Fit { edge: String, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures caused by the input data rather than the numerics.
    pub fn is_data_error(&self) -> bool {
        match self {
            Error::Parse { .. }
            | Error::Shape(_)
            | Error::DegenerateMargin { .. }
            | Error::Domain(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_)
            | Error::Structure(_) => true,
            Error::Cell { source, .. } => source.is_data_error(),
            _ => false,
        }
    }

    pub(crate) fn at_cell(self, row: usize, col: usize) -> Error {
        Error::Cell {
            row,
            col,
            source: Box::new(self),
        }
    }
}
