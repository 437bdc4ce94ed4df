//! Error type shared across the crate.
//!
//! Variants are grouped by how the CLI maps them to exit codes: argument
//! misuse (1), data problems (2), numerical failures (3).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A named column is absent from the input file.
    #[error("missing column `{0}`")]
    MissingColumn(String),

    /// A cell could not be parsed as a number.
    #[error("non-numeric cell in column `{column}` on line {line}: {value:?}")]
    NonNumericCell {
        column: String,
        line: usize,
        value: String,
    },

    /// Input data violated a model requirement (e.g. labels outside {0,1}).
    #[error("data error: {0}")]
    Data(String),

    /// The expansion basis is numerically singular for the chosen weights.
    #[error("singular basis: condition estimate {cond:.3e} exceeds 1e12")]
    SingularBasis { cond: f64 },

    /// The activation has vanishing derivatives at the chosen expansion point.
    #[error("activation derivative orders {orders:?} vanish at u_sigma = {u_sigma}")]
    InvalidExpansionPoint { u_sigma: f64, orders: Vec<u32> },

    /// No usable observations were available for a fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A numerical routine failed to produce a usable result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the CLI: 1 usage, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) => 1,
            Error::MissingColumn(_)
            | Error::NonNumericCell { .. }
            | Error::Data(_)
            | Error::InsufficientData(_)
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => 2,
            Error::SingularBasis { .. }
            | Error::InvalidExpansionPoint { .. }
            | Error::Numerical(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
