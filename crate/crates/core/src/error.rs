use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch, left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    DimensionMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("{op}: expected a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("matrix is singular at pivot {pivot}{hint}")]
    Singular { pivot: usize, hint: &'static str },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("class {class} has no samples")]
    EmptyClass { class: usize },

    #[error("sample coincides with prototypes of two classes (d+ = d- = 0)")]
    DegenerateSample,

    #[error("objective returned a non-finite value at iterate {iteration}")]
    NonFiniteObjective { iteration: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub fn shapes(op: &'static str, left: (usize, usize), right: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            op,
            left_rows: left.0,
            left_cols: left.1,
            right_rows: right.0,
            right_cols: right.1,
        }
    }

    pub fn lengths(op: &'static str, left: usize, right: usize) -> Self {
        Error::shapes(op, (1, left), (1, right))
    }
}
