use thiserror::Error;

use crate::expr::EvalError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid strip: lower {lower} must be strictly below upper {upper}")]
    InvalidStrip { lower: String, upper: String },

    #[error("empty common strip: max lower {lower} >= min upper {upper}")]
    EmptyStrip { lower: String, upper: String },

    #[error("evaluation failed at abscissa t = {abscissa}: {source}")]
    EvalAt { abscissa: f64, source: EvalError },

    #[error("evaluation failed at z = {re}{im:+}i: {source}")]
    EvalAtPoint { re: f64, im: f64, source: EvalError },

    #[error("point z = {re}{im:+}i lies on the integration line; use plemelj_boundary")]
    OnLine { re: f64, im: f64 },

    #[error("abscissa {0} is outside the open grid interval")]
    OutsideGrid(f64),

    #[error("point z = {re}{im:+}i is outside the half-plane of analyticity (boundary Im z = {boundary})")]
    OutsideHalfPlane { re: f64, im: f64, boundary: f64 },

    #[error("mismatched grids: {0}")]
    GridMismatch(String),

    #[error("kernel vanishes on line (min |K| = {min_abs:e} at t = {abscissa})")]
    KernelVanishes { min_abs: f64, abscissa: f64 },

    #[error("index not integral, insufficient resolution (winding {winding}, residual {residual})")]
    NonIntegralIndex { winding: f64, residual: f64 },

    #[error("kernel has index {0}; apply normalize_index before factoring")]
    NonZeroIndex(i64),

    #[error("kernel vanishes inside strip (index {lower_index} on lower line, {upper_index} on upper line)")]
    IndexMismatch { lower_index: i64, upper_index: i64 },

    #[error("kernel limit != 1 at infinity (estimated limits {left} and {right})")]
    KernelLimit { left: String, right: String },

    #[error("cross-line mismatch: discrepancy {discrepancy:e} exceeds tolerance {tolerance:e}")]
    CrossLine { discrepancy: f64, tolerance: f64 },

    #[error("factorizations inequivalent: ratio coefficient of variation {cv:e}")]
    Inequivalent { cv: f64 },

    #[error("evaluation at listed pole z = {re}{im:+}i")]
    AtPole { re: f64, im: f64 },

    #[error("undetermined polynomial coefficients (growth degree {0}); supply auxiliary conditions")]
    GrowthDegree(u32),

    #[error("{0}")]
    Io(String),

    #[error("parse error: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
