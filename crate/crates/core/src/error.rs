//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by model validation, the schemes and the analysis layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A drift/noise matrix fails the exact skew-symmetry check `a_ij = -a_ji`.
    #[error("matrix A{index} is not skew-symmetric: entry ({i},{j}) = {value}, ({j},{i}) = {mirrored}")]
    NonSkewMatrix {
        index: usize,
        i: usize,
        j: usize,
        value: f64,
        mirrored: f64,
    },

    /// The initial point must lie strictly inside the unit ball.
    #[error("initial point lies on or outside the unit sphere: |x0| = {norm}")]
    InitialPointOnBoundary { norm: f64 },

    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositiveParam { name: &'static str, value: f64 },

    #[error("`{name}` = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("matrix is not square: {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("point outside the unit ball: |x| = {norm}")]
    OutsideBall { norm: f64 },

    #[error("time grid needs at least one step, got n = {n}")]
    EmptyGrid { n: usize },

    /// Coarsening factor must divide the step count, and reference grids must
    /// be common multiples of every coarse grid.
    #[error("refinement factor {r} does not divide step count {n}")]
    IndivisibleRefinement { n: usize, r: usize },

    /// Brownian path and model disagree on horizon or noise dimensions.
    #[error("Brownian path does not match the model: {0}")]
    PathMismatch(String),

    /// A parameter regime assumption required by an operation is violated.
    #[error("regime violation: {0}")]
    RegimeViolation(String),

    #[error("moment degree {degree} exceeds generator truncation {truncation}")]
    DegreeExceeded { degree: usize, truncation: usize },

    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
