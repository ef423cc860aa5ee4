//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]. Variants carry enough context
//! to point at the offending vertex, line, or level without holding references
//! into the structures that produced them.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A vertex is not part of the network (or not part of the model's vertex set).
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    /// An operation needed a value outside the window of a supplied potential.
    #[error("window too small: {context} needs a value at `{vertex}`")]
    WindowTooSmall { vertex: String, context: &'static str },

    /// An edge window is not contained in the windows of both potentials.
    #[error("window mismatch: {0}")]
    WindowMismatch(String),

    /// A parameter is outside its documented range.
    #[error("bad parameter: {0}")]
    BadParam(String),

    /// Network file rejected; `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A finite network must be connected; counts vertices unreachable from the origin.
    #[error("network is disconnected: {0} vertices unreachable from the origin")]
    Disconnected(usize),

    /// A truncation contains no edges even though the network extends further.
    #[error("empty ball at radius {0}")]
    EmptyBall(u32),

    /// Normal derivatives are only defined on the boundary of a truncation.
    #[error("`{0}` is not a boundary vertex of this truncation")]
    NotBoundaryVertex(String),

    /// A limit failed the three-consecutive-deltas rule by the last level.
    #[error("not converged after {levels} levels (last delta {last_delta:e}, tol {tol:e})")]
    NotConverged {
        levels: u32,
        last_delta: f64,
        tol: f64,
    },

    /// The reduced linear system has no unique solution.
    #[error("linear system is singular: {0}")]
    Singular(String),

    /// The iterative solver stopped short of its residual target.
    #[error("linear solve failed: {0}")]
    SolveFailed(String),

    /// A charge vector pinned at the ground must balance to zero.
    #[error("charge imbalance: pinned ground absorbs nothing but charges sum to {0:e}")]
    ChargeImbalance(f64),

    /// Two roles that must differ named the same vertex.
    #[error("same vertex given for {0}")]
    SameVertex(String),

    /// A function required to be harmonic has a nonzero Laplacian on the checked window.
    #[error("function is not harmonic at `{vertex}` (laplacian {value:e})")]
    NotHarmonic { vertex: String, value: f64 },

    /// The Gaussian covariance has an eigenvalue too negative to repair.
    #[error("gram matrix is not positive semidefinite (eigenvalue {0:e})")]
    GramNotPsd(f64),

    /// Monte Carlo operations need at least one sample.
    #[error("no samples requested")]
    MissingSamples,

    /// A claimed path to infinity has a non-adjacent step.
    #[error("not a path: step {index} (`{from}` -> `{to}`) is not an edge")]
    NotAPath {
        index: usize,
        from: String,
        to: String,
    },

    /// A boundary comparison could neither match nor separate by the inspected depth.
    #[error("depth exhausted: {0}")]
    DepthExhausted(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
