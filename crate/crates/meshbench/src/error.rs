//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong while loading data, synthesizing
/// transforms, detecting, describing, or evaluating.
#[derive(Debug, Error)]
pub enum Error {
    /// Filesystem error tagged with the offending path.
    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input file (mesh, correspondence, manifest, features, ...).
    #[error("parse error in {what} (line {line}): {msg}")]
    Parse {
        what: &'static str,
        line: usize,
        msg: String,
    },

    /// A mesh that parsed but violates structural requirements.
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    /// Bad arguments to an operation (out-of-range parameters, missing
    /// scales, mismatched sizes, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Correspondence data inconsistent with the meshes it refers to.
    #[error("correspondence error: {0}")]
    Correspondence(String),

    /// The eigensolver did not reach the requested accuracy.
    #[error(
        "eigensolver did not converge: {converged}/{requested} pairs after {iterations} iterations \
         (worst residual {worst_residual:.3e})"
    )]
    SolverDiverged {
        requested: usize,
        converged: usize,
        iterations: usize,
        worst_residual: f64,
    },

    /// Edge-collapse simplification ran out of valid collapses.
    #[error("decimation stalled at {achieved} vertices (target {target})")]
    DecimationStalled { achieved: usize, target: usize },

    /// A synthesized transform could not be applied to this mesh.
    #[error("transform failed: {0}")]
    TransformFailed(String),

    /// An evaluation had nothing to evaluate (e.g. no features carry
    /// groundtruth).
    #[error("empty evaluable set: {0}")]
    EmptyEvaluableSet(String),

    /// ROC populations degenerate (no positives or no negatives).
    #[error("degenerate population: {0}")]
    DegeneratePopulation(String),

    /// Descriptor quality had no accepted matches within the geodesic radius.
    #[error("no accepted matches within the acceptance radius")]
    NoMatches,
}

impl Error {
    /// Convenience constructor for [`Error::Io`].
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
