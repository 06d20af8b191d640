//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures reported by field construction, solvers, charts and norm probes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Only dimensions 2 and 3 are supported.
    #[error("unsupported dimension {0}; expected 2 or 3")]
    Dimension(usize),

    /// A coefficient vector does not match the declared degree cut-off.
    #[error("coefficient length {got} does not match {expected} modes")]
    CoefficientLength { expected: usize, got: usize },

    /// Two operands live on incompatible discretizations.
    #[error("incompatible operands: {0}")]
    Mismatch(String),

    /// A NaN or infinite value was supplied.
    #[error("non-finite input in {0}")]
    NonFinite(&'static str),

    /// The angular or radial grid cannot represent the requested degree.
    #[error("insufficient resolution: {0}")]
    Resolution(String),

    /// The shape violates the well-posedness margin.
    #[error("shape too large: well-posedness margin {margin:.3e} is not positive")]
    ShapeTooLarge { margin: f64 },

    /// A denominator of the boundary assembly vanished on the grid.
    #[error("degenerate geometry: {0}")]
    GeometryDegenerate(String),

    /// A fixed-point or series iteration failed to converge.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    /// A dense linear system could not be factored.
    #[error("singular system: {0}")]
    Singular(String),

    /// A point lies outside the domain of a chart map.
    #[error("outside chart domain: {0}")]
    Domain(String),

    /// The two charts of a transition do not overlap.
    #[error("charts {0} and {1} are disjoint")]
    DisjointCharts(usize, usize),

    /// A sampled function does not vanish near the edge of its periodic box.
    #[error("support leaks to the box boundary (edge magnitude {0:.3e})")]
    BoxTooSmall(f64),

    /// An oracle could not reach its requested accuracy.
    #[error("oracle refinement failed: {0}")]
    Refinement(String),

    /// Invalid parameters passed to an operation.
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
