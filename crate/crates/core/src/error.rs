use alloc::boxed::Box;
use alloc::string::String;

use crate::lie::GroupElement;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("group spec mismatch: {0}")]
    SpecMismatch(&'static str),

    #[error("element is not invertible")]
    NonInvertible,

    #[error("element outside the logarithm chart (distance {distance:.3e} >= radius {radius:.3e})")]
    OutOfChart { distance: f64, radius: f64 },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid breakpoints: {0}")]
    InvalidBreakpoints(String),

    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0} iteration did not converge")]
    NonConvergent(&'static str),

    #[error("evolution did not converge after {depth} refinements (last difference {difference:.3e})")]
    ConvergenceFailure {
        depth: u32,
        difference: f64,
        previous: Box<GroupElement>,
        last: Box<GroupElement>,
    },

    #[error("path is not in ordered-exponential form on interval {interval} (residual {residual:.3e})")]
    NotOrderedExponential { interval: usize, residual: f64 },

    #[error("orbit map is not differentiable at this vector (finite differences do not settle)")]
    NotDifferentiable,

    #[error("partial bracket undefined: fiber vector is not a C^1-vector")]
    PartialBracketUndefined,

    #[error("instance registers no generator for the derived action")]
    NoGenerator,

    #[error("truncation ladder has {found} levels, need at least {needed}")]
    TooFewLevels { found: usize, needed: usize },

    #[error("curve must start at the identity (offset {offset:.3e})")]
    NotAtIdentity { offset: f64 },

    #[error("adaptive quadrature did not reach tolerance")]
    QuadratureFailure,

    #[error("evaluation point {t} outside window [{start}, {end}]")]
    OutsideWindow { t: f64, start: f64, end: f64 },

    #[error("window too short: need {needed}, have {available}")]
    WindowTooShort { needed: f64, available: f64 },

    #[error("unsupported: {0}")]
    Unsupported(&'static str),

    #[error("instance probe `{check}` failed with residual {residual:.3e}")]
    ProbeFailed { check: &'static str, residual: f64 },
}

impl Error {
    /// Chart escapes and non-convergence, as opposed to caller mistakes.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::OutOfChart { .. }
                | Error::NonConvergent(_)
                | Error::ConvergenceFailure { .. }
                | Error::QuadratureFailure
                | Error::NotDifferentiable
                | Error::PartialBracketUndefined
                | Error::NonInvertible
        )
    }
}
