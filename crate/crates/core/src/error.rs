use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures raised by the numerical routines.
///
/// Variants are split along the line the CLI cares about: [`Error::is_degeneracy`]
/// separates genuine numerical degeneracies from invalid arguments.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(
        "vectors are (nearly) linearly dependent: gram determinant {gram:e} below {threshold:e}"
    )]
    DegenerateFrame { gram: f64, threshold: f64 },

    #[error("direction vector has norm {norm:e}, too small to define a frame")]
    ZeroDirection { norm: f64 },

    #[error("matrix is too far from SO(3) to renormalize: |R^T R - I|_F = {deviation:e}")]
    NotNearRotation { deviation: f64 },

    #[error(
        "conservation drift {drift:e} of the acceleration norm exceeds {limit:e}; reduce the step"
    )]
    StepTooLarge { drift: f64, limit: f64 },

    #[error("B vanishes (beta = 0); the closed-form cubic approximant is undefined")]
    DegenerateB,

    #[error("third derivative of the Lie quadratic nearly vanishes at t = {t}: |V'''| = {norm:e}")]
    DegenerateThirdDerivative { t: f64, norm: f64 },

    #[error("acceleration norm c = {c:e} is too small for quadrature reconstruction")]
    DegenerateAcceleration { c: f64 },

    #[error("invalid interval [{t0}, {t1}]")]
    InvalidInterval { t0: f64, t1: f64 },

    #[error("invalid step {step} for interval of length {length}")]
    InvalidStep { step: f64, length: f64 },

    #[error("invalid perturbation scale delta = {0}")]
    InvalidDelta(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("time {t} lies outside [{t0}, {t1}]")]
    OutOfRange { t: f64, t0: f64, t1: f64 },
}

impl Error {
    /// True for errors caused by degenerate geometry or unstable numerics rather
    /// than malformed input.
    pub fn is_degeneracy(&self) -> bool {
        matches!(
            self,
            Error::DegenerateFrame { .. }
                | Error::ZeroDirection { .. }
                | Error::NotNearRotation { .. }
                | Error::StepTooLarge { .. }
                | Error::DegenerateB
                | Error::DegenerateThirdDerivative { .. }
                | Error::DegenerateAcceleration { .. }
        )
    }
}
