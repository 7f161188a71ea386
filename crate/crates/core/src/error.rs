//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("quadrature order must be at least 2, got {0}")]
    InvalidOrder(usize),
    #[error("mollifier width must be positive, got {0}")]
    InvalidWidth(f64),
    #[error("extrapolation needs at least 3 monotonically decreasing parameters")]
    InvalidSequence,
    #[error("homogeneity degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: i32, got: i32 },
    #[error("decomposition requires a charge-free field, got l·V = {0}")]
    ChargedField(f64),
    #[error("scattering event violates charge conservation: in {incoming}, out {outgoing}")]
    InconsistentEvent { incoming: f64, outgoing: f64 },
    #[error("particle four-velocity must be a future unit timelike vector")]
    InvalidVelocity,
    #[error("inconsistent inputs: {0}")]
    InconsistentInput(String),
    #[error("argument outside domain: {0}")]
    OutOfDomain(String),
    #[error("limit sequence did not converge (error estimate {estimate}, threshold {threshold})")]
    Divergent { estimate: f64, threshold: f64 },
    #[error("frequency grid must cover ω = 0")]
    InvalidGrid,
    #[error("scalar product diverges for infrared singular profiles; use a cutoff scan")]
    IrDivergence,
    #[error("mode basis too small: projection error {0}")]
    BasisTooSmall(f64),
    #[error("charge Q = {q} is not an integer multiple of e = {e}")]
    QuantizationViolation { q: f64, e: f64 },
    #[error("ℓ=0 component of remainder {0} exceeds tolerance; charge inconsistent")]
    InconsistentCharge(f64),
    #[error("coupling must be positive, got {0}")]
    InvalidCoupling(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
