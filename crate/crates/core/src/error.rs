use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point ({x}, {y}) is not in the half-plane x > 0")]
    InvalidPoint { x: f64, y: f64 },

    #[error("automorphism (c = {c}, d = {d}) is singular: d must be nonzero and finite")]
    SingularAutomorphism { c: f64, d: f64 },

    #[error("invalid system: {0}")]
    InvalidSystem(SystemInvariant),

    #[error("control level {u} outside Ω = [{lo}, {hi}]")]
    ControlOutOfRange { u: f64, lo: f64, hi: f64 },

    #[error("control segment {index}: dwell time {dt} must be positive and finite")]
    InvalidDwell { index: usize, dt: f64 },

    #[error("control segment {index}: level {u} outside Ω = [{lo}, {hi}]")]
    SegmentOutOfRange { index: usize, u: f64, lo: f64, hi: f64 },

    #[error("integration step {0} must be positive and finite")]
    InvalidStep(f64),

    #[error("RK4 produced x = {x} outside (0, ∞) at t = {t}; reduce the step size")]
    LeftHalfPlane { t: f64, x: f64 },

    #[error("ray slope undefined: uα = b (u = {u}, α = {alpha}, b = {b})")]
    SingularRay { u: f64, alpha: f64, b: f64 },

    #[error("operation requires the cone normal form with b < 0")]
    NotConeForm,

    #[error("operation requires {expected}, but the system is in case {case}")]
    WrongCase { expected: &'static str, case: u8 },

    #[error("{0}")]
    Parse(String),
}

/// The invariant a rejected system description violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemInvariant {
    LinearFieldTrivial,
    InvariantFieldTrivial,
    ControlRange,
    NonFinite,
}

impl std::fmt::Display for SystemInvariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let msg = match self {
            SystemInvariant::LinearFieldTrivial => "(a, b) ≠ (0, 0) is violated",
            SystemInvariant::InvariantFieldTrivial => "(α, β) ≠ (0, 0) is violated",
            SystemInvariant::ControlRange => "Ω = [lo, hi] must satisfy lo < 0 < hi",
            SystemInvariant::NonFinite => "all coefficients must be finite",
        };
        f.write_str(msg)
    }
}
