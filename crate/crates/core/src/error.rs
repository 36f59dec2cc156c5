use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid manifold descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("resolution {resolution} is too small (need at least {minimum} points per factor)")]
    ResolutionTooSmall { resolution: usize, minimum: usize },
    #[error("diameter cap is not set on this space")]
    DiameterCapUnset,
    #[error("space diameter {diameter} exceeds the cap {cap}")]
    DiameterExceedsCap { diameter: f64, cap: f64 },
    #[error("point index {index} out of range for a space of {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("measure is not normalised: total mass {total}")]
    Unnormalized { total: f64 },
    #[error("measure has {got} entries but the space has {expected} points")]
    LengthMismatch { expected: usize, got: usize },
    #[error("measures live on different spaces")]
    SpaceMismatch,
    #[error("mass {mass} sits on zero-weight cell {index}; the density is undefined")]
    SingularMass { index: usize, mass: f64 },
    #[error("transport problem is infeasible: {0}")]
    Infeasible(String),
    #[error("distortion coefficient is undefined: {0}")]
    IllPosedDistortion(String),
    #[error("counterexample setup rejected: {0}")]
    CounterexampleSetup(String),
    #[error("graph is disconnected ({components} components) at bandwidth {eps}")]
    DisconnectedGraph { components: usize, eps: f64 },
}
