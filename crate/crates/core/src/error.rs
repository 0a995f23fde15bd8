use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    #[error("the zero vector has no gradient")]
    ZeroVector,
    #[error("dimension {0} is not supported (only 2 and 3)")]
    UnsupportedDimension(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("media are not nested: sup N2 on S1 = {sup}, inf N2 on S1 = {inf}")]
    RegimeViolation { sup: f64, inf: f64 },
    #[error("no refracted direction exists for this incidence")]
    NoRefraction,
    #[error("refracted direction violates the physical constraint (m.nu = {0})")]
    ConstraintViolation(f64),
    #[error("no convergence after {iterations} iterations")]
    ConvergenceFailure { iterations: usize },
    #[error("direction is outside the domain of the surface")]
    OutOfDomain,
    #[error("no convergence after {sweeps} sweeps (residual {residual})")]
    NonConvergence { sweeps: usize, residual: f64 },
    #[error("target {target} is not admissible for node {node} (value {value})")]
    InfeasibleTarget { node: usize, target: usize, value: f64 },
    #[error("permeability is not proportional to permittivity (relative deviation {0})")]
    NotProportional(f64),
    #[error("sheet equation has no real roots (discriminant {0})")]
    NonrealRoots(f64),
    #[error("transport problem is infeasible on the admissible arcs")]
    Infeasible,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
