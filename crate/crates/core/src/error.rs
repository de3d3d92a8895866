use thiserror::Error;

use crate::model::Wall;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("energy {energy} is infeasible at the requested section point (radicand {radicand})")]
    InfeasibleEnergy { energy: f64, radicand: f64 },

    #[error("initial state is not strictly inside the wedge")]
    StartOnWall,

    #[error("state is not on the {wall:?} wall (pattern value {offset})")]
    NotOnWall { wall: Wall, offset: f64 },

    #[error("degenerate collision at t = {t}: {reason}")]
    DegenerateCollision { t: f64, reason: String },

    #[error("more than {limit} collisions before the end time")]
    EventOverflow { limit: usize },

    #[error("relative energy drift {drift:e} exceeded the limit at t = {t}")]
    EnergyDriftExceeded { drift: f64, t: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("particle escaped through a wall at t = {t}")]
    Escaped { t: f64 },

    #[error("found {found} of {wanted} section crossings before t = {t_max}")]
    Timeout {
        found: usize,
        wanted: usize,
        t_max: f64,
    },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("linearization is singular: {0}")]
    SingularLinearization(String),

    #[error("matrix is not symplectic (det = {det})")]
    NotSymplectic { det: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
