//! Hard-wall impact flows and their steep-potential regularisation for the
//! symmetric wedge model of a collinear triatomic reaction.
//!
//! The hard-wall (`epsilon = 0`) system is propagated event by event with the
//! closed-form saddle-center flow; the smooth system with an adaptive
//! eighth-order Runge–Kutta integrator. Period-2 orbits, their monodromy
//! matrices and Hill's regions are computed for both and compared.

pub mod compare;
pub mod conditions;
pub mod continuation;
pub mod error;
pub mod hill;
pub mod impact;
pub mod io;
pub mod jacobi;
pub mod model;
pub mod orbit;
pub mod par;
mod roots;
pub mod smooth;

pub use conditions::{check_conditions, EnergyBudget, Rect};
pub use error::{Error, Result};
pub use jacobi::{jacobi_transform, JacobiSetup};
pub use model::{PhaseState, Wall, WedgeModel};
