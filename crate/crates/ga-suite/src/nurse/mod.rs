//! Nurse rostering: problem model and the direct and indirect solvers.

pub mod cost;
pub mod direct;
pub mod eval;
pub mod generate;
pub mod indirect;
pub mod model;
pub mod smoothing;

pub use eval::{classify_balance, evaluate, Balance, CoverState, Extensions};
pub use model::{NurseError, NurseInstance, NurseInstanceFile, NurseSpec, ShiftPattern};
