pub mod generate;
pub mod model;
pub mod solvers;

pub use model::{evaluate_layout, upper_bound, MallError, MallInstance, MallInstanceFile, MallSolution};
