//! Genetic algorithms for two multiple-choice covering problems: weekly nurse
//! rostering and mall tenant selection.
//!
//! Both problems are solved with a direct encoding (the solution itself is the
//! genome) and an indirect one (a permutation fed to a greedy decoder).

pub mod ga;
pub mod harness;
pub mod mall;
pub mod nurse;
pub mod operators;
pub mod penalty;
