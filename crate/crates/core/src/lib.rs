//! Multiple quantum hypothesis testing on finite-dimensional systems.
//!
//! Layers, bottom to top: [`operator`] (Hermitian and density operators),
//! [`states`] (i.i.d., Markov and explicit state models), [`binary`]
//! (Chernoff quantities and Helstrom tests), [`multi`] (pairwise voting
//! tests) and [`experiments`] (sweeps, fits and CSV output).

pub mod binary;
pub mod error;
pub mod experiments;
pub mod multi;
pub mod operator;
pub mod states;

pub use error::{Error, Result};
pub use operator::{ComplexMatrix, DensityMatrix, HermitianOperator, Projector};
pub use states::{ClassicalMarkovModel, HypothesisSet, StateModel};
