//! Finite-condition forcing: dense sets over products of word-valued
//! conditions, generic builders, and the decision constructions for oracle
//! functionals.

pub mod audit;
pub mod dense;
pub mod functional;
pub mod layout;

use thiserror::Error;

pub use dense::{absorb, avoid_dense, build_generic, jump_decision_dense, mutual_generic, DenseSet, GenericFamily};
pub use functional::{
    eval_functional, exists_halting_extension, random_functional, Evaluation, Node, OracleFunctional, PartialOracle,
};
pub use layout::{Component, CompositeOracle, OracleLayout};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ForcingError {
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),
    #[error("functional queries position {position} twice on one path")]
    RepeatedQuery { position: u64 },
    #[error("absorption clash at column {column}, position {position}")]
    AbsorptionClash { column: u64, position: u64 },
    #[error("coordinate {coord} holds the empty word at index {index}")]
    EmptyWord { coord: usize, index: u64 },
    #[error("cannot meet {0}")]
    NotDense(String),
    #[error("meet of {0} did not extend its input")]
    NotAnExtension(String),
    #[error("expected a {expected}-tuple of conditions, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("{columns} undecided columns exceed the completion budget")]
    TooManyCompletions { columns: usize },
}
