//! Finite coalgebras: labelled transition systems, deterministic colored
//! machines `mu: M -> C x M`, their behaviour streams, homomorphisms,
//! observational equivalence, powerset functors and the vacuum foliation
//! read as a machine.

mod duality;
mod foliation;
pub mod format;
mod functor;
mod lts;
mod machine;

use thiserror::Error;

pub use duality::{alg_coalg_duality_check, bogoliubov_reversal_residual, DualityReport, SquareReading};
pub use foliation::{foliation_as_machine, Foliation, OrderLabel, DEFAULT_LABEL_DIGITS};
pub use functor::{powerset_functor_check, FiniteFunction, FunctorReport, POWERSET_CAP};
pub use lts::Lts;
pub use machine::{
    behaviour, check_homomorphism, observational_equivalence, prefix_homomorphisms, stream_destructor, ColoredMachine,
    Equivalence, HomomorphismReport, PrefixFamily, StreamPrefix,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoalgebraError {
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("state {0} has no outgoing transition")]
    NonTotal(String),
    #[error("state {0} has more than one outgoing transition")]
    Nondeterministic(String),
    #[error("state {0} is declared twice")]
    DuplicateState(String),
    #[error("function is not total: {got} values for a domain of {expected}")]
    NotTotal { got: usize, expected: usize },
    #[error("value {value} at position {position} is outside a codomain of size {codomain}")]
    OutsideCodomain { position: usize, value: usize, codomain: usize },
    #[error("functions do not compose: codomain {left} vs domain {right}")]
    NotComposable { left: usize, right: usize },
    #[error("the empty prefix has no head")]
    EmptyPrefix,
    #[error("set of size {size} exceeds the cap of {cap}")]
    SizeCap { size: usize, cap: usize },
    #[error("grid must increase strictly; violated at index {0}")]
    NonMonotoneGrid(usize),
    #[error("grid must contain at least one point")]
    EmptyGrid,
    #[error("grid value {0} is not a finite non-negative angle")]
    InvalidGridValue(f64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("prefix comparison and partition refinement disagree")]
    DecisionMismatch,
}
