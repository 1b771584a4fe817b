pub mod cli;
pub mod coalgebra;
pub mod fibonacci;
pub mod fock;
pub mod hopf;
pub mod qubit;
pub mod thermal;
