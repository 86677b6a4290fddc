//! Residue-class distribution of power permutations `f(x) = A x^k mod p`.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod families;
pub mod modnum;
pub mod ratrep;
pub mod reference;
pub mod residue;
pub mod search;
pub mod suites;

pub use error::{Error, Result};
