//! Skew polynomial rings over local rings of integers and finite chain
//! rings, Petit algebras and their natural orders, cyclic codes from right
//! divisors, Construction A lattices, and rank-metric matrix codes.

pub mod error;
pub mod padic;
pub mod residue;

pub use error::{Error, Result};
