//! Exact combinatorics and algebra for distributional symmetries: set
//! partitions, moment–cumulant transforms for classical, free and boolean
//! independence, invariance under permutation-type groups and bounded-degree
//! certificates in finitely presented *-algebras.

pub mod algebra;
pub mod cumulants;
pub mod error;
pub mod independence;
pub mod matrix;
pub mod partitions;
pub mod rational;
pub mod symmetry;

pub use error::{Error, Result};
pub use rational::Rational;
