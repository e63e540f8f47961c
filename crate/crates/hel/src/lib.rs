//! Higher additive energies and convolution operators on finite abelian groups.
//!
//! The crate computes exact energies `E_k`, `T_k` and their relatives, builds the
//! convolution operators `T^g_{A,B}` and their symmetric versions, diagonalises them
//! with a deterministic Jacobi solver, and checks identities and inequalities
//! between these quantities on generated families of sets.

pub mod convolution;
pub mod dual;
pub mod energy;
pub mod error;
pub mod generators;
pub mod group;
pub mod harness;
pub mod identities;
pub mod linalg;
pub mod relation;
pub mod spectral;
pub mod structure;

pub use error::{Error, Result};
pub use group::{FiniteSet, Group, GroupDescriptor, GroupElement, GroupFunction, GroupRef};
